"""Differentiable RMSE / Pearson / concordance loss terms.

Formulas use population moments and the covariance form of the concordance
coefficient, matching the evaluation toolkit's definitions so the two sides
agree to float precision on the same inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch


@dataclass(frozen=True)
class LossWeights:
    rmse: float = 1.0
    pcc: float = 1.0
    ccc: float = 1.0


def rmse(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    return torch.sqrt(torch.mean((pred - target) ** 2))


def pearson(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor | None:
    """Population-moment Pearson r; None when either side has zero variance."""
    sx = torch.std(pred, correction=0)
    sy = torch.std(target, correction=0)
    if sx.item() == 0.0 or sy.item() == 0.0:
        return None
    cov = torch.mean((pred - pred.mean()) * (target - target.mean()))
    return cov / (sx * sy)


def concordance(pred: torch.Tensor, target: torch.Tensor, degenerate_eps: float = 1e-15) -> torch.Tensor:
    """Covariance-form concordance; 1 for identical constants."""
    mx, my = pred.mean(), target.mean()
    vx = torch.var(pred, correction=0)
    vy = torch.var(target, correction=0)
    cov = torch.mean((pred - mx) * (target - my))
    denom = vx + vy + (mx - my) ** 2
    if denom.item() < degenerate_eps:
        return torch.ones((), dtype=pred.dtype, device=pred.device)
    return 2.0 * cov / denom


def combined_loss(pred: torch.Tensor, target: torch.Tensor, weights: LossWeights = LossWeights()) -> torch.Tensor:
    """Mean over output dimensions of w_r*RMSE + w_p*(1-PCC) + w_c*(1-CCC).

    ``pred`` and ``target`` are (N, 2) with columns (arousal, valence). An
    undefined Pearson term (a constant series) contributes 1, treating the
    prediction as uncorrelated.
    """
    if pred.shape != target.shape or pred.ndim != 2:
        raise ValueError(f"expected matching (N, D) tensors, got {tuple(pred.shape)} vs {tuple(target.shape)}")
    terms = []
    for d in range(pred.shape[1]):
        x, y = pred[:, d], target[:, d]
        term = weights.rmse * rmse(x, y)
        r = pearson(x, y)
        if r is None:
            term = term + weights.pcc * torch.ones((), dtype=pred.dtype, device=pred.device)
        else:
            term = term + weights.pcc * (1.0 - r)
        term = term + weights.ccc * (1.0 - concordance(x, y))
        terms.append(term)
    return torch.stack(terms).mean()
