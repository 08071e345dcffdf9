"""Agreement metrics (RMSE, Pearson r, Lin's concordance) and file evaluation.

All moments are population moments (ddof=0). The concordance coefficient is
computed in covariance form, 2*cov(x,y) / (var_x + var_y + (mean_x-mean_y)^2),
which is algebraically identical to the usual 2*sd_x*sd_y*r form but stays
defined when one series is constant.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Dataset

CCC_DEGENERATE_EPS = 1e-15

PREDICTION_HEADER = ["video_id", "window_start", "arousal_pred", "valence_pred"]


class UndefinedCorrelationError(ValueError):
    """Pearson correlation is undefined because a series has zero variance."""


def _check_pair(x, y, min_len: int = 1) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if len(x) != len(y):
        raise ValueError(f"series length mismatch: {len(x)} vs {len(y)}")
    if len(x) < min_len:
        raise ValueError(f"series too short: need at least {min_len} values, got {len(x)}")
    return x, y


def rmse(x, y) -> float:
    """Root mean squared error between prediction x and truth y."""
    x, y = _check_pair(x, y, min_len=1)
    return float(np.sqrt(np.mean((x - y) ** 2)))


def pcc(x, y) -> float:
    """Pearson product-moment correlation (population moments).

    Raises UndefinedCorrelationError when either series has zero variance.
    """
    x, y = _check_pair(x, y, min_len=2)
    sx = float(np.std(x))
    sy = float(np.std(y))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("correlation undefined: a series has zero variance")
    cov = float(np.mean((x - x.mean()) * (y - y.mean())))
    return cov / (sx * sy)


def ccc(x, y) -> float:
    """Lin's concordance correlation coefficient, covariance form.

    Returns 1.0 when both series are identical constants (denominator below
    1e-15); otherwise defined even when one series is constant.
    """
    x, y = _check_pair(x, y, min_len=2)
    mx = float(np.mean(x))
    my = float(np.mean(y))
    vx = float(np.var(x))
    vy = float(np.var(y))
    cov = float(np.mean((x - mx) * (y - my)))
    denom = vx + vy + (mx - my) ** 2
    if denom < CCC_DEGENERATE_EPS:
        return 1.0
    return 2.0 * cov / denom


@dataclass(frozen=True)
class LossWeights:
    """Mixture weights for the combined RMSE / (1-PCC) / (1-CCC) loss."""

    rmse: float = 1.0
    pcc: float = 1.0
    ccc: float = 1.0

    def __post_init__(self):
        if self.rmse < 0 or self.pcc < 0 or self.ccc < 0:
            raise ValueError("loss weights must be non-negative")
        if self.rmse == 0 and self.pcc == 0 and self.ccc == 0:
            raise ValueError("at least one loss weight must be positive")


def combined_loss(pairs, weights: LossWeights = LossWeights()) -> float:
    """Mean over dimensions of rmse*w + (1-pcc)*w + (1-ccc)*w.

    ``pairs`` is a sequence of (prediction, truth) series, one per output
    dimension (arousal, valence). An undefined Pearson correlation (constant
    series) contributes 1 to its term, treating it as zero correlation.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("combined_loss requires at least one dimension")
    total = 0.0
    for x, y in pairs:
        term = weights.rmse * rmse(x, y)
        try:
            term += weights.pcc * (1.0 - pcc(x, y))
        except UndefinedCorrelationError:
            term += weights.pcc * 1.0
        term += weights.ccc * (1.0 - ccc(x, y))
        total += term
    return total / len(pairs)


def window_starts(n_frames: int, window: int, stride: int) -> list[int]:
    """Starts {0, stride, 2*stride, ...} of windows fully inside a video."""
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be positive")
    return list(range(0, n_frames - window + 1, stride))


def window_truths(
    d: Dataset, partition: str, window: int = 100, stride: int = 50
) -> dict[tuple[str, int], tuple[float, float]]:
    """Ground-truth window labels for one partition, in canonical order.

    A window's label is the mean of its per-frame labels. Keys are
    (video_id, window_start), ordered by video id then start. Videos shorter
    than the window contribute no keys.
    """
    truths: dict[tuple[str, int], tuple[float, float]] = {}
    videos = d.partition(partition) if partition != "all" else d.videos
    for v in sorted(videos, key=lambda v: v.id):
        for start in window_starts(len(v), window, stride):
            block = v.labels[start : start + window]
            truths[(v.id, start)] = (float(block[:, 0].mean()), float(block[:, 1].mean()))
    return truths


def write_predictions(path: str | Path, rows: dict[tuple[str, int], tuple[float, float]]) -> None:
    """Write a prediction CSV (video_id, window_start, arousal, valence)."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(PREDICTION_HEADER)
        for (vid, start), (a, val) in rows.items():
            w.writerow([vid, str(start), repr(float(a)), repr(float(val))])


def read_predictions(path: str | Path) -> dict[tuple[str, int], tuple[float, float]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"prediction file not found: {path}")
    rows: dict[tuple[str, int], tuple[float, float]] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != PREDICTION_HEADER:
            raise ValueError(f"{path}: bad header, expected {','.join(PREDICTION_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ValueError(f"{path}: line {lineno}: expected 4 columns, got {len(row)}")
            try:
                key = (row[0], int(row[1]))
                values = (float(row[2]), float(row[3]))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric value") from None
            if key in rows:
                raise ValueError(f"{path}: line {lineno}: duplicate key {key}")
            rows[key] = values
    return rows


def eval_predictions(
    pred_path: str | Path,
    d: Dataset,
    partition: str,
    window: int = 100,
    stride: int = 50,
) -> dict[str, float | None]:
    """Score a prediction file against one partition's window truths.

    The file must cover exactly the partition's (video, window) keys; metrics
    are computed over all predictions concatenated in canonical (video id,
    window start) order, so row order in the file does not matter. Pearson
    fields are null when the correlation is undefined.
    """
    preds = read_predictions(pred_path)
    truths = window_truths(d, partition, window=window, stride=stride)

    missing = sorted(set(truths) - set(preds))
    extra = sorted(set(preds) - set(truths))
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing {len(missing)} key(s), first: {missing[:5]}")
        if extra:
            parts.append(f"extra {len(extra)} key(s), first: {extra[:5]}")
        raise ValueError("prediction file does not match partition windows: " + "; ".join(parts))

    keys = sorted(truths)
    truth = np.array([truths[k] for k in keys])
    pred = np.array([preds[k] for k in keys])

    result: dict[str, float | None] = {}
    for j, dim in enumerate(("arousal", "valence")):
        result[f"rmse_{dim}"] = rmse(pred[:, j], truth[:, j])
        try:
            result[f"pcc_{dim}"] = pcc(pred[:, j], truth[:, j])
        except UndefinedCorrelationError:
            result[f"pcc_{dim}"] = None
        result[f"ccc_{dim}"] = ccc(pred[:, j], truth[:, j])
    result["ccc_mean"] = (result["ccc_arousal"] + result["ccc_valence"]) / 2.0
    return result


def save_metrics(path: str | Path, metrics: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(metrics, f, indent=2, sort_keys=True)
        f.write("\n")
