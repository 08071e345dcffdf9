"""Training loop, checkpointing, and prediction-file evaluation."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from .data import Corpus, load_corpus, make_windows, stack_windows
from .losses import LossWeights, combined_loss
from .model import GruRegressor


@dataclass(frozen=True)
class TrainConfig:
    window: int = 100
    stride: int = 50
    gru_layers: int = 2
    hidden: int = 128
    dropout: float = 0.5
    batch: int = 4
    lr: float = 1e-3
    weight_decay: float = 1e-4
    t0: int = 20  # cosine warm-restart period, in epochs
    epochs: int = 25
    label_reduction: str = "mean"
    loss_weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0


def _ccc_np(pred: np.ndarray, target: np.ndarray) -> float:
    mx, my = pred.mean(), target.mean()
    vx, vy = pred.var(), target.var()
    cov = float(np.mean((pred - mx) * (target - my)))
    denom = vx + vy + (mx - my) ** 2
    if denom < 1e-15:
        return 1.0
    return float(2.0 * cov / denom)


def ccc_scores(pred: np.ndarray, target: np.ndarray) -> dict[str, float]:
    a = _ccc_np(pred[:, 0], target[:, 0])
    v = _ccc_np(pred[:, 1], target[:, 1])
    return {"ccc_arousal": a, "ccc_valence": v, "ccc_mean": (a + v) / 2.0}


def predict(model: GruRegressor, x: np.ndarray, batch: int = 64) -> np.ndarray:
    model.eval()
    outs = []
    with torch.no_grad():
        for i in range(0, len(x), batch):
            outs.append(model(torch.from_numpy(x[i : i + batch])).numpy())
    return np.concatenate(outs, axis=0)


@dataclass
class TrainResult:
    model: GruRegressor
    history: list[dict]
    best_epoch: int
    best_val_ccc: float


def train(corpus: Corpus | str | Path, cfg: TrainConfig, out_dir: str | Path | None = None) -> TrainResult:
    """Train on the corpus' train partition, keep the best-val-CCC weights.

    Deterministic given cfg.seed up to PyTorch backend nondeterminism. When
    ``out_dir`` is given, writes ``checkpoint.pt`` and ``history.json``.
    """
    if not isinstance(corpus, Corpus):
        corpus = load_corpus(corpus)
    if not corpus.partition("train") or not corpus.partition("val"):
        raise ValueError("corpus needs train and val partitions")

    train_x, train_y = stack_windows(
        make_windows(corpus, "train", cfg.window, cfg.stride, cfg.label_reduction)
    )
    val_x, val_y = stack_windows(make_windows(corpus, "val", cfg.window, cfg.stride, cfg.label_reduction))

    torch.manual_seed(cfg.seed)
    model = GruRegressor(hidden=cfg.hidden, layers=cfg.gru_layers, dropout=cfg.dropout)
    opt = torch.optim.AdamW(model.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)
    sched = torch.optim.lr_scheduler.CosineAnnealingWarmRestarts(opt, T_0=cfg.t0)
    order_rng = np.random.default_rng(cfg.seed)

    history: list[dict] = []
    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    best_val, best_epoch = -np.inf, -1

    for epoch in range(cfg.epochs):
        model.train()
        perm = order_rng.permutation(len(train_x))
        losses = []
        for i in range(0, len(perm), cfg.batch):
            idx = perm[i : i + cfg.batch]
            if len(idx) < 2:
                continue  # correlation terms need at least two samples
            xb = torch.from_numpy(train_x[idx])
            yb = torch.from_numpy(train_y[idx])
            opt.zero_grad()
            loss = combined_loss(model(xb), yb, cfg.loss_weights)
            loss.backward()
            opt.step()
            losses.append(float(loss.item()))
        sched.step()

        val_pred = predict(model, val_x)
        scores = ccc_scores(val_pred, val_y)
        history.append(
            {
                "epoch": epoch,
                "train_loss": float(np.mean(losses)) if losses else None,
                "lr": opt.param_groups[0]["lr"],
                **scores,
            }
        )
        if scores["ccc_mean"] > best_val:
            best_val = scores["ccc_mean"]
            best_epoch = epoch
            best_state = {k: v.clone() for k, v in model.state_dict().items()}

    model.load_state_dict(best_state)
    result = TrainResult(model=model, history=history, best_epoch=best_epoch, best_val_ccc=float(best_val))

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        cfg_dict = asdict(cfg)
        cfg_dict["loss_weights"] = asdict(cfg.loss_weights)
        torch.save({"state_dict": model.state_dict(), "config": cfg_dict}, out_dir / "checkpoint.pt")
        with open(out_dir / "history.json", "w", encoding="utf-8") as f:
            json.dump(
                {"best_epoch": best_epoch, "best_val_ccc": float(best_val), "epochs": history}, f, indent=2
            )
            f.write("\n")
    return result


def load_checkpoint(path: str | Path) -> tuple[GruRegressor, TrainConfig]:
    blob = torch.load(path, weights_only=True)
    cfg_dict = dict(blob["config"])
    cfg_dict["loss_weights"] = LossWeights(**cfg_dict["loss_weights"])
    cfg = TrainConfig(**cfg_dict)
    model = GruRegressor(hidden=cfg.hidden, layers=cfg.gru_layers, dropout=cfg.dropout)
    model.load_state_dict(blob["state_dict"])
    return model, cfg


def evaluate(
    model: GruRegressor,
    corpus: Corpus | str | Path,
    partition: str,
    pred_path: str | Path,
    window: int = 100,
    stride: int = 50,
    label_reduction: str = "mean",
) -> Path:
    """Write window predictions in the evaluation toolkit's CSV format."""
    if not isinstance(corpus, Corpus):
        corpus = load_corpus(corpus)
    samples = make_windows(corpus, partition, window, stride, label_reduction)
    if not samples:
        raise ValueError(f"partition {partition!r} has no windows")
    x, _ = stack_windows(samples)
    pred = predict(model, x)
    pred_path = Path(pred_path)
    with open(pred_path, "w", encoding="utf-8", newline="") as f:
        f.write("video_id,window_start,arousal_pred,valence_pred\n")
        for s, (a, v) in zip(samples, pred):
            f.write(f"{s.video_id},{s.start},{float(a)!r},{float(v)!r}\n")
    return pred_path
