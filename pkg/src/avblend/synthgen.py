"""Oracle-labeled pseudo-coefficient corpora with controllable AV skew.

Stands in for license-gated affect corpora in every test. Each subject gets
an archetype coefficient vector; each video adds band-limited sinusoids per
channel (mean-centered, so a video's mean coefficients equal the archetype
exactly). Labels are a noiseless linear map of the coefficients, which makes
label blending algebraically checkable and the regression task learnable to
near-perfect accuracy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import COEFF_DIM, Dataset, VideoRecord
from .rng import derived_rng

QUADRANTS = {"++": (1, 1), "+-": (1, -1), "-+": (-1, 1), "--": (-1, -1)}

LABEL_HEADROOM = 0.95  # max |label| after oracle scaling
COEFF_MARGIN = 0.05  # kept clear of the +-4 coefficient range
FREQ_RANGE_HZ = (0.1, 2.0)
ARCHETYPE_COMPONENT_MAX = 2.5


@dataclass(frozen=True)
class GenConfig:
    n_subjects: int
    videos_per_subject: int
    len_range: tuple[int, int] = (150, 300)
    fps: float = 50.0
    n_harmonics: int = 4
    skew_quadrant: str | None = None
    skew_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_subjects < 1 or self.videos_per_subject < 1:
            raise ValueError("n_subjects and videos_per_subject must be positive")
        lo, hi = self.len_range
        if lo < 100:
            raise ValueError(f"len_range minimum must be >= 100 frames, got {lo}")
        if hi < lo:
            raise ValueError(f"len_range must be (min, max) with max >= min, got {self.len_range}")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.n_harmonics < 0:
            raise ValueError("n_harmonics must be >= 0")
        if self.skew_quadrant is not None and self.skew_quadrant not in QUADRANTS:
            raise ValueError(f"skew_quadrant must be one of {sorted(QUADRANTS)}")
        if not 0.0 <= self.skew_fraction <= 1.0:
            raise ValueError("skew_fraction must be in [0, 1]")


@dataclass(frozen=True)
class LinearOracle:
    """Linear map from a coefficient frame to (arousal, valence)."""

    matrix: np.ndarray  # (2, 50)

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if m.shape != (2, COEFF_DIM):
            raise ValueError(f"oracle matrix must be (2, {COEFF_DIM}), got {m.shape}")
        if m is self.matrix and m.flags.writeable:
            m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def labels_for(self, coeffs: np.ndarray) -> np.ndarray:
        """Label track (n, 2) for a coefficient track (n, 50)."""
        return np.asarray(coeffs, dtype=np.float64) @ self.matrix.T

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            json.dump({"matrix": [list(map(float, row)) for row in self.matrix]}, f)
            f.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "LinearOracle":
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        return cls(matrix=np.array(data["matrix"], dtype=np.float64))


def oracle_labels(o: LinearOracle, frames: np.ndarray) -> np.ndarray:
    """Per-frame (arousal, valence) = oracle matrix applied to each frame."""
    return o.labels_for(frames)


def _nullspace_component(a0: np.ndarray, vec: np.ndarray) -> np.ndarray:
    gram = a0 @ a0.T
    coeffs = np.linalg.solve(gram, a0 @ vec)
    return vec - a0.T @ coeffs


def _subject_archetype(a0: np.ndarray, a0_pinv: np.ndarray, cfg: GenConfig, subject: int) -> np.ndarray:
    rng = derived_rng(cfg.seed, "subject", subject)
    skewed = cfg.skew_quadrant is not None and rng.uniform() < cfg.skew_fraction
    if skewed:
        signs = QUADRANTS[cfg.skew_quadrant]
        target = np.array(signs, dtype=np.float64) * rng.uniform(0.2, 0.9, size=2)
    else:
        target = rng.uniform(-0.9, 0.9, size=2)

    # row-space part fixes the (pre-scaling) mean label, null-space part adds
    # coefficient diversity without touching labels
    row_part = a0_pinv @ target
    row_part *= rng.uniform(1.5, 3.0) / np.linalg.norm(row_part)
    null_part = _nullspace_component(a0, rng.normal(size=COEFF_DIM))
    null_part *= rng.uniform(0.5, 1.5) / np.linalg.norm(null_part)

    base = row_part + null_part
    peak = np.abs(base).max()
    if peak > ARCHETYPE_COMPONENT_MAX:
        base *= ARCHETYPE_COMPONENT_MAX / peak  # positive scale keeps the label signs
    return base


def _video_channels(base: np.ndarray, length: int, cfg: GenConfig, subject: int, video: int) -> np.ndarray:
    rng = derived_rng(cfg.seed, "video", subject, video)
    budget = (4.0 - np.abs(base) - COEFF_MARGIN) / 2.0
    if np.any(budget <= 0.0):
        raise ValueError("infeasible amplitude budget: archetype leaves no oscillation headroom")

    if cfg.n_harmonics == 0:
        osc = np.zeros((COEFF_DIM, length))
    else:
        h = cfg.n_harmonics
        freqs = rng.uniform(*FREQ_RANGE_HZ, size=(COEFF_DIM, h))
        phases = rng.uniform(0.0, 2.0 * np.pi, size=(COEFF_DIM, h))
        amps = rng.uniform(0.3, 1.0, size=(COEFF_DIM, h))
        fill = rng.uniform(0.3, 0.9, size=COEFF_DIM)
        amps *= (budget * fill / amps.sum(axis=1))[:, None]
        t = np.arange(length) / cfg.fps
        osc = np.einsum(
            "ch,cht->ct", amps, np.sin(2.0 * np.pi * freqs[:, :, None] * t[None, None, :] + phases[:, :, None])
        )
        osc -= osc.mean(axis=1, keepdims=True)  # video mean == archetype exactly

    coeffs = (base[:, None] + osc).T
    peak = np.abs(coeffs).max()
    if peak >= 4.0:
        raise ValueError(f"infeasible amplitude budget: generated coefficient peak {peak}")
    return coeffs


def generate_corpus(cfg: GenConfig) -> tuple[Dataset, LinearOracle]:
    """Deterministically generate a labeled corpus and its labeling oracle.

    The oracle's rows are scaled after generation so the largest absolute
    label over the whole corpus is 0.95; no value is ever clamped.
    """
    rng = derived_rng(cfg.seed, "oracle")
    a0 = rng.normal(size=(2, COEFF_DIM))
    a0_pinv = a0.T @ np.linalg.inv(a0 @ a0.T)

    tracks: list[tuple[str, str, np.ndarray]] = []
    for i in range(cfg.n_subjects):
        base = _subject_archetype(a0, a0_pinv, cfg, i)
        subject_id = f"s{i:03d}"
        for j in range(cfg.videos_per_subject):
            rng_len = derived_rng(cfg.seed, "length", i, j)
            length = int(rng_len.integers(cfg.len_range[0], cfg.len_range[1] + 1))
            coeffs = _video_channels(base, length, cfg, i, j)
            tracks.append((f"v{i:03d}_{j:02d}", subject_id, coeffs))

    raw_peaks = np.zeros(2)
    for _, _, coeffs in tracks:
        raw = np.abs(coeffs @ a0.T)
        raw_peaks = np.maximum(raw_peaks, raw.max(axis=0))
    scales = np.where(raw_peaks > 0.0, LABEL_HEADROOM / raw_peaks, 1.0)
    oracle = LinearOracle(matrix=a0 * scales[:, None])

    videos = [
        VideoRecord(id=vid, subject_id=sid, coeffs=coeffs, labels=oracle.labels_for(coeffs), fps=cfg.fps)
        for vid, sid, coeffs in tracks
    ]
    return Dataset(videos=videos, fps=cfg.fps), oracle
