from __future__ import annotations

import numpy as np
import pytest

from avblend.dataset import COEFF_DIM, Dataset, VideoRecord
from avblend.synthgen import GenConfig, generate_corpus


def make_video(
    vid: str,
    subject: str = "s0",
    n_frames: int = 4,
    coeff_fill: float | np.ndarray = 0.0,
    labels: np.ndarray | None = None,
    seed: int | None = None,
) -> VideoRecord:
    """Hand-rolled video for unit tests."""
    if seed is not None:
        rng = np.random.default_rng(seed)
        coeffs = rng.uniform(-3.5, 3.5, size=(n_frames, COEFF_DIM))
        if labels is None:
            labels = rng.uniform(-0.9, 0.9, size=(n_frames, 2))
    else:
        coeffs = np.full((n_frames, COEFF_DIM), coeff_fill, dtype=np.float64)
        if labels is None:
            labels = np.zeros((n_frames, 2))
    return VideoRecord(id=vid, subject_id=subject, coeffs=coeffs, labels=np.asarray(labels, dtype=np.float64))


def make_video_at(vid: str, arousal: float, valence: float, subject: str = "s0", n_frames: int = 4) -> VideoRecord:
    """Constant-label video whose mean AV is exactly (arousal, valence)."""
    labels = np.tile([arousal, valence], (n_frames, 1))
    return make_video(vid, subject=subject, n_frames=n_frames, labels=labels)


@pytest.fixture(scope="session")
def small_corpus() -> tuple[Dataset, object]:
    """12 subjects x 2 videos, unskewed; shared read-only across tests."""
    return generate_corpus(GenConfig(n_subjects=12, videos_per_subject=2, len_range=(110, 150), seed=42))


@pytest.fixture(scope="session")
def skewed_corpus() -> tuple[Dataset, object]:
    """40 subjects x 3 videos biased toward the (+,+) quadrant."""
    cfg = GenConfig(
        n_subjects=40,
        videos_per_subject=3,
        len_range=(120, 220),
        skew_quadrant="++",
        skew_fraction=0.8,
        seed=7,
    )
    return generate_corpus(cfg)
