"""Reader for the manifest/CSV corpus format plus window extraction.

The interchange contract with the data toolkit is the on-disk format only:
a manifest JSON ``{"fps", "videos": [{"id","subject","path","synthetic",
"split","provenance"}]}`` and per-video CSVs with header
``frame,arousal,valence,c00..c49``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

COEFF_DIM = 50
CSV_HEADER = ["frame", "arousal", "valence"] + [f"c{i:02d}" for i in range(COEFF_DIM)]


@dataclass
class Video:
    id: str
    subject_id: str
    coeffs: np.ndarray  # (n, 50)
    labels: np.ndarray  # (n, 2)
    synthetic: bool
    split: str | None

    def __len__(self) -> int:
        return len(self.coeffs)


@dataclass
class Corpus:
    videos: list[Video]
    fps: float

    def partition(self, name: str) -> list[Video]:
        return [v for v in self.videos if v.split == name]

    def split_map(self) -> dict[str, str | None]:
        return {v.id: v.split for v in self.videos}


def load_corpus(manifest_path: str | Path) -> Corpus:
    manifest_path = Path(manifest_path)
    with open(manifest_path, "r", encoding="utf-8") as f:
        manifest = json.load(f)
    videos = []
    for entry in manifest["videos"]:
        path = manifest_path.parent / entry["path"]
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader)
            if header != CSV_HEADER:
                raise ValueError(f"{path}: unexpected CSV header")
            rows = [[float(x) for x in row[1:]] for row in reader]
        data = np.asarray(rows, dtype=np.float64)
        videos.append(
            Video(
                id=entry["id"],
                subject_id=entry["subject"],
                coeffs=data[:, 2:],
                labels=data[:, :2],
                synthetic=bool(entry.get("synthetic", False)),
                split=entry.get("split"),
            )
        )
    return Corpus(videos=videos, fps=float(manifest["fps"]))


@dataclass(frozen=True)
class WindowSample:
    video_id: str
    start: int
    coeffs: np.ndarray  # (window, 50)
    label: tuple[float, float]  # mean arousal/valence over the window


def make_windows(
    corpus: Corpus,
    partition: str,
    window: int = 100,
    stride: int = 50,
    label_reduction: str = "mean",
) -> list[WindowSample]:
    """Slice every partition video into windows at {0, stride, 2*stride, ...}.

    The window label is the mean of the per-frame labels (or the last frame's
    label with ``label_reduction="last"``). Output is in canonical
    (video id, start) order. Videos shorter than the window are an error.
    """
    if label_reduction not in ("mean", "last"):
        raise ValueError(f"unknown label reduction {label_reduction!r}")
    samples = []
    for v in sorted(corpus.partition(partition), key=lambda v: v.id):
        if len(v) < window:
            raise ValueError(f"video {v.id!r} has {len(v)} frames, shorter than the {window}-frame window")
        for start in range(0, len(v) - window + 1, stride):
            block_labels = v.labels[start : start + window]
            if label_reduction == "mean":
                lab = block_labels.mean(axis=0)
            else:
                lab = block_labels[-1]
            samples.append(
                WindowSample(
                    video_id=v.id,
                    start=start,
                    coeffs=v.coeffs[start : start + window],
                    label=(float(lab[0]), float(lab[1])),
                )
            )
    return samples


def stack_windows(samples: list[WindowSample]) -> tuple[np.ndarray, np.ndarray]:
    """(N, window, 50) inputs and (N, 2) targets."""
    x = np.stack([s.coeffs for s in samples]).astype(np.float32)
    y = np.array([s.label for s in samples], dtype=np.float32)
    return x, y
