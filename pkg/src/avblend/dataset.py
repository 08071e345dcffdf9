"""Coefficient-sequence data model, CSV/manifest persistence, subject splits.

A dataset is a manifest JSON plus one CSV per video. The CSV schema is
``frame,arousal,valence,c00,...,c49`` with 0-based frame numbers, rows
sorted by frame, UTF-8 and LF line endings. Floats are serialized with
``repr`` (shortest decimal that round-trips the exact double), so a
save/load cycle is bit-stable.
"""

from __future__ import annotations

import csv
import json
import shutil
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .rng import derived_rng

COEFF_DIM = 50
COEFF_SOFT_RANGE = 4.0  # values outside [-4, 4] are outliers, not errors

PARTITIONS = ("train", "val", "test")
ALIGNMENTS = ("video_based", "frame_based")
BLEND_METHODS = ("random", "selective_weighted", "full_weighted")

CSV_HEADER = ["frame", "arousal", "valence"] + [f"c{i:02d}" for i in range(COEFF_DIM)]


class DatasetFormatError(ValueError):
    """A manifest or video file violates the on-disk schema."""


class CoefficientOutlierWarning(UserWarning):
    """Coefficient values fell outside the expected [-4, 4] range."""


@dataclass(frozen=True)
class AVSample:
    """One arousal/valence annotation, each component in [-1, 1]."""

    arousal: float
    valence: float

    def __post_init__(self):
        for name, value in (("arousal", self.arousal), ("valence", self.valence)):
            if not np.isfinite(value) or not -1.0 <= value <= 1.0:
                raise ValueError(f"{name} out of range [-1, 1]: {value}")


@dataclass(frozen=True)
class Provenance:
    """How a synthetic video was built; recorded into every synthetic record.

    ``weight`` is present exactly for the weighted methods and ``kept_indices``
    exactly for the subset-keeping methods. The pipeline samples weights in
    [0.25, 0.75]; direct blend calls may use any weight in [0, 1].
    """

    source_id: str
    target_id: str
    alignment: str
    blend_method: str
    label_weight: float
    seed: int
    weight: float | None = None
    kept_indices: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.alignment not in ALIGNMENTS:
            raise ValueError(f"unknown alignment {self.alignment!r}")
        if self.blend_method not in BLEND_METHODS:
            raise ValueError(f"unknown blend_method {self.blend_method!r}")
        weighted = self.blend_method in ("selective_weighted", "full_weighted")
        if weighted != (self.weight is not None):
            raise ValueError(f"weight must be present iff method is weighted, got {self}")
        if self.weight is not None and not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"blend weight out of [0, 1]: {self.weight}")
        subset = self.blend_method in ("random", "selective_weighted")
        if subset != (self.kept_indices is not None):
            raise ValueError("kept_indices must be present iff method keeps a subset")
        if self.kept_indices is not None:
            idx = self.kept_indices
            if list(idx) != sorted(set(idx)) or any(not 0 <= i < COEFF_DIM for i in idx):
                raise ValueError(f"kept_indices must be sorted unique ints in [0, {COEFF_DIM - 1}]")
        if not 0.0 <= self.label_weight <= 1.0:
            raise ValueError(f"label_weight out of [0, 1]: {self.label_weight}")

    def to_json_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "target_id": self.target_id,
            "alignment": self.alignment,
            "blend_method": self.blend_method,
            "weight": self.weight,
            "kept_indices": list(self.kept_indices) if self.kept_indices is not None else None,
            "label_weight": self.label_weight,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Provenance":
        kept = d.get("kept_indices")
        return cls(
            source_id=d["source_id"],
            target_id=d["target_id"],
            alignment=d["alignment"],
            blend_method=d["blend_method"],
            weight=d.get("weight"),
            kept_indices=tuple(kept) if kept is not None else None,
            label_weight=d["label_weight"],
            seed=int(d["seed"]),
        )


def _as_readonly(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out is a and a.flags.writeable:
        out = out.copy()
    out.setflags(write=False)
    return out


@dataclass
class VideoRecord:
    """One labeled sequence: per-frame coefficients plus per-frame AV labels.

    ``coeffs`` has shape (n_frames, 50) and ``labels`` shape (n_frames, 2)
    with columns (arousal, valence). Arrays are stored read-only so records
    can be shared freely across threads.
    """

    id: str
    subject_id: str
    coeffs: np.ndarray
    labels: np.ndarray
    fps: float = 50.0
    synthetic: bool = False
    provenance: Provenance | None = None

    def __post_init__(self):
        self.coeffs = _as_readonly(self.coeffs)
        self.labels = _as_readonly(self.labels)
        if self.coeffs.ndim != 2 or self.coeffs.shape[1] != COEFF_DIM:
            raise ValueError(
                f"video {self.id!r}: coeffs must be (n_frames, {COEFF_DIM}), got {self.coeffs.shape}"
            )
        if self.labels.ndim != 2 or self.labels.shape[1] != 2:
            raise ValueError(f"video {self.id!r}: labels must be (n_frames, 2), got {self.labels.shape}")
        if len(self.coeffs) == 0:
            raise ValueError(f"video {self.id!r}: empty video")
        if len(self.coeffs) != len(self.labels):
            raise ValueError(
                f"video {self.id!r}: frame/label length mismatch "
                f"({len(self.coeffs)} frames vs {len(self.labels)} labels)"
            )
        if not self.fps > 0:
            raise ValueError(f"video {self.id!r}: fps must be positive, got {self.fps}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError(f"video {self.id!r}: non-finite coefficient value")
        if not np.all(np.isfinite(self.labels)):
            raise ValueError(f"video {self.id!r}: non-finite label value")
        if np.any(np.abs(self.labels) > 1.0):
            bad = int(np.argmax(np.any(np.abs(self.labels) > 1.0, axis=1)))
            raise ValueError(
                f"video {self.id!r}: label out of range [-1, 1] at frame {bad}: "
                f"{tuple(self.labels[bad])}"
            )
        if self.synthetic != (self.provenance is not None):
            raise ValueError(f"video {self.id!r}: synthetic records require provenance and only they may carry it")
        n_outliers = int(np.count_nonzero(np.abs(self.coeffs) > COEFF_SOFT_RANGE))
        if n_outliers:
            warnings.warn(
                f"video {self.id!r}: {n_outliers} coefficient value(s) outside "
                f"[-{COEFF_SOFT_RANGE:g}, {COEFF_SOFT_RANGE:g}]",
                CoefficientOutlierWarning,
                stacklevel=2,
            )

    def __len__(self) -> int:
        return len(self.coeffs)


@dataclass
class Dataset:
    """Manifest of VideoRecords with optional train/val/test assignment."""

    videos: list[VideoRecord] = field(default_factory=list)
    fps: float = 50.0
    split: dict[str, str] | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        seen: set[str] = set()
        for v in self.videos:
            if v.id in seen:
                raise ValueError(f"duplicate video id {v.id!r}")
            seen.add(v.id)
        if self.split is None:
            return
        for vid, part in self.split.items():
            if part not in PARTITIONS:
                raise ValueError(f"unknown partition {part!r} for video {vid!r}")
        by_id = {v.id: v for v in self.videos}
        subject_part: dict[str, str] = {}
        for vid, part in self.split.items():
            v = by_id.get(vid)
            if v is None:
                raise ValueError(f"split references unknown video id {vid!r}")
            if v.synthetic:
                if part != "train":
                    raise ValueError(f"synthetic video {vid!r} assigned to {part!r}, must be train")
                continue
            prev = subject_part.setdefault(v.subject_id, part)
            if prev != part:
                raise ValueError(
                    f"subject {v.subject_id!r} appears in partitions {prev!r} and {part!r}"
                )

    def by_id(self) -> dict[str, VideoRecord]:
        return {v.id: v for v in self.videos}

    def partition(self, name: str) -> list[VideoRecord]:
        """Videos assigned to one partition, in manifest order."""
        if name not in PARTITIONS:
            raise ValueError(f"unknown partition {name!r}")
        if self.split is None:
            raise ValueError("dataset has no split")
        return [v for v in self.videos if self.split.get(v.id) == name]

    def subjects(self) -> list[str]:
        seen: dict[str, None] = {}
        for v in self.videos:
            seen.setdefault(v.subject_id, None)
        return list(seen)


# 17 significant digits uniquely identify a double, so float(format(x)) == x
# and re-serializing a loaded file reproduces it byte for byte.
_ROW_FMT = "%d," + ",".join(["%.17g"] * (len(CSV_HEADER) - 1))


def save_video_csv(v: VideoRecord, path: str | Path) -> None:
    """Write one video's CSV (header + one row per frame)."""
    rows = np.hstack([v.labels, v.coeffs]).tolist()
    lines = [",".join(CSV_HEADER)]
    lines.extend(_ROW_FMT % (t, *row) for t, row in enumerate(rows))
    lines.append("")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("\n".join(lines))


def save_dataset(d: Dataset, out_dir: str | Path, copy_from: dict[str, Path] | None = None) -> Path:
    """Write manifest + per-video CSVs under ``out_dir``; returns manifest path.

    ``copy_from`` maps video ids to existing CSV files known to serialize the
    same record (e.g. the files a video was just loaded from); those are
    copied byte-for-byte instead of re-formatted. The result is identical
    either way because the serialization round-trips exactly.
    """
    out_dir = Path(out_dir)
    videos_dir = out_dir / "videos"
    videos_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for v in d.videos:
        rel = f"videos/{v.id}.csv"
        source = copy_from.get(v.id) if copy_from else None
        if source is not None:
            if Path(source).resolve() != (out_dir / rel).resolve():
                shutil.copyfile(source, out_dir / rel)
        else:
            save_video_csv(v, out_dir / rel)
        entries.append(
            {
                "id": v.id,
                "subject": v.subject_id,
                "path": rel,
                "synthetic": v.synthetic,
                "split": d.split.get(v.id) if d.split is not None else None,
                "provenance": v.provenance.to_json_dict() if v.provenance else None,
            }
        )

    manifest = {"fps": d.fps, "videos": entries}
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8", newline="") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return manifest_path


def video_csv_paths(manifest_path: str | Path) -> dict[str, Path]:
    """Map video id to its CSV path as recorded in a manifest."""
    manifest_path = Path(manifest_path)
    with open(manifest_path, "r", encoding="utf-8") as f:
        manifest = json.load(f)
    return {e["id"]: manifest_path.parent / e["path"] for e in manifest["videos"]}


def _read_video_csv(path: Path, video_id: str) -> tuple[np.ndarray, np.ndarray]:
    if not path.exists():
        raise FileNotFoundError(f"video file not found: {path}")
    labels: list[list[float]] = []
    coeffs: list[list[float]] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise DatasetFormatError(f"{path}: bad header, expected {','.join(CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise DatasetFormatError(
                    f"{path}: line {lineno}: expected {len(CSV_HEADER)} columns, got {len(row)}"
                )
            try:
                frame = int(row[0])
                values = [float(x) for x in row[1:]]
            except ValueError as e:
                raise DatasetFormatError(f"{path}: line {lineno}: non-numeric value ({e})") from None
            if frame != lineno - 2:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: frame numbers must be 0-based and sorted, got {frame}"
                )
            labels.append(values[:2])
            coeffs.append(values[2:])
    if not labels:
        raise DatasetFormatError(f"{path}: no frames (video {video_id!r})")
    return np.array(coeffs), np.array(labels)


def load_dataset(manifest_path: str | Path) -> Dataset:
    """Load a manifest and all referenced video CSVs."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    with open(manifest_path, "r", encoding="utf-8") as f:
        try:
            manifest = json.load(f)
        except json.JSONDecodeError as e:
            raise DatasetFormatError(f"{manifest_path}: invalid JSON ({e})") from None

    base = manifest_path.parent
    videos = []
    split: dict[str, str] = {}
    for entry in manifest["videos"]:
        vid = entry["id"]
        coeffs, labels = _read_video_csv(base / entry["path"], vid)
        prov = entry.get("provenance")
        try:
            record = VideoRecord(
                id=vid,
                subject_id=entry["subject"],
                coeffs=coeffs,
                labels=labels,
                fps=float(manifest["fps"]),
                synthetic=bool(entry.get("synthetic", False)),
                provenance=Provenance.from_json_dict(prov) if prov else None,
            )
        except ValueError as e:
            raise DatasetFormatError(f"{base / entry['path']}: {e}") from None
        videos.append(record)
        if entry.get("split") is not None:
            split[vid] = entry["split"]

    return Dataset(videos=videos, fps=float(manifest["fps"]), split=split or None)


def split_by_subject(d: Dataset, ratios: tuple[float, float, float], seed: int) -> Dataset:
    """Assign every subject's videos to one of train/val/test.

    Subjects (sorted by id) are shuffled with the seeded RNG, then assigned
    greedily: each subject goes to the partition whose assigned video count,
    as a fraction of the total video count, is furthest below its target
    ratio. Ties go to the partition with the larger target ratio, then to the
    earlier partition in (train, val, test) order. Deterministic in ``seed``.
    """
    if any(v.synthetic for v in d.videos):
        raise ValueError("split_by_subject requires a dataset without synthetic videos")
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise ValueError(f"ratios must be three non-negative reals, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")

    subject_videos: dict[str, list[str]] = {}
    for v in d.videos:
        subject_videos.setdefault(v.subject_id, []).append(v.id)
    subjects = sorted(subject_videos)
    if len(subjects) < 3:
        raise ValueError(f"need at least 3 subjects to split, got {len(subjects)}")

    order = list(subjects)
    derived_rng(seed, "split").shuffle(order)

    total = sum(len(vids) for vids in subject_videos.values())
    assigned = [0, 0, 0]
    split: dict[str, str] = {}
    for subject in order:
        deficits = [ratios[p] - assigned[p] / total for p in range(3)]
        best = max(range(3), key=lambda p: (deficits[p], ratios[p], -p))
        for vid in subject_videos[subject]:
            split[vid] = PARTITIONS[best]
        assigned[best] += len(subject_videos[subject])

    return replace(d, split=split)
