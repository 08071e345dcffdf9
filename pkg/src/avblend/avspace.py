"""Arousal-valence space analysis: descriptors, clustering, balance reports.

Videos are summarized by their mean AV point and clustered there, either by
Lloyd's algorithm (k-means++ seeding) or by a fixed sqrt(K) x sqrt(K) grid
of bins. A uniform-grid frame index supports exact nearest-frame queries
for the frame-based blending mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import AVSample, VideoRecord
from .rng import derived_rng

KMEANS_MAX_ITER = 100


@dataclass(frozen=True)
class VideoDescriptor:
    """Per-video summary: mean AV plus per-dimension coefficient statistics.

    ``coeff_var`` is the population variance (ddof=0) of each coefficient
    channel; blending only compares these values between videos, so the
    population/sample choice just has to be consistent.
    """

    video_id: str
    mean_av: AVSample
    coeff_mean: np.ndarray
    coeff_var: np.ndarray


@dataclass
class Clustering:
    """Assignment of videos to AV-plane clusters with occupancy counts."""

    method: str  # "kmeans" | "kbin"
    K: int
    assignment: dict[str, int]
    centroids: np.ndarray  # (K, 2)
    occupancy: np.ndarray  # (K,) int

    def __post_init__(self):
        if int(self.occupancy.sum()) != len(self.assignment):
            raise ValueError("occupancy must sum to the number of assigned videos")
        for vid, c in self.assignment.items():
            if not 0 <= c < self.K:
                raise ValueError(f"video {vid!r} assigned to invalid cluster {c}")


@dataclass(frozen=True)
class OccupancyReport:
    """Balance summary of a clustering: counts, min count, count entropy."""

    counts: tuple[int, ...]
    min_count: int
    entropy: float


def video_stats(v: VideoRecord) -> VideoDescriptor:
    """Mean AV and per-dimension population mean/variance of one video."""
    if len(v) == 0:
        raise ValueError(f"video {v.id!r}: empty video")
    mean_av = v.labels.mean(axis=0)
    return VideoDescriptor(
        video_id=v.id,
        mean_av=AVSample(float(mean_av[0]), float(mean_av[1])),
        coeff_mean=v.coeffs.mean(axis=0),
        coeff_var=v.coeffs.var(axis=0),
    )


def descriptor_matrix(descs: list[VideoDescriptor]) -> np.ndarray:
    """Stack mean-AV points into an (n, 2) array in input order."""
    return np.array([[d.mean_av.arousal, d.mean_av.valence] for d in descs], dtype=np.float64)


def kbin_axis_index(x: float, bins_per_axis: int) -> int:
    """Left-closed uniform bins over [-1, 1] with the top edge clamped."""
    return min(int(math.floor((x + 1.0) * bins_per_axis / 2.0)), bins_per_axis - 1)


def kbin_cluster(descs: list[VideoDescriptor], K: int) -> Clustering:
    """Assign each video's mean AV to one of K = n*n grid bins.

    Bin ids are row-major: ``a_idx * sqrt(K) + v_idx``. Centroids sit at bin
    centers.
    """
    n = math.isqrt(K)
    if n * n != K or K < 4:
        raise ValueError(f"K must be a perfect square >= 4, got {K}")

    assignment = {}
    occupancy = np.zeros(K, dtype=np.int64)
    for d in descs:
        a_idx = kbin_axis_index(d.mean_av.arousal, n)
        v_idx = kbin_axis_index(d.mean_av.valence, n)
        cid = a_idx * n + v_idx
        assignment[d.video_id] = cid
        occupancy[cid] += 1

    width = 2.0 / n
    centroids = np.array(
        [[-1.0 + (i + 0.5) * width, -1.0 + (j + 0.5) * width] for i in range(n) for j in range(n)]
    )
    return Clustering(method="kbin", K=K, assignment=assignment, centroids=centroids, occupancy=occupancy)


def _kmeans_pp_init(points: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centroids = np.empty((K, 2))
    centroids[0] = points[rng.integers(n)]
    d2 = np.sum((points - centroids[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 0.0:
            # all remaining mass on existing centroids: pick uniformly
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[k] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centroids[k]) ** 2, axis=1))
    return centroids


def kmeans_cluster(
    descs: list[VideoDescriptor],
    K: int,
    seed: int,
    inertia_trace: list[float] | None = None,
) -> Clustering:
    """Lloyd's algorithm on mean-AV points with k-means++ seeding.

    Iterates until the assignment is stable or 100 iterations. A cluster that
    empties is reseeded to the point farthest from its nearest centroid (ties:
    lowest point index). Deterministic in (descriptor order, K, seed).

    ``inertia_trace``, if given, collects the sum of squared point-to-centroid
    distances after each assignment step.
    """
    if K < 1:
        raise ValueError(f"K must be positive, got {K}")
    if K > len(descs):
        raise ValueError(f"K={K} exceeds number of videos ({len(descs)})")

    points = descriptor_matrix(descs)
    rng = derived_rng(seed, "kmeans")
    centroids = _kmeans_pp_init(points, K, rng)

    labels = None
    for _ in range(KMEANS_MAX_ITER):
        d2 = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)  # ties: lowest cluster id
        counts = np.bincount(new_labels, minlength=K)
        d2_nearest = d2[np.arange(len(points)), new_labels].copy()

        reseeded = False
        if np.any(counts == 0):
            reseeded = True
            centroids = centroids.copy()
            for _ in range(K):  # reseeding one cluster may empty another
                empties = np.flatnonzero(counts == 0)
                if len(empties) == 0:
                    break
                k = int(empties[0])
                far = int(np.argmax(d2_nearest))
                counts[new_labels[far]] -= 1
                new_labels[far] = k
                counts[k] += 1
                centroids[k] = points[far]
                d2_nearest = np.minimum(d2_nearest, np.sum((points - centroids[k]) ** 2, axis=1))

        if inertia_trace is not None:
            diffs = points - centroids[new_labels]
            inertia_trace.append(float(np.sum(diffs * diffs)))

        stable = not reseeded and labels is not None and np.array_equal(new_labels, labels)
        labels = new_labels
        if stable:
            break
        for k in range(K):
            members = labels == k
            if members.any():
                centroids[k] = points[members].mean(axis=0)
    else:
        # iteration budget exhausted: realign assignment with final centroids
        d2 = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        labels = np.argmin(d2, axis=1)

    assignment = {d.video_id: int(labels[i]) for i, d in enumerate(descs)}
    occupancy = np.bincount(labels, minlength=K)
    return Clustering(method="kmeans", K=K, assignment=assignment, centroids=centroids, occupancy=occupancy)


def occupancy_report(c: Clustering) -> OccupancyReport:
    """Natural-log entropy of the occupancy distribution; empty clusters add 0."""
    counts = np.asarray(c.occupancy, dtype=np.int64)
    total = int(counts.sum())
    if total == 0:
        raise ValueError("occupancy report requires at least one assigned video")
    p = counts[counts > 0] / total
    entropy = float(-(p * np.log(p)).sum())
    return OccupancyReport(counts=tuple(int(x) for x in counts), min_count=int(counts.min()), entropy=entropy)


def frame_histogram(videos: list[VideoRecord], bins_per_axis: int) -> np.ndarray:
    """Per-frame AV histogram on a uniform grid over [-1, 1]^2.

    Returns a (bins, bins) count array indexed [a_bin, v_bin], using the same
    left-closed/top-clamped bin convention as kbin clustering.
    """
    counts = np.zeros((bins_per_axis, bins_per_axis), dtype=np.int64)
    for v in videos:
        a_idx = np.minimum(
            np.floor((v.labels[:, 0] + 1.0) * bins_per_axis / 2.0).astype(np.int64), bins_per_axis - 1
        )
        v_idx = np.minimum(
            np.floor((v.labels[:, 1] + 1.0) * bins_per_axis / 2.0).astype(np.int64), bins_per_axis - 1
        )
        np.add.at(counts, (a_idx, v_idx), 1)
    return counts


class FrameIndex:
    """Uniform-grid index over every frame of a video pool.

    Queries return exactly the brute-force Euclidean nearest frame by AV
    label, with ties broken by lowest video id then lowest frame index. The
    search expands cell rings around the query until no unvisited ring can
    hold a closer point.
    """

    def __init__(self, pool: list[VideoRecord], cells_per_axis: int = 32):
        if not pool:
            raise ValueError("frame index requires a nonempty pool")
        if cells_per_axis < 1:
            raise ValueError(f"cells_per_axis must be positive, got {cells_per_axis}")
        self.n = cells_per_axis
        self.cell_size = 2.0 / cells_per_axis
        self.cells: dict[tuple[int, int], list[tuple[str, int, float, float]]] = {}
        self.videos: dict[str, VideoRecord] = {}
        self.n_frames = 0
        for v in pool:
            if v.id in self.videos:
                raise ValueError(f"duplicate video id in pool: {v.id!r}")
            self.videos[v.id] = v
            for t in range(len(v)):
                a, val = float(v.labels[t, 0]), float(v.labels[t, 1])
                key = (self._axis(a), self._axis(val))
                self.cells.setdefault(key, []).append((v.id, t, a, val))
                self.n_frames += 1

    def _axis(self, x: float) -> int:
        return min(int(math.floor((x + 1.0) * self.n / 2.0)), self.n - 1)

    def nearest(self, arousal: float, valence: float) -> tuple[str, int, float]:
        """Nearest indexed frame to (arousal, valence); returns (video_id, frame, distance)."""
        qa, qv = self._axis(arousal), self._axis(valence)
        best: tuple[float, str, int] | None = None

        max_ring = 2 * self.n  # covers the whole grid from any cell
        for r in range(max_ring + 1):
            if best is not None and ((r - 1) * self.cell_size) ** 2 > best[0]:
                break
            for key in self._ring(qa, qv, r):
                for vid, t, a, val in self.cells.get(key, ()):
                    d2 = (a - arousal) ** 2 + (val - valence) ** 2
                    cand = (d2, vid, t)
                    if best is None or cand < best:
                        best = cand
        if best is None:
            raise ValueError("frame index is empty")
        return best[1], best[2], math.sqrt(best[0])

    def _ring(self, qa: int, qv: int, r: int):
        if r == 0:
            if 0 <= qa < self.n and 0 <= qv < self.n:
                yield (qa, qv)
            return
        for i in range(qa - r, qa + r + 1):
            if not 0 <= i < self.n:
                continue
            for j in (qv - r, qv + r):
                if 0 <= j < self.n:
                    yield (i, j)
        for j in range(qv - r + 1, qv + r):
            if not 0 <= j < self.n:
                continue
            for i in (qa - r, qa + r):
                if 0 <= i < self.n:
                    yield (i, j)


def build_frame_index(pool: list[VideoRecord], cells_per_axis: int = 32) -> FrameIndex:
    """Index every frame of ``pool`` for exact nearest-frame queries."""
    return FrameIndex(pool, cells_per_axis=cells_per_axis)
