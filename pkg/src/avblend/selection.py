"""Source and target video selection for augmentation.

Sources come from the least-occupied AV clusters, drained smallest-first.
Targets are picked per source by one of three strategies: uniformly at
random, from nearby clusters, or by similarity of coefficient statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .avspace import Clustering, VideoDescriptor
from .rng import derived_rng

TARGET_STRATEGIES = ("random", "near", "similar")


@dataclass(frozen=True)
class SelectionConfig:
    n_sources: int
    n_targets_per_source: int
    target_strategy: str = "similar"
    seed: int = 0
    exclude_same_subject: bool = False

    def __post_init__(self):
        if self.n_sources < 1:
            raise ValueError(f"n_sources must be positive, got {self.n_sources}")
        if self.n_targets_per_source < 1:
            raise ValueError(f"n_targets_per_source must be positive, got {self.n_targets_per_source}")
        if self.target_strategy not in TARGET_STRATEGIES:
            raise ValueError(f"unknown target strategy {self.target_strategy!r}")

    def check_pool(self, pool_size: int) -> None:
        if self.n_sources > pool_size:
            raise ValueError(f"n_sources={self.n_sources} exceeds pool size {pool_size}")
        if self.n_targets_per_source > pool_size - 1:
            raise ValueError(
                f"n_targets_per_source={self.n_targets_per_source} exceeds pool size - 1 ({pool_size - 1})"
            )


def select_sources(c: Clustering, pool: list[str], n_sources: int) -> list[str]:
    """Drain clusters in ascending occupancy order until n_sources collected.

    Clusters tie-break by ascending cluster id; within a cluster, videos are
    taken in ascending id order. Every pool video must be assigned in ``c``.
    """
    if n_sources > len(pool):
        raise ValueError(f"n_sources={n_sources} exceeds pool size {len(pool)}")
    missing = [vid for vid in pool if vid not in c.assignment]
    if missing:
        raise ValueError(f"pool videos not assigned in clustering: {missing[:5]}")

    by_cluster: dict[int, list[str]] = {}
    for vid in pool:
        by_cluster.setdefault(c.assignment[vid], []).append(vid)

    visit = sorted(by_cluster, key=lambda k: (int(c.occupancy[k]), k))
    out: list[str] = []
    for k in visit:
        for vid in sorted(by_cluster[k]):
            out.append(vid)
            if len(out) == n_sources:
                return out
    return out


def similarity_descriptor(d: VideoDescriptor) -> np.ndarray:
    """Concatenated per-dimension mean and variance (100 values)."""
    return np.concatenate([d.coeff_mean, d.coeff_var])


def select_targets(
    source_id: str,
    strategy: str,
    n: int,
    pool: list[str],
    c: Clustering,
    descs: list[VideoDescriptor],
    seed: int,
    exclude_subjects_of: dict[str, str] | None = None,
) -> list[str]:
    """Pick n target videos for one source.

    random   -- uniform without replacement from the pool minus the source.
    near     -- uniform from the source's own cluster; if it has fewer than n
                other videos, fill from clusters in ascending centroid
                distance (ties: ascending cluster id).
    similar  -- the n candidates minimizing Euclidean distance between the
                100-dim mean/variance descriptors of source and candidate
                (ties: ascending id); invariant to pool ordering.

    The RNG stream is derived from (seed, source_id) so per-source selection
    is independent of processing order. ``exclude_subjects_of`` maps video id
    to subject id; when given, candidates sharing the source's subject are
    dropped before selection.
    """
    if strategy not in TARGET_STRATEGIES:
        raise ValueError(f"unknown target strategy {strategy!r}")
    if source_id not in pool:
        raise ValueError(f"source {source_id!r} not in pool")

    candidates = [vid for vid in pool if vid != source_id]
    if exclude_subjects_of is not None:
        src_subject = exclude_subjects_of[source_id]
        candidates = [vid for vid in candidates if exclude_subjects_of[vid] != src_subject]
    if n > len(candidates):
        raise ValueError(f"pool too small: need {n} targets, have {len(candidates)} candidates")

    if strategy == "random":
        rng = derived_rng(seed, "targets", source_id)
        picked = rng.choice(len(candidates), size=n, replace=False)
        return [candidates[i] for i in picked]

    if strategy == "similar":
        by_id = {d.video_id: d for d in descs}
        src_vec = similarity_descriptor(by_id[source_id])
        ranked = sorted(
            candidates,
            key=lambda vid: (float(np.sum((similarity_descriptor(by_id[vid]) - src_vec) ** 2)), vid),
        )
        return ranked[:n]

    # near: same cluster first, then clusters by centroid distance
    rng = derived_rng(seed, "targets", source_id)
    src_cluster = c.assignment[source_id]
    src_centroid = c.centroids[src_cluster]
    dists = np.sum((c.centroids - src_centroid) ** 2, axis=1)
    others = sorted((k for k in range(c.K) if k != src_cluster), key=lambda k: (float(dists[k]), k))
    tiers = [src_cluster] + others

    out: list[str] = []
    for k in tiers:
        tier = sorted(vid for vid in candidates if c.assignment[vid] == k)
        need = n - len(out)
        if need == 0:
            break
        if len(tier) <= need:
            out.extend(tier)
        else:
            picked = rng.choice(len(tier), size=need, replace=False)
            out.extend(tier[i] for i in picked)
    return out
