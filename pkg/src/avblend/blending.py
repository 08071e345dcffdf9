"""Synthetic sequence creation by blending source/target coefficient tracks.

Three blend methods are supported: keeping a random coefficient subset from
the source (random), a weighted mix of the non-kept dimensions (selective
weighted), and a weighted mix of all 50 dimensions (full weighted). Labels
are always the per-frame weighted average of source and target labels, with
the label weight derived from the blend method. Pairs are aligned either by
time-resampling the whole target to the source's length (video_based) or by
matching every source frame to its AV-nearest pool frame (frame_based).

The full pipeline (cluster, pick sources, pick targets, blend) lives in
``augment``. The default profile is video_based alignment + full weighted
blending + similar-target selection.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .avspace import FrameIndex, build_frame_index, kbin_cluster, kmeans_cluster, occupancy_report, video_stats
from .dataset import COEFF_DIM, Dataset, Provenance, VideoRecord
from .rng import derived_seed
from .selection import SelectionConfig, select_sources, select_targets

WEIGHT_LOW, WEIGHT_HIGH = 0.25, 0.75
KEPT_SIZE_LOW, KEPT_SIZE_HIGH = 10, 40  # avoids near-copies and near-replacements

CLUSTERING_METHODS = ("kmeans", "kbin")


@dataclass(frozen=True)
class AugmentConfig:
    """Full augmentation run configuration.

    ``seed`` governs every random choice in the run; the seed carried by
    ``selection`` is ignored inside the pipeline so that one value
    reproduces the whole run.
    """

    selection: SelectionConfig
    clustering: str = "kmeans"
    K: int = 16
    alignment: str = "video_based"
    blend_method: str = "full_weighted"
    seed: int = 0
    threads: int = 1
    frame_index_cells: int = 32

    def __post_init__(self):
        if self.clustering not in CLUSTERING_METHODS:
            raise ValueError(f"unknown clustering method {self.clustering!r}")
        if self.alignment not in ("video_based", "frame_based"):
            raise ValueError(f"unknown alignment {self.alignment!r}")
        if self.blend_method not in ("random", "selective_weighted", "full_weighted"):
            raise ValueError(f"unknown blend method {self.blend_method!r}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")


def sample_weight(rng: np.random.Generator) -> float:
    """Blend weight ~ Uniform[0.25, 0.75], one per synthetic video."""
    return float(rng.uniform(WEIGHT_LOW, WEIGHT_HIGH))


def sample_kept(rng: np.random.Generator) -> tuple[int, ...]:
    """Kept-subset: size uniform in {10..40}, then a uniform subset of that size."""
    size = int(rng.integers(KEPT_SIZE_LOW, KEPT_SIZE_HIGH + 1))
    idx = rng.choice(COEFF_DIM, size=size, replace=False)
    return tuple(int(i) for i in sorted(idx))


def sample_blend_params(method: str, rng: np.random.Generator) -> tuple[tuple[int, ...] | None, float | None]:
    """Draw (kept, weight) for one synthetic video; subset first, then weight."""
    kept = sample_kept(rng) if method in ("random", "selective_weighted") else None
    w = sample_weight(rng) if method in ("selective_weighted", "full_weighted") else None
    return kept, w


def resample_video(v: VideoRecord, new_len: int) -> VideoRecord:
    """Linearly resample every coefficient and label channel to ``new_len``.

    Channels are interpolated independently on normalized time [0, 1] at
    ``new_len`` equispaced points; resampling to the original length is the
    identity.
    """
    if new_len < 1:
        raise ValueError(f"new_len must be positive, got {new_len}")
    if new_len == len(v):
        return replace(v)

    t_old = np.linspace(0.0, 1.0, len(v))
    t_new = np.linspace(0.0, 1.0, new_len)
    coeffs = np.empty((new_len, v.coeffs.shape[1]))
    for j in range(v.coeffs.shape[1]):
        coeffs[:, j] = np.interp(t_new, t_old, v.coeffs[:, j])
    labels = np.empty((new_len, 2))
    for j in range(2):
        labels[:, j] = np.interp(t_new, t_old, v.labels[:, j])
    return replace(v, coeffs=coeffs, labels=labels)


def _check_pair(src: VideoRecord, tgt: VideoRecord) -> None:
    if len(src) != len(tgt):
        raise ValueError(f"length mismatch: source {len(src)} frames, target {len(tgt)} frames")


def _check_kept(kept) -> tuple[int, ...]:
    kept = tuple(int(i) for i in kept)
    if list(kept) != sorted(set(kept)) or any(not 0 <= i < COEFF_DIM for i in kept):
        raise ValueError(f"kept must be sorted unique indices in [0, {COEFF_DIM - 1}]")
    return kept


def _blend_arrays(method, src_coeffs, src_labels, tgt_coeffs, tgt_labels, w, kept):
    if method == "full_weighted":
        coeffs = w * src_coeffs + (1.0 - w) * tgt_coeffs
        label_weight = w
    elif method == "random":
        coeffs = tgt_coeffs.copy()
        coeffs[:, list(kept)] = src_coeffs[:, list(kept)]
        label_weight = len(kept) / COEFF_DIM
    elif method == "selective_weighted":
        coeffs = w * src_coeffs + (1.0 - w) * tgt_coeffs
        coeffs[:, list(kept)] = src_coeffs[:, list(kept)]
        label_weight = (len(kept) + w * (COEFF_DIM - len(kept))) / COEFF_DIM
    else:
        raise ValueError(f"unknown blend method {method!r}")
    labels = label_weight * src_labels + (1.0 - label_weight) * tgt_labels
    return coeffs, labels, label_weight


def _synthetic(src: VideoRecord, coeffs, labels, prov: Provenance, new_id: str | None) -> VideoRecord:
    vid = new_id if new_id is not None else f"syn_{src.id}"
    return VideoRecord(
        id=vid,
        subject_id=vid,
        coeffs=coeffs,
        labels=labels,
        fps=src.fps,
        synthetic=True,
        provenance=prov,
    )


def blend_full_weighted(
    src: VideoRecord, tgt_aligned: VideoRecord, w: float, *, new_id: str | None = None, seed: int = 0
) -> VideoRecord:
    """Weighted blend of all 50 coefficients: w*src + (1-w)*tgt, labels alike."""
    _check_pair(src, tgt_aligned)
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"blend weight out of [0, 1]: {w}")
    coeffs, labels, lw = _blend_arrays("full_weighted", src.coeffs, src.labels, tgt_aligned.coeffs, tgt_aligned.labels, w, None)
    prov = Provenance(
        source_id=src.id,
        target_id=tgt_aligned.id,
        alignment="video_based",
        blend_method="full_weighted",
        weight=w,
        label_weight=lw,
        seed=seed,
    )
    return _synthetic(src, coeffs, labels, prov, new_id)


def blend_random(
    src: VideoRecord, tgt_aligned: VideoRecord, kept, *, new_id: str | None = None, seed: int = 0
) -> VideoRecord:
    """Keep the ``kept`` coefficient dimensions from the source, take the rest
    from the target; labels blend with weight |kept|/50."""
    _check_pair(src, tgt_aligned)
    kept = _check_kept(kept)
    coeffs, labels, lw = _blend_arrays("random", src.coeffs, src.labels, tgt_aligned.coeffs, tgt_aligned.labels, None, kept)
    prov = Provenance(
        source_id=src.id,
        target_id=tgt_aligned.id,
        alignment="video_based",
        blend_method="random",
        kept_indices=kept,
        label_weight=lw,
        seed=seed,
    )
    return _synthetic(src, coeffs, labels, prov, new_id)


def blend_selective(
    src: VideoRecord, tgt_aligned: VideoRecord, kept, w: float, *, new_id: str | None = None, seed: int = 0
) -> VideoRecord:
    """Keep ``kept`` dimensions from the source and weighted-blend the rest;
    labels blend with weight (|kept| + w*(50-|kept|))/50."""
    _check_pair(src, tgt_aligned)
    kept = _check_kept(kept)
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"blend weight out of [0, 1]: {w}")
    coeffs, labels, lw = _blend_arrays("selective_weighted", src.coeffs, src.labels, tgt_aligned.coeffs, tgt_aligned.labels, w, kept)
    prov = Provenance(
        source_id=src.id,
        target_id=tgt_aligned.id,
        alignment="video_based",
        blend_method="selective_weighted",
        weight=w,
        kept_indices=kept,
        label_weight=lw,
        seed=seed,
    )
    return _synthetic(src, coeffs, labels, prov, new_id)


def blend_frame_based(
    src: VideoRecord,
    index: FrameIndex,
    blend_method: str,
    rng: np.random.Generator,
    *,
    target_id: str = "pool",
    new_id: str | None = None,
    seed: int = 0,
) -> VideoRecord:
    """Blend each source frame with its AV-nearest pool frame.

    The index must not contain frames of the source itself. One weight and/or
    kept-subset is sampled per video from ``rng``. Produces non-smooth
    sequences; retained for comparison against the video-based default.
    """
    if src.id in index.videos:
        raise ValueError(f"frame index must exclude the source video {src.id!r}")
    kept, w = sample_blend_params(blend_method, rng)

    matched_coeffs = np.empty_like(src.coeffs)
    matched_labels = np.empty_like(src.labels)
    for t in range(len(src)):
        vid, frame, _ = index.nearest(float(src.labels[t, 0]), float(src.labels[t, 1]))
        pool_video = index.videos[vid]
        matched_coeffs[t] = pool_video.coeffs[frame]
        matched_labels[t] = pool_video.labels[frame]

    coeffs, labels, lw = _blend_arrays(blend_method, src.coeffs, src.labels, matched_coeffs, matched_labels, w, kept)
    prov = Provenance(
        source_id=src.id,
        target_id=target_id,
        alignment="frame_based",
        blend_method=blend_method,
        weight=w,
        kept_indices=kept,
        label_weight=lw,
        seed=seed,
    )
    return _synthetic(src, coeffs, labels, prov, new_id)


def _blend_pair_video_based(src, tgt, method, rng, new_id, seed):
    kept, w = sample_blend_params(method, rng)
    tgt_aligned = resample_video(tgt, len(src))
    if method == "full_weighted":
        return blend_full_weighted(src, tgt_aligned, w, new_id=new_id, seed=seed)
    if method == "random":
        return blend_random(src, tgt_aligned, kept, new_id=new_id, seed=seed)
    return blend_selective(src, tgt_aligned, kept, w, new_id=new_id, seed=seed)


def augment(d: Dataset, cfg: AugmentConfig) -> Dataset:
    """Extend the training partition with synthetic blended videos.

    Pipeline: cluster the train pool's mean-AV points, pick sources from the
    least-occupied clusters, pick targets per source, then blend each
    (source, target) pair. Emits exactly n_sources * n_targets_per_source
    synthetic videos with ids ``syn_<source>_<k>``, all assigned to train.
    Every random draw comes from a stream derived from (cfg.seed, source,
    target rank), so the output is byte-identical for any thread count.
    """
    if d.split is None:
        raise ValueError("augment requires a dataset with a split")
    pool_videos = [v for v in d.partition("train") if not v.synthetic]
    sel = cfg.selection
    sel.check_pool(len(pool_videos))

    descs = [video_stats(v) for v in pool_videos]
    if cfg.clustering == "kbin":
        clustering = kbin_cluster(descs, cfg.K)
    else:
        clustering = kmeans_cluster(descs, cfg.K, seed=cfg.seed)

    pool_ids = [v.id for v in pool_videos]
    by_id = {v.id: v for v in pool_videos}
    subjects = {v.id: v.subject_id for v in pool_videos} if sel.exclude_same_subject else None

    sources = select_sources(clustering, pool_ids, sel.n_sources)
    jobs = []
    for source_id in sources:
        targets = select_targets(
            source_id,
            sel.target_strategy,
            sel.n_targets_per_source,
            pool_ids,
            clustering,
            descs,
            cfg.seed,
            exclude_subjects_of=subjects,
        )
        for k, target_id in enumerate(targets):
            jobs.append((source_id, k, target_id))

    indexes: dict[str, FrameIndex] = {}
    if cfg.alignment == "frame_based":
        for source_id in sources:
            rest = [v for v in pool_videos if v.id != source_id]
            indexes[source_id] = build_frame_index(rest, cells_per_axis=cfg.frame_index_cells)

    def run(job):
        source_id, k, target_id = job
        pair_seed = derived_seed(cfg.seed, "pair", source_id, k)
        rng = np.random.default_rng(pair_seed)
        new_id = f"syn_{source_id}_{k}"
        if cfg.alignment == "video_based":
            return _blend_pair_video_based(
                by_id[source_id], by_id[target_id], cfg.blend_method, rng, new_id, pair_seed
            )
        return blend_frame_based(
            by_id[source_id],
            indexes[source_id],
            cfg.blend_method,
            rng,
            target_id=target_id,
            new_id=new_id,
            seed=pair_seed,
        )

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            synthetic = list(pool.map(run, jobs))
    else:
        synthetic = [run(job) for job in jobs]

    split = dict(d.split)
    for v in synthetic:
        split[v.id] = "train"
    return Dataset(videos=list(d.videos) + synthetic, fps=d.fps, split=split)


@dataclass(frozen=True)
class BalanceReport:
    """Before/after K-bin balance of the train partition."""

    n_synthetic: int
    entropy_before: float
    entropy_after: float
    min_count_before: int
    min_count_after: int

    def to_json_dict(self) -> dict:
        return {
            "n_synthetic": self.n_synthetic,
            "entropy_before": self.entropy_before,
            "entropy_after": self.entropy_after,
            "min_count_before": self.min_count_before,
            "min_count_after": self.min_count_after,
        }


def balance_report(before: Dataset, after: Dataset, K: int = 16) -> BalanceReport:
    """K-bin occupancy entropy and min count of the train partition, before vs after."""

    def kbin_stats(d: Dataset):
        descs = [video_stats(v) for v in d.partition("train")]
        return occupancy_report(kbin_cluster(descs, K))

    rep_before = kbin_stats(before)
    rep_after = kbin_stats(after)
    n_syn = sum(1 for v in after.videos if v.synthetic) - sum(1 for v in before.videos if v.synthetic)
    return BalanceReport(
        n_synthetic=n_syn,
        entropy_before=rep_before.entropy,
        entropy_after=rep_after.entropy,
        min_count_before=rep_before.min_count,
        min_count_after=rep_after.min_count,
    )
