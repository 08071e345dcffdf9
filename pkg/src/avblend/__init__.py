"""Rebalancing toolkit for arousal/valence-labeled expression-coefficient data.

Synthesizes new coefficient sequences for underrepresented AV regions by
blending existing videos, plus the metric stack and reporting needed to
measure the effect.
"""

from .avspace import (
    Clustering,
    FrameIndex,
    OccupancyReport,
    VideoDescriptor,
    build_frame_index,
    frame_histogram,
    kbin_cluster,
    kmeans_cluster,
    occupancy_report,
    video_stats,
)
from .blending import (
    AugmentConfig,
    BalanceReport,
    augment,
    balance_report,
    blend_frame_based,
    blend_full_weighted,
    blend_random,
    blend_selective,
    resample_video,
)
from .dataset import (
    AVSample,
    CoefficientOutlierWarning,
    Dataset,
    DatasetFormatError,
    Provenance,
    VideoRecord,
    load_dataset,
    save_dataset,
    split_by_subject,
)
from .metrics import (
    LossWeights,
    UndefinedCorrelationError,
    ccc,
    combined_loss,
    eval_predictions,
    pcc,
    rmse,
)
from .selection import SelectionConfig, select_sources, select_targets
from .synthgen import GenConfig, LinearOracle, generate_corpus, oracle_labels

__version__ = "0.1.0"
