"""cliplab: group-label video clips on a 2D map of their features.

Per-clip feature vectors are embedded into two dimensions with
Barnes-Hut t-SNE; a human draws lassos around clusters and labels whole
groups at once, round after round, while quality metrics estimate how
annotate-able the current map is.
"""

from .core import (
    ClipRecord,
    Dataset,
    LabelAssignment,
    LabelStore,
    TemporalSegment,
    UNLABELED,
    VideoMeta,
    export_document,
    export_segments,
    make_clips,
    middle_frame,
)
from .embedding import Embedding, TsneConfig, pca2, run_tsne
from .errors import CliplabError
from .geometry import LassoPolygon
from .ingest import load_dataset, refresh_features, write_features
from .metrics import (
    MetricsReport,
    compute_report,
    homogeneity_completeness,
    kmeans,
    knn_accuracy,
    time_gain,
)
from .session import (
    SessionState,
    advance_round,
    assign_label,
    lasso_select,
    load_session,
    new_session,
    record_toa,
    save_session,
    select_unlabeled_batch,
)

__version__ = "0.1.0"

__all__ = [
    "ClipRecord",
    "CliplabError",
    "Dataset",
    "Embedding",
    "LabelAssignment",
    "LabelStore",
    "LassoPolygon",
    "MetricsReport",
    "SessionState",
    "TemporalSegment",
    "TsneConfig",
    "UNLABELED",
    "VideoMeta",
    "advance_round",
    "assign_label",
    "compute_report",
    "export_document",
    "export_segments",
    "homogeneity_completeness",
    "kmeans",
    "knn_accuracy",
    "lasso_select",
    "load_dataset",
    "load_session",
    "make_clips",
    "middle_frame",
    "new_session",
    "pca2",
    "record_toa",
    "refresh_features",
    "run_tsne",
    "save_session",
    "select_unlabeled_batch",
    "time_gain",
    "write_features",
]
