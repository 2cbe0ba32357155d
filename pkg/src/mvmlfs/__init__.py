"""Multi-view multi-label feature selection by non-negative global-view
reconstruction, with confidence-aware sample weighting and graph-regularized
label-space embedding."""

from .datasets import (
    DatasetError,
    FoldAssignment,
    MultiViewDataset,
    kfold_split,
    load_dataset,
    normalize_views,
)
from .evaluation import (
    MetricsReport,
    MlknnModel,
    SweepResult,
    compute_metrics,
    cross_validated_sweep,
    mlknn_predict,
    mlknn_train,
)
from .fusion import FusionMatrix, ViewWeights, build_fusion, compute_view_weights
from .graph import GraphPair, knn_affinity, smoothness_trace
from .label_space import (
    GlobalDistribution,
    LabelKernel,
    global_distribution,
    label_kernel,
    label_laplacian,
)
from .ranking import FeatureRanking, rank_features, select_top_percent
from .solver import (
    ConvergenceTrace,
    Hyperparams,
    ModelState,
    evaluate_objective,
    fit,
    init_state,
    sparsity_diagonal,
    update_confidence,
    update_feature_weights,
    update_label_coefficients,
)

__all__ = [
    "ConvergenceTrace",
    "DatasetError",
    "FeatureRanking",
    "FoldAssignment",
    "FusionMatrix",
    "GlobalDistribution",
    "GraphPair",
    "Hyperparams",
    "LabelKernel",
    "MetricsReport",
    "MlknnModel",
    "ModelState",
    "MultiViewDataset",
    "SweepResult",
    "ViewWeights",
    "build_fusion",
    "compute_metrics",
    "compute_view_weights",
    "cross_validated_sweep",
    "evaluate_objective",
    "fit",
    "global_distribution",
    "init_state",
    "kfold_split",
    "knn_affinity",
    "label_kernel",
    "label_laplacian",
    "load_dataset",
    "mlknn_predict",
    "mlknn_train",
    "normalize_views",
    "rank_features",
    "select_top_percent",
    "smoothness_trace",
    "sparsity_diagonal",
    "update_confidence",
    "update_feature_weights",
    "update_label_coefficients",
]

__version__ = "0.1.0"
