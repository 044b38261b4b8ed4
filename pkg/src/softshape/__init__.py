"""Clustering for collections of equal-length time series.

Two complementary algorithms over one panel: soft-DTW k-means (smoothed
dynamic-time-warping divergence with Fréchet-mean barycenters) and k-shape
(shift-invariant normalised cross-correlation with spectral shape
centroids), plus internal validity indices, inter-classifier agreement
analysis, and a CSV-to-artifacts pipeline.
"""

from .barycenter import BarycenterResult, frechet_variance, soft_dtw_barycenter
from .core import (
    Dataset,
    DatasetValidationError,
    ScalingReport,
    TimeSeries,
    normalize_dataset,
    validate_dataset,
    znormalize,
)
from .kmeans import KMeansConfig, assign, fit_soft_dtw_kmeans, inertia
from .kshape import (
    CrossCorrelationSequence,
    KShapeConfig,
    SbdResult,
    cross_correlation_fft,
    cross_correlation_naive,
    fit_kshape,
    pairwise_sbd,
    sbd,
    sbd_distance,
    shape_extraction,
)
from .model import ClusterModel
from .pipeline import (
    IngestReport,
    PipelineConfig,
    PipelineError,
    RunReport,
    emit_outputs,
    ingest_cases,
    run_pipeline,
)
from .softdtw import (
    CostMatrix,
    SoftDtwEvaluation,
    average_alignment,
    cost_matrix,
    dtw,
    enumerate_alignments,
    gak,
    pairwise_soft_dtw,
    soft_dtw,
    soft_dtw_divergence,
    soft_dtw_grad,
    soft_min,
)
from .validation import (
    AgreementReport,
    ValidityReport,
    adjusted_rand_index,
    agreement_matrix,
    calinski_harabasz,
    consensus_groups,
    silhouette,
)

__version__ = "0.1.0"

__all__ = [
    "AgreementReport",
    "BarycenterResult",
    "ClusterModel",
    "CostMatrix",
    "CrossCorrelationSequence",
    "Dataset",
    "DatasetValidationError",
    "IngestReport",
    "KMeansConfig",
    "KShapeConfig",
    "PipelineConfig",
    "PipelineError",
    "RunReport",
    "SbdResult",
    "ScalingReport",
    "SoftDtwEvaluation",
    "TimeSeries",
    "ValidityReport",
    "adjusted_rand_index",
    "agreement_matrix",
    "assign",
    "average_alignment",
    "calinski_harabasz",
    "consensus_groups",
    "cost_matrix",
    "cross_correlation_fft",
    "cross_correlation_naive",
    "dtw",
    "emit_outputs",
    "enumerate_alignments",
    "fit_kshape",
    "fit_soft_dtw_kmeans",
    "frechet_variance",
    "gak",
    "inertia",
    "ingest_cases",
    "normalize_dataset",
    "pairwise_sbd",
    "pairwise_soft_dtw",
    "run_pipeline",
    "sbd",
    "sbd_distance",
    "shape_extraction",
    "silhouette",
    "soft_dtw",
    "soft_dtw_barycenter",
    "soft_dtw_divergence",
    "soft_dtw_grad",
    "soft_min",
    "validate_dataset",
    "znormalize",
]
