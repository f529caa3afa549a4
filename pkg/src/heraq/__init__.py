"""heraq: lossy matrix compression by product quantization, with an optional
hierarchical row-pair reordering stage that homogenizes columns before the
codebooks are learned."""

from ._kernels import backend_name
from .bench import (
    ExperimentConfig,
    ResultRow,
    SummaryRow,
    load_config,
    run_experiment,
    summarize,
)
from .codec import (
    ArtifactFormatError,
    BitBudget,
    InfeasibleBudgetError,
    account_hera,
    account_pq,
    code_index_bits,
    load_artifact,
    match_budget,
    save_artifact,
)
from .kmeans import KMeansConfig, KMeansResult, kmeans_assign, kmeans_fit
from .matrix import (
    DatasetFormatError,
    TruncNormalSpec,
    as_matrix,
    generate_truncated_normal,
    load_matrix,
    merge_rows_by_mask,
    save_matrix,
    split_rows_by_mask,
)
from .metrics import ErrorReport, compute_errors
from .quantizer import (
    FeatureMap,
    HeraArtifact,
    PqArtifact,
    PqConfig,
    dequantize,
    hera_dequantize,
    hera_pair_merge,
    hera_pair_split,
    hera_quantize,
    hera_transform,
    hera_untransform,
    make_pq_config,
    pq_dequantize,
    pq_quantize,
)

__version__ = "0.1.0"

__all__ = [
    "ArtifactFormatError",
    "BitBudget",
    "DatasetFormatError",
    "ErrorReport",
    "ExperimentConfig",
    "FeatureMap",
    "HeraArtifact",
    "InfeasibleBudgetError",
    "KMeansConfig",
    "KMeansResult",
    "PqArtifact",
    "PqConfig",
    "ResultRow",
    "SummaryRow",
    "TruncNormalSpec",
    "account_hera",
    "account_pq",
    "as_matrix",
    "backend_name",
    "code_index_bits",
    "compute_errors",
    "dequantize",
    "generate_truncated_normal",
    "hera_dequantize",
    "hera_pair_merge",
    "hera_pair_split",
    "hera_quantize",
    "hera_transform",
    "hera_untransform",
    "kmeans_assign",
    "kmeans_fit",
    "load_artifact",
    "load_config",
    "load_matrix",
    "make_pq_config",
    "match_budget",
    "merge_rows_by_mask",
    "pq_dequantize",
    "pq_quantize",
    "run_experiment",
    "save_artifact",
    "save_matrix",
    "split_rows_by_mask",
    "summarize",
    "__version__",
]
