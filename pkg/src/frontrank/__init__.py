"""Multi-query retrieval by Pareto-front depth over manifold ranking scores."""

from .data import (
    FeatureDataset,
    LabelMatrix,
    QuerySet,
    RetrievalConfig,
    load_dataset,
    normalize_features,
    save_dataset,
    validate_query_set,
)
from .emr import (
    EmrModel,
    RankingVector,
    build_emr_model,
    classic_mr_iterate,
    classic_mr_rank,
    emr_rank,
    load_model,
    save_model,
)
from .engine import (
    RetrievalResult,
    RetrievedItem,
    mq_avg_retrieve,
    mq_max_retrieve,
    pfm_retrieve,
    scalarized_retrieve,
)
from .metrics import (
    MetricReport,
    QueryPairBatch,
    dcg_at_k,
    make_bridge_benchmark,
    mq_uniq_rel,
    ndcg_at_k,
    run_query_pair_experiment,
    sample_query_pairs,
)
from .pareto import (
    ParetoLayering,
    depth_at,
    dominates,
    longest_chain_depths,
    middle_out_order,
    non_dominated_sort,
)

__version__ = "0.1.0"

__all__ = [
    "FeatureDataset",
    "LabelMatrix",
    "QuerySet",
    "RetrievalConfig",
    "load_dataset",
    "save_dataset",
    "normalize_features",
    "validate_query_set",
    "EmrModel",
    "RankingVector",
    "build_emr_model",
    "emr_rank",
    "classic_mr_rank",
    "classic_mr_iterate",
    "save_model",
    "load_model",
    "ParetoLayering",
    "dominates",
    "non_dominated_sort",
    "longest_chain_depths",
    "depth_at",
    "middle_out_order",
    "RetrievalResult",
    "RetrievedItem",
    "pfm_retrieve",
    "mq_avg_retrieve",
    "mq_max_retrieve",
    "scalarized_retrieve",
    "mq_uniq_rel",
    "dcg_at_k",
    "ndcg_at_k",
    "QueryPairBatch",
    "sample_query_pairs",
    "run_query_pair_experiment",
    "MetricReport",
    "make_bridge_benchmark",
    "__version__",
]
