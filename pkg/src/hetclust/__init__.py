"""Likelihood-ratio agglomerative clustering for heterogeneous effects and fairness audits."""

from .engine import (
    ClusteringConfig,
    ClusteringResult,
    MergeStep,
    ThresholdPolicy,
    argmax_pair,
    equalized_odds_clustering,
    merge_path,
    pairwise_pvalue_table,
    run_clustering,
)
from .errors import HetclustError
from .similarity import (
    ClusterStats,
    GroupMetric,
    LikelihoodRatioNotion,
    MetricKind,
    SimilarityNotion,
    classifier_rate_metric,
    lr_pvalue,
    lr_statistic,
    make_cluster,
    merge_clusters,
)
from .stats_primitives import PValue, SampleSummary, chi2_sf_1df, normal_sf, welch_summary

__version__ = "0.1.0"
