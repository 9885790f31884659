"""Sequential test-and-merge agglomerative clustering.

Start from K singleton clusters.  At every iteration take the largest
pairwise p-value p*.  If p* is below the threshold, every remaining pair is
significantly dissimilar: reject global homogeneity and report the current
clusters.  Otherwise merge the argmax pair and continue.  A single remaining
cluster ends the run without rejection.

Pair p-values live in a dense K x K matrix with a cached maximum per row.
A merge retires one slot, reuses the other for the merged cluster and
evaluates ``m - 1`` fresh pairs against it, so a full run evaluates at most
``K(K-1)/2 + (K-1)(K-2)/2`` p-values.  Only rows whose cached maximum pointed
at a merged slot are rescanned.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, InputError
from .similarity import (
    ClusterStats,
    GroupMetric,
    LikelihoodRatioNotion,
    MetricKind,
    SimilarityNotion,
    classifier_rate_metric,
    make_cluster,
    merge_clusters,
)
from .stats_primitives import PValue

__all__ = [
    "ThresholdPolicy",
    "ClusteringConfig",
    "MergeStep",
    "ClusteringResult",
    "run_clustering",
    "pairwise_pvalue_table",
    "argmax_pair",
    "merge_path",
    "min_path_pvalue",
    "equalized_odds_clustering",
]

LEXICOGRAPHIC = "lexicographic"


class ThresholdPolicy(str, enum.Enum):
    """How the level alpha is split across the sequential tests.

    ``PER_ITERATION_K`` (alpha/K) is only valid when each iteration's
    p-values are independent of earlier merge decisions, e.g. when every
    iteration is tested on its own data split.  ``BONFERRONI_K2``
    (alpha/K**2) covers the order-K**2 pairwise tests made on one dataset.
    """

    PER_ITERATION_K = "per-k"
    BONFERRONI_K2 = "bonferroni-k2"

    def threshold(self, alpha, n_groups):
        if self is ThresholdPolicy.PER_ITERATION_K:
            return alpha / n_groups
        return alpha / (n_groups * n_groups)


@dataclass(frozen=True)
class ClusteringConfig:
    alpha: float = 0.05
    threshold_policy: ThresholdPolicy = ThresholdPolicy.BONFERRONI_K2
    tie_break: str = LEXICOGRAPHIC

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "threshold_policy", ThresholdPolicy(self.threshold_policy))
        if self.tie_break != LEXICOGRAPHIC:
            raise DomainError(f"unknown tie-break rule {self.tie_break!r}")

    def threshold(self, n_groups):
        return self.threshold_policy.threshold(self.alpha, n_groups)


@dataclass(frozen=True)
class MergeStep:
    iteration: int
    merged_pair: tuple  # (frozenset, frozenset), ordered by sorted member ids
    max_pvalue: PValue
    threshold_used: float


@dataclass
class ClusteringResult:
    rejected: bool
    final_clusters: list  # ClusterStats, ordered by sorted member ids
    trace: list = field(default_factory=list)
    decision_pvalue: PValue | None = None
    threshold: float = 0.0
    n_groups: int = 0

    def partition(self):
        """Final clusters as a set of frozensets of group ids."""
        return {c.members for c in self.final_clusters}


def _pair_key(a: ClusterStats, b: ClusterStats):
    # pair order used for tie-breaking: by sorted member ids, smaller cluster first
    return (a.key, b.key) if a.key < b.key else (b.key, a.key)


def pairwise_pvalue_table(clusters: Sequence[ClusterStats], notion: SimilarityNotion | None = None):
    """p-value for every unordered pair, keyed by ``(key_a, key_b)`` with ``key_a < key_b``."""
    if len(clusters) < 2:
        raise InputError("need at least two clusters for a p-value table")
    notion = notion or LikelihoodRatioNotion()
    table = {}
    for a, b in itertools.combinations(clusters, 2):
        table[_pair_key(a, b)] = PValue(notion.pvalue(a, b))
    return table


def argmax_pair(table: Mapping):
    """Pair with the largest p-value; ties go to the lexicographically smallest pair."""
    if not table:
        raise InputError("empty p-value table")
    pair = min(table, key=lambda k: (-table[k], k))
    return pair, table[pair]


def _validate_metrics(metrics):
    if len(metrics) == 0:
        raise InputError("at least one group is required")
    seen = set()
    dupes = []
    for m in metrics:
        if not isinstance(m, GroupMetric):
            raise InputError(f"expected GroupMetric, got {type(m).__name__}")
        if m.group_id in seen:
            dupes.append(m.group_id)
        seen.add(m.group_id)
    if dupes:
        raise InputError(f"duplicate group ids: {dupes!r}")


def _checked(pvals, n):
    pvals = np.asarray(pvals, dtype=np.float64)
    if pvals.shape != (n,) or not np.all((pvals >= 0.0) & (pvals <= 1.0)):
        raise DomainError("similarity notion returned p-values outside [0, 1]")
    return pvals


def _agglomerate(metrics, notion, thr):
    """Core loop. Returns (rejected, decision p*, trace, final clusters)."""
    k = len(metrics)
    # slot i holds an active cluster or None; pmat[i, j] is the pair's p-value,
    # -1 where either slot is retired and on the diagonal
    slots = [make_cluster(m) for m in metrics]
    pmat = np.full((k, k), -1.0)
    for i in range(k - 1):
        row = _checked(notion.pvalues(slots[i], slots[i + 1:]), k - 1 - i)
        pmat[i, i + 1:] = row
        pmat[i + 1:, i] = row
    rowmax = pmat.max(axis=1)
    active = np.ones(k, dtype=bool)

    trace = []
    n_active = k
    while n_active > 1:
        p_star = float(rowmax.max())
        rows = np.flatnonzero(rowmax == p_star)
        if len(rows) == 2:
            i, j = int(rows[0]), int(rows[1])
        else:
            # several pairs share p*.  The lexicographically smallest pair starts
            # with the smallest-keyed cluster that has a tied partner, and pairs
            # it with its smallest-keyed tied partner.
            i = int(min(rows, key=lambda r: slots[r].key))
            j = int(min(np.flatnonzero(pmat[i] == p_star), key=lambda c: slots[c].key))
        p_star = PValue(p_star)
        if p_star < thr:
            return True, p_star, trace, [c for c in slots if c is not None]

        a, b = slots[i], slots[j]
        first, second = (a, b) if a.key < b.key else (b, a)
        trace.append(MergeStep(len(trace), (first.members, second.members), p_star, thr))
        merged = merge_clusters(first, second)

        # merged cluster takes slot i; slot j is retired
        slots[i], slots[j] = merged, None
        active[j] = False
        n_active -= 1
        others = np.flatnonzero(active)
        others = others[others != i]
        # rows whose maximum sat on slot i or j get rescanned below
        prev = rowmax[others]
        stale = (pmat[others, i] == prev) | (pmat[others, j] == prev)
        pmat[j, :] = -1.0
        pmat[:, j] = -1.0
        rowmax[j] = -1.0
        new = _checked(notion.pvalues(merged, [slots[o] for o in others]), len(others))
        pmat[i, others] = new
        pmat[others, i] = new
        rowmax[i] = new.max() if len(new) else -1.0
        rowmax[others] = np.maximum(prev, new)
        if stale.any():
            srows = others[stale]
            rowmax[srows] = pmat[srows].max(axis=1)

    return False, None, trace, [c for c in slots if c is not None]


def run_clustering(
    metrics: Sequence[GroupMetric],
    notion: SimilarityNotion | None = None,
    config: ClusteringConfig | None = None,
) -> ClusteringResult:
    """Test global similarity of the groups and report dissimilar clusters.

    The threshold is fixed from the initial number of groups K.  K == 1 is
    returned unrejected with an empty trace.
    """
    metrics = list(metrics)
    _validate_metrics(metrics)
    notion = notion or LikelihoodRatioNotion()
    config = config or ClusteringConfig()
    thr = config.threshold(len(metrics))
    rejected, decision, trace, final = _agglomerate(metrics, notion, thr)
    return ClusteringResult(
        rejected=rejected,
        final_clusters=sorted(final, key=lambda c: c.key),
        trace=trace,
        decision_pvalue=decision,
        threshold=thr,
        n_groups=len(metrics),
    )


def merge_path(metrics: Sequence[GroupMetric], notion: SimilarityNotion | None = None):
    """Full K - 1 step merge trace, ignoring any threshold.

    Until it stops, a thresholded run follows exactly this path, so
    ``run_clustering`` rejects at level alpha iff some step's p* is below
    the threshold.
    """
    metrics = list(metrics)
    _validate_metrics(metrics)
    _, _, trace, _ = _agglomerate(metrics, notion or LikelihoodRatioNotion(), -1.0)
    return trace


def min_path_pvalue(metrics, notion=None):
    """Smallest p* along the full merge path (1.0 for a single group)."""
    trace = merge_path(metrics, notion)
    return min((float(s.max_pvalue) for s in trace), default=1.0)


def equalized_odds_clustering(rows_by_group: Mapping, config: ClusteringConfig | None = None):
    """Cluster groups on FPR (label 0 stratum) and TPR (label 1 stratum) separately.

    ``rows_by_group`` maps group id to an iterable of (classification, label)
    pairs.  Returns ``{"fpr": ClusteringResult, "tpr": ClusteringResult}``.
    """
    groups = {g: list(rows) for g, rows in rows_by_group.items()}
    out = {}
    for kind in (MetricKind.FPR, MetricKind.TPR):
        metrics = [classifier_rate_metric(g, rows, kind) for g, rows in groups.items()]
        out[kind.value] = run_clustering(metrics, LikelihoodRatioNotion(), config)
    return out
