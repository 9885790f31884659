"""Sufficient statistics and likelihood-ratio similarity between clusters.

Each group is summarised by an estimate and its standard error, modelled as
``estimate ~ N(mu, sd**2)``.  A cluster C carries two additive statistics

    S_C = sum(1 / sd_n**2)              (precision_sum)
    D_C = sum(estimate_n / sd_n**2)     (weighted_sum)

and the maximum likelihood common mean of C is ``D_C / S_C``.  Testing
``mu_a == mu_b`` for two disjoint clusters by a generalized likelihood ratio
gives a statistic that is chi-square with one degree of freedom under the
null.
"""

from __future__ import annotations

import enum
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateRateError,
    DomainError,
    InsufficientDataError,
    InvalidMergeError,
)
from .stats_primitives import PValue, chi2_sf_1df, chi2_sf_1df_array

__all__ = [
    "GroupMetric",
    "ClusterStats",
    "MetricKind",
    "SimilarityNotion",
    "LikelihoodRatioNotion",
    "make_cluster",
    "merge_clusters",
    "lr_statistic",
    "lr_pvalue",
    "classifier_rate_metric",
]


@dataclass(frozen=True)
class GroupMetric:
    """One group's estimated effect and its standard error."""

    group_id: Hashable
    estimate: float
    sd: float

    def __post_init__(self):
        if not math.isfinite(self.estimate):
            raise DomainError(f"estimate for {self.group_id!r} is not finite")
        if not (math.isfinite(self.sd) and self.sd > 0.0):
            raise DomainError(f"sd for {self.group_id!r} must be positive and finite, got {self.sd!r}")

    def with_id(self, group_id):
        return GroupMetric(group_id, self.estimate, self.sd)


@dataclass(frozen=True)
class ClusterStats:
    """A set of group ids with cached precision and weighted sums.

    ``key`` is the sorted tuple of member ids; it orders clusters for
    deterministic tie-breaking.
    """

    members: frozenset
    precision_sum: float
    weighted_sum: float
    key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.members:
            raise DomainError("a cluster needs at least one member")
        if not (math.isfinite(self.precision_sum) and self.precision_sum > 0.0):
            raise DomainError(f"precision_sum must be positive and finite, got {self.precision_sum!r}")
        if not math.isfinite(self.weighted_sum / self.precision_sum):
            raise DomainError("cluster mean is not finite")
        try:
            key = tuple(sorted(self.members))
        except TypeError as exc:
            raise DomainError(f"group ids must be mutually orderable: {exc}") from None
        object.__setattr__(self, "key", key)

    @property
    def mle_mean(self):
        return self.weighted_sum / self.precision_sum

    @property
    def size(self):
        return len(self.members)


def make_cluster(metric: GroupMetric) -> ClusterStats:
    precision = 1.0 / (metric.sd * metric.sd)
    return ClusterStats(frozenset([metric.group_id]), precision, metric.estimate * precision)


def merge_clusters(a: ClusterStats, b: ClusterStats) -> ClusterStats:
    if not a.members.isdisjoint(b.members):
        raise InvalidMergeError(f"clusters overlap on {sorted(a.members & b.members)!r}")
    return ClusterStats(
        a.members | b.members,
        a.precision_sum + b.precision_sum,
        a.weighted_sum + b.weighted_sum,
    )


def lr_statistic(a: ClusterStats, b: ClusterStats) -> float:
    """Likelihood-ratio statistic for equal means of two disjoint clusters.

    Evaluated as ``S_a S_b / (S_a + S_b) * (mean_a - mean_b)**2``, which is
    free of the cancellation the equivalent square-root form suffers when
    one precision dwarfs the other.  For singletons this is
    ``(x_a - x_b)**2 / (sd_a**2 + sd_b**2)``.
    """
    if not a.members.isdisjoint(b.members):
        raise InvalidMergeError(f"clusters overlap on {sorted(a.members & b.members)!r}")
    sa, sb = a.precision_sum, b.precision_sum
    diff = a.weighted_sum / sa - b.weighted_sum / sb
    return sa * sb / (sa + sb) * diff * diff


def lr_pvalue(a: ClusterStats, b: ClusterStats) -> PValue:
    return chi2_sf_1df(lr_statistic(a, b))


class SimilarityNotion(ABC):
    """Pairwise test of "cluster a is similar to cluster b".

    Implementations must be merge invariant: if three clusters are pairwise
    similar, the merge of any two stays similar to the third.  Otherwise the
    sequential procedure loses its error control.
    """

    name = "abstract"

    @abstractmethod
    def pvalue(self, a: ClusterStats, b: ClusterStats) -> PValue:
        ...

    def pvalues(self, a: ClusterStats, others: Sequence[ClusterStats]) -> np.ndarray:
        """p-values of ``a`` against each of ``others``; override to vectorise."""
        return np.array([float(self.pvalue(a, b)) for b in others], dtype=np.float64)


class LikelihoodRatioNotion(SimilarityNotion):
    """Equality of (precision-weighted) means.

    Merge invariant: if three clusters share a common mean, the
    precision-weighted mean of any two of them is that same mean.  Applies
    equally to lifts, absolute treatment effects and classifier rates.
    """

    name = "likelihood-ratio"

    def pvalue(self, a, b):
        # routed through the batch path so scalar and batch calls agree bit for bit
        return PValue(self.pvalues(a, [b])[0])

    def pvalues(self, a, others):
        for b in others:
            if not a.members.isdisjoint(b.members):
                raise InvalidMergeError(f"clusters overlap on {sorted(a.members & b.members)!r}")
        sb = np.fromiter((b.precision_sum for b in others), dtype=np.float64, count=len(others))
        wb = np.fromiter((b.weighted_sum for b in others), dtype=np.float64, count=len(others))
        sa = a.precision_sum
        diff = a.weighted_sum / sa - wb / sb
        return chi2_sf_1df_array(sa * sb / (sa + sb) * diff * diff)

    def __repr__(self):
        return "LikelihoodRatioNotion()"


class MetricKind(str, enum.Enum):
    FPR = "fpr"
    TPR = "tpr"
    POSITIVE_RATE = "positive-rate"
    MISCLASSIFICATION_RATE = "misclassification"


def _as_pair(row):
    if isinstance(row, dict):
        return row["classification"], row["label"]
    if hasattr(row, "classification"):
        return row.classification, row.label
    c, y = row
    return c, y


def classifier_rate_metric(group_id, predictions: Iterable, metric_kind) -> GroupMetric:
    """Empirical classifier rate for one group with its binomial standard error.

    ``predictions`` yields ``(classification, label)`` pairs (or dicts /
    objects with those fields), each 0 or 1.  FPR is computed over label-0
    rows, TPR over label-1 rows, the other kinds over every row.
    """
    kind = MetricKind(metric_kind)
    hits = total = 0
    for row in predictions:
        c, y = _as_pair(row)
        if c not in (0, 1) or y not in (0, 1):
            raise DomainError(f"classification and label must be 0/1, got ({c!r}, {y!r})")
        if kind is MetricKind.FPR:
            if y != 0:
                continue
            hit = c == 1
        elif kind is MetricKind.TPR:
            if y != 1:
                continue
            hit = c == 1
        elif kind is MetricKind.POSITIVE_RATE:
            hit = c == 1
        else:
            hit = c != y
        total += 1
        hits += hit
    if total == 0:
        raise InsufficientDataError(f"group {group_id!r} has no rows relevant to {kind.value}")
    rate = hits / total
    if hits == 0 or hits == total:
        raise DegenerateRateError(
            f"group {group_id!r} has {kind.value} = {rate:g} over {total} rows; standard error would be 0"
        )
    return GroupMetric(group_id, rate, math.sqrt(rate * (1.0 - rate) / total))
