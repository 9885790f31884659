"""Monte Carlo harness for power and null false-positive studies.

Two continents of countries.  In every country ``n_control`` members get
control outcomes ~ N(0, noise_sd) and ``n_treatment`` members get treatment
outcomes ~ N(-mu, noise_sd) ("asia") or N(+mu, noise_sd) ("africa").  Each
country is reduced to (difference in means, standard error) and clustered.

Every (seed, replicate, group, arm) draws from its own stream, derived with
``numpy.random.SeedSequence``, so replicates are independent, order free
and reproducible.  The streams do not depend on ``mu``: all points of a
power curve share common random numbers.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .engine import ClusteringConfig, ThresholdPolicy, min_path_pvalue, run_clustering
from .errors import InputError
from .stats_primitives import SampleSummary, welch_summary

__all__ = [
    "GroupSpec",
    "SimulationSpec",
    "PowerCurvePoint",
    "FprCurvePoint",
    "PRESETS",
    "two_continent_spec",
    "simulate_replicate",
    "simulate_two_continent_replicate",
    "power_curve",
    "fpr_curve",
    "unit_mu_grid",
]

ASIA = "asia"
AFRICA = "africa"
_ARM_CONTROL, _ARM_TREATMENT = 0, 1

# continent sizes; "full" matches real country counts
PRESETS = {
    "desk": (20, 20),
    "full": (48, 54),
}


@dataclass(frozen=True)
class GroupSpec:
    group_id: str
    continent: str
    n_control: int = 100
    n_treatment: int = 100


@dataclass(frozen=True)
class SimulationSpec:
    groups: tuple
    effect_mu: float = 0.0
    noise_sd: float = 0.1
    replications: int = 100
    seed: int = 20200101
    alpha: float = 0.05
    policy: ThresholdPolicy = ThresholdPolicy.BONFERRONI_K2

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "policy", ThresholdPolicy(self.policy))
        problems = self.problems()
        if problems:
            raise InputError("invalid simulation spec: " + "; ".join(problems))

    def problems(self):
        """Every invalid field, each named, rather than just the first."""
        out = []
        if not self.groups:
            out.append("groups: at least one group is required")
        ids = [g.group_id for g in self.groups]
        if len(set(ids)) != len(ids):
            out.append("groups: duplicate group ids")
        for g in self.groups:
            if g.continent not in (ASIA, AFRICA):
                out.append(f"groups[{g.group_id}].continent: must be {ASIA!r} or {AFRICA!r}")
            if g.n_control < 2:
                out.append(f"groups[{g.group_id}].n_control: must be >= 2")
            if g.n_treatment < 2:
                out.append(f"groups[{g.group_id}].n_treatment: must be >= 2")
        if not math.isfinite(self.effect_mu):
            out.append("effect_mu: must be finite")
        if not (math.isfinite(self.noise_sd) and self.noise_sd > 0):
            out.append("noise_sd: must be positive")
        if not (isinstance(self.replications, int) and self.replications >= 1):
            out.append("replications: must be a positive integer")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            out.append("seed: must be an integer in [0, 2**64)")
        if not 0.0 < self.alpha < 1.0:
            out.append("alpha: must lie in (0, 1)")
        return out

    @property
    def asia_ids(self):
        return frozenset(g.group_id for g in self.groups if g.continent == ASIA)

    @property
    def config(self):
        return ClusteringConfig(alpha=self.alpha, threshold_policy=self.policy)


@dataclass(frozen=True)
class PowerCurvePoint:
    mu: float
    exact_recovery_rate: float
    rejection_rate: float
    replications: int

    @property
    def mc_se(self):
        """Monte Carlo standard error of the recovery rate."""
        p = self.exact_recovery_rate
        return math.sqrt(p * (1.0 - p) / self.replications)


@dataclass(frozen=True)
class FprCurvePoint:
    alpha: float
    false_rejection_rate: float
    replications: int

    @property
    def mc_se(self):
        p = self.false_rejection_rate
        return math.sqrt(p * (1.0 - p) / self.replications)


def two_continent_spec(n_asia=None, n_africa=None, preset="full", n_per_arm=100, **kwargs):
    """Roster of ``n_asia`` + ``n_africa`` countries with equal arm sizes."""
    if preset not in PRESETS:
        raise InputError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    d_asia, d_africa = PRESETS[preset]
    n_asia = d_asia if n_asia is None else n_asia
    n_africa = d_africa if n_africa is None else n_africa
    groups = [GroupSpec(f"asia_{i:02d}", ASIA, n_per_arm, n_per_arm) for i in range(n_asia)]
    groups += [GroupSpec(f"africa_{i:02d}", AFRICA, n_per_arm, n_per_arm) for i in range(n_africa)]
    return SimulationSpec(groups=tuple(groups), **kwargs)


def _stream(seed, rep_index, group_id, arm):
    gkey = zlib.crc32(str(group_id).encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep_index, gkey, arm)))


def _summary(values):
    return SampleSummary(len(values), float(values.mean()), float(values.var(ddof=1)))


def simulate_replicate(spec: SimulationSpec, rep_index: int, effects: dict | None = None):
    """One replicate's per-group metrics.

    ``effects`` maps continent to the true treatment effect; by default
    asia gets ``-effect_mu`` and africa ``+effect_mu``.
    """
    if rep_index < 0:
        raise InputError("rep_index must be nonnegative")
    if effects is None:
        effects = {ASIA: -spec.effect_mu, AFRICA: spec.effect_mu}
    metrics = []
    for g in spec.groups:
        control = _stream(spec.seed, rep_index, g.group_id, _ARM_CONTROL).normal(0.0, spec.noise_sd, g.n_control)
        treat = _stream(spec.seed, rep_index, g.group_id, _ARM_TREATMENT).normal(
            effects[g.continent], spec.noise_sd, g.n_treatment
        )
        metrics.append(welch_summary(_summary(treat), _summary(control)).with_id(g.group_id))
    return metrics


def simulate_two_continent_replicate(spec: SimulationSpec, rep_index: int):
    return simulate_replicate(spec, rep_index)


def unit_mu_grid(points=20):
    """``points`` equispaced values on [0, 1], endpoints included."""
    return [float(x) for x in np.linspace(0.0, 1.0, points)]


def power_curve(spec_template: SimulationSpec, mu_grid: Sequence[float]):
    mu_grid = list(mu_grid)
    if not mu_grid:
        raise InputError("mu grid is empty")
    asia = spec_template.asia_ids
    config = spec_template.config
    points = []
    for mu in mu_grid:
        spec = replace(spec_template, effect_mu=float(mu))
        recovered = rejected = 0
        for rep in range(spec.replications):
            result = run_clustering(simulate_replicate(spec, rep), config=config)
            rejected += result.rejected
            recovered += any(c.members == asia for c in result.final_clusters)
        n = spec.replications
        points.append(PowerCurvePoint(float(mu), recovered / n, rejected / n, n))
    return points


def fpr_curve(
    n_groups: int,
    alpha_grid: Sequence[float],
    replications: int,
    seed: int,
    n_per_arm: int = 100,
    noise_sd: float = 0.1,
    policy=ThresholdPolicy.BONFERRONI_K2,
):
    """Rejection rate of the global null when every true effect is zero.

    Each replicate's merge path is computed once; a run at level alpha
    rejects iff some p* on that path is below alpha's threshold.
    """
    alpha_grid = [float(a) for a in alpha_grid]
    if not alpha_grid:
        raise InputError("alpha grid is empty")
    if n_groups < 2:
        raise InputError("n_groups must be >= 2")
    for a in alpha_grid:
        if not 0.0 < a < 1.0:
            raise InputError(f"alpha {a!r} outside (0, 1)")
    policy = ThresholdPolicy(policy)
    groups = [GroupSpec(f"g{i:02d}", ASIA, n_per_arm, n_per_arm) for i in range(n_groups)]
    spec = SimulationSpec(groups=tuple(groups), noise_sd=noise_sd, replications=replications, seed=seed)
    minima = np.empty(replications)
    for rep in range(replications):
        minima[rep] = min_path_pvalue(simulate_replicate(spec, rep, effects={ASIA: 0.0}))
    return [
        FprCurvePoint(a, float(np.mean(minima < policy.threshold(a, n_groups))), replications)
        for a in alpha_grid
    ]
