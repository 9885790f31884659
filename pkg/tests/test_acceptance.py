"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line through ``acceptance_report``; the
lines are repeated in the terminal summary.
"""

import math
import statistics
import time

import numpy as np
import pytest

from hetclust.engine import ClusteringConfig, ThresholdPolicy, run_clustering
from hetclust.similarity import (
    GroupMetric,
    LikelihoodRatioNotion,
    lr_statistic,
    make_cluster,
    merge_clusters,
)
from hetclust.simulation import fpr_curve, power_curve, two_continent_spec, unit_mu_grid
from hetclust.stats_primitives import chi2_sf_1df, normal_sf

from oracles import brute_force_clustering, lr_sqrt_form

SEED = 20200101


def test_power_at_0_2(acceptance_report):
    spec = two_continent_spec(preset="desk", replications=100, seed=SEED, alpha=0.05)
    t0 = time.perf_counter()
    (pt,) = power_curve(spec, [0.2])
    elapsed = time.perf_counter() - t0
    ok = pt.exact_recovery_rate >= 0.9
    acceptance_report(1, ok, f"recovery {pt.exact_recovery_rate:.3f} (need >= 0.9), "
                             f"rejection {pt.rejection_rate:.3f}, {elapsed:.1f}s")
    assert ok


def test_power_plateau(acceptance_report):
    spec = two_continent_spec(preset="desk", replications=100, seed=SEED, alpha=0.05)
    pts = power_curve(spec, unit_mu_grid(20))
    drops = [
        (a.mu, b.mu)
        for i, a in enumerate(pts)
        for b in pts[i + 1:]
        if b.exact_recovery_rate < a.exact_recovery_rate - 3 * math.sqrt(a.mc_se ** 2 + b.mc_se ** 2)
    ]
    low = [(round(p.mu, 3), p.exact_recovery_rate) for p in pts if p.mu >= 0.3 and p.exact_recovery_rate < 0.95]
    ok = not drops and not low
    acceptance_report(2, ok, f"monotone violations {len(drops)}, points with mu >= 0.3 below 0.95: "
                             f"{len(low)}/{sum(p.mu >= 0.3 for p in pts)}, "
                             f"min recovery there {min(p.exact_recovery_rate for p in pts if p.mu >= 0.3):.3f}")
    assert ok


def test_null_fpr(acceptance_report):
    pts = fpr_curve(21, [0.05, 0.5], replications=2000, seed=SEED, policy=ThresholdPolicy.BONFERRONI_K2)
    r05, r50 = pts[0].false_rejection_rate, pts[1].false_rejection_rate
    ok = r05 <= 0.08 and r50 <= 0.5
    acceptance_report(3, ok, f"rate {r05:.4f} at alpha 0.05 (need <= 0.08), {r50:.4f} at alpha 0.5 (need <= 0.5)")
    assert ok


def _random_cluster(rng, prefix):
    n = int(rng.integers(1, 21))
    c = None
    for i in range(n):
        m = make_cluster(GroupMetric(f"{prefix}{i}", float(rng.uniform(-10, 10)), float(10 ** rng.uniform(-3, 1))))
        c = m if c is None else merge_clusters(c, m)
    return c


def test_formula_equivalence(acceptance_report):
    rng = np.random.default_rng(SEED)
    worst_sqrt = worst_single = 0.0
    for _ in range(10_000):
        a, b = _random_cluster(rng, "a"), _random_cluster(rng, "b")
        canon = lr_statistic(a, b)
        other = lr_sqrt_form(a.precision_sum, a.weighted_sum, b.precision_sum, b.weighted_sum)
        worst_sqrt = max(worst_sqrt, abs(canon - other) / max(1.0, other))

        e1, e2 = rng.uniform(-10, 10, 2)
        s1, s2 = 10 ** rng.uniform(-3, 1, 2)
        lr = lr_statistic(make_cluster(GroupMetric("x", e1, s1)), make_cluster(GroupMetric("y", e2, s2)))
        expected = (e1 - e2) ** 2 / (s1 ** 2 + s2 ** 2)
        worst_single = max(worst_single, abs(lr - expected) / max(1.0, expected))
    ok = worst_sqrt <= 1e-10 and worst_single <= 1e-12
    acceptance_report(4, ok, f"max rel err sqrt form {worst_sqrt:.2e} (<= 1e-10), "
                             f"singleton {worst_single:.2e} (<= 1e-12)")
    assert ok


def _instance(rng, k_max=8):
    k = int(rng.integers(1, k_max + 1))
    centers = rng.uniform(-1, 1, int(rng.integers(1, 4)))
    ids = [f"g{i}" for i in rng.permutation(k)]
    if rng.random() < 0.25:
        # forced ties: repeated estimates and sds
        ests = rng.choice([0.0, 0.1, 0.4], k)
        sds = rng.choice([0.05, 0.1], k)
    else:
        ests = rng.choice(centers, k) + rng.normal(0, 0.05, k)
        sds = 10 ** rng.uniform(-2, -0.5, k)
    return [GroupMetric(g, float(e), float(s)) for g, e, s in zip(ids, ests, sds)]


def test_engine_oracle_equivalence(acceptance_report):
    rng = np.random.default_rng(SEED)
    notion = LikelihoodRatioNotion()
    mismatches = 0
    for _ in range(200):
        ms = _instance(rng)
        cfg = ClusteringConfig(float(rng.choice([0.01, 0.05, 0.3])), rng.choice(["per-k", "bonferroni-k2"]))
        r = run_clustering(ms, notion, cfg)
        rejected, decision, trace, partition = brute_force_clustering(ms, notion, cfg.threshold(len(ms)))
        got = (
            r.rejected,
            None if r.decision_pvalue is None else float(r.decision_pvalue),
            [(s.merged_pair[0], s.merged_pair[1], float(s.max_pvalue)) for s in r.trace],
            r.partition(),
        )
        mismatches += got != (rejected, decision, trace, partition)
    ok = mismatches == 0
    acceptance_report(5, ok, f"{mismatches} of 200 instances differ from the recomputation oracle")
    assert ok


def test_special_functions(acceptance_report, special_fixtures):
    worst = 0.0
    for row in special_fixtures["chi2_sf_1df"]:
        worst = max(worst, abs(chi2_sf_1df(row["x"]) - float(row["sf"])))
    for row in special_fixtures["normal_sf"]:
        worst = max(worst, abs(normal_sf(row["z"]) - float(row["sf"])))
    ident = max(abs(chi2_sf_1df(x) - 2.0 * normal_sf(math.sqrt(x))) for x in np.linspace(0, 40, 4001))
    n = len(special_fixtures["chi2_sf_1df"]) + len(special_fixtures["normal_sf"])
    ok = worst <= 1e-9 and ident <= 1e-12
    acceptance_report(6, ok, f"{n} fixture points, max abs err {worst:.1e} (<= 1e-9); "
                             f"identity max err {ident:.1e} (<= 1e-12)")
    assert ok


def _timed_run(k, rng, repeats):
    ms = [GroupMetric(f"g{i:03d}", float(e), float(s))
          for i, (e, s) in enumerate(zip(rng.normal(0, 0.01, k), rng.uniform(0.01, 0.02, k)))]
    run_clustering(ms)  # warm up
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        run_clustering(ms)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def test_performance(acceptance_report):
    rng = np.random.default_rng(SEED)
    t100 = _timed_run(100, rng, 15)
    t400 = _timed_run(400, rng, 5)
    ratio = t400 / t100
    ok = t100 < 0.1 and ratio <= 16.0
    acceptance_report(7, ok, f"K=100 median {t100 * 1e3:.1f} ms (< 100 ms), K=400/K=100 ratio {ratio:.1f} (<= 16)")
    assert ok


def _separated(ms, rel=1e-6):
    """True when, along the whole path, the best p-value is clear of the
    runner-up and of the threshold by a relative margin."""
    notion = LikelihoodRatioNotion()
    thr = ClusteringConfig().threshold(len(ms))
    clusters = [make_cluster(m) for m in ms]
    while len(clusters) > 1:
        table = sorted(
            ((float(notion.pvalue(a, b)), x, y)
             for x, a in enumerate(clusters) for y, b in enumerate(clusters) if x < y),
            reverse=True,
        )
        p, x, y = table[0]
        if p == 0.0 or abs(p - thr) <= rel * thr:
            return False
        if len(table) > 1 and p - table[1][0] <= rel * p:
            return False
        if p < thr:
            return True
        merged = merge_clusters(clusters[x], clusters[y])
        clusters = [c for t, c in enumerate(clusters) if t not in (x, y)] + [merged]
    return True


def _shape(result):
    return result.rejected, result.partition(), [s.merged_pair for s in result.trace]


def test_invariance(acceptance_report):
    rng = np.random.default_rng(SEED)
    checked = failures = 0
    while checked < 100:
        k = int(rng.integers(2, 13))
        centers = rng.uniform(-0.5, 0.5, int(rng.integers(1, 4)))
        ms = [GroupMetric(f"g{i:02d}", float(rng.choice(centers) + rng.normal(0, 0.03)),
                          float(rng.uniform(0.01, 0.05))) for i in range(k)]
        if not _separated(ms):
            continue
        checked += 1
        base = _shape(run_clustering(ms))
        perm = [ms[i] for i in rng.permutation(k)]
        c = float(rng.uniform(-5, 5))
        s = float(10 ** rng.uniform(-2, 2))
        shifted = [GroupMetric(m.group_id, m.estimate + c, m.sd) for m in ms]
        scaled = [GroupMetric(m.group_id, m.estimate * s, m.sd * s) for m in ms]
        for variant in (perm, shifted, scaled):
            failures += _shape(run_clustering(variant)) != base
    ok = failures == 0
    acceptance_report(8, ok, f"{checked} separated instances x 3 transforms, {failures} mismatches")
    assert ok
