import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetclust.errors import DegenerateVarianceError, DomainError, InsufficientDataError
from hetclust.stats_primitives import (
    PValue,
    SampleSummary,
    chi2_isf_1df,
    chi2_sf_1df,
    chi2_sf_1df_array,
    erfc,
    normal_sf,
    welch_summary,
)


class TestChi2Sf:
    def test_zero(self):
        assert chi2_sf_1df(0) == 1.0

    @pytest.mark.parametrize("x, p", [(3.841458820694124, 0.05), (6.634896601021213, 0.01)])
    def test_critical_values(self, x, p):
        assert chi2_sf_1df(x) == pytest.approx(p, abs=1e-9)

    def test_matches_quadrature_fixtures(self, special_fixtures):
        for row in special_fixtures["chi2_sf_1df"]:
            expected = float(row["sf"])
            got = chi2_sf_1df(row["x"])
            assert abs(got - expected) <= 1e-12 * expected, row

    @pytest.mark.parametrize("bad", [-1e-300, -1.0, math.nan, math.inf])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            chi2_sf_1df(bad)

    def test_monotone_on_grid(self):
        xs = np.linspace(0, 60, 6001)
        vals = [chi2_sf_1df(x) for x in xs]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_returns_pvalue(self):
        assert isinstance(chi2_sf_1df(1.0), PValue)

    def test_array_agrees_with_scalar(self):
        xs = np.linspace(0, 80, 2001)
        arr = chi2_sf_1df_array(xs)
        ref = np.array([chi2_sf_1df(x) for x in xs])
        np.testing.assert_allclose(arr, ref, rtol=2e-15, atol=0)

    def test_array_domain(self):
        with pytest.raises(DomainError):
            chi2_sf_1df_array([1.0, -2.0])


class TestNormalSf:
    def test_zero(self):
        assert normal_sf(0) == 0.5

    def test_critical_values(self):
        assert normal_sf(1.959963984540054) == pytest.approx(0.025, abs=1e-9)
        assert normal_sf(-1.959963984540054) == pytest.approx(0.975, abs=1e-9)

    def test_matches_quadrature_fixtures(self, special_fixtures):
        for row in special_fixtures["normal_sf"]:
            expected = float(row["sf"])
            assert abs(normal_sf(row["z"]) - expected) <= 1e-12 * expected, row

    @given(st.floats(-8, 8))
    def test_symmetry(self, z):
        assert abs(normal_sf(z) + normal_sf(-z) - 1.0) <= 1e-14

    def test_monotone_on_grid(self):
        vals = [normal_sf(z) for z in np.linspace(-9, 9, 3601)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("bad", [math.nan, -math.inf, math.inf])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            normal_sf(bad)


@given(st.floats(0, 40))
def test_chi2_is_two_sided_normal(x):
    assert abs(chi2_sf_1df(x) - 2.0 * normal_sf(math.sqrt(x))) <= 1e-12


def test_erfc_reflection():
    for x in np.linspace(0, 6, 61):
        assert erfc(-x) == pytest.approx(2.0 - erfc(x), abs=1e-16)


@given(st.floats(0.001, 30))
def test_isf_inverts_sf(x):
    assert chi2_isf_1df(chi2_sf_1df(x)) == pytest.approx(x, rel=1e-8)


def test_isf_domain():
    assert chi2_isf_1df(1.0) == 0.0
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            chi2_isf_1df(bad)


class TestPValue:
    def test_range(self):
        assert PValue(0.0) == 0.0 and PValue(1.0) == 1.0
        for bad in (-1e-12, 1.0000001, math.nan):
            with pytest.raises(DomainError):
                PValue(bad)


class TestWelchSummary:
    def test_example(self):
        m = welch_summary(SampleSummary(100, 0.3, 0.01), SampleSummary(100, 0.1, 0.01))
        assert m.estimate == pytest.approx(0.2, abs=1e-15)
        assert m.sd == pytest.approx(math.sqrt(0.0002), rel=1e-15)
        assert m.sd == pytest.approx(0.014142, abs=1e-6)

    def test_against_raw_samples(self):
        rng = np.random.default_rng(5)
        t = rng.normal(0.3, 0.1, 100)
        c = rng.normal(0.1, 0.1, 100)
        # brute-force moments with explicit loops
        def moments(xs):
            n = len(xs)
            mean = sum(xs) / n
            return n, mean, sum((x - mean) ** 2 for x in xs) / (n - 1)

        nt, mt, vt = moments(list(t))
        nc, mc, vc = moments(list(c))
        m = welch_summary(SampleSummary.from_values(t), SampleSummary.from_values(c))
        assert m.estimate == pytest.approx(mt - mc, rel=1e-12)
        assert m.sd == pytest.approx(math.sqrt(vt / nt + vc / nc), rel=1e-12)

    def test_identical_arms(self):
        s = SampleSummary(50, 1.7, 0.3)
        assert welch_summary(s, s).estimate == 0.0

    def test_insufficient(self):
        with pytest.raises(InsufficientDataError):
            welch_summary(SampleSummary(1, 0.0, 0.0), SampleSummary(10, 0.0, 1.0))
        with pytest.raises(InsufficientDataError):
            welch_summary(SampleSummary(10, 0.0, 1.0), SampleSummary(1, 0.0, 0.0))

    def test_zero_variance(self):
        with pytest.raises(DegenerateVarianceError):
            welch_summary(SampleSummary(5, 1.0, 0.0), SampleSummary(5, 0.0, 0.0))

    @given(
        st.integers(2, 10_000), st.floats(-100, 100), st.floats(1e-6, 100),
        st.integers(2, 10_000), st.floats(-100, 100), st.floats(1e-6, 100),
    )
    def test_antisymmetry(self, n1, m1, v1, n2, m2, v2):
        a, b = SampleSummary(n1, m1, v1), SampleSummary(n2, m2, v2)
        ab, ba = welch_summary(a, b), welch_summary(b, a)
        assert ab.estimate == -ba.estimate
        assert ab.sd == ba.sd

    def test_summary_validation(self):
        with pytest.raises(DomainError):
            SampleSummary(3, 0.0, -1.0)
        with pytest.raises(InsufficientDataError):
            SampleSummary(0, 0.0, 0.0)
