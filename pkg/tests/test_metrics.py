import math

import numpy as np
import pytest

from expbands.bands import (
    band_b1,
    band_b3,
    band_b4,
    band_b4_trimmed,
    marginal_band,
    reliability_band,
)
from expbands.errors import DomainError
from expbands.metrics import (
    area,
    band_metrics,
    coverage_experiment,
    max_width,
)
from expbands.model import LocScale

LEVEL = 0.9025
P = 1.0 - LEVEL
CP_PAPER = -11.587
DP_PAPER = 0.249


@pytest.fixture(scope="module")
def b4(fluid_est):
    return band_b4(fluid_est, DP_PAPER, level=LEVEL)


@pytest.fixture(scope="module")
def b3(fluid_est, fluid_scheme):
    return band_b3(fluid_est, fluid_scheme, CP_PAPER, nominal_p=0.127)


class TestMaxWidth:
    def test_b4_width_is_exactly_two_d(self, b4):
        w, _ = max_width(b4)
        assert w == pytest.approx(2 * DP_PAPER, abs=1e-12)

    def test_argmax_at_least_random_points(self, b4, b3, rng):
        for band in (b4, b3):
            w, argx = max_width(band)
            xs = rng.uniform(-20, 100, size=100)
            assert np.all(w >= band.width(xs) - 1e-12)
            assert w == pytest.approx(float(band.width(argx)), abs=1e-12)

    def test_reliability_width_unchanged(self, b3):
        w_base, _ = max_width(b3)
        w_rel, _ = max_width(reliability_band(b3))
        assert w_rel == pytest.approx(w_base, abs=1e-12)

    def test_marginal_width_generic_path(self, fluid_est, fluid_scheme):
        band = marginal_band(band_b1(fluid_est, fluid_scheme, P), fluid_scheme.gammas)
        w, argx = max_width(band)
        assert 0 < w < 1
        xs = np.linspace(-5, 80, 3000)
        assert w >= np.max(band.width(xs)) - 1e-6


class TestArea:
    def test_b4_structurally_infinite(self, b4):
        a, _ = area(b4)
        assert math.isinf(a)

    def test_b3_area_stable_under_tolerance_halving(self, b3):
        a1, err1 = area(b3, abs_tol=1e-8)
        a2, _ = area(b3, abs_tol=5e-9)
        assert abs(a1 - a2) <= max(err1, 1e-9)

    def test_reliability_area_unchanged(self, b3):
        a_base, _ = area(b3)
        a_rel, _ = area(reliability_band(b3))
        assert a_rel == pytest.approx(a_base, abs=1e-9)

    def test_trimmed_band_area_against_dense_trapezoid(self, fluid_est):
        band = band_b4_trimmed(fluid_est, DP_PAPER, trimmed=True, level=LEVEL)
        a, _ = area(band)
        xs = np.linspace(-40, 600, 400_001)
        brute = float(np.trapezoid(band.width(xs), xs))
        assert a == pytest.approx(brute, rel=2e-4)

    def test_marginal_band_area_closed_tail(self, fluid_est, fluid_scheme):
        band = marginal_band(band_b1(fluid_est, fluid_scheme, P), fluid_scheme.gammas)
        a, err = area(band)
        xs = np.linspace(-40, 900, 400_001)
        brute = float(np.trapezoid(band.width(xs), xs))
        assert a == pytest.approx(brute, rel=1e-3)

    def test_band_metrics_struct(self, b3):
        bm = band_metrics(b3)
        assert bm.max_width > 0 and bm.area > 0 and bm.quadrature_error_estimate >= 0


class TestCoverage:
    def test_deterministic(self, fluid_scheme, std_theta):
        a = coverage_experiment("c1", std_theta, fluid_scheme, 0.9, 20_000, seed=3)
        b = coverage_experiment("c1", std_theta, fluid_scheme, 0.9, 20_000, seed=3)
        assert a.coverage == b.coverage

    def test_exact_matches_grid_method(self, fluid_scheme, std_theta):
        for kind, kw in (("c1", {}), ("b1", {}), ("c3", {"c_p": CP_PAPER}),
                         ("b3", {"c_p": CP_PAPER}), ("b4", {"d_p": DP_PAPER}),
                         ("c4pp", {"d_p": DP_PAPER})):
            fast = coverage_experiment(kind, std_theta, fluid_scheme, 0.873,
                                       300, seed=8, **kw)
            slow = coverage_experiment(kind, std_theta, fluid_scheme, 0.873,
                                       300, seed=8, method="grid", **kw)
            assert fast.coverage == slow.coverage, kind

    def test_trimmed_band_grid_coverage_close(self, fluid_scheme, std_theta):
        # the grid path rebuilds the optimization-backed band per replicate
        fast = coverage_experiment("b4p", std_theta, fluid_scheme, 0.9, 200,
                                   seed=8, d_p=DP_PAPER)
        slow = coverage_experiment("b4p", std_theta, fluid_scheme, 0.9, 200,
                                   seed=8, d_p=DP_PAPER, method="grid")
        assert abs(fast.coverage - slow.coverage) <= 0.01

    def test_report_fields(self, fluid_scheme):
        rep = coverage_experiment("b4", LocScale(2.0, 3.0), fluid_scheme, 0.9,
                                  5_000, seed=4, d_p=DP_PAPER)
        assert rep.band_kind == "b4" and rep.replicates == 5_000
        assert rep.theta == (2.0, 3.0)
        assert 0.85 < rep.coverage < 0.95
        assert rep.std_error == pytest.approx(
            math.sqrt(rep.coverage * (1 - rep.coverage) / 5_000), rel=1e-9)
        assert rep.constants == {"d_p": DP_PAPER}

    def test_unknown_kind_and_missing_constants(self, fluid_scheme, std_theta):
        with pytest.raises(DomainError):
            coverage_experiment("b9", std_theta, fluid_scheme, 0.9, 10, seed=1)
        with pytest.raises(DomainError):
            coverage_experiment("c3", std_theta, fluid_scheme, 0.9, 10, seed=1)
