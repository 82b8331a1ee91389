import math

import numpy as np
import pytest

from expbands.calibration import (
    CalibrationCache,
    CalibrationKey,
    calibrate_cp,
    calibrate_dp,
    draw_cp_statistic,
    empirical_quantile,
    p_of_tau,
    tau_of_p,
)
from expbands.errors import CacheIntegrityError, CalibrationError, DomainError


class TestCpQuantile:
    def test_monotone_in_p_on_same_draws(self):
        draws = np.sort(draw_cp_statistic(8, 100_000, seed=1))
        qs = [empirical_quantile(draws, p) for p in (0.05, 0.1, 0.2, 0.5, 0.8)]
        assert all(b >= a for a, b in zip(qs, qs[1:]))

    def test_deterministic(self):
        a = calibrate_cp(5, 0.10, reps=50_000, seed=9)
        b = calibrate_cp(5, 0.10, reps=50_000, seed=9)
        assert a.value == b.value and a.mc_std_error == b.mc_std_error

    def test_seed_changes_value(self):
        a = calibrate_cp(5, 0.10, reps=50_000, seed=9)
        b = calibrate_cp(5, 0.10, reps=50_000, seed=10)
        assert a.value != b.value

    def test_statistic_below_supremum(self):
        m = 6
        draws = draw_cp_statistic(m, 50_000, seed=2)
        c_max = (m + 1) * math.log((m + 1) / m) - (m + 1)
        assert np.max(draws) < c_max

    def test_key_records_m_only(self):
        res = calibrate_cp(5, 0.10, reps=10_000, seed=9)
        assert res.key.n == 0 and res.key.kind == "c_p"

    def test_std_error_sane(self):
        res = calibrate_cp(8, 0.10, reps=200_000, seed=4)
        assert 0 < res.mc_std_error < 0.1


class TestDpQuantile:
    def test_in_unit_interval(self):
        for m, n in ((2, 2), (8, 19), (20, 50)):
            res = calibrate_dp(m, n, 0.10, reps=50_000, seed=6)
            assert 0.0 < res.value < 1.0

    def test_n_limit_is_pure_scale_error(self):
        # as n grows (m fixed) the location pivot vanishes but the scale-error
        # term activates fully, so the constant RISES toward the quantile of
        # |1-T| exp(-T ln T / (T-1)); computed here as an independent limit
        near = calibrate_dp(8, 19, 0.10, reps=400_000, seed=11)
        far = calibrate_dp(8, 190, 0.10, reps=400_000, seed=11)
        huge = calibrate_dp(8, 19_000, 0.10, reps=400_000, seed=11)
        assert near.value < far.value < huge.value
        rng = np.random.Generator(np.random.Philox(5150))
        t = rng.standard_exponential((400_000, 7)).sum(axis=1) / 8.0
        with np.errstate(all="ignore"):
            v_inf = np.abs(1.0 - t) * np.exp(-t * np.log(t) / (t - 1.0))
        v_inf = np.where(t == 1.0, 0.0, v_inf)
        limit = np.sort(v_inf)[int(math.ceil(0.9 * v_inf.size)) - 1]
        assert huge.value == pytest.approx(limit, abs=0.005)

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            calibrate_dp(1, 5, 0.10, reps=100, seed=0)
        with pytest.raises(DomainError):
            calibrate_dp(8, 5, 0.10, reps=100, seed=0)
        with pytest.raises(DomainError):
            calibrate_dp(8, 19, 1.0, reps=100, seed=0)


class TestExactLevel:
    def test_exceeds_nominal_everywhere(self):
        for m in (2, 3, 5, 8, 25, 100):
            draws = np.sort(draw_cp_statistic(m, 200_000, seed=m))
            for p in (0.05, 0.10, 0.20):
                c = empirical_quantile(draws, p)
                assert tau_of_p(m, p, c) > 1.0 - p

    def test_p_of_tau_fixed_point(self):
        res = p_of_tau(8, 0.9025, reps=400_000, seed=21)
        assert tau_of_p(8, res.value, res.extra["c"]) == pytest.approx(0.9025, abs=1e-4)

    def test_p_of_tau_unattainable_target(self):
        with pytest.raises(CalibrationError):
            p_of_tau(8, 1e-9, reps=10_000, seed=21)

    def test_tau_large_m_log_space(self):
        # the closed form stays finite far beyond factorial overflow
        draws = np.sort(draw_cp_statistic(400, 20_000, seed=5))
        c = empirical_quantile(draws, 0.10)
        tau = tau_of_p(400, 0.10, c)
        assert 0.90 < tau < 1.0


class TestCache:
    def test_put_get_roundtrip(self, tmp_path):
        cache = CalibrationCache(tmp_path / "cache.jsonl")
        res = calibrate_cp(4, 0.10, reps=10_000, seed=3)
        cache.put(res)
        assert cache.get(res.key) == res

    def test_missing_key_is_none(self, tmp_path):
        cache = CalibrationCache(tmp_path / "cache.jsonl")
        key = CalibrationKey("c_p", m=4, n=0, level=0.1, reps=10, seed=0)
        assert cache.get(key) is None

    def test_distinct_seeds_distinct_entries(self, tmp_path):
        cache = CalibrationCache(tmp_path / "cache.jsonl")
        r1 = calibrate_cp(4, 0.10, reps=10_000, seed=3)
        r2 = calibrate_cp(4, 0.10, reps=10_000, seed=4)
        cache.put(r1)
        cache.put(r2)
        assert cache.get(r1.key) == r1
        assert cache.get(r2.key) == r2

    def test_get_or_compute_hits_cache(self, tmp_path):
        cache = CalibrationCache(tmp_path / "cache.jsonl")
        key = CalibrationKey("c_p", m=4, n=0, level=0.10, reps=10_000, seed=3)
        first = cache.get_or_compute(key)
        lines_before = (tmp_path / "cache.jsonl").read_text().count("\n")
        second = cache.get_or_compute(key)
        lines_after = (tmp_path / "cache.jsonl").read_text().count("\n")
        assert first == second and lines_before == lines_after == 1

    def test_force_recompute_appends(self, tmp_path):
        cache = CalibrationCache(tmp_path / "cache.jsonl")
        key = CalibrationKey("c_p", m=4, n=0, level=0.10, reps=10_000, seed=3)
        cache.get_or_compute(key)
        cache.get_or_compute(key, force=True)
        assert (tmp_path / "cache.jsonl").read_text().count("\n") == 2

    def test_corrupt_store(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        path.write_text('{"key": {"kind": "c_p"}, "value"::: garbage\n')
        with pytest.raises(CacheIntegrityError):
            CalibrationCache(path).get(
                CalibrationKey("c_p", m=4, n=0, level=0.1, reps=10, seed=0))

    def test_bad_key_kind(self):
        with pytest.raises(DomainError):
            CalibrationKey("zeta", m=4, n=0, level=0.1, reps=10, seed=0)

    def test_p_of_tau_through_cache(self, tmp_path):
        cache = CalibrationCache(tmp_path / "cache.jsonl")
        key = CalibrationKey("p_of_tau", m=8, n=0, level=0.9025, reps=50_000, seed=3)
        res = cache.get_or_compute(key)
        assert res.extra is not None and res.extra["c"] < -8
        assert cache.get(key) == res
