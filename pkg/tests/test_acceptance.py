"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Monte-Carlo sizes follow the stated budgets (10^7 for the published-table
quantiles, 10^6 for the worked-example constants, 10^5 per coverage cell);
everything is deterministic in the fixed seeds below.
"""

import math

import numpy as np
import pytest

from expbands.bands import (
    band_b1,
    band_b2,
    band_b3,
    band_b4,
    band_b4_trimmed,
    graph_contained,
    ks_distance_grid,
    ks_distance_xy,
    marginal_transform_h,
    reliability_band,
)
from expbands.calibration import (
    calibrate_dp,
    draw_cp_statistic,
    empirical_quantile,
    invert_level_on_draws,
    p_of_tau,
    tau_of_p,
)
from expbands.metrics import band_metrics, coverage_experiment
from expbands.model import LocScale, load_insulating_fluid, mle
from expbands.regions import build_c3, comprehensive_convex_hull_delta_prob

SEED = 20201222
LEVEL = 0.9025


def _report(criterion: str, passed: bool, detail: str) -> None:
    print(f"{'PASS' if passed else 'FAIL'} {criterion}: {detail}")
    assert passed, f"{criterion}: {detail}"


@pytest.fixture(scope="module")
def fluid():
    sample = load_insulating_fluid()
    return sample, mle(sample)


@pytest.fixture(scope="module")
def p_of_tau_m8(fluid):
    # shared by criteria 3, 8, and 9 (the band-level calibration at 90.25%)
    return p_of_tau(8, LEVEL, reps=1_000_000, seed=SEED)


def test_criterion_01_mle_golden(fluid):
    _, est = fluid
    err_mu = abs(est.mu_hat - 0.19)
    err_sigma = abs(est.sigma_hat - 8.635)
    _report("criterion 1 (MLE golden values)",
            err_mu <= 1e-12 and err_sigma <= 1e-12,
            f"mu_hat={est.mu_hat} (err {err_mu:.2e}), "
            f"sigma_hat={est.sigma_hat} (err {err_sigma:.2e}), tol 1e-12")


def test_criterion_02_d_constant():
    res = calibrate_dp(8, 19, 1.0 - LEVEL, reps=1_000_000, seed=SEED)
    _report("criterion 2 (d constant at 90.25%)",
            abs(res.value - 0.249) <= 0.005,
            f"d={res.value:.4f} +- {res.mc_std_error:.5f} vs 0.249, tol 0.005")


def test_criterion_03_band_level_calibration(p_of_tau_m8):
    res = p_of_tau_m8
    one_minus_p = 1.0 - res.value
    c = res.extra["c"]
    ok = abs(one_minus_p - 0.873) <= 0.003 and abs(c - (-11.587)) <= 0.1
    _report("criterion 3 (band-level calibration, m=8)", ok,
            f"1-p={100 * one_minus_p:.2f}% vs 87.3% (tol 0.3 pp), "
            f"c={c:.4f} vs -11.587 (tol 0.1)")


def test_criterion_04_exact_level_table():
    expected = {2: 0.911, 5: 0.922, 10: 0.925, 100: 0.925}
    details = []
    ok = True
    for m, target in expected.items():
        draws = np.sort(draw_cp_statistic(m, 10_000_000, seed=SEED + m))
        tau = tau_of_p(m, 0.10, empirical_quantile(draws, 0.10))
        ok &= abs(tau - target) <= 0.001
        details.append(f"m={m}: {100 * tau:.2f}% vs {100 * target:.1f}%")
    _report("criterion 4 (exact-level table at region level 90%)", ok,
            "; ".join(details) + " (tol 0.1 pp, 1e7 reps)")


def test_criterion_05_inverse_table_spot_checks():
    draws10 = np.sort(draw_cp_statistic(10, 10_000_000, seed=SEED + 1010))
    p10, c10 = invert_level_on_draws(10, 0.90, draws10)
    draws25 = np.sort(draw_cp_statistic(25, 10_000_000, seed=SEED + 2525))
    _, c25 = invert_level_on_draws(25, 0.95, draws25)
    ok = (abs(c10 - (-13.385)) <= 0.1 and abs((1 - p10) - 0.869) <= 0.003
          and abs(c25 - (-28.806)) <= 0.15)
    _report("criterion 5 (inverse-table spot checks)", ok,
            f"m=10: c={c10:.4f} vs -13.385 (tol 0.1), 1-p={100 * (1 - p10):.2f}% "
            f"vs 86.9% (tol 0.3 pp); m=25: c={c25:.4f} vs -28.806 (tol 0.15)")


def test_criterion_06_hull_notch_oracle():
    details = []
    ok = True
    for m, cp in ((2, -10.0), (8, -11.587), (25, -28.0)):
        quad = comprehensive_convex_hull_delta_prob(m, cp)
        closed = tau_of_p(m, 0.0, cp) - 1.0
        diff = abs(quad - closed)
        ok &= diff <= 1e-6
        details.append(f"(m={m}, c={cp}): |quad-closed|={diff:.2e}")
    _report("criterion 6 (hull-notch double integral vs closed form)", ok,
            "; ".join(details) + " (tol 1e-6)")


def test_criterion_07_ks_closed_form_vs_grid():
    rng = np.random.Generator(np.random.Philox(SEED + 7))
    mus = rng.normal(0.0, 1.5, size=10_000)
    sigmas = rng.uniform(0.1, 8.0, size=10_000)
    worst = 0.0
    for mu, sigma in zip(mus, sigmas):
        closed = float(ks_distance_xy(mu, sigma))
        grid = ks_distance_grid(mu, sigma, points=100_000)
        worst = max(worst, abs(closed - grid))
    _report("criterion 7 (sup-distance closed form vs grid supremum)",
            worst <= 1e-5,
            f"max |closed - grid| = {worst:.2e} over 1e4 parameters (tol 1e-5)")


def test_criterion_08_table5_reproduction(fluid, p_of_tau_m8):
    sample, est = fluid
    scheme = sample.scheme
    d_res = calibrate_dp(8, 19, 1.0 - LEVEL, reps=10_000_000, seed=SEED + 80)
    p_star, c_star = p_of_tau_m8.value, p_of_tau_m8.extra["c"]
    bands = {
        "b1": band_b1(est, scheme, 1 - LEVEL),
        "b2": band_b2(est, scheme, 1 - LEVEL),
        "b3": band_b3(est, scheme, c_star, nominal_p=p_star),
        "b4": band_b4(est, d_res.value, level=LEVEL),
        "b4p": band_b4_trimmed(est, d_res.value, trimmed=False, level=LEVEL),
        "b4pp": band_b4_trimmed(est, d_res.value, trimmed=True, level=LEVEL),
    }
    expected_w = {"b1": 0.54, "b2": 0.57, "b3": 0.59, "b4": 0.50,
                  "b4p": 0.50, "b4pp": 0.47}
    expected_a = {"b1": 20.59, "b2": 27.53, "b3": 18.87, "b4": math.inf,
                  "b4p": 18.70, "b4pp": 17.90}
    widths, areas, details = {}, {}, []
    ok = True
    for kind, band in bands.items():
        bm = band_metrics(band)
        widths[kind], areas[kind] = bm.max_width, bm.area
        ok &= abs(bm.max_width - expected_w[kind]) <= 0.01
        if math.isinf(expected_a[kind]):
            ok &= math.isinf(bm.area)
            details.append(f"{kind}: W={bm.max_width:.4f}, A=inf")
        else:
            ok &= abs(bm.area - expected_a[kind]) <= 0.02 * expected_a[kind]
            details.append(f"{kind}: W={bm.max_width:.4f}, A={bm.area:.2f}")
    w_order = ("b4pp", "b4p", "b4", "b1", "b2", "b3")
    a_order = ("b4pp", "b4p", "b3", "b1", "b2", "b4")
    # 1e-6 tie slack: the trimmed widths equal 2*d_p through a grid backing
    ok &= all(widths[a] <= widths[b] + 1e-6 for a, b in zip(w_order, w_order[1:]))
    ok &= all(areas[a] <= areas[b] + 1e-6 for a, b in zip(a_order, a_order[1:]))
    _report("criterion 8 (worked-example width/area table)", ok,
            "; ".join(details) + " | W tol 0.01, A tol 2%, both orderings")


def test_criterion_09_coverage_suite(fluid, p_of_tau_m8):
    sample, _ = fluid
    scheme = sample.scheme
    reps = 100_000
    cp_raw = empirical_quantile(
        np.sort(draw_cp_statistic(8, 1_000_000, seed=SEED + 90)), 0.10)
    dp_90 = calibrate_dp(8, 19, 0.10, reps=1_000_000, seed=SEED + 91).value
    c_tau = p_of_tau_m8.extra["c"]
    details, ok = [], True
    for theta in (LocScale(0.0, 1.0), LocScale(5.0, 3.0)):
        for kind in ("c1", "c2", "c3", "c4p", "c4pp", "b1", "b2", "b4",
                     "b4p", "b4pp"):
            kw = {}
            if kind == "c3":
                kw["c_p"] = cp_raw
            elif kind in ("c4p", "c4pp", "b4", "b4p", "b4pp"):
                kw["d_p"] = dp_90
            rep = coverage_experiment(kind, theta, scheme, 0.90, reps,
                                      seed=SEED + 92, **kw)
            ok &= abs(rep.coverage - 0.90) <= 0.005
            details.append(f"{kind}@{theta.mu:g},{theta.sigma:g}:{rep.coverage:.4f}")
        rep = coverage_experiment("b3", theta, scheme, LEVEL, reps,
                                  seed=SEED + 92, c_p=c_tau)
        ok &= abs(rep.coverage - LEVEL) <= 0.005
        details.append(f"b3@{theta.mu:g},{theta.sigma:g}:{rep.coverage:.4f}")
    # cross-validation: at the raw 90% constant the band's coverage matches
    # the closed-form exact level
    tau_raw = tau_of_p(8, 0.10, cp_raw)
    rep = coverage_experiment("b3", LocScale(0.0, 1.0), scheme, tau_raw, reps,
                              seed=SEED + 93, c_p=cp_raw)
    ok &= abs(rep.coverage - tau_raw) <= 0.005
    details.append(f"b3(raw)={rep.coverage:.4f} vs tau={tau_raw:.4f}")
    _report("criterion 9 (coverage suite, 1e5 replicates, tol 0.5 pp)", ok,
            " ".join(details))


def test_criterion_10_property_suites(fluid):
    sample, est = fluid
    scheme = sample.scheme
    rng = np.random.Generator(np.random.Philox(SEED + 100))
    checks = {}

    bands = {
        "b1": band_b1(est, scheme, 1 - LEVEL),
        "b2": band_b2(est, scheme, 1 - LEVEL),
        "b3": band_b3(est, scheme, -11.587, nominal_p=0.127),
        "b4": band_b4(est, 0.249, level=LEVEL),
        "b4p": band_b4_trimmed(est, 0.249, trimmed=False, level=LEVEL),
        "b4pp": band_b4_trimmed(est, 0.249, trimmed=True, level=LEVEL),
    }
    xs = np.linspace(-25, 120, 4000)
    checks["monotone boundaries"] = all(
        np.all(np.diff(np.asarray(b.lower(xs))) >= -1e-12)
        and np.all(np.diff(np.asarray(b.upper(xs))) >= -1e-12)
        and np.all(np.asarray(b.lower(xs)) <= np.asarray(b.upper(xs)) + 1e-12)
        for b in bands.values())

    from expbands.regions import build_c1, build_c2
    eq_ok, n_checked = True, 0
    for band, region in ((bands["b1"], build_c1(est, scheme, 1 - LEVEL)),
                         (bands["b2"], build_c2(est, scheme, 1 - LEVEL))):
        while n_checked < 150:
            theta = LocScale(est.mu_hat - float(rng.uniform(-0.5, 3.0)),
                             float(rng.uniform(2.0, 35.0)))
            if bool(region.contains(theta.mu, theta.sigma * 1.01)) != bool(
                    region.contains(theta.mu, theta.sigma * 0.99)):
                continue
            eq_ok &= (bool(region.contains(theta.mu, theta.sigma))
                      == graph_contained(band, theta))
            n_checked += 1
    checks["exhaustiveness equivalence"] = eq_ok

    region3 = build_c3(est, scheme, -11.587)
    witness = False
    for _ in range(20_000):
        mu = est.mu_hat - rng.uniform(0.0, 2.0, size=2)
        sg = rng.uniform(region3.z_lo, region3.z_hi, size=2)
        lo, hi = (min(mu), min(sg)), (max(mu), max(sg))
        if region3.contains(*lo) and region3.contains(*hi):
            w = rng.uniform(0.0, 1.0, size=2)
            z = (lo[0] + w[0] * (hi[0] - lo[0]), lo[1] + w[1] * (hi[1] - lo[1]))
            if not region3.contains(*z):
                witness = True
                break
    checks["non-comprehensiveness witness"] = witness

    checks["trim inclusions"] = all(
        np.all(np.asarray(bands[a].lower(xs)) >= np.asarray(bands[b].lower(xs)) - 1e-6)
        and np.all(np.asarray(bands[a].upper(xs)) <= np.asarray(bands[b].upper(xs)) + 1e-6)
        for a, b in (("b4pp", "b4p"), ("b4p", "b4")))

    invol = reliability_band(reliability_band(bands["b3"]))
    checks["reliability involution"] = bool(
        np.array_equal(np.asarray(invol.upper(xs)), np.asarray(bands["b3"].upper(xs))))

    h_ok = True
    for _ in range(10):
        g = tuple(float(v) for v in np.sort(rng.uniform(1.0, 20.0, size=5)))
        if min(np.diff(g)) < 1e-2:
            continue
        ys = np.linspace(0.0, 0.95, 100)
        h = marginal_transform_h(g, ys)
        live = (h > 1e-8) & (h < 1 - 1e-12)
        h_ok &= (abs(marginal_transform_h(g, 0.0)) <= 1e-9
                 and marginal_transform_h(g, 1.0) == 1.0
                 and bool(np.all(np.diff(h[live]) > 0)))
    checks["marginal transform bijection"] = h_ok

    passed = all(checks.values())
    _report("criterion 10 (standalone property suites)", passed,
            "; ".join(f"{k}={'ok' if v else 'VIOLATED'}" for k, v in checks.items()))


def test_criterion_11_d_grid_audit(capsys):
    """Informational, non-blocking: recompute the published d-constant grid
    and print the comparison; the documented magnitude inconsistency with
    criterion 2 is surfaced, not hidden."""
    published = {
        (3, 3): .123, (3, 10): .075, (3, 50): .045,
        (10, 10): .045, (10, 20): .034, (20, 50): .018, (50, 50): .014,
    }
    print("criterion 11 (informational d-grid audit at level 90%):")
    print("  m   n   published   computed   std.err")
    for (m, n), pub in published.items():
        res = calibrate_dp(m, n, 0.10, reps=400_000, seed=SEED + 110)
        print(f"  {m:<3d} {n:<3d} {pub:<11.3f} {res.value:<10.4f} {res.mc_std_error:.5f}")
    print("  note: recomputed values exceed the published grid by factors of"
          " 5-8 while the same sampler reproduces the worked example's"
          " d=0.249 (criterion 2) and the 90% coverage checks (criterion 9);"
          " the published grid is inconsistent with the sup-distance pivot"
          " representation and is reported, not matched.")
    _report("criterion 11 (d-grid audit emitted)", True, "informational")
