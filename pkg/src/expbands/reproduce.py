"""End-to-end reproduction of the bundled insulating-fluid example and the
published calibration tables.

Produces a deterministic markdown report of expected-versus-computed values
with one pass/fail line per hard check. The d-constant grid section is
informational only: recomputing it from the sup-distance representation
gives values far from the printed table (while the same sampler reproduces
the worked example's constant), so the discrepancy is documented rather
than forced to agree; see the README.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bands as _bands
from . import metrics as _metrics
from .calibration import (
    calibrate_dp,
    draw_cp_statistic,
    empirical_quantile,
    invert_level_on_draws,
    tau_of_p,
)
from .model import ProgressiveSample, load_insulating_fluid, mle
from .streams import substream

_TABLE_M = (2, 3, 4, 5, 10, 25, 50, 100)
# exact band level (percent) when the underlying region level is 90% / 95%
_TABLE1 = {
    0.90: (91.1, 91.7, 92.0, 92.2, 92.5, 92.6, 92.6, 92.5),
    0.95: (95.6, 95.9, 96.1, 96.2, 96.5, 96.5, 96.5, 96.4),
}
# region level (percent) and constant that give the band an exact level tau
_TABLE2 = {
    0.90: ((88.8, 88.0, 87.6, 87.4, 86.9, 86.8, 86.9, 87.0),
           (-9.784, -8.372, -8.542, -9.116, -13.385, -28.025, -52.924, -102.878)),
    0.95: ((94.4, 93.9, 93.6, 93.4, 93.1, 93.0, 93.1, 93.1),
           (-11.906, -9.807, -9.737, -10.191, -14.272, -28.806, -53.684, -103.614)),
}
# published d-constant grid at level 90% (see module docstring)
_TABLE3_NS = (3, 4, 5, 10, 15, 20, 50)
_TABLE3 = {
    3: (.123, .109, .099, .075, .064, .058, .045),
    4: (None, .095, .086, .064, .055, .049, .037),
    5: (None, None, .078, .058, .049, .044, .033),
    10: (None, None, None, .045, .038, .034, .024),
    15: (None, None, None, None, .033, .029, .020),
    20: (None, None, None, None, None, .027, .018),
    50: (None, None, None, None, None, None, .014),
}
_TABLE5_W = {"b1": 0.54, "b2": 0.57, "b3": 0.59, "b4": 0.50, "b4p": 0.50, "b4pp": 0.47}
_TABLE5_A = {"b1": 20.59, "b2": 27.53, "b3": 18.87, "b4": math.inf, "b4p": 18.70, "b4pp": 17.90}


@dataclass
class CheckRow:
    name: str
    expected: float
    computed: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class ReproduceReport:
    reps: int
    seed: int
    rows: list[CheckRow] = field(default_factory=list)
    table3: list[dict] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def check(self, name: str, expected: float, computed: float,
              tolerance: float, note: str = "") -> None:
        passed = abs(computed - expected) <= tolerance
        self.rows.append(CheckRow(name, expected, computed, tolerance, passed, note))

    def check_flag(self, name: str, passed: bool, note: str = "") -> None:
        self.rows.append(CheckRow(name, 1.0, 1.0 if passed else 0.0, 0.0, passed, note))

    def markdown(self) -> str:
        lines = ["# Reproduction report", "",
                 f"Monte-Carlo size: {self.reps}; base seed: {self.seed}.", "",
                 "## Checks", "",
                 "| check | expected | computed | tolerance | status |",
                 "|---|---|---|---|---|"]
        for r in self.rows:
            lines.append(f"| {r.name} | {r.expected:.6g} | {r.computed:.6g} "
                         f"| {r.tolerance:.3g} | {'PASS' if r.passed else 'FAIL'} |")
        lines += ["", "## d-constant grid audit (informational)", "",
                  "Recomputed (1-p)-quantiles of the sup-distance pivot at level 90%",
                  "versus the published grid. The recomputed values are consistent",
                  "with the worked example's constant and with the band's empirical",
                  "coverage; the published grid is not. Not a pass/fail item.", "",
                  "| m | n | published | computed | std error |",
                  "|---|---|---|---|---|"]
        for row in self.table3:
            pub = "-" if row["published"] is None else f"{row['published']:.3f}"
            lines.append(f"| {row['m']} | {row['n']} | {pub} "
                         f"| {row['computed']:.4f} | {row['std_error']:.5f} |")
        lines += ["", f"Overall: {'PASS' if self.all_passed else 'FAIL'}", ""]
        return "\n".join(lines)


def _check_table5(report: ReproduceReport, sample: ProgressiveSample,
                  reps: int, seed: int) -> None:
    est = mle(sample)
    scheme = sample.scheme
    level = 0.9025
    d_res = calibrate_dp(scheme.m, scheme.n, 1.0 - level, reps, substream(seed, "dp-9025"))
    draws = np.sort(draw_cp_statistic(scheme.m, reps, substream(seed, "cp-m8")))
    p_star, c_star = invert_level_on_draws(scheme.m, level, draws)

    report.check("fit mu_hat", 0.19, est.mu_hat, 1e-12)
    report.check("fit sigma_hat", 8.635, est.sigma_hat, 1e-12)
    report.check("d at level 90.25%", 0.249, d_res.value,
                 max(0.005, 5 * d_res.mc_std_error))
    report.check("region level for band level 90.25% (pct)", 87.3,
                 100 * (1 - p_star), 0.3)
    report.check("constant c at band level 90.25%", -11.587, c_star, 0.1)

    built = {
        "b1": _bands.band_b1(est, scheme, 1 - level),
        "b2": _bands.band_b2(est, scheme, 1 - level),
        "b3": _bands.band_b3(est, scheme, c_star, nominal_p=p_star),
        "b4": _bands.band_b4(est, d_res.value, level=level),
        "b4p": _bands.band_b4_trimmed(est, d_res.value, trimmed=False, level=level),
        "b4pp": _bands.band_b4_trimmed(est, d_res.value, trimmed=True, level=level),
    }
    widths, areas = {}, {}
    for kind, band in built.items():
        bm = _metrics.band_metrics(band)
        widths[kind], areas[kind] = bm.max_width, bm.area
        report.check(f"max width {kind}", _TABLE5_W[kind], bm.max_width, 0.01)
        if math.isinf(_TABLE5_A[kind]):
            report.check_flag(f"area {kind} infinite", math.isinf(bm.area))
        else:
            report.check(f"area {kind}", _TABLE5_A[kind], bm.area, 0.02 * _TABLE5_A[kind])
    # the trimmed-band widths tie the parent's 2*d_p exactly, so ordering
    # comparisons carry the grid representation tolerance
    w_order = ("b4pp", "b4p", "b4", "b1", "b2", "b3")
    a_order = ("b4pp", "b4p", "b3", "b1", "b2", "b4")
    report.check_flag("width ordering", all(
        widths[a] <= widths[b] + 1e-6 for a, b in zip(w_order, w_order[1:])),
        note=" <= ".join(w_order))
    report.check_flag("area ordering", all(
        areas[a] <= areas[b] + 1e-6 for a, b in zip(a_order, a_order[1:])),
        note=" <= ".join(a_order))


def _check_tables_1_2(report: ReproduceReport, reps: int, seed: int) -> None:
    for i, m in enumerate(_TABLE_M):
        draws = np.sort(draw_cp_statistic(m, reps, substream(seed, f"cp-m{m}")))
        for level, taus in _TABLE1.items():
            p = 1.0 - level
            c = empirical_quantile(draws, p)
            report.check(f"band exact level, m={m}, region level {level:.0%} (pct)",
                         taus[i], 100 * tau_of_p(m, p, c), 0.1)
        for tau_target, (one_minus_p, cs) in _TABLE2.items():
            p_star, c_star = invert_level_on_draws(m, tau_target, draws)
            report.check(f"region level for band level {tau_target:.0%}, m={m} (pct)",
                         one_minus_p[i], 100 * (1 - p_star), 0.3)
            report.check(f"constant c for band level {tau_target:.0%}, m={m}",
                         cs[i], c_star, 0.15)


def _audit_table3(report: ReproduceReport, reps: int, seed: int) -> None:
    for m, row in _TABLE3.items():
        for n, published in zip(_TABLE3_NS, row):
            if n < m:
                continue
            res = calibrate_dp(m, n, 0.10, reps, substream(seed, f"dp-{m}-{n}"))
            report.table3.append({"m": m, "n": n, "published": published,
                                  "computed": res.value, "std_error": res.mc_std_error})


def reproduce_paper(reps: int = 1_000_000, seed: int = 20201222) -> ReproduceReport:
    """Run the full data-example pipeline plus the analytic table checks and
    the d-constant grid recomputation; deterministic in (reps, seed)."""
    report = ReproduceReport(reps=reps, seed=seed)
    _check_table5(report, load_insulating_fluid(), reps, seed)
    _check_tables_1_2(report, reps, seed)
    _audit_table3(report, reps, seed)
    return report
