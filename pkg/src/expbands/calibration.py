"""Data-independent calibration constants.

Monte-Carlo quantiles of the two pivotal statistics (the log-likelihood
pivot behind the minimum-area region and the sup-distance statistic behind
the KS-type bands), the closed-form exact level of the minimum-area band,
and its numeric inverse. Every Monte-Carlo result carries a sectioning
standard error and a provenance key; a JSON-lines cache makes repeated runs
cheap and auditable.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import CacheIntegrityError, CalibrationError, DomainError
from .regions import lambert_interval
from .special import check_probability, gamma_cdf
from .streams import replicate_batches

_SECTIONS = 100


@dataclass(frozen=True)
class CalibrationKey:
    """Identity of a calibration constant. `n` is 0 for constants that only
    depend on m; `level` is the defining probability of the constant."""

    kind: str       # "c_p" | "d_p" | "tau" | "p_of_tau"
    m: int
    n: int
    level: float
    reps: int
    seed: int

    def __post_init__(self):
        if self.kind not in ("c_p", "d_p", "tau", "p_of_tau"):
            raise DomainError(f"unknown calibration kind {self.kind!r}")
        if self.reps < 1:
            raise DomainError("reps must be >= 1")


@dataclass(frozen=True)
class CalibrationResult:
    value: float
    mc_std_error: float
    key: CalibrationKey
    extra: dict | None = None


def empirical_quantile(sorted_draws: np.ndarray, q: float) -> float:
    """Order statistic at index ceil(q * N): no interpolation."""
    n = sorted_draws.shape[0]
    idx = min(max(int(math.ceil(q * n)) - 1, 0), n - 1)
    return float(sorted_draws[idx])


def _section_std_error(draws: np.ndarray, q: float) -> float:
    """Quantile standard error by sectioning the raw (unsorted) draws into
    100 batches."""
    n = draws.shape[0]
    k = min(_SECTIONS, n)
    size = n // k
    if size < 2:
        return float("nan")
    sections = draws[:k * size].reshape(k, size)
    qs = np.sort(sections, axis=1)[:, min(max(int(math.ceil(q * size)) - 1, 0), size - 1)]
    return float(np.std(qs, ddof=1) / math.sqrt(k))


def draw_cp_statistic(m: int, reps: int, seed: int) -> np.ndarray:
    """Draws of (m+1) ln(Y) - m Y - Z with Y ~ Gamma(m-1, 1/m) and Z standard
    exponential, independent; Y is built as a sum of exponentials."""
    if m < 2:
        raise DomainError("need m >= 2")
    out = np.empty(reps)
    for start, count, rng in replicate_batches(seed, reps):
        e = rng.standard_exponential((count, m - 1))
        y = e.sum(axis=1) / m
        z = rng.standard_exponential(count)
        out[start:start + count] = (m + 1) * np.log(y) - m * y - z
    return out


def draw_ks_statistic(m: int, n: int, reps: int, seed: int) -> np.ndarray:
    """Draws of the sup-distance pivot max(U, V): S is exponential with mean
    1/n, T ~ Gamma(m-1, 1/m), U = 1 - exp(-S), and V follows the local
    extremum of the cdf difference, active when T < 1 or S < ln(T)."""
    if m < 2 or n < m:
        raise DomainError("need m >= 2 and n >= m")
    out = np.empty(reps)
    for start, count, rng in replicate_batches(seed, reps):
        s = rng.standard_exponential(count) / n
        t = rng.standard_exponential((count, m - 1)).sum(axis=1) / m
        u = -np.expm1(-s)
        # the exponent blows up only where the local extremum is inactive,
        # and those lanes are masked to zero below
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = np.abs(1.0 - t) * np.exp((s - t * np.log(t)) / (t - 1.0))
        active = (t < 1.0) | (s < np.log(t))
        v = np.where(active & (t != 1.0), v, 0.0)
        out[start:start + count] = np.maximum(u, v)
    return out


def calibrate_cp(m: int, p: float, reps: int, seed: int) -> CalibrationResult:
    """p-quantile of the log-likelihood pivot; depends only on p and m."""
    p = check_probability(p, "p", open_interval=True)
    raw = draw_cp_statistic(m, reps, seed)
    se = _section_std_error(raw, p)
    value = empirical_quantile(np.sort(raw), p)
    key = CalibrationKey("c_p", m=m, n=0, level=p, reps=reps, seed=seed)
    return CalibrationResult(value=value, mc_std_error=se, key=key)


def calibrate_dp(m: int, n: int, p: float, reps: int, seed: int) -> CalibrationResult:
    """(1-p)-quantile of the sup-distance pivot for the KS-type band."""
    p = check_probability(p, "p", open_interval=True)
    raw = draw_ks_statistic(m, n, reps, seed)
    se = _section_std_error(raw, 1.0 - p)
    value = empirical_quantile(np.sort(raw), 1.0 - p)
    key = CalibrationKey("d_p", m=m, n=n, level=p, reps=reps, seed=seed)
    return CalibrationResult(value=value, mc_std_error=se, key=key)


def tau_of_p(m: int, p: float, c_p: float) -> float:
    """Exact level of the minimum-area band when its region has level 1-p
    with constant c_p: 1-p plus the probability of the hull notch, in closed
    form. The factorial-scale factor is evaluated in log space."""
    p = check_probability(p, "p")
    _, _, y, z = lambert_interval(m, c_p)
    log_lead = c_p + (m + 1) * math.log(m) - math.lgamma(m - 1) - math.log(2.0)
    term1 = math.exp(log_lead) * (1.0 / y**2 - 1.0 / z**2)
    term2 = (z / (m + 1)) ** (m - 1) * (gamma_cdf(m - 1, (m + 1) * y / z)
                                        - gamma_cdf(m - 1, m + 1.0))
    return 1.0 - p + term1 + term2


def p_of_tau(m: int, tau: float, reps: int, seed: int) -> CalibrationResult:
    """Invert the exact-level formula: find p (and the matching constant c)
    such that the minimum-area band has exact level tau.

    One fixed Monte-Carlo draw set provides the empirical quantile function
    p -> c_p, along which the level is monotone in p; bisection then solves
    for p. Returns p as the value with c in `extra`.
    """
    tau = check_probability(tau, "tau", open_interval=True)
    raw = draw_cp_statistic(m, reps, seed)
    p, c = invert_level_on_draws(m, tau, np.sort(raw))
    se_c = _section_std_error(raw, p)
    key = CalibrationKey("p_of_tau", m=m, n=0, level=tau, reps=reps, seed=seed)
    return CalibrationResult(value=p, mc_std_error=se_c, key=key,
                             extra={"c": c, "c_std_error": se_c})


def invert_level_on_draws(m: int, tau: float, sorted_draws: np.ndarray) -> tuple[float, float]:
    """Bisection for p along the empirical quantile curve of one draw set."""

    def level_at(p: float) -> float:
        c = empirical_quantile(sorted_draws, p)
        if c >= -m:
            return 0.0  # beyond feasibility the band level is vacuous
        return tau_of_p(m, p, c)

    lo, hi = 1e-6, 1.0 - 1e-6
    # the level decreases in p; make sure tau is inside the attainable range
    if not (level_at(hi) <= tau <= level_at(lo)):
        raise CalibrationError(
            f"target level {tau} outside attainable range at m={m}")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if level_at(mid) > tau:
            lo = mid
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    # a large residual means the target sat below the attainable floor and
    # the bisection only chased the feasibility edge
    if abs(level_at(p) - tau) > 1e-3:
        raise CalibrationError(
            f"no region level attains band level {tau} at m={m}: "
            f"closest achievable is {level_at(p):.6f}")
    return p, empirical_quantile(sorted_draws, p)


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------

class CalibrationCache:
    """Append-only JSON-lines store of calibration constants.

    One record per line; lookups are bit-exact on the full key, so the same
    request with a different seed is a distinct entry. A missing key returns
    None; a corrupt file raises CacheIntegrityError.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def _iter_records(self):
        if not self.path.exists():
            return
        with self.path.open() as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    doc = json.loads(line)
                    yield CalibrationResult(
                        value=float(doc["value"]),
                        mc_std_error=float(doc["mc_std_error"]),
                        key=CalibrationKey(**doc["key"]),
                        extra=doc.get("extra"))
                except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                    raise CacheIntegrityError(
                        f"{self.path}:{lineno}: corrupt cache record: {exc}") from exc

    def get(self, key: CalibrationKey) -> CalibrationResult | None:
        found = None
        for rec in self._iter_records():
            if rec.key == key:
                found = rec
        return found

    def put(self, result: CalibrationResult) -> None:
        record = {"key": asdict(result.key), "value": result.value,
                  "mc_std_error": result.mc_std_error, "extra": result.extra}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a") as fh:
            fh.write(json.dumps(record) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def get_or_compute(self, key: CalibrationKey, force: bool = False) -> CalibrationResult:
        if not force:
            cached = self.get(key)
            if cached is not None:
                return cached
        if key.kind == "c_p":
            result = calibrate_cp(key.m, key.level, key.reps, key.seed)
        elif key.kind == "d_p":
            result = calibrate_dp(key.m, key.n, key.level, key.reps, key.seed)
        elif key.kind == "p_of_tau":
            result = p_of_tau(key.m, key.level, key.reps, key.seed)
        else:
            raise CalibrationError(f"cannot compute kind {key.kind!r} from a key alone")
        self.put(result)
        return result
