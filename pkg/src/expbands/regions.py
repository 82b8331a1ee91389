"""Exact confidence regions for the exponential location-scale parameter.

Five constructions from one progressively type-II censored sample:

* two trapezoids obtained by splitting the level uniformly across a pair of
  independent pivots (one with horizontal scale cuts, one with vertical
  location cuts),
* the minimum-area region based on the joint pivot, whose scale range is
  delimited by the two real Lambert W branches,
* the sup-distance region (all parameters whose cdf stays within d of the
  fitted cdf) and its trimmed variant restricted to locations below the
  first failure time.

All membership tests are closed-form and broadcast over numpy arrays; the
same formulas therefore serve single-point queries, randomized property
tests, and the Monte-Carlo coverage experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasibleLevelError, UnsupportedCaseError
from .model import LocScale, MleEstimate, Scheme
from .numerics import bisect_root, integrate
from .special import (
    chi2_quantile,
    check_probability,
    f_quantile,
    gamma_logpdf,
    lambert_w0,
    lambert_wm1,
)


def split_level(p: float) -> tuple[float, float]:
    """Uniform allocation of an overall level 1-p to two pivots and their
    tails: q1 = (1 - sqrt(1-p))/2 and q2 = 1 - q1."""
    p = check_probability(p, "p", open_interval=True)
    q1 = (1.0 - math.sqrt(1.0 - p)) / 2.0
    return q1, 1.0 - q1


# ---------------------------------------------------------------------------
# membership kernels (broadcast over estimates and parameter points alike)
# ---------------------------------------------------------------------------

def _c1_indicator(mu_hat, sigma_hat, mu, sigma, *, n, m, ln_q1, ln_q2, x_q1, x_q2):
    sigma_hi = 2.0 * m * sigma_hat / x_q1
    sigma_lo = 2.0 * m * sigma_hat / x_q2
    a_lo = mu_hat + sigma * ln_q1 / n
    a_hi = mu_hat + sigma * ln_q2 / n
    return (a_lo <= mu) & (mu <= a_hi) & (sigma_lo <= sigma) & (sigma <= sigma_hi)


def _c2_indicator(mu_hat, sigma_hat, mu, sigma, *, n, m, f_q1, f_q2, x_q1, x_q2):
    mu_hi = mu_hat - m * sigma_hat * f_q1 / ((m - 1) * n)
    mu_lo = mu_hat - m * sigma_hat * f_q2 / ((m - 1) * n)
    top = 2.0 * (n * (mu_hat - mu) + m * sigma_hat)
    return (mu_lo <= mu) & (mu <= mu_hi) & (top / x_q2 <= sigma) & (sigma <= top / x_q1)


def _c3_indicator(mu_hat, sigma_hat, mu, sigma, *, m, n, c_p):
    u = n * (mu_hat - mu) / sigma
    v = m * sigma_hat / sigma
    return (u >= 0.0) & ((m + 1) * np.log(v / m) - u - v >= c_p)


def _c3_hull_indicator(mu_hat, sigma_hat, mu, sigma, *, m, n, c_p, y, z):
    u = n * (mu_hat - mu) / sigma
    v = m * sigma_hat / sigma
    a = (m + 1) * np.log(v / m) - v - c_p
    in_c3 = (u >= 0.0) & (u <= a)
    in_notch = (v >= y) & (v <= z) & (u > a) & (u <= ((m + 1) / z - 1.0) * v)
    return in_c3 | in_notch


def h_curve(t, d_p):
    """The transcendental boundary function of the sup-distance region:
    h(t) = ln(d_p/|1-t|)(t-1) + t ln(t) for t > 0, with h(1) = 0."""
    t = np.asarray(t, dtype=float)
    one = np.isclose(t, 1.0, rtol=0.0, atol=1e-300)
    safe = np.where(one, 2.0, t)
    val = np.log(d_p / np.abs(1.0 - safe)) * (safe - 1.0) + safe * np.log(safe)
    out = np.where(one, 0.0, val)
    return out if out.ndim else float(out)


def lower_slope(t, d_p):
    """Lower bound u(t) on the standardized location (mu_hat - mu)/sigma."""
    t = np.asarray(t, dtype=float)
    out = np.where(t < 1.0 - d_p, h_curve(t, d_p), t * math.log(1.0 - d_p))
    return out if out.ndim else float(out)


def upper_slope(t, d_p):
    """Upper bound o(t) on the standardized location."""
    t = np.asarray(t, dtype=float)
    out = np.where(t <= 1.0 / (1.0 - d_p), -math.log(1.0 - d_p), h_curve(t, d_p))
    return out if out.ndim else float(out)


def _h_deriv(t: float, d_p: float) -> float:
    # h'(t) = ln(d t/(1-t)) on (0,1), ln(d) + ln(t/(t-1)) on (1,inf)
    if t < 1.0:
        return math.log(d_p * t / (1.0 - t))
    return math.log(d_p) + math.log(t / (t - 1.0))


def _c4_indicator(mu_hat, sigma_hat, mu, sigma, *, d_p, trimmed):
    t = sigma_hat / sigma
    s = (mu_hat - mu) / sigma
    lo = lower_slope(t, d_p)
    if trimmed:
        lo = np.maximum(lo, 0.0)
    return (lo <= s) & (s <= upper_slope(t, d_p))


# ---------------------------------------------------------------------------
# region types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrapezoidRegionC1:
    """Trapezoid with horizontal scale cuts and diagonal location edges."""

    mu_hat: float
    sigma_hat: float
    n: float
    m: int
    q1: float
    q2: float
    chi2_q1: float  # chi-square quantiles at 2m-2 df
    chi2_q2: float

    @property
    def sigma_lo(self) -> float:
        return 2.0 * self.m * self.sigma_hat / self.chi2_q2

    @property
    def sigma_hi(self) -> float:
        return 2.0 * self.m * self.sigma_hat / self.chi2_q1

    def location_edge(self, q: float, sigma):
        return self.mu_hat + np.asarray(sigma) * math.log(q) / self.n

    def contains(self, mu, sigma):
        return _c1_indicator(self.mu_hat, self.sigma_hat, np.asarray(mu, dtype=float),
                             np.asarray(sigma, dtype=float), n=self.n, m=self.m,
                             ln_q1=math.log(self.q1), ln_q2=math.log(self.q2),
                             x_q1=self.chi2_q1, x_q2=self.chi2_q2)

    def boundary(self, points: int = 512) -> np.ndarray:
        per = max(points // 4, 2)
        sig = np.linspace(self.sigma_lo, self.sigma_hi, per)
        left = np.column_stack([self.location_edge(self.q1, sig), sig])
        right = np.column_stack([self.location_edge(self.q2, sig), sig])
        top_mu = np.linspace(left[-1, 0], right[-1, 0], per)
        bottom_mu = np.linspace(right[0, 0], left[0, 0], per)
        loop = np.vstack([
            left,
            np.column_stack([top_mu, np.full(per, self.sigma_hi)]),
            right[::-1],
            np.column_stack([bottom_mu, np.full(per, self.sigma_lo)]),
        ])
        return loop


@dataclass(frozen=True)
class TrapezoidRegionC2:
    """Trapezoid with vertical location cuts and diagonal scale edges."""

    mu_hat: float
    sigma_hat: float
    n: float
    m: int
    q1: float
    q2: float
    f_q1: float    # F(2, 2m-2) quantiles
    f_q2: float
    chi2_q1: float  # chi-square quantiles at 2m df
    chi2_q2: float

    @property
    def mu_hi(self) -> float:
        return self.mu_hat - self.m * self.sigma_hat * self.f_q1 / ((self.m - 1) * self.n)

    @property
    def mu_lo(self) -> float:
        return self.mu_hat - self.m * self.sigma_hat * self.f_q2 / ((self.m - 1) * self.n)

    def scale_edge(self, q: float, mu):
        x = self.chi2_q1 if q == self.q1 else self.chi2_q2
        return 2.0 * (self.n * (self.mu_hat - np.asarray(mu)) + self.m * self.sigma_hat) / x

    def contains(self, mu, sigma):
        return _c2_indicator(self.mu_hat, self.sigma_hat, np.asarray(mu, dtype=float),
                             np.asarray(sigma, dtype=float), n=self.n, m=self.m,
                             f_q1=self.f_q1, f_q2=self.f_q2,
                             x_q1=self.chi2_q1, x_q2=self.chi2_q2)

    def boundary(self, points: int = 512) -> np.ndarray:
        per = max(points // 4, 2)
        mu = np.linspace(self.mu_lo, self.mu_hi, per)
        lower = np.column_stack([mu, self.scale_edge(self.q2, mu)])
        upper = np.column_stack([mu, self.scale_edge(self.q1, mu)])
        left_sig = np.linspace(lower[0, 1], upper[0, 1], per)
        right_sig = np.linspace(upper[-1, 1], lower[-1, 1], per)
        return np.vstack([
            lower,
            np.column_stack([np.full(per, self.mu_hi), right_sig])[::-1],
            upper[::-1],
            np.column_stack([np.full(per, self.mu_lo), left_sig]),
        ])


@dataclass(frozen=True)
class MinAreaRegionC3:
    """Smallest-area region based on the joint pivot; locations below the
    first failure, scales between the two Lambert W roots."""

    mu_hat: float
    sigma_hat: float
    n: float
    m: int
    c_p: float
    z_lo: float   # scale at the lower Lambert branch
    z_hi: float   # scale at the principal branch
    y: float      # pivot value m*sigma_hat/z_hi
    z: float      # pivot value at the boundary-curve minimum

    def g(self, scale):
        """Signed location offset of the curved boundary at a given scale."""
        scale = np.asarray(scale, dtype=float)
        val = ((self.c_p - (self.m + 1) * (math.log(self.sigma_hat) - np.log(scale))) * scale
               + self.m * self.sigma_hat) / self.n
        return val if val.ndim else float(val)

    def contains(self, mu, sigma):
        return _c3_indicator(self.mu_hat, self.sigma_hat, np.asarray(mu, dtype=float),
                             np.asarray(sigma, dtype=float), m=self.m, n=self.n, c_p=self.c_p)

    def hull_contains(self, mu, sigma):
        """Membership in the comprehensive convex hull (region plus the
        notch between the curved boundary and its minimum); this is the
        coverage event of the induced band."""
        return _c3_hull_indicator(self.mu_hat, self.sigma_hat, np.asarray(mu, dtype=float),
                                  np.asarray(sigma, dtype=float), m=self.m, n=self.n,
                                  c_p=self.c_p, y=self.y, z=self.z)

    def boundary(self, points: int = 512) -> np.ndarray:
        per = max(points // 2, 2)
        sig = np.linspace(self.z_lo, self.z_hi, per)
        curve = np.column_stack([self.mu_hat + self.g(sig), sig])
        line = np.column_stack([np.full(per, self.mu_hat), sig[::-1]])
        return np.vstack([curve, line])


@dataclass(frozen=True)
class KsRegionC4:
    """Sup-distance region: all (mu, sigma) whose cdf stays within d_p of
    the fitted cdf; `trimmed` additionally enforces mu <= mu_hat."""

    mu_hat: float
    sigma_hat: float
    d_p: float
    trimmed: bool
    t_lo: float       # smallest sigma_hat/sigma in the region
    t_hi: float       # largest sigma_hat/sigma in the region
    t_zero_lower: float  # where the lower slope crosses zero
    t_zero_upper: float  # where the upper slope crosses zero

    def slopes(self, t):
        lo = lower_slope(t, self.d_p)
        if self.trimmed:
            lo = np.maximum(lo, 0.0)
        return lo, upper_slope(t, self.d_p)

    def contains(self, mu, sigma):
        return _c4_indicator(self.mu_hat, self.sigma_hat, np.asarray(mu, dtype=float),
                             np.asarray(sigma, dtype=float), d_p=self.d_p, trimmed=self.trimmed)

    def boundary(self, points: int = 512) -> np.ndarray:
        per = max(points // 2, 2)
        t = np.linspace(self.t_lo, self.t_hi, per)
        sig = self.sigma_hat / t
        lo, hi = self.slopes(t)
        upper_edge = np.column_stack([self.mu_hat - sig * lo, sig])
        lower_edge = np.column_stack([self.mu_hat - sig * hi, sig])
        return np.vstack([lower_edge, upper_edge[::-1]])


Region = TrapezoidRegionC1 | TrapezoidRegionC2 | MinAreaRegionC3 | KsRegionC4


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def build_c1(est: MleEstimate, scheme: Scheme, p: float) -> TrapezoidRegionC1:
    q1, q2 = split_level(p)
    m = scheme.m
    return TrapezoidRegionC1(
        mu_hat=est.mu_hat, sigma_hat=est.sigma_hat, n=scheme.effective_n, m=m,
        q1=q1, q2=q2,
        chi2_q1=chi2_quantile(q1, 2 * m - 2), chi2_q2=chi2_quantile(q2, 2 * m - 2))


def build_c2(est: MleEstimate, scheme: Scheme, p: float) -> TrapezoidRegionC2:
    q1, q2 = split_level(p)
    m = scheme.m
    return TrapezoidRegionC2(
        mu_hat=est.mu_hat, sigma_hat=est.sigma_hat, n=scheme.effective_n, m=m,
        q1=q1, q2=q2,
        f_q1=f_quantile(q1, 2, 2 * m - 2), f_q2=f_quantile(q2, 2, 2 * m - 2),
        chi2_q1=chi2_quantile(q1, 2 * m), chi2_q2=chi2_quantile(q2, 2 * m))


def lambert_interval(m: int, c_p: float) -> tuple[float, float, float, float]:
    """Roots and pivot constants of the minimum-area boundary: returns
    (w0, wm1, y, z) where w0/wm1 are the Lambert W values at the shared
    argument, y = -(m+1) w0, and z = m exp(1 + c_p/(m+1))."""
    if not c_p < -m:
        raise InfeasibleLevelError(
            f"need c_p < -m for a nonempty region, got c_p={c_p} at m={m}")
    arg = -(m / (m + 1.0)) * math.exp(c_p / (m + 1.0))
    w0 = lambert_w0(arg)
    wm1 = lambert_wm1(arg)
    y = -(m + 1.0) * w0
    z = m * math.exp(1.0 + c_p / (m + 1.0))
    return w0, wm1, y, z


def build_c3(est: MleEstimate, scheme: Scheme, c_p: float) -> MinAreaRegionC3:
    m = scheme.m
    w0, wm1, y, z = lambert_interval(m, c_p)
    scale = m * est.sigma_hat / (m + 1.0)
    return MinAreaRegionC3(
        mu_hat=est.mu_hat, sigma_hat=est.sigma_hat, n=scheme.effective_n, m=m,
        c_p=c_p, z_lo=-scale / wm1, z_hi=-scale / w0, y=y, z=z)


def build_c4(est: MleEstimate, d_p: float, trimmed: bool = False) -> KsRegionC4:
    d_p = check_probability(d_p, "d_p", open_interval=True)
    if d_p >= 0.5:
        raise UnsupportedCaseError(
            f"d_p={d_p} >= 0.5 yields an unbounded region; not supported")
    ln1md = math.log(1.0 - d_p)
    t1 = bisect_root(lambda t: h_curve(t, d_p) + ln1md, 1e-14, 1.0 - d_p)
    t_zero_lower = bisect_root(lambda t: h_curve(t, d_p), t1, 1.0 - d_p)
    hi = 1.0 / (1.0 - d_p)
    ceiling = hi * 2.0
    while h_curve(ceiling, d_p) - ceiling * ln1md > 0:
        ceiling *= 2.0
        if ceiling > 1e12:
            raise InfeasibleLevelError(f"no finite scale range for d_p={d_p}")
    t2 = bisect_root(lambda t: h_curve(t, d_p) - t * ln1md, hi, ceiling)
    t_zero_upper = bisect_root(lambda t: h_curve(t, d_p), hi, t2)
    t_hi = t_zero_upper if trimmed else t2
    return KsRegionC4(mu_hat=est.mu_hat, sigma_hat=est.sigma_hat, d_p=d_p,
                      trimmed=trimmed, t_lo=t1, t_hi=t_hi,
                      t_zero_lower=t_zero_lower, t_zero_upper=t_zero_upper)


def region_membership(region: Region, theta: LocScale) -> bool:
    """Closed-region membership test (boundary points are members)."""
    return bool(region.contains(theta.mu, theta.sigma))


# ---------------------------------------------------------------------------
# hull probability oracle
# ---------------------------------------------------------------------------

def comprehensive_convex_hull_delta_prob(m: int, c_p: float,
                                         inner_tol: float = 1e-9,
                                         outer_tol: float = 1e-8) -> float:
    """Probability of the notch between the minimum-area region and its
    comprehensive convex hull, evaluated as a nested double integral of the
    pivot densities with adaptive Gauss-Kronrod panels.

    Serves as the independent oracle for the closed-form excess
    tau - (1 - p) of the induced band's exact level.
    """
    if m < 2:
        raise DomainError("need m >= 2")
    _, _, y, z = lambert_interval(m, c_p)

    def outer(v: float) -> float:
        a = (m + 1.0) * math.log(v / m) - v - c_p
        b = ((m + 1.0) / z - 1.0) * v
        if b <= a:
            return 0.0
        inner_val, _ = integrate(lambda u: math.exp(-u), a, b, abs_tol=inner_tol)
        return inner_val * math.exp(gamma_logpdf(m - 1.0, v))

    val, _ = integrate(outer, y, z, abs_tol=outer_tol)
    return val


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

_REGION_TAGS = {
    TrapezoidRegionC1: "c1",
    TrapezoidRegionC2: "c2",
    MinAreaRegionC3: "c3",
    KsRegionC4: "c4",
}


def region_to_dict(region: Region, points: int = 512) -> dict:
    """JSON-ready description: type tag, defining constants, and a polyline
    discretization of the boundary."""
    constants = {k: v for k, v in region.__dict__.items()}
    return {
        "type": _REGION_TAGS[type(region)],
        "constants": constants,
        "boundary": region.boundary(points).tolist(),
    }


def region_from_dict(doc: dict) -> Region:
    classes = {tag: cls for cls, tag in _REGION_TAGS.items()}
    try:
        cls = classes[doc["type"]]
        return cls(**doc["constants"])
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed region document: {exc}") from exc
