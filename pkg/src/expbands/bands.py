"""Confidence bands for the exponential cdf under progressive type-II
censoring, plus the sup-distance statistic that powers the KS-type bands.

Six constructions: two from the trapezoid regions, one from the
minimum-area region, the constant-width KS band, and its two trimmed
variants obtained by extremizing the cdf over the sup-distance regions.
Reliability (1 - cdf) and last-observation marginal transforms are
monotone push-forwards of any band.

Boundaries are piecewise objects built from a small segment vocabulary:
constants, (possibly offset and clipped) exponential cdf pieces, the
analytic upper envelope of the minimum-area region, and monotone grids
with linear interpolation. Segment structure is preserved so that band
metrics can split integration panels at breakpoints and treat the
unbounded tails in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .calibration import tau_of_p
from .errors import DomainError, UnsupportedCaseError
from .model import LocScale, MleEstimate, Scheme
from .regions import (
    KsRegionC4,
    build_c3,
    build_c4,
    lower_slope,
    split_level,
    upper_slope,
    _h_deriv,
)
from . import regions as _regions
from .special import check_probability

_GOLDEN_INV = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# boundary segments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstSegment:
    value: float

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.full(np.shape(x), self.value)

    def kinks(self) -> tuple[float, ...]:
        return ()

    def limit_left(self) -> float:
        return self.value

    def limit_right(self) -> float:
        return self.value


@dataclass(frozen=True)
class ExpCdfSegment:
    """clip(F_(loc, scale)(x) + offset, 0, 1); offset 0 is a plain cdf."""

    loc: float
    scale: float
    offset: float = 0.0

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        f = -np.expm1(-np.maximum(z, 0.0))
        return np.clip(f + self.offset, 0.0, 1.0)

    def kinks(self) -> tuple[float, ...]:
        pts = [self.loc]
        if self.offset > 0.0:
            pts.append(self.loc - self.scale * math.log(self.offset))      # clips to 1
        elif self.offset < 0.0:
            pts.append(self.loc - self.scale * math.log1p(self.offset))    # leaves 0
        return tuple(pts)

    def limit_left(self) -> float:
        return min(max(self.offset, 0.0), 1.0)

    def limit_right(self) -> float:
        return min(1.0 + self.offset, 1.0)


@dataclass(frozen=True)
class MinAreaEnvelopeSegment:
    """Upper envelope of the minimum-area region where the extremizing scale
    is interior: at each x the cdf is evaluated at the boundary point whose
    scale is (n (mu_hat - x) + m sigma_hat) / (m + 1)."""

    mu_hat: float
    sigma_hat: float
    m: int
    n: float
    c_p: float

    def _g(self, scale: np.ndarray) -> np.ndarray:
        return ((self.c_p - (self.m + 1) * (math.log(self.sigma_hat) - np.log(scale))) * scale
                + self.m * self.sigma_hat) / self.n

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        scale = (self.n * (self.mu_hat - x) + self.m * self.sigma_hat) / (self.m + 1)
        scale = np.maximum(scale, 1e-300)
        z = (x - self.mu_hat - self._g(scale)) / scale
        return -np.expm1(-np.maximum(z, 0.0))

    def kinks(self) -> tuple[float, ...]:
        return ()

    def limit_left(self) -> float:  # pragma: no cover - interior segment only
        return 0.0

    def limit_right(self) -> float:  # pragma: no cover - interior segment only
        return 1.0


@dataclass(frozen=True)
class GridSegment:
    """Monotone grid with linear interpolation on [xs[0], xs[-1]]."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.xs, self.ys)

    def kinks(self) -> tuple[float, ...]:
        return (self.xs[0], self.xs[-1])

    def limit_left(self) -> float:
        return self.ys[0]

    def limit_right(self) -> float:
        return self.ys[-1]


Segment = ConstSegment | ExpCdfSegment | MinAreaEnvelopeSegment | GridSegment


@dataclass(frozen=True)
class PiecewiseBoundary:
    """One band boundary: segments separated by interior breakpoints."""

    segments: tuple[Segment, ...]
    breaks: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.breaks) != len(self.segments) - 1:
            raise DomainError("need exactly one breakpoint between consecutive segments")
        if any(b2 < b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise DomainError("breakpoints must be nondecreasing")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        out = np.empty_like(xv)
        idx = np.searchsorted(self.breaks, xv, side="right")
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if np.any(mask):
                out[mask] = seg.evaluate(xv[mask])
        return float(out[0]) if scalar else out

    def breakpoints(self) -> tuple[float, ...]:
        pts = set(self.breaks)
        for seg in self.segments:
            pts.update(seg.kinks())
        return tuple(sorted(pts))

    def limit_left(self) -> float:
        return self.segments[0].limit_left()

    def limit_right(self) -> float:
        return self.segments[-1].limit_right()

    def leftmost(self) -> Segment:
        return self.segments[0]

    def rightmost(self) -> Segment:
        return self.segments[-1]


@dataclass(frozen=True)
class ReflectedBoundary:
    """1 - base(x); turns a cdf envelope into a reliability envelope."""

    base: "Boundary"

    def __call__(self, x):
        return 1.0 - self.base(x)

    def breakpoints(self) -> tuple[float, ...]:
        return self.base.breakpoints()

    def limit_left(self) -> float:
        return 1.0 - self.base.limit_left()

    def limit_right(self) -> float:
        return 1.0 - self.base.limit_right()


@dataclass(frozen=True)
class MarginalBoundary:
    """H(base(x)) for the strictly increasing last-observation marginal
    transform H determined by pairwise distinct risk coefficients."""

    base: "Boundary"
    gammas: tuple[float, ...]

    def __call__(self, x):
        return marginal_transform_h(self.gammas, self.base(x))

    def breakpoints(self) -> tuple[float, ...]:
        return self.base.breakpoints()

    def limit_left(self) -> float:
        return float(marginal_transform_h(self.gammas, self.base.limit_left()))

    def limit_right(self) -> float:
        return float(marginal_transform_h(self.gammas, self.base.limit_right()))


Boundary = PiecewiseBoundary | ReflectedBoundary | MarginalBoundary


@dataclass(frozen=True)
class Band:
    """Evaluable confidence band with level and construction provenance."""

    kind: str
    lower: Boundary
    upper: Boundary
    level: float | None
    provenance: dict = field(default_factory=dict)
    increasing: bool = True

    def width(self, x):
        return self.upper(x) - self.lower(x)

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.lower.breakpoints()) | set(self.upper.breakpoints())))


# ---------------------------------------------------------------------------
# closed-form bands
# ---------------------------------------------------------------------------

def band_b1(est: MleEstimate, scheme: Scheme, p: float) -> Band:
    """Band induced by the scale-cut trapezoid; exact level 1-p."""
    region = _regions.build_c1(est, scheme, p)
    mu_hat, n = est.mu_hat, scheme.effective_n
    s_lo, s_hi = region.sigma_lo, region.sigma_hi

    def loc(q: float, sigma: float) -> float:
        return mu_hat + sigma * math.log(q) / n

    lower = PiecewiseBoundary(
        (ExpCdfSegment(loc(region.q2, s_lo), s_lo), ExpCdfSegment(loc(region.q2, s_hi), s_hi)),
        breaks=(mu_hat,))
    upper = PiecewiseBoundary(
        (ExpCdfSegment(loc(region.q1, s_hi), s_hi), ExpCdfSegment(loc(region.q1, s_lo), s_lo)),
        breaks=(mu_hat,))
    prov = {"mu_hat": est.mu_hat, "sigma_hat": est.sigma_hat, "m": scheme.m, "n": n,
            "q1": region.q1, "q2": region.q2}
    return Band("b1", lower, upper, level=1.0 - p, provenance=prov)


def band_b2(est: MleEstimate, scheme: Scheme, p: float) -> Band:
    """Band induced by the location-cut trapezoid; exact level 1-p."""
    region = _regions.build_c2(est, scheme, p)
    m, n = scheme.m, scheme.effective_n
    split = est.mu_hat + m * est.sigma_hat / n
    mu_lo, mu_hi = region.mu_lo, region.mu_hi

    def scale(chi2: float, mu: float) -> float:
        return 2.0 * (n * (est.mu_hat - mu) + m * est.sigma_hat) / chi2

    lower = PiecewiseBoundary(
        (ExpCdfSegment(mu_hi, scale(region.chi2_q1, mu_hi)),
         ExpCdfSegment(mu_lo, scale(region.chi2_q1, mu_lo))),
        breaks=(split,))
    upper = PiecewiseBoundary(
        (ExpCdfSegment(mu_lo, scale(region.chi2_q2, mu_lo)),
         ExpCdfSegment(mu_hi, scale(region.chi2_q2, mu_hi))),
        breaks=(split,))
    prov = {"mu_hat": est.mu_hat, "sigma_hat": est.sigma_hat, "m": m, "n": n,
            "q1": region.q1, "q2": region.q2}
    return Band("b2", lower, upper, level=1.0 - p, provenance=prov)


def band_b3(est: MleEstimate, scheme: Scheme, c_p: float,
            nominal_p: float | None = None) -> Band:
    """Band induced by the minimum-area region.

    The upper boundary follows the region's lower Lambert scale for large x,
    the interior envelope in between, and the principal-branch scale for
    small x; the lower boundary is the cdf at the principal-branch scale.
    When the nominal region level 1-p is supplied the band's exact
    (strictly larger) level is computed and stored as the band level.
    """
    region = build_c3(est, scheme, c_p)
    m, n = scheme.m, scheme.effective_n
    mu_hat, sigma_hat = est.mu_hat, est.sigma_hat
    # x at which the (decreasing) envelope scale crosses the interval ends
    x_enter = mu_hat - ((m + 1) * region.z_hi - m * sigma_hat) / n
    x_exit = mu_hat - ((m + 1) * region.z_lo - m * sigma_hat) / n
    upper = PiecewiseBoundary(
        (ExpCdfSegment(mu_hat, region.z_hi),
         MinAreaEnvelopeSegment(mu_hat, sigma_hat, m, n, c_p),
         ExpCdfSegment(mu_hat, region.z_lo)),
        breaks=(x_enter, x_exit))
    lower = PiecewiseBoundary((ExpCdfSegment(mu_hat, region.z_hi),))
    level = None if nominal_p is None else tau_of_p(m, nominal_p, c_p)
    prov = {"mu_hat": mu_hat, "sigma_hat": sigma_hat, "m": m, "n": n,
            "c_p": c_p, "nominal_level_1mp": None if nominal_p is None else 1.0 - nominal_p}
    return Band("b3", lower, upper, level=level, provenance=prov)


def band_b4(est: MleEstimate, d_p: float, level: float | None = None) -> Band:
    """Constant-width KS-type band: fitted cdf plus/minus d_p, clipped."""
    d_p = check_probability(d_p, "d_p", open_interval=True)
    lower = PiecewiseBoundary((ExpCdfSegment(est.mu_hat, est.sigma_hat, offset=-d_p),))
    upper = PiecewiseBoundary((ExpCdfSegment(est.mu_hat, est.sigma_hat, offset=+d_p),))
    prov = {"mu_hat": est.mu_hat, "sigma_hat": est.sigma_hat, "d_p": d_p}
    return Band("b4", lower, upper, level=level, provenance=prov)


# ---------------------------------------------------------------------------
# sup-distance statistic
# ---------------------------------------------------------------------------

def ks_distance_xy(mu, sigma):
    """sup_x |F_(mu, sigma)(x) - F_(0,1)(x)| in closed form (vectorized)."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    u = -np.expm1(-np.maximum(mu, -mu / sigma))
    not_one = sigma != 1.0
    s = np.where(not_one, sigma, 2.0)
    ln_s = np.log(s)
    interior = np.where(s < 1.0, mu > s * ln_s, mu < ln_s)
    # the exponent can overflow only on lanes masked out below
    with np.errstate(over="ignore"):
        v = np.abs(1.0 - s) * np.exp((mu - s * ln_s) / (s - 1.0))
    v = np.where(not_one & interior, v, 0.0)
    out = np.maximum(u, v)
    return out if out.ndim else float(out)


def ks_distance(theta_rel: LocScale) -> float:
    """Sup distance between the cdf at relative coordinates (mu, sigma) and
    the standard exponential cdf."""
    return float(ks_distance_xy(theta_rel.mu, theta_rel.sigma))


def ks_distance_grid(mu: float, sigma: float, points: int = 100_000) -> float:
    """Brute-force oracle: supremum of |F_(mu,sigma) - F_(0,1)| on a dense
    quantile-spaced grid of both distributions."""
    q = np.linspace(0.5 / points, 1.0 - 0.5 / points, points // 2)
    xs = np.concatenate([-np.log1p(-q), mu - sigma * np.log1p(-q), [0.0, mu]])
    f_std = -np.expm1(-np.maximum(xs, 0.0))
    f_rel = -np.expm1(-np.maximum((xs - mu) / sigma, 0.0))
    return float(np.max(np.abs(f_rel - f_std)))


# ---------------------------------------------------------------------------
# trimmed KS bands
# ---------------------------------------------------------------------------

def _golden_vec(objective: Callable[[np.ndarray], np.ndarray], beta: np.ndarray,
                t_lo: float, t_hi: float, minimize: bool, iters: int = 70) -> np.ndarray:
    """Vectorized golden-section extremum of phi(t; beta) = beta*t + slope(t)
    over [t_lo, t_hi], one bracket per beta entry; returns extremal phi."""

    def phi(t):
        return beta * t + objective(t)

    sign = 1.0 if minimize else -1.0
    lo = np.full_like(beta, t_lo)
    hi = np.full_like(beta, t_hi)
    x1 = hi - _GOLDEN_INV * (hi - lo)
    x2 = lo + _GOLDEN_INV * (hi - lo)
    f1 = sign * phi(x1)
    f2 = sign * phi(x2)
    for _ in range(iters):
        first = f1 <= f2
        hi = np.where(first, x2, hi)
        lo = np.where(first, lo, x1)
        x1n = np.where(first, hi - _GOLDEN_INV * (hi - lo), x2)
        x2n = np.where(first, x1, lo + _GOLDEN_INV * (hi - lo))
        # only one probe per lane is fresh; evaluate just that one
        fresh = sign * phi(np.where(first, x1n, x2n))
        f1n = np.where(first, fresh, f2)
        f2n = np.where(first, f1, fresh)
        x1, x2, f1, f2 = x1n, x2n, f1n, f2n
    mid = 0.5 * (lo + hi)
    cands = np.stack([sign * phi(mid), sign * phi(np.full_like(beta, t_lo)),
                      sign * phi(np.full_like(beta, t_hi))])
    return sign * np.min(cands, axis=0)


@dataclass(frozen=True)
class GridSpec:
    """Grid request for optimization-backed boundaries."""

    points: int = 1024
    x_min: float | None = None
    x_max: float | None = None


def _phi_to_cdf(phi: np.ndarray) -> np.ndarray:
    return np.where(phi > 0.0, -np.expm1(-np.minimum(np.maximum(phi, 0.0), 700.0)), 0.0)


def trim_band(b4: Band, region: KsRegionC4, grid: GridSpec | None = None) -> Band:
    """Trim the constant-width band to the union of cdf graphs over the
    sup-distance region: at each x the boundaries are the extrema of
    F_theta(x) over the region, attained on its boundary arcs.

    The extremizing scale settles at an arc endpoint outside a computable
    core interval, so the output boundaries are exponential-cdf tails around
    a grid-backed core (golden-section extremization per grid point).
    """
    if grid is None:
        grid = GridSpec()
    d_p = region.d_p
    mu_hat, sigma_hat = region.mu_hat, region.sigma_hat
    t1, thi = region.t_lo, region.t_hi
    ln1md = math.log(1.0 - d_p)

    def o_fn(t):
        return upper_slope(t, d_p)

    if region.trimmed:
        def l_fn(t):
            return np.maximum(lower_slope(t, d_p), 0.0)
        beta_low_left = -_h_deriv(region.t_zero_lower, d_p)
        left_lower_seg = ExpCdfSegment(mu_hat, sigma_hat / region.t_zero_lower)
    else:
        def l_fn(t):
            return lower_slope(t, d_p)
        beta_low_left = -ln1md
        left_lower_seg = ExpCdfSegment(
            mu_hat - lower_slope(thi, d_p) * sigma_hat / thi, sigma_hat / thi)

    beta_up_right = -_h_deriv(thi, d_p)
    beta_low_right = -_h_deriv(t1, d_p)

    def exp_seg_at(t: float, slope: float) -> ExpCdfSegment:
        return ExpCdfSegment(mu_hat - slope * sigma_hat / t, sigma_hat / t)

    upper_left_seg = exp_seg_at(t1, float(o_fn(t1)))
    upper_right_seg = exp_seg_at(thi, float(o_fn(thi)))
    lower_right_seg = exp_seg_at(t1, float(lower_slope(t1, d_p)))

    def core_grid(beta_a: float, beta_b: float) -> np.ndarray:
        x_a = mu_hat + sigma_hat * beta_a if grid.x_min is None else grid.x_min
        x_b = mu_hat + sigma_hat * beta_b if grid.x_max is None else grid.x_max
        return np.linspace(x_a, x_b, grid.points)

    # upper boundary: core between beta = 0 and the right transition
    xs_up = core_grid(0.0, beta_up_right)
    beta_up = (xs_up - mu_hat) / sigma_hat
    phi_up = _golden_vec(o_fn, beta_up, t1, thi, minimize=False)
    ys_up = np.minimum(_phi_to_cdf(phi_up), b4.upper(xs_up))
    ys_up = np.maximum.accumulate(ys_up)
    upper = PiecewiseBoundary(
        (upper_left_seg, GridSegment(tuple(xs_up), tuple(ys_up)), upper_right_seg),
        breaks=(float(xs_up[0]), float(xs_up[-1])))

    # lower boundary: core between its own transitions
    xs_lo = core_grid(beta_low_left, beta_low_right)
    beta_lo = (xs_lo - mu_hat) / sigma_hat
    phi_lo = _golden_vec(l_fn, beta_lo, t1, thi, minimize=True)
    ys_lo = np.maximum(_phi_to_cdf(phi_lo), b4.lower(xs_lo))
    ys_lo = np.maximum.accumulate(ys_lo)
    lower = PiecewiseBoundary(
        (left_lower_seg, GridSegment(tuple(xs_lo), tuple(ys_lo)), lower_right_seg),
        breaks=(float(xs_lo[0]), float(xs_lo[-1])))

    kind = "b4pp" if region.trimmed else "b4p"
    prov = dict(b4.provenance)
    prov.update({"d_p": d_p, "t_lo": t1, "t_hi": thi, "grid_points": grid.points})
    return Band(kind, lower, upper, level=b4.level, provenance=prov)


def band_b4_trimmed(est: MleEstimate, d_p: float, trimmed: bool,
                    level: float | None = None, grid: GridSpec | None = None) -> Band:
    """Convenience: build the KS band and trim it over the matching region."""
    b4 = band_b4(est, d_p, level=level)
    region = build_c4(est, d_p, trimmed=trimmed)
    return trim_band(b4, region, grid)


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def reliability_band(band: Band) -> Band:
    """Band for the reliability function 1 - F: boundaries swap and reflect.
    Applying the transform twice returns the original band."""
    if (isinstance(band.lower, ReflectedBoundary)
            and isinstance(band.upper, ReflectedBoundary)
            and band.kind.startswith("reliability-of-")):
        return Band(band.kind[len("reliability-of-"):], band.upper.base, band.lower.base,
                    band.level, dict(band.provenance), increasing=True)
    return Band(f"reliability-of-{band.kind}",
                lower=ReflectedBoundary(band.upper),
                upper=ReflectedBoundary(band.lower),
                level=band.level, provenance=dict(band.provenance), increasing=False)


def marginal_transform_h(gamma: Sequence[float], y):
    """Distribution transform mapping baseline cdf values to the cdf of the
    last observed failure time, for pairwise distinct positive coefficients:
    H(y) = 1 - (prod gamma_j) * sum_i a_i/gamma_i (1-y)^gamma_i.

    Strictly increasing bijection of [0, 1]; evaluated through signed
    log-coefficients for numerical stability.
    """
    g = np.asarray(gamma, dtype=float)
    if g.ndim != 1 or g.size < 1:
        raise DomainError("need a one-dimensional coefficient vector")
    if np.any(g <= 0):
        raise DomainError("coefficients must be positive")
    diff = g[:, None] - g[None, :]
    off = ~np.eye(g.size, dtype=bool)
    if np.any(diff[off] == 0.0):
        raise UnsupportedCaseError(
            "marginal transform requires pairwise distinct coefficients")
    y = np.asarray(y, dtype=float)
    if np.any((y < -1e-12) | (y > 1.0 + 1e-12)):
        raise DomainError("transform argument must lie in [0, 1]")
    yc = np.clip(y, 0.0, 1.0)
    # log|coef_i| with coef_i = (prod_j g_j) * a_i / g_i,  a_i = prod_{j!=i} 1/(g_j - g_i)
    log_coef = (np.sum(np.log(g)) - np.log(g)
                - np.sum(np.where(off, np.log(np.abs(np.where(off, diff, 1.0))), 0.0), axis=1))
    sign = np.prod(np.where(off, np.sign(-diff), 1.0), axis=1)
    with np.errstate(divide="ignore"):
        log1my = np.log1p(-np.atleast_1d(yc)).astype(np.longdouble)[..., None]
    # signed mixture with heavy cancellation near y = 0; extended precision
    # keeps the noise floor a few orders below any band-relevant value
    terms = sign.astype(np.longdouble) * np.exp(log_coef.astype(np.longdouble)
                                                + g.astype(np.longdouble) * log1my)
    out = (1.0 - np.sum(terms, axis=-1)).astype(float)
    out = np.clip(out, 0.0, 1.0)
    out = out.reshape(np.shape(yc))
    return out if out.ndim else float(out)


def marginal_band(band: Band, gamma: Sequence[float]) -> Band:
    """Push a baseline-cdf band through the marginal transform; the level is
    unchanged because the transform is a monotone bijection."""
    marginal_transform_h(gamma, 0.5)  # validate coefficients eagerly
    g = tuple(float(v) for v in gamma)
    return Band(f"marginal-of-{band.kind}",
                lower=MarginalBoundary(band.lower, g),
                upper=MarginalBoundary(band.upper, g),
                level=band.level, provenance=dict(band.provenance),
                increasing=band.increasing)


# ---------------------------------------------------------------------------
# containment
# ---------------------------------------------------------------------------

def graph_contained(band: Band, theta: LocScale, points: int = 2048,
                    tol: float = 1e-9) -> bool:
    """Whether the graph of F_theta lies inside the band.

    Monotonicity of all three curves reduces containment to a check on a
    quantile-spaced grid of F_theta plus the band's breakpoints; `tol`
    absorbs grid and optimizer resolution at the contact points.
    """
    if not band.increasing:
        raise DomainError("containment check expects a cdf band")
    q = np.linspace(0.5 / points, 1.0 - 0.5 / points, points)
    xs = theta.mu - theta.sigma * np.log1p(-q)
    extra = np.asarray(band.breakpoints() + (theta.mu,), dtype=float)
    xs = np.concatenate([xs, extra, extra + 1e-9])
    f = theta.cdf(xs)
    return bool(np.all(band.lower(xs) <= f + tol) and np.all(f <= band.upper(xs) + tol))


def default_grid(band: Band, points: int = 1024) -> np.ndarray:
    """Default x-grid: from one fitted scale left of the fitted location to
    the last structural breakpoint, extended until the band width falls
    below 1e-6 (skipped where the width does not vanish at infinity)."""
    prov = band.provenance
    try:
        start = float(prov["mu_hat"]) - float(prov["sigma_hat"])
    except KeyError:
        start = min(band.breakpoints())
    end = max(band.breakpoints())
    end = max(end, start + 1e-6)
    if band.upper.limit_right() - band.lower.limit_right() <= 1e-6:
        step = max(end - start, 1.0)
        for _ in range(80):
            if band.width(end) < 1e-6:
                break
            end += step
            step *= 1.5
    return np.linspace(start, end, points)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _segment_to_dict(seg: Segment) -> dict:
    if isinstance(seg, ConstSegment):
        return {"type": "const", "value": seg.value}
    if isinstance(seg, ExpCdfSegment):
        return {"type": "expcdf", "loc": seg.loc, "scale": seg.scale, "offset": seg.offset}
    if isinstance(seg, MinAreaEnvelopeSegment):
        return {"type": "minarea_envelope", "mu_hat": seg.mu_hat, "sigma_hat": seg.sigma_hat,
                "m": seg.m, "n": seg.n, "c_p": seg.c_p}
    if isinstance(seg, GridSegment):
        return {"type": "grid", "xs": list(seg.xs), "ys": list(seg.ys)}
    raise DomainError(f"cannot serialize segment type {type(seg).__name__}")


def _segment_from_dict(doc: dict) -> Segment:
    kind = doc.get("type")
    params = {k: v for k, v in doc.items() if k != "type"}
    try:
        if kind == "const":
            return ConstSegment(**params)
        if kind == "expcdf":
            return ExpCdfSegment(**params)
        if kind == "minarea_envelope":
            return MinAreaEnvelopeSegment(**params)
        if kind == "grid":
            return GridSegment(xs=tuple(params["xs"]), ys=tuple(params["ys"]))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed segment document: {exc}") from exc
    raise DomainError(f"unknown segment type {kind!r}")


def _boundary_to_dict(boundary: Boundary) -> dict:
    if isinstance(boundary, PiecewiseBoundary):
        return {"segments": [_segment_to_dict(s) for s in boundary.segments],
                "breaks": list(boundary.breaks)}
    if isinstance(boundary, ReflectedBoundary):
        return {"transform": "reflect", "base": _boundary_to_dict(boundary.base)}
    if isinstance(boundary, MarginalBoundary):
        return {"transform": "marginal", "gammas": list(boundary.gammas),
                "base": _boundary_to_dict(boundary.base)}
    raise DomainError(f"cannot serialize boundary type {type(boundary).__name__}")


def _boundary_from_dict(doc: dict) -> Boundary:
    if "transform" in doc:
        base = _boundary_from_dict(doc["base"])
        if doc["transform"] == "reflect":
            return ReflectedBoundary(base)
        if doc["transform"] == "marginal":
            return MarginalBoundary(base, tuple(doc["gammas"]))
        raise DomainError(f"unknown boundary transform {doc['transform']!r}")
    return PiecewiseBoundary(
        segments=tuple(_segment_from_dict(s) for s in doc["segments"]),
        breaks=tuple(doc["breaks"]))


def band_to_dict(band: Band) -> dict:
    """JSON-ready description with kind, level, and all constants; the
    boundary representation round-trips to identical evaluations."""
    return {"kind": band.kind, "level": band.level, "increasing": band.increasing,
            "provenance": band.provenance,
            "lower": _boundary_to_dict(band.lower), "upper": _boundary_to_dict(band.upper)}


def band_from_dict(doc: dict) -> Band:
    try:
        return Band(kind=doc["kind"], lower=_boundary_from_dict(doc["lower"]),
                    upper=_boundary_from_dict(doc["upper"]), level=doc["level"],
                    provenance=dict(doc.get("provenance", {})),
                    increasing=bool(doc.get("increasing", True)))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed band document: {exc}") from exc


def band_rows(band: Band, xs: Sequence[float]) -> list[tuple[float, float, float]]:
    """(x, lower, upper) rows for CSV export."""
    xs = np.asarray(xs, dtype=float)
    lo = np.asarray(band.lower(xs), dtype=float)
    hi = np.asarray(band.upper(xs), dtype=float)
    return list(zip(xs.tolist(), lo.tolist(), hi.tolist()))


def coverage_indicator(kind: str, mu_hats: np.ndarray, sigma_hats: np.ndarray,
                       theta: LocScale, scheme: Scheme, *, level: float,
                       c_p: float | None = None, d_p: float | None = None) -> np.ndarray:
    """Vectorized exact coverage events for bands and regions.

    For exhaustive regions the band event equals region membership; the
    minimum-area band covers exactly when the parameter falls in the
    region's comprehensive convex hull; the KS-type bands cover exactly when
    the sup-distance pivot is within d_p. These identities are validated
    against direct graph containment in the test suite.
    """
    p = 1.0 - level
    mu, sg = theta.mu, theta.sigma
    m, n = scheme.m, scheme.effective_n
    if kind in ("c1", "b1"):
        q1, q2 = split_level(p)
        from .special import chi2_quantile
        return _regions._c1_indicator(mu_hats, sigma_hats, mu, sg, n=n, m=m,
                                      ln_q1=math.log(q1), ln_q2=math.log(q2),
                                      x_q1=chi2_quantile(q1, 2 * m - 2),
                                      x_q2=chi2_quantile(q2, 2 * m - 2))
    if kind in ("c2", "b2"):
        q1, q2 = split_level(p)
        from .special import chi2_quantile, f_quantile
        return _regions._c2_indicator(mu_hats, sigma_hats, mu, sg, n=n, m=m,
                                      f_q1=f_quantile(q1, 2, 2 * m - 2),
                                      f_q2=f_quantile(q2, 2, 2 * m - 2),
                                      x_q1=chi2_quantile(q1, 2 * m),
                                      x_q2=chi2_quantile(q2, 2 * m))
    if kind == "c3":
        if c_p is None:
            raise DomainError("c3 coverage needs the calibration constant c_p")
        return _regions._c3_indicator(mu_hats, sigma_hats, mu, sg, m=m, n=n, c_p=c_p)
    if kind == "b3":
        if c_p is None:
            raise DomainError("b3 coverage needs the calibration constant c_p")
        _, _, y, z = _regions.lambert_interval(m, c_p)
        return _regions._c3_hull_indicator(mu_hats, sigma_hats, mu, sg,
                                           m=m, n=n, c_p=c_p, y=y, z=z)
    if kind in ("c4p", "c4pp", "b4", "b4p", "b4pp"):
        if d_p is None:
            raise DomainError(f"{kind} coverage needs the calibration constant d_p")
        if kind in ("c4p", "c4pp"):
            return _regions._c4_indicator(mu_hats, sigma_hats, mu, sg,
                                          d_p=d_p, trimmed=kind == "c4pp")
        return ks_distance_xy((mu_hats - mu) / sg, sigma_hats / sg) <= d_p
    raise DomainError(f"unknown coverage kind {kind!r}")
