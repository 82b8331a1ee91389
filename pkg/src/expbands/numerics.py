"""Shared numerical kernels: adaptive Gauss-Kronrod (G7/K15) quadrature,
golden-section search, and bracketed root finding.

Quadrature bisects the interval with the largest error estimate until the
requested absolute tolerance is met; non-convergence raises NumericError
with diagnostics instead of returning a silently bad value.
"""

from __future__ import annotations

import heapq
import math
from typing import Callable

from .errors import NumericError

# 15-point Kronrod nodes on [-1, 1] with Kronrod weights, and the embedded
# 7-point Gauss weights (zero where the node is Kronrod-only).
_NODES = (
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
)
_WK = (
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
)
_WG = (
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0,
    0.381830050505119, 0.0, 0.417959183673469, 0.0,
    0.381830050505119, 0.0, 0.279705391489277, 0.0,
    0.129484966168870, 0.0,
)


def _kronrod_panel(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    gauss = 0.0
    kron = 0.0
    for xi, wk, wg in zip(_NODES, _WK, _WG):
        fx = f(mid + half * xi)
        kron += wk * fx
        gauss += wg * fx
    kron *= half
    gauss *= half
    err = (200.0 * abs(kron - gauss)) ** 1.5
    return kron, err


def integrate(f: Callable[[float], float], a: float, b: float,
              abs_tol: float = 1e-10, limit: int = 400) -> tuple[float, float]:
    """Integrate f over [a, b]; returns (value, error estimate).

    Raises NumericError if `limit` panel bisections do not reach abs_tol.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise NumericError(f"integration bounds must be finite, got [{a}, {b}]")
    if a == b:
        return 0.0, 0.0
    val, err = _kronrod_panel(f, a, b)
    heap = [(-err, a, b, val, err)]
    total_err = err
    total_val = val
    for _ in range(limit):
        if total_err <= abs_tol:
            return total_val, total_err
        _, lo, hi, val, err = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = _kronrod_panel(f, lo, mid)
        v2, e2 = _kronrod_panel(f, mid, hi)
        total_val += v1 + v2 - val
        total_err += e1 + e2 - err
        heapq.heappush(heap, (-e1, lo, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, hi, v2, e2))
    if total_err <= abs_tol:
        return total_val, total_err
    raise NumericError(
        f"quadrature did not converge on [{a}, {b}]: "
        f"error {total_err:.3e} after {limit} bisections (tol {abs_tol:.1e})")


def golden_section_min(f: Callable[[float], float], a: float, b: float,
                       tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section minimization on [a, b] for unimodal f.

    Returns (argmin, min); endpoints are also candidates.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    lo, hi = a, b
    while hi - lo > tol * max(1.0, abs(lo) + abs(hi)):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
    xm = 0.5 * (lo + hi)
    candidates = [(f(a), a), (f(b), b), (f(xm), xm)]
    fmin, xmin = min(candidates)
    return xmin, fmin


def golden_section_max(f: Callable[[float], float], a: float, b: float,
                       tol: float = 1e-10) -> tuple[float, float]:
    x, neg = golden_section_min(lambda t: -f(t), a, b, tol)
    return x, -neg


def bisect_root(f: Callable[[float], float], a: float, b: float,
                tol: float = 1e-13, max_iter: int = 200) -> float:
    """Root of f on a bracketing interval [a, b] by plain bisection."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise NumericError(f"root not bracketed on [{a}, {b}]: f(a)={fa:.3e}, f(b)={fb:.3e}")
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0.0 or (b - a) <= tol * max(1.0, abs(a) + abs(b)):
            return mid
        if fa * fm < 0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)
