"""Deterministic quadrature and small fitting utilities.

Everything here is plain numerics with no hidden state: adaptive
Gauss-Kronrod integration with explicit error accounting, fixed-order
Gauss-Legendre panels for cumulative integrals, and least-squares fits
for power-law tails. Determinism matters because verification reports
are compared byte-for-byte across runs, so no randomized pivoting or
wall-clock-dependent decisions are allowed anywhere in this module.

All integrands passed in must accept a 1-D numpy array and return an
array of the same shape.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.optimize import least_squares

# 15-point Kronrod nodes on [-1, 1] and the embedded 7-point Gauss rule
# (QUADPACK dqk15 values). Order: interleaved so that the Gauss subset
# sits at odd indices.
_KRONROD_X = np.array([
    -0.991455371120813,
    -0.949107912342759,
    -0.864864423359769,
    -0.741531185599394,
    -0.586087235467691,
    -0.405845151377397,
    -0.207784955007898,
    0.0,
    0.207784955007898,
    0.405845151377397,
    0.586087235467691,
    0.741531185599394,
    0.864864423359769,
    0.949107912342759,
    0.991455371120813,
])
_KRONROD_W = np.array([
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
    0.204432940075298,
    0.190350578064785,
    0.169004726639267,
    0.140653259715525,
    0.104790010322250,
    0.063092092629979,
    0.022935322010529,
])
_GAUSS_W = np.zeros(15)
_GAUSS_W[1::2] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
]


def _gk15(f, a: float, b: float):
    """One Gauss-Kronrod 7/15 panel; returns (integral, error_estimate).

    The error estimate follows the QUADPACK rescaling, which is invariant
    under f -> c*f so that refinement decisions driven by a *relative*
    tolerance do not depend on the overall scale of the integrand.
    """
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fv = f(center + half * _KRONROD_X)
    resk = float(_KRONROD_W @ fv)
    resg = float(_GAUSS_W @ fv)
    reskh = 0.5 * resk
    resasc = float(_KRONROD_W @ np.abs(fv - reskh)) * abs(half)
    result = resk * half
    abserr = abs((resk - resg) * half)
    if resasc != 0.0 and abserr != 0.0:
        abserr = resasc * min(1.0, (200.0 * abserr / resasc) ** 1.5)
    return result, abserr


def adaptive_quad(f, a: float, b: float, tol_abs: float = 0.0,
                  tol_rel: float = 1e-12, max_intervals: int = 4000):
    """Globally adaptive Gauss-Kronrod integration of f over [a, b].

    Bisects the interval with the largest error estimate until the summed
    error falls below max(tol_abs, tol_rel * |integral|). Returns
    (integral, error_bound). Deterministic: ties in the worst-interval
    choice resolve to the lowest index.
    """
    if b < a:
        raise ValueError(f"integration bounds out of order: [{a}, {b}]")
    if b == a:
        return 0.0, 0.0
    val, err = _gk15(f, a, b)
    vals = [val]
    errs = [err]
    lefts = [a]
    rights = [b]
    while len(vals) < max_intervals:
        total = math.fsum(vals)
        total_err = math.fsum(errs)
        if total_err <= max(tol_abs, tol_rel * abs(total)):
            break
        i = int(np.argmax(errs))
        la, lb = lefts[i], rights[i]
        mid = 0.5 * (la + lb)
        if mid <= la or mid >= lb:
            break  # interval at floating-point resolution
        v1, e1 = _gk15(f, la, mid)
        v2, e2 = _gk15(f, mid, lb)
        vals[i], errs[i], rights[i] = v1, e1, mid
        vals.append(v2)
        errs.append(e2)
        lefts.append(mid)
        rights.append(lb)
    return math.fsum(vals), math.fsum(errs)


@lru_cache(maxsize=16)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gauss_panel(f, a: float, b: float, order: int = 12) -> float:
    """Fixed-order Gauss-Legendre integral of f over [a, b]."""
    x, w = _leggauss(order)
    half = 0.5 * (b - a)
    return float(half * (w @ f(0.5 * (a + b) + half * x)))


def graded_edges(b: float, levels: int = 40, ratio: float = 0.5) -> np.ndarray:
    """Geometrically graded edges 0 = e_0 < e_1 < ... < e_k = b.

    Used as sub-panels for integrands with an s^nu (nu possibly
    fractional) factor at the origin; the innermost panel contributes
    O((ratio^levels)^(nu+1)) and is negligible regardless of quadrature
    accuracy there.
    """
    if b <= 0:
        raise ValueError("graded_edges needs b > 0")
    pts = b * ratio ** np.arange(levels, -1, -1, dtype=float)
    return np.concatenate(([0.0], pts))


def cumulative_gauss(f, edges: np.ndarray, order: int = 12,
                     grade_origin: bool = True) -> np.ndarray:
    """Cumulative integrals of f at the given edges.

    Returns c with c[0] = 0 and c[i] = integral of f over
    [edges[0], edges[i]], computed with one Gauss-Legendre panel per cell
    (vectorized in a single call to f). If edges[0] == 0 and grade_origin
    is set, the first cell is subdivided geometrically toward 0.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2:
        raise ValueError("need at least two edges")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing")
    work = edges
    first_extra = 0
    if grade_origin and edges[0] == 0.0 and len(edges) > 1:
        sub = graded_edges(edges[1])
        work = np.concatenate((sub, edges[2:]))
        first_extra = len(sub) - 2  # extra cells folded into cell 0

    x, w = _leggauss(order)
    a = work[:-1]
    half = 0.5 * np.diff(work)
    nodes = a[:, None] + half[:, None] * (x[None, :] + 1.0)
    fvals = f(nodes.ravel()).reshape(nodes.shape)
    cells = half * (fvals @ w)
    if first_extra:
        head = cells[:first_extra + 1].sum()
        cells = np.concatenate(([head], cells[first_extra + 1:]))
    return np.concatenate(([0.0], np.cumsum(cells)))


def fit_anchored_power(s: np.ndarray, y: np.ndarray,
                       s_anchor: float, y_anchor: float) -> float:
    """Least-squares exponent p for y ~ y_anchor * (s/s_anchor)^(-p).

    One-parameter fit in log-log space, anchored so the model passes
    through (s_anchor, y_anchor) exactly. Requires positive data.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(s <= 0) or np.any(y <= 0) or y_anchor <= 0 or s_anchor <= 0:
        raise ValueError("anchored power fit needs positive data")
    ls = np.log(s / s_anchor)
    ly = np.log(y / y_anchor)
    denom = float(ls @ ls)
    if denom == 0.0:
        raise ValueError("anchored power fit needs at least one s != s_anchor")
    return float(-(ls @ ly) / denom)


def fit_const_plus_power(r: np.ndarray, y: np.ndarray):
    """Fit y ~ V + C * r^(-q); returns (V, C, q, rms_residual).

    Used to extrapolate monotone ratio curves to their limit. The fit is
    seeded from the endpoints with q = 1 and solved by deterministic
    trust-region least squares. Nearly constant data short-circuits to
    V = last value.
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(r) < 4:
        raise ValueError("need at least 4 points for tail extrapolation")
    scale = max(np.max(np.abs(y)), 1e-300)
    if np.max(y) - np.min(y) <= 1e-13 * scale:
        return float(y[-1]), 0.0, 1.0, 0.0

    inv_first, inv_last = 1.0 / r[0], 1.0 / r[-1]
    c0 = (y[0] - y[-1]) / (inv_first - inv_last)
    v0 = y[-1] - c0 * inv_last

    def resid(p):
        v, c, q = p
        return (v + c * r ** (-q) - y) / scale

    sol = least_squares(resid, x0=[v0, c0, 1.0],
                        bounds=([-np.inf, -np.inf, 0.05], [np.inf, np.inf, 8.0]),
                        xtol=1e-14, ftol=1e-14, gtol=1e-14)
    v, c, q = sol.x
    rms = float(np.sqrt(np.mean(sol.fun ** 2)) * scale)
    return float(v), float(c), float(q), rms


def unit_sphere_area(n: int) -> float:
    """Surface measure of the unit (n-1)-sphere in R^n."""
    if n < 2:
        raise ValueError("dimension must be >= 2")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def centered_derivative(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Second-order centered first derivative at interior grid points."""
    return (values[2:] - values[:-2]) / (grid[2:] - grid[:-2])


def fourth_order_derivative(values: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order centered first derivative (valid for uniform grids).

    Returns the derivative at indices 2 .. len-3.
    """
    return (-values[4:] + 8.0 * values[3:-1]
            - 8.0 * values[1:-3] + values[:-4]) / (12.0 * dx)
