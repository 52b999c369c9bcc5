"""ODE comparison engine.

Solves the linear initial value problems that control volume growth,

    h'' = lambda * h,      h(0) = 0,   h'(0) = 1,
    psi1'' = Lam * psi1,   psi1(0) = 0, psi1'(0) = 1,
    psi2'' = Lam * psi2,   psi2(0) = 1, psi2'(0) = 0,

and checks the inequalities that the downstream modules rely on: the
scalar Riccati comparison g <= psi'/psi for subsolutions g' + g^2 <= G,
the ratio bound psi2/psi1 <= int(Lam) + 1/r, and the growth bound
psi1(t) <= t * exp(int t*Lam).

All coefficients are nonnegative, so the systems are non-oscillatory and
an explicit adaptive Runge-Kutta method with dense output is the right
tool; no stiff machinery is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import HypothesisError
from .numerics import adaptive_quad, centered_derivative
from .profiles import DecayProfile
from .reports import VerificationReport, verdict_from_slack

DEFAULT_GRID_SIZE = 1001


@dataclass(frozen=True)
class ScalarCurve:
    """A sampled C^1 function: values and first derivatives on a grid.

    The grid is strictly increasing and starts at the left end of the
    curve's domain (0 for solution curves; the first positive sample for
    curves with a 1/t singularity at the origin).
    """

    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        derivs = np.asarray(self.derivs, dtype=float)
        if not (grid.shape == values.shape == derivs.shape) or grid.ndim != 1:
            raise ValueError("grid, values, derivs must be 1-D and equally long")
        if len(grid) < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing with >= 2 points")
        if grid[0] < 0:
            raise ValueError("grid must start at a nonnegative abscissa")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivs", derivs)

    def consistency_error(self) -> float:
        """Max deviation between values and the trapezoid integral of derivs."""
        rebuilt = self.values[0] + np.concatenate(
            ([0.0], np.cumsum(0.5 * np.diff(self.grid)
                              * (self.derivs[1:] + self.derivs[:-1]))))
        return float(np.max(np.abs(rebuilt - self.values)))

    def consistency_bound(self, tol: float) -> float:
        """Tolerance for consistency_error: integrator slack plus the
        trapezoid truncation term estimated from the derivs' own curvature."""
        span = float(self.grid[-1] - self.grid[0])
        dd = np.abs(np.diff(self.derivs, 2))
        h = np.diff(self.grid)
        truncation = float(np.sum(h[1:] * dd)) / 12.0 if len(dd) else 0.0
        return tol * span + 4.0 * truncation + 1e-14

    def to_csv(self, path) -> None:
        from .reports import write_csv
        write_csv(path, ["t", "value", "deriv"],
                  [self.grid, self.values, self.derivs])


@dataclass(frozen=True)
class ComparisonSolution:
    """Solution of h'' = lambda*h with its derivative-limit data.

    For admissible lambda the derivative converges; 1 + b0 bounds the
    limit from below and 1 + b0*exp(b0) from above. Non-admissible
    profiles (allowed here on finite windows) carry infinite limits.
    growth_identity_residual is |h'(T) - (1 + int_0^T lambda*h)|, a
    first-integral cross-check on the integrator.
    """

    h: ScalarCurve
    hprime_limit_lower: float
    hprime_limit_upper: float
    hprime_at_end: float
    growth_identity_residual: float
    dense: object = field(repr=False, compare=False)

    def evaluate(self, t):
        """(h, h') at arbitrary t in [0, t_max] from the dense interpolant."""
        out = self.dense(t)
        return out[0], out[1]


def _solve_linear_ivp(coeff, t_max: float, y0: float, dy0: float, tol: float):
    """Dense-output solve of y'' = coeff(t) * y on [0, t_max].

    tol is the target for *global* quantities (first integrals, endpoint
    values); the solver's local tolerance carries a safety factor since
    local error control alone does not cap accumulated drift.
    """
    def rhs(t, y):
        return (y[1], coeff(t) * y[0])

    rtol = max(0.02 * tol, 1e-13)
    atol = max(tol * 1e-4, 1e-14)
    sol = solve_ivp(rhs, (0.0, t_max), [y0, dy0], method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True)
    if not sol.success:  # pragma: no cover - non-oscillatory linear systems
        raise RuntimeError(f"integration failed: {sol.message}")
    return sol.sol


def _curve_from_dense(dense, grid: np.ndarray) -> ScalarCurve:
    out = dense(grid)
    return ScalarCurve(grid, out[0], out[1])


def solve_h(profile, t_max: float, tol: float = 1e-10,
            grid_size: int = DEFAULT_GRID_SIZE) -> ComparisonSolution:
    """Solve h'' = lambda*h, h(0)=0, h'(0)=1 on [0, t_max].

    `profile` may be a DecayProfile or any nonnegative callable (bare
    callables are treated as ODE-only test coefficients with unknown
    moments). Cross-checks h'(t_max) against 1 + int_0^t_max lambda*h,
    the first integral of the equation.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    dense = _solve_linear_ivp(profile, t_max, 0.0, 1.0, tol)
    grid = np.linspace(0.0, t_max, grid_size)
    curve = _curve_from_dense(dense, grid)

    growth, _ = adaptive_quad(lambda t: profile(t) * dense(t)[0], 0.0, t_max,
                              tol_abs=10.0 * tol, tol_rel=tol)
    hprime_end = float(curve.derivs[-1])
    residual = abs(hprime_end - (1.0 + growth))

    lower, upper = math.inf, math.inf
    if isinstance(profile, DecayProfile) and profile.admissible:
        mom = profile.moments(min(tol, 1e-10))
        lower = 1.0 + mom.b0
        upper = 1.0 + mom.b0 * math.exp(mom.b0)
    return ComparisonSolution(curve, lower, upper, hprime_end, residual, dense)


def solve_psi_pair(envelope, r: float, tol: float = 1e-10,
                   grid_size: int = DEFAULT_GRID_SIZE):
    """Solve the psi1 (0,1) and psi2 (1,0) problems for psi'' = Lam*psi on [0, r].

    Rejects envelopes that go negative anywhere on the sample grid.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    grid = np.linspace(0.0, r, grid_size)
    lam_vals = np.asarray(envelope(grid), dtype=float)
    if np.any(lam_vals < 0):
        worst = grid[int(np.argmin(lam_vals))]
        raise ValueError(f"envelope is negative at t={worst:g}")
    psi1 = _curve_from_dense(_solve_linear_ivp(envelope, r, 0.0, 1.0, tol), grid)
    psi2 = _curve_from_dense(_solve_linear_ivp(envelope, r, 1.0, 0.0, tol), grid)
    return psi1, psi2


def wronskian_drift(psi1: ScalarCurve, psi2: ScalarCurve,
                    relative: bool = False) -> float:
    """Max |W + 1| along the grid, W = psi2'*psi1 - psi2*psi1' (constant -1).

    With relative=True the drift is divided by the size of the products
    forming W (floored at 1), the meaningful conservation measure when
    the solutions grow.
    """
    w = psi2.derivs * psi1.values - psi2.values * psi1.derivs
    drift = np.abs(w + 1.0)
    if relative:
        scale = np.maximum(1.0, np.abs(psi2.derivs * psi1.values)
                           + np.abs(psi2.values * psi1.derivs))
        drift = drift / scale
    return float(np.max(drift))


def riccati_compare(g: ScalarCurve, G, beta: float, r: float,
                    tol: float = 1e-8, ode_tol: float = 1e-10) -> VerificationReport:
    """Check the comparison g <= psi'/psi for a Riccati subsolution g.

    Hypotheses (spot-checked on g's grid, distinguishing bad input from a
    failed comparison): g' + g^2 <= G by centered differences with slack
    100*tol, and g(t) = beta/t + O(1) near the left end of the grid; the
    remainder is only required to be bounded there, and its observed
    magnitude is reported rather than judged.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    if g.grid[0] <= 0:
        raise ValueError("g must be sampled on (0, r]: first abscissa positive")
    if g.grid[-1] > r * (1 + 1e-12):
        raise ValueError("g grid extends past r")

    gvals = np.asarray(G(g.grid), dtype=float)
    if np.any(gvals < 0):
        raise HypothesisError("G must be nonnegative")

    # Riccati subsolution spot-check on interior points
    dg = centered_derivative(g.values, g.grid)
    lhs = dg + g.values[1:-1] ** 2
    slack_scale = 100.0 * tol * max(1.0, float(np.max(gvals)), float(np.max(g.values ** 2)))
    violation = lhs - gvals[1:-1]
    worst_hyp = float(np.max(violation))
    if worst_hyp > slack_scale:
        t_bad = g.grid[1 + int(np.argmax(violation))]
        raise HypothesisError(
            f"g' + g^2 exceeds G by {worst_hyp:.3e} at t={t_bad:g}: "
            "not a Riccati subsolution")

    # singular-start remainder on [t0, 2*t0]: record, do not judge
    t0 = g.grid[0]
    near = g.grid <= 2.0 * t0
    remainder = g.values[near] - beta / g.grid[near]
    if not np.all(np.isfinite(remainder)):
        raise HypothesisError("g - beta/t is not finite near the origin")
    remainder_bound = float(np.max(np.abs(remainder)))

    dense = _solve_linear_ivp(G, r, 0.0, 1.0, ode_tol)
    psi = dense(g.grid)
    ratio = psi[1] / psi[0]
    worst = float(np.max(g.values - ratio))
    return VerificationReport(
        check_name="riccati_compare",
        verdict=verdict_from_slack(-worst, tol),
        worst_slack=-worst,
        tolerance=tol,
        constants={
            "beta": beta,
            "r": r,
            "max_g_minus_ratio": worst,
            "hypothesis_margin": worst_hyp,
            "remainder_bound_near_origin": remainder_bound,
        },
    )


def psi_ratio_bound_check(envelope, envelope_total: float, r: float,
                          tol: float = 1e-8, ode_tol: float = 1e-10) -> VerificationReport:
    """Verify psi2(r)/psi1(r) <= envelope_total + 1/r (+ tol).

    envelope_total must be an analytic upper bound for the full integral
    of the envelope over [0, inf); the caller owns that bound.
    """
    if envelope_total < 0:
        raise ValueError("envelope_total must be >= 0")
    psi1, psi2 = solve_psi_pair(envelope, r, ode_tol)
    p1, p2 = float(psi1.values[-1]), float(psi2.values[-1])
    if p1 <= 0:
        raise ValueError("psi1(r) <= 0: integrator fault (impossible for Lam >= 0)")
    bound = envelope_total + 1.0 / r
    slack = bound - p2 / p1
    return VerificationReport(
        check_name="psi_ratio_bound",
        verdict=verdict_from_slack(slack, tol),
        worst_slack=slack,
        tolerance=tol,
        constants={"ratio": p2 / p1, "bound": bound, "r": r,
                   "envelope_total": envelope_total},
    )


def psi1_growth_check(envelope, t_max: float, moment_bound: float,
                      tol: float = 1e-8, ode_tol: float = 1e-10) -> VerificationReport:
    """Verify psi1(t) <= t * exp(moment_bound) on the whole window.

    moment_bound must dominate int_0^inf t*envelope(t) dt analytically.
    """
    if moment_bound < 0:
        raise ValueError("moment_bound must be >= 0")
    psi1, _ = solve_psi_pair(envelope, t_max, ode_tol)
    cap = psi1.grid * math.exp(moment_bound)
    slack = float(np.min(cap - psi1.values))
    return VerificationReport(
        check_name="psi1_growth",
        verdict=verdict_from_slack(slack, tol),
        worst_slack=slack,
        tolerance=tol,
        constants={"moment_bound": moment_bound, "t_max": t_max,
                   "max_psi1_over_cap": float(np.max(
                       np.divide(psi1.values[1:], cap[1:])))},
    )
