"""Radial transport pipeline: scaling, Neumann solve, pointwise bounds.

On a ball, once the test function f is scaled so that the left side of
the Sobolev inequality equals (n+alpha) * int w f^((n+alpha)/(n+alpha-1)),
the radial Neumann problem

    div(w f Du) = (n+alpha) w f^p - w|f'| - 2(n+alpha-1) b1 w f   in D,
    u'(R) = 1                                                     on bd(D),

has a first integral: phi^(n-1) w f u' equals the cumulative integral of
the right side against phi^(n-1). The boundary condition u'(R) = 1 is
*equivalent* to the scaling normalization, which makes the flux residual
a proper consistency check rather than a fitted quantity.

Downstream of the solve, two pointwise inequalities are verified on the
set U = {|u'| < 1}: the divergence bound

    w (u'' + (n-1) phi'/phi u') + w' u' + 2(n+alpha-1) b1 w
        <= (n+alpha) w f^(1/(n+alpha-1)),

and the transport Jacobian bound for the radial map s -> s + r u'(s),

    w(image) * (1 + r u'') * (phi(|image|)/phi(s))^(n-1)
        <= w(s) * (1 + r f^(1/(n+alpha-1)))^(n+alpha)
           * exp((n+alpha-1)(2 r0 b1 + b0)).

The contact set on which the abstract argument applies is not
constructed (that requires Jacobi-field machinery out of scope here);
the Jacobian bound is instead tested at every radially nondegenerate
point, a strictly larger set, and violations outside the provable
constant-coefficient case are surfaced as informational findings for
review instead of hard failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CompatibilityError
from .manifold import ModelManifold, log_density_derivs, warp_derivs
from .numerics import fourth_order_derivative
from .odecmp import ScalarCurve
from .profiles import DecayProfile
from .reports import INFO, PASS, FAIL, VerificationReport, verdict_from_slack, write_csv
from .sobolev import Ball, check_positive_on, lhs_terms, _weighted_integral


@dataclass(frozen=True)
class NeumannSolution:
    """Radial Neumann solution with analytic second derivatives.

    u is normalized by u(0) = 0 (the problem only determines u up to a
    constant and everything downstream uses derivatives only). The
    second derivative comes from differentiating the first integral in
    closed form, not from differencing u', so it does not amplify
    integration noise.
    """

    u: ScalarCurve
    ddu: np.ndarray
    flux_residual: float
    domain: Ball
    dense: object = field(repr=False, compare=False)

    @property
    def grid(self):
        return self.u.grid

    def to_csv(self, path) -> None:
        write_csv(path, ["r", "u", "du", "ddu"],
                  [self.u.grid, self.u.values, self.u.derivs, self.ddu])


@dataclass(frozen=True)
class TransportDiagnostics:
    """Per-point record of the radial transport map at parameter r_param.

    valid_mask marks points where 1 + tau*u'' stays positive for all
    tau in [0, r_param] (no focal degeneration of the radial map);
    invalid points are reported, never dropped.
    """

    r_param: float
    source_radii: np.ndarray
    image_radii: np.ndarray
    jacobian: np.ndarray
    bound_rhs: np.ndarray
    weighted_image: np.ndarray
    valid_mask: np.ndarray

    def worst_violation(self) -> float:
        """Max of weighted image Jacobian minus its bound over valid points."""
        diff = self.weighted_image - self.bound_rhs
        if not np.any(self.valid_mask):
            return -math.inf
        return float(np.max(diff[self.valid_mask]))

    def to_csv(self, path) -> None:
        write_csv(path, ["s", "image", "jacobian", "bound", "valid"],
                  [self.source_radii, self.image_radii, self.jacobian,
                   self.bound_rhs, self.valid_mask.astype(int)])


def normalize_f(m: ModelManifold, domain, f, alpha: float,
                profile: DecayProfile, tol: float = 1e-10) -> float:
    """Scale factor kappa balancing the two sides' homogeneity degrees.

    The left side is linear in f while the constrained integral carries
    power p = (n+alpha)/(n+alpha-1), so kappa = (A / ((n+alpha) B))^(n+alpha-1)
    with A the left side at f and B the p-integral at f.
    """
    check_positive_on(f, domain)
    boundary, gradient, moment_term = lhs_terms(m, domain, f, alpha, profile, tol)
    a_total = boundary + gradient + moment_term
    p = (m.n + alpha) / (m.n + alpha - 1.0)
    b_total = _weighted_integral(m, domain, lambda r: f(r) ** p, tol)
    return (a_total / ((m.n + alpha) * b_total)) ** (m.n + alpha - 1.0)


def _neumann_data(m: ModelManifold, f, alpha: float, b1: float):
    """Returns rho(r) with div(w f Du) = rho * w-free form: the right side
    of the equation divided by phi^(n-1) is rho(r) * phi^(n-1)."""
    p = (m.n + alpha) / (m.n + alpha - 1.0)

    def rho(r):
        w = m.weight(r)
        return w * ((m.n + alpha) * f(r) ** p - np.abs(f.deriv(r))
                    - 2.0 * (m.n + alpha - 1.0) * b1 * f(r))

    return rho


def solve_neumann_radial(m: ModelManifold, domain: Ball, f, alpha: float,
                         profile: DecayProfile, tol: float = 1e-10,
                         grid_size: int = 2001,
                         enforce_compatibility: bool = True,
                         compat_tol: float = 1e-6) -> NeumannSolution:
    """First-integral solve of the radial Neumann problem on a ball.

    With enforce_compatibility the test function must already be scaled
    (normalize_f returning 1 within compat_tol); the returned
    flux_residual |u'(R) - 1| then doubles as an integration check.
    """
    if not isinstance(domain, Ball):
        raise ValueError("the radial Neumann solver supports ball domains only")
    check_positive_on(f, domain)
    if enforce_compatibility:
        kappa = normalize_f(m, domain, f, alpha, profile, tol)
        if abs(kappa - 1.0) > compat_tol:
            raise CompatibilityError(
                f"test function is not normalized: rescaling by {kappa:.6g} required")

    R = domain.radius
    b1 = profile.moments(min(tol, 1e-10)).b1
    rho = _neumann_data(m, f, alpha, b1)

    def g_weight(r):
        phi = warp_derivs(m, r)[0]
        return phi ** (m.n - 1) * m.weight(r) * f(r)

    def rhs(r, y):
        flux, _ = y
        phi = float(np.asarray(warp_derivs(m, r)[0]))
        dflux = float(np.asarray(rho(r))) * phi ** (m.n - 1)
        if r == 0.0 or phi == 0.0:
            return (dflux, 0.0)
        return (dflux, flux / float(np.asarray(g_weight(r))))

    rtol = max(tol, 1e-12)
    sol = solve_ivp(rhs, (0.0, R), [0.0, 0.0], method="DOP853",
                    rtol=rtol, atol=rtol * 1e-2, dense_output=True)
    if not sol.success:  # pragma: no cover
        raise RuntimeError(f"Neumann integration failed: {sol.message}")

    grid = np.linspace(0.0, R, grid_size)
    flux, u_vals = sol.sol(grid)
    gw = np.asarray(g_weight(grid), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        du = np.where(grid > 0, flux / np.where(grid > 0, gw, 1.0), 0.0)
    ddu = _second_derivative(m, f, alpha, b1, grid, du, rho)
    flux_residual = abs(float(du[-1]) - 1.0)
    curve = ScalarCurve(grid, u_vals, du)
    return NeumannSolution(curve, ddu, flux_residual, domain, sol.sol)


def _second_derivative(m, f, alpha, b1, grid, du, rho):
    """u'' from the product rule on the first integral (no differencing).

    u'' = rho/(w f) - u' * ((n-1) phi'/phi + v' + f'/f); at the origin
    the limit is rho(0)/(n w(0) f(0)).
    """
    w = m.weight(grid)
    fv = f(grid)
    dfv = f.deriv(grid)
    phi, dphi, _ = warp_derivs(m, grid)
    _, dv, _ = log_density_derivs(m, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_g = np.where(grid > 0,
                         (m.n - 1) * dphi / np.where(grid > 0, phi, 1.0), 0.0) \
            + dv + dfv / fv
        ddu = rho(grid) / (w * fv) - du * log_g
    at0 = float(np.asarray(rho(0.0))) / (m.n * float(np.asarray(m.weight(0.0)))
                                         * float(np.asarray(f(0.0))))
    return np.where(grid > 0, ddu, at0)


def first_integral_residual(sol: NeumannSolution, m: ModelManifold, f,
                            alpha: float, profile: DecayProfile,
                            tol: float = 1e-10) -> float:
    """Sup-norm residual of d/dr[phi^(n-1) w f u'] against the equation.

    Differentiates the computed flux by fourth-order finite differences,
    so the number measures real integration/interpolation error instead
    of restating the construction of u''.
    """
    b1 = profile.moments(min(tol, 1e-10)).b1
    rho = _neumann_data(m, f, alpha, b1)
    grid = sol.grid
    phi = warp_derivs(m, grid)[0]
    gw = phi ** (m.n - 1) * m.weight(grid) * f(grid)
    flux = gw * sol.u.derivs
    dx = float(grid[1] - grid[0])
    d_flux = fourth_order_derivative(flux, dx)
    expected = rho(grid) * phi ** (m.n - 1)
    return float(np.max(np.abs(d_flux - expected[2:-2])))


def divergence_bound_check(sol: NeumannSolution, m: ModelManifold, f,
                           alpha: float, profile: DecayProfile,
                           tol: float = 1e-8) -> VerificationReport:
    """Divergence bound on U = {|u'| < 1}.

    Verifies w*(u'' + (n-1) phi'/phi u') + w' u' + 2(n+alpha-1) b1 w
    <= (n+alpha) w f^(1/(n+alpha-1)) pointwise; points outside U are
    excluded by definition of the statement.
    """
    b1 = profile.moments(1e-10).b1
    grid = sol.grid
    du, ddu = sol.u.derivs, sol.ddu
    inside = np.abs(du) < 1.0
    w = m.weight(grid)
    phi, dphi, _ = warp_derivs(m, grid)
    _, dv, _ = log_density_derivs(m, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        radial_part = np.where(grid > 0,
                               (m.n - 1) * dphi / np.where(grid > 0, phi, 1.0) * du,
                               (m.n - 1) * ddu)
    lhs = w * (ddu + radial_part) + (w * dv) * du + 2.0 * (m.n + alpha - 1.0) * b1 * w
    rhs = (m.n + alpha) * w * f(grid) ** (1.0 / (m.n + alpha - 1.0))
    slack_arr = (rhs - lhs)[inside]
    slack = float(np.min(slack_arr)) if len(slack_arr) else math.inf
    return VerificationReport(
        check_name="divergence_bound",
        verdict=verdict_from_slack(slack, tol),
        worst_slack=slack,
        tolerance=tol,
        constants={
            "points_in_U": int(inside.sum()),
            "points_total": len(grid),
            "max_equality_gap": float(np.max(slack_arr)) if len(slack_arr) else math.inf,
        },
    )


def transport_diagnostics(sol: NeumannSolution, m: ModelManifold, f,
                          alpha: float, profile: DecayProfile,
                          r_param: float, tol: float = 1e-8) -> TransportDiagnostics:
    """Evaluate the radial transport map and its Jacobian bound pointwise.

    image(s) = s + r*u'(s); the Jacobian of the radial map is
    (1 + r*u''(s)) * (phi(|image|)/phi(s))^(n-1) with the s = 0 column
    degenerating to (1 + r*u''(0))^n. Points where some intermediate
    time tau in [0, r] has 1 + tau*u'' <= 0 are masked invalid.
    """
    if r_param <= 0:
        raise ValueError("transport parameter must be positive")
    mom = profile.moments(1e-10)
    grid = sol.grid
    du, ddu = sol.u.derivs, sol.ddu
    image = grid + r_param * du
    abs_image = np.abs(image)

    phi_src = np.asarray(warp_derivs(m, grid)[0], dtype=float)
    phi_img = np.asarray(warp_derivs(m, abs_image)[0], dtype=float)
    radial_stretch = 1.0 + r_param * ddu
    with np.errstate(divide="ignore", invalid="ignore"):
        angular = np.where(grid > 0,
                           phi_img / np.where(grid > 0, phi_src, 1.0),
                           radial_stretch)
    jacobian = radial_stretch * angular ** (m.n - 1)

    r0 = sol.domain.outer_radius
    growth = math.exp((m.n + alpha - 1.0) * (2.0 * r0 * mom.b1 + mom.b0))
    f_pow = f(grid) ** (1.0 / (m.n + alpha - 1.0))
    bound = m.weight(grid) * (1.0 + r_param * f_pow) ** (m.n + alpha) * growth

    valid = (1.0 + r_param * np.minimum(ddu, 0.0)) > 0.0
    weighted_image = m.weight(abs_image) * jacobian
    return TransportDiagnostics(
        r_param=r_param,
        source_radii=grid,
        image_radii=image,
        jacobian=jacobian,
        bound_rhs=bound,
        weighted_image=weighted_image,
        valid_mask=valid,
    )


def transport_report(diag: TransportDiagnostics, tol: float = 1e-8,
                     strict: bool = False) -> VerificationReport:
    """Verdict for the Jacobian bound: violations are informational unless
    strict (the bound is only provable pointwise on the contact set, and
    the diagnostics run on the larger nondegenerate set)."""
    worst = diag.worst_violation()
    slack = -worst
    if slack >= -tol:
        verdict = PASS
    else:
        verdict = FAIL if strict else INFO
    return VerificationReport(
        check_name="transport_jacobian",
        verdict=verdict,
        worst_slack=slack,
        tolerance=tol,
        constants={
            "r_param": diag.r_param,
            "invalid_points": int((~diag.valid_mask).sum()),
            "points_total": len(diag.source_radii),
        },
    )
