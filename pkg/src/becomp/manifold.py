"""Rotationally symmetric weighted model manifolds.

A model is R^n with the metric dr^2 + phi(r)^2 * g_sphere and a radial
density w(r) > 0. The warping functions here satisfy phi(0) = 0,
phi'(0) = 1 and phi'' <= 0, which keeps the pole's cut locus empty and
radial geodesics globally minimizing, so distance from the pole and the
geodesic spheres are exactly computable. Densities are radial with
w'(0) = 0 so the weighted structure is smooth at the pole.

For radial data the modified Ricci form

    Ric - Hess(log w) - (1/alpha) dlogw x dlogw

is diagonal in the (radial, tangential) frame with eigenvalues

    radial     = -(n-1) phi''/phi - v'' - v'^2/alpha
    tangential = -phi''/phi + (n-2)(1 - phi'^2)/phi^2 - (phi'/phi) v'

where v = log w; the minimum over unit directions is the smaller of the
two. The (1/alpha) term has no tangential component for radial w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PoleSmoothnessError
from .numerics import fit_anchored_power
from .profiles import DecayProfile, SampledProfile, ZeroProfile
from .reports import FAIL, PASS, VerificationReport, verdict_from_slack


# --------------------------------------------------------------------------
# warp families
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EuclideanWarp:
    """phi(r) = r."""

    kind = "euclidean"

    def derivs(self, r):
        r = np.asarray(r, dtype=float)
        return r, np.ones_like(r), np.zeros_like(r)

    def curv_tangential(self, r):
        """(1 - phi'^2)/phi^2, computed in a cancellation-free form."""
        return np.zeros_like(np.asarray(r, dtype=float))

    @property
    def third_deriv_origin(self) -> float:
        return 0.0

    def to_json(self):
        return {"kind": "euclidean"}


@dataclass(frozen=True)
class SmoothedConeWarp:
    """phi(r) = c*r + (1-c)*r_s*tanh(r/r_s): asymptotically conical.

    tanh smoothing is used because phi'(0) = 1 and phi''(0) = 0 hold
    exactly, so the pole is smooth without boundary-condition fitting.
    """

    c: float
    r_s: float
    kind = "smoothed_cone"

    def __post_init__(self):
        if not 0.0 < self.c <= 1.0:
            raise ValueError("cone slope c must lie in (0, 1]")
        if self.r_s <= 0:
            raise ValueError("smoothing radius r_s must be positive")

    def derivs(self, r):
        r = np.asarray(r, dtype=float)
        u = r / self.r_s
        # sech^2 via decaying exponentials only (no overflow for large u)
        e = np.exp(-2.0 * np.abs(u))
        sech2 = 4.0 * e / (1.0 + e) ** 2
        phi = self.c * r + (1.0 - self.c) * self.r_s * np.tanh(u)
        dphi = self.c + (1.0 - self.c) * sech2
        ddphi = -2.0 * (1.0 - self.c) / self.r_s * sech2 * np.tanh(u)
        return phi, dphi, ddphi

    def curv_tangential(self, r):
        # 1 - phi' = (1-c) tanh^2(u) exactly, avoiding cancellation near 0
        r = np.asarray(r, dtype=float)
        u = r / self.r_s
        phi, dphi, _ = self.derivs(r)
        one_minus = (1.0 - self.c) * np.tanh(u) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            out = one_minus * (1.0 + dphi) / phi ** 2
        at0 = -self.third_deriv_origin
        return np.where(r > 0, out, at0)

    @property
    def third_deriv_origin(self) -> float:
        return -2.0 * (1.0 - self.c) / self.r_s ** 2

    def to_json(self):
        return {"kind": "smoothed_cone", "c": self.c, "r_s": self.r_s}


# --------------------------------------------------------------------------
# density families (v = log w)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantDensity:
    """w = w0."""

    w0: float
    kind = "constant"

    def __post_init__(self):
        if self.w0 <= 0:
            raise ValueError("density must be positive")

    pole_smooth = True

    def log_derivs(self, r):
        r = np.asarray(r, dtype=float)
        z = np.zeros_like(r)
        return np.full_like(r, math.log(self.w0)), z, z

    def to_json(self):
        return {"kind": "constant", "w0": self.w0}


@dataclass(frozen=True)
class LogPolyDensity:
    """w = (1 + (r/r_w)^2)^(beta/2); v' = beta*r/(r_w^2 + r^2)."""

    beta: float
    r_w: float
    kind = "log_poly"

    def __post_init__(self):
        if self.r_w <= 0:
            raise ValueError("density scale r_w must be positive")

    pole_smooth = True

    def log_derivs(self, r):
        r = np.asarray(r, dtype=float)
        q = self.r_w ** 2 + r ** 2
        v = 0.5 * self.beta * np.log1p((r / self.r_w) ** 2)
        dv = self.beta * r / q
        ddv = self.beta * (self.r_w ** 2 - r ** 2) / q ** 2
        return v, dv, ddv

    def to_json(self):
        return {"kind": "log_poly", "beta": self.beta, "r_w": self.r_w}


@dataclass(frozen=True)
class LogTanhExpDensity:
    """w = exp(beta * tanh(r/r_w)).

    v'(0) = beta/r_w != 0, so this family violates pole smoothness; it is
    kept only for half-line experiments behind the manifold's explicit
    override flag.
    """

    beta: float
    r_w: float
    kind = "log_tanh_exp"

    def __post_init__(self):
        if self.r_w <= 0:
            raise ValueError("density scale r_w must be positive")

    pole_smooth = False

    def log_derivs(self, r):
        r = np.asarray(r, dtype=float)
        u = r / self.r_w
        th = np.tanh(u)
        sech2 = 1.0 - th ** 2
        v = self.beta * th
        dv = self.beta / self.r_w * sech2
        ddv = -2.0 * self.beta / self.r_w ** 2 * sech2 * th
        return v, dv, ddv

    def to_json(self):
        return {"kind": "log_tanh_exp", "beta": self.beta, "r_w": self.r_w}


# --------------------------------------------------------------------------
# the model manifold
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelManifold:
    n: int
    warp: object
    density: object
    allow_pole_violation: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("dimension n must be an integer >= 2")
        if not self.density.pole_smooth and not self.allow_pole_violation:
            raise PoleSmoothnessError(
                f"density family {self.density.kind!r} has w'(0) != 0; "
                "pass allow_pole_violation=True for half-line experiments")

    def weight(self, r):
        return np.exp(self.density.log_derivs(r)[0])

    def to_json(self):
        d = {"n": self.n, "warp": self.warp.to_json(),
             "density": self.density.to_json()}
        if self.allow_pole_violation:
            d["allow_pole_violation"] = True
        return d


_WARPS = {
    "euclidean": lambda p: EuclideanWarp(),
    "smoothed_cone": lambda p: SmoothedConeWarp(p["c"], p["r_s"]),
}
_WARP_PARAMS = {"euclidean": set(), "smoothed_cone": {"c", "r_s"}}

_DENSITIES = {
    "constant": lambda p: ConstantDensity(p["w0"]),
    "log_poly": lambda p: LogPolyDensity(p["beta"], p["r_w"]),
    "log_tanh_exp": lambda p: LogTanhExpDensity(p["beta"], p["r_w"]),
}
_DENSITY_PARAMS = {"constant": {"w0"}, "log_poly": {"beta", "r_w"},
                   "log_tanh_exp": {"beta", "r_w"}}


def _from_kind(obj: dict, table, params_table, what: str):
    if "kind" not in obj:
        raise ValueError(f"{what} object needs a 'kind' field")
    kind = obj["kind"]
    if kind not in table:
        raise ValueError(f"unknown {what} kind {kind!r}")
    given = set(obj) - {"kind"}
    if given != params_table[kind]:
        raise ValueError(f"{what} kind {kind!r} takes {sorted(params_table[kind])}, "
                         f"got {sorted(given)}")
    return table[kind]({k: obj[k] for k in given})


def manifold_from_json(obj: dict) -> ModelManifold:
    allowed = {"n", "warp", "density", "allow_pole_violation"}
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"unknown manifold fields: {sorted(unknown)}")
    for k in ("n", "warp", "density"):
        if k not in obj:
            raise ValueError(f"manifold object needs field {k!r}")
    return ModelManifold(
        n=obj["n"],
        warp=_from_kind(obj["warp"], _WARPS, _WARP_PARAMS, "warp"),
        density=_from_kind(obj["density"], _DENSITIES, _DENSITY_PARAMS, "density"),
        allow_pole_violation=obj.get("allow_pole_violation", False),
    )


# --------------------------------------------------------------------------
# curvature
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BEData:
    """Extreme eigenvalues of the modified Ricci form at radius r."""

    r: float
    radial_eigen: float
    tangential_eigen: float

    @property
    def min_eigen(self) -> float:
        return min(self.radial_eigen, self.tangential_eigen)


def warp_derivs(m: ModelManifold, r):
    """(phi, phi', phi'') at r (scalar or array)."""
    return m.warp.derivs(r)


def log_density_derivs(m: ModelManifold, r):
    """(v, v', v'') at r for v = log w."""
    return m.density.log_derivs(r)


def _eigen_arrays(m: ModelManifold, alpha: float, r: np.ndarray):
    """Vectorized (radial, tangential) eigenvalues; r == 0 uses the limits."""
    r = np.asarray(r, dtype=float)
    phi, dphi, ddphi = m.warp.derivs(r)
    _, dv, ddv = m.density.log_derivs(r)
    tang_term = m.warp.curv_tangential(r)

    with np.errstate(divide="ignore", invalid="ignore"):
        dd_over = np.where(r > 0, ddphi / np.where(r > 0, phi, 1.0), 0.0)
        radial = -(m.n - 1) * dd_over - ddv - dv ** 2 / alpha
        tangential = (-dd_over + (m.n - 2) * tang_term
                      - np.where(r > 0, dphi / np.where(r > 0, phi, 1.0), 0.0) * dv)

    if np.any(r == 0):
        if not m.density.pole_smooth:
            raise ValueError("curvature at r=0 undefined: density violates w'(0)=0")
        phi3 = m.warp.third_deriv_origin
        ddv0 = float(np.asarray(m.density.log_derivs(np.zeros(1))[2])[0])
        limit = -(m.n - 1) * phi3 - ddv0
        radial = np.where(r == 0, limit, radial)
        tangential = np.where(r == 0, limit, tangential)
    return radial, tangential


def be_ricci(m: ModelManifold, alpha: float, r: float) -> BEData:
    """Modified Ricci eigenvalues at radius r >= 0 (r=0 via limit formulas)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if r < 0:
        raise ValueError("radius must be >= 0")
    radial, tangential = _eigen_arrays(m, alpha, np.atleast_1d(float(r)))
    return BEData(float(r), float(radial[0]), float(tangential[0]))


def be_ricci_grid(m: ModelManifold, alpha: float, radii):
    """Vectorized eigenvalues over a radius grid."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 0):
        raise ValueError("radii must be >= 0")
    return _eigen_arrays(m, alpha, radii)


# --------------------------------------------------------------------------
# decay envelopes and admissibility
# --------------------------------------------------------------------------

def required_envelope(m: ModelManifold, alpha: float, r_max: float,
                      grid_size: int = 2048, subsamples: int = 12) -> DecayProfile:
    """Smallest nonincreasing decay profile compatible with the model.

    Samples the curvature deficit max(0, -min_eigenvalue / (n+alpha-1))
    on [0, r_max], takes the least nonincreasing majorant, and fits the
    tail. The node grid is linear where the warp/density structure
    lives and geometric beyond; each node value is the deficit maximum
    over both adjacent cells (taken over dense subsamples) so that the
    *linear interpolation* between nodes majorizes the deficit, not just
    the nodes themselves. Returns ZeroProfile when the curvature never
    dips negative.
    """
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    r_lin = min(50.0, r_max)
    n_lin = max(16, int(0.75 * grid_size))
    nodes = np.linspace(0.0, r_lin, n_lin)
    if r_max > r_lin:
        n_geo = max(grid_size - n_lin, 16)
        nodes = np.concatenate((nodes, np.geomspace(r_lin, r_max, n_geo + 1)[1:]))

    # dense subsamples inside each cell, including both endpoints
    frac = np.linspace(0.0, 1.0, subsamples + 1)
    fine = nodes[:-1, None] + np.diff(nodes)[:, None] * frac[None, :]
    radial, tangential = be_ricci_grid(m, alpha, fine.ravel())
    needed = np.maximum(0.0, -np.minimum(radial, tangential)
                        / (m.n + alpha - 1.0)).reshape(fine.shape)
    cell_max = needed.max(axis=1)

    env = np.empty_like(nodes)
    env[0] = cell_max[0]
    env[-1] = cell_max[-1]
    env[1:-1] = np.maximum(cell_max[:-1], cell_max[1:])
    env = np.maximum.accumulate(env[::-1])[::-1]
    if env.max() == 0.0:
        return ZeroProfile()
    return SampledProfile(nodes, env)


def admissibility_check(m: ModelManifold, alpha: float, profile: DecayProfile,
                        r_max: float, tol: float = 1e-8,
                        grid_size: int = 4096) -> VerificationReport:
    """Check min-eigenvalue(r) >= -(n+alpha-1)*lambda(r) on (0, r_max].

    Pointwise on a dense grid, plus a tail comparison of decay rates so
    that a profile which wins on the window but loses at infinity is
    caught. A profile with divergent b0 fails outright regardless of the
    pointwise picture.
    """
    grid = np.linspace(0.0, r_max, grid_size)
    radial, tangential = be_ricci_grid(m, alpha, grid)
    min_eig = np.minimum(radial, tangential)
    lam = profile(grid)
    slack = min_eig + (m.n + alpha - 1.0) * lam
    worst = float(np.min(slack))
    worst_r = float(grid[int(np.argmin(slack))])

    constants = {
        "pointwise_worst_slack": worst,
        "pointwise_worst_radius": worst_r,
        "n": m.n,
        "alpha": alpha,
    }

    tail_ok, tail_note = _tail_decay_comparison(m, alpha, profile, r_max)
    constants["tail_comparison"] = tail_note

    if not profile.admissible:
        return VerificationReport(
            check_name="admissibility",
            verdict=FAIL,
            worst_slack=-math.inf,
            tolerance=tol,
            constants={**constants,
                       "reason": f"{profile.divergent_moment} divergent: "
                                 f"{profile._divergence_reason()}"},
        )

    verdict = verdict_from_slack(worst, tol)
    if verdict == PASS and not tail_ok:
        verdict = FAIL
        constants["reason"] = "tail decay of curvature deficit outruns the profile"
    return VerificationReport(
        check_name="admissibility",
        verdict=verdict,
        worst_slack=worst,
        tolerance=tol,
        constants=constants,
    )


def _tail_decay_comparison(m: ModelManifold, alpha: float,
                           profile: DecayProfile, r_max: float):
    """Extrapolate the curvature deficit and the profile past r_max.

    Fits anchored power laws to both on the last decade of the window and
    compares them at a few radii beyond it. Returns (ok, note).
    """
    radii = np.geomspace(r_max / 10.0, r_max, 64)
    radial, tangential = be_ricci_grid(m, alpha, radii)
    deficit = np.maximum(0.0, -np.minimum(radial, tangential))
    if deficit.max() == 0.0:
        return True, "curvature deficit vanishes on the last decade"

    anchor = float(deficit[-1])
    if anchor <= 0:
        return True, "curvature deficit vanishes at the window end"
    pos = deficit > 0
    if pos.sum() < 2:
        return True, "too few deficit samples to fit; accepted"
    p_deficit = fit_anchored_power(radii[pos][:-1], deficit[pos][:-1],
                                   float(radii[-1]), anchor)

    check_radii = r_max * np.array([2.0, 5.0, 10.0, 100.0])
    deficit_ext = anchor * (check_radii / r_max) ** (-p_deficit)
    lam_ext = (m.n + alpha - 1.0) * profile(check_radii)
    margin = lam_ext - deficit_ext
    ok = bool(np.all(margin >= -1e-9 * np.maximum(lam_ext, deficit_ext)))
    return ok, (f"deficit tail exponent {p_deficit:.3g}; extrapolated margin "
                f"min {float(np.min(margin)):.3e}")
