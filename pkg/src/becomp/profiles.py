"""Curvature decay profiles and their moments.

A decay profile is a nonnegative, nonincreasing function lambda(s) on
[0, infinity) describing how fast a curvature lower bound relaxes to zero
at large distance from a base point. Its first two moments

    b0 = integral of s * lambda(s) ds,   b1 = integral of lambda(s) ds

enter every constant downstream, so they are computed with a certified
absolute error: adaptive quadrature on a finite window plus an exact
analytic tail for each family. A profile is *admissible* when b0 is
finite (which forces b1 finite as well, since lambda is nonincreasing).

Families
--------
Zero            lambda = 0
Exponential     lambda0 * exp(-a s)
PowerLaw        lambda0 * (1 + s/s0)^(-p)          (admissible iff p > 2)
LinearBump      lambda0 * max(0, 1 - s/s1)         (compact support)
Sampled         monotone linear interpolation of grid data with an
                anchored power-law tail fitted beyond the grid
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError
from .numerics import adaptive_quad, cumulative_gauss, fit_anchored_power


@dataclass(frozen=True)
class Moments:
    """Certified moments of a decay profile: |reported - true| <= abs_error_bound."""

    b0: float
    b1: float
    abs_error_bound: float


class DecayProfile:
    """Base class; concrete families implement _value and the tail integrals."""

    family = "abstract"

    def __call__(self, s):
        arr = np.asarray(s, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if np.any(arr < 0):
            raise ValueError("profile argument must be >= 0")
        out = self._value(arr)
        return float(out[0]) if scalar else out

    def _value(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def admissible(self) -> bool:
        raise NotImplementedError

    @property
    def divergent_moment(self) -> str | None:
        """Name of the divergent moment, or None when admissible."""
        return None if self.admissible else "b0"

    def moments(self, tol: float = 1e-10) -> Moments:
        if tol <= 0:
            raise ValueError("tolerance must be positive")
        if not self.admissible:
            raise AdmissibilityError(
                f"{self.family} profile has divergent {self.divergent_moment}: "
                f"{self._divergence_reason()}")
        return self._moments(tol)

    def _moments(self, tol: float) -> Moments:
        raise NotImplementedError

    def _divergence_reason(self) -> str:
        return "moment integral does not converge"

    def to_json(self) -> dict:
        return {"family": self.family, "params": self._params()}

    def _params(self) -> dict:
        return {}

    def __repr__(self):
        params = ", ".join(f"{k}={v}" for k, v in self._params().items())
        return f"{type(self).__name__}({params})"


@dataclass(frozen=True, repr=False)
class ZeroProfile(DecayProfile):
    family = "zero"

    def _value(self, s):
        return np.zeros_like(s)

    @property
    def admissible(self):
        return True

    def _moments(self, tol):
        return Moments(0.0, 0.0, 0.0)


@dataclass(frozen=True, repr=False)
class ExponentialProfile(DecayProfile):
    """lambda(s) = lambda0 * exp(-a*s)."""

    lambda0: float
    a: float
    family = "exponential"

    def __post_init__(self):
        if self.lambda0 <= 0 or self.a <= 0:
            raise ValueError("exponential profile needs lambda0 > 0 and a > 0")

    def _value(self, s):
        return self.lambda0 * np.exp(-self.a * s)

    @property
    def admissible(self):
        return True

    def _tails(self, S: float):
        # exact values of int_S^inf s*lambda and int_S^inf lambda
        e = self.lambda0 * math.exp(-self.a * S)
        return e * (S / self.a + 1.0 / self.a ** 2), e / self.a

    def _moments(self, tol):
        return _window_plus_tail(self, tol, initial_window=10.0 / self.a)

    def _params(self):
        return {"lambda0": self.lambda0, "a": self.a}


@dataclass(frozen=True, repr=False)
class PowerLawProfile(DecayProfile):
    """lambda(s) = lambda0 * (1 + s/s0)^(-p)."""

    lambda0: float
    s0: float
    p: float
    family = "power_law"

    def __post_init__(self):
        if self.lambda0 <= 0 or self.s0 <= 0 or self.p <= 0:
            raise ValueError("power-law profile needs lambda0, s0, p > 0")

    def _value(self, s):
        return self.lambda0 * (1.0 + s / self.s0) ** (-self.p)

    @property
    def admissible(self):
        return self.p > 2.0

    def _divergence_reason(self):
        return f"power-law exponent p={self.p} <= 2"

    def _tails(self, S: float):
        u = 1.0 + S / self.s0
        b1_tail = self.lambda0 * self.s0 * u ** (1.0 - self.p) / (self.p - 1.0)
        b0_tail = self.lambda0 * self.s0 ** 2 * (
            u ** (2.0 - self.p) / (self.p - 2.0)
            - u ** (1.0 - self.p) / (self.p - 1.0))
        return b0_tail, b1_tail

    def _moments(self, tol):
        return _window_plus_tail(self, tol, initial_window=10.0 * self.s0)

    def _params(self):
        return {"lambda0": self.lambda0, "s0": self.s0, "p": self.p}


@dataclass(frozen=True, repr=False)
class LinearBumpProfile(DecayProfile):
    """lambda(s) = lambda0 * max(0, 1 - s/s1): compact support, corner at s1."""

    lambda0: float
    s1: float
    family = "linear_bump"

    def __post_init__(self):
        if self.lambda0 <= 0 or self.s1 <= 0:
            raise ValueError("linear-bump profile needs lambda0 > 0 and s1 > 0")

    def _value(self, s):
        return self.lambda0 * np.maximum(0.0, 1.0 - s / self.s1)

    @property
    def admissible(self):
        return True

    def _tails(self, S: float):
        if S >= self.s1:
            return 0.0, 0.0
        # exact remainders of the triangular bump on [S, s1]
        lam, s1 = self.lambda0, self.s1
        b1_tail = lam * (s1 - S) ** 2 / (2.0 * s1)
        b0_tail = lam * ((s1 ** 2 - S ** 2) / 2.0 - (s1 ** 3 - S ** 3) / (3.0 * s1))
        return b0_tail, b1_tail

    def _moments(self, tol):
        return _window_plus_tail(self, tol, initial_window=self.s1)

    def _params(self):
        return {"lambda0": self.lambda0, "s1": self.s1}


class SampledProfile(DecayProfile):
    """Piecewise-linear profile from grid data with an anchored power tail.

    The grid must be strictly increasing and the values nonincreasing and
    nonnegative; non-monotone input is rejected rather than repaired so
    that modeling errors upstream stay visible. Beyond the grid the
    profile continues as values[-1] * (s/grid[-1])^(-tail_exponent) with
    the exponent fitted by least squares over the last decade of the
    grid; a profile whose last value is zero has an identically zero
    tail. Admissible iff the tail is zero or its exponent exceeds 2.
    """

    family = "sampled"

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or len(grid) < 2:
            raise ValueError("sampled profile needs matching 1-D grid/values, >= 2 points")
        if grid[0] < 0 or np.any(np.diff(grid) <= 0):
            raise ValueError("sampled grid must be nonnegative and strictly increasing")
        if np.any(values < 0):
            raise ValueError("sampled values must be nonnegative")
        if np.any(np.diff(values) > 1e-12 * max(values.max(), 1.0)):
            raise ValueError("sampled values must be nonincreasing (not repaired)")
        if values.max() == 0.0:
            raise ValueError("identically zero samples: use ZeroProfile instead")
        self.grid = grid
        self.values = values
        self.tail_exponent = self._fit_tail()

    def _fit_tail(self) -> float:
        s_end, y_end = float(self.grid[-1]), float(self.values[-1])
        if y_end == 0.0:
            return math.inf  # compactly supported: zero tail
        mask = (self.grid >= s_end / 10.0) & (self.grid > 0) & (self.values > 0)
        mask[-1] = False  # anchor point is not a data point of the fit
        if mask.sum() < 2:
            raise ValueError("cannot fit tail: need >= 2 positive points in the last decade")
        return fit_anchored_power(self.grid[mask], self.values[mask], s_end, y_end)

    def _value(self, s):
        out = np.interp(s, self.grid, self.values,
                        left=self.values[0], right=0.0)
        beyond = s > self.grid[-1]
        if np.any(beyond):
            if math.isinf(self.tail_exponent):
                tail = 0.0
            else:
                tail = self.values[-1] * (s[beyond] / self.grid[-1]) ** (-self.tail_exponent)
            out = np.array(out, dtype=float)
            out[beyond] = tail
        return out

    @property
    def admissible(self):
        return math.isinf(self.tail_exponent) or self.tail_exponent > 2.0

    def _divergence_reason(self):
        return f"fitted tail exponent {self.tail_exponent:.4g} <= 2"

    def _tails(self, S: float):
        # exact tails of the anchored power model (S >= grid end)
        if math.isinf(self.tail_exponent):
            return 0.0, 0.0
        p = self.tail_exponent
        amp = self.values[-1] * self.grid[-1] ** p  # lambda ~ amp * s^(-p)
        return amp * S ** (2.0 - p) / (p - 2.0), amp * S ** (1.0 - p) / (p - 1.0)

    def _moments(self, tol):
        # the piecewise-linear part integrates exactly with one Gauss panel per cell
        edges = self.grid if self.grid[0] == 0.0 else np.concatenate(([0.0], self.grid))
        b1_grid = cumulative_gauss(self._value, edges, order=4, grade_origin=False)[-1]
        b0_grid = cumulative_gauss(lambda s: s * self._value(s), edges,
                                   order=4, grade_origin=False)[-1]
        b0_tail, b1_tail = self._tails(float(self.grid[-1]))
        eps = 1e-14 * max(1.0, abs(b0_grid) + abs(b0_tail))
        return Moments(b0_grid + b0_tail, b1_grid + b1_tail, eps)

    def _params(self):
        return {"grid": self.grid.tolist(), "values": self.values.tolist()}

    def __repr__(self):
        return (f"SampledProfile({len(self.grid)} pts on "
                f"[{self.grid[0]:g}, {self.grid[-1]:g}], "
                f"tail_exponent={self.tail_exponent:g})")


def _window_plus_tail(profile, tol, initial_window: float) -> Moments:
    """Adaptive quadrature on [0, S] plus the family's exact analytic tail.

    S is grown toward the point where the tail drops below tol/2, but the
    exact tail value is always added back, so the certified error is the
    quadrature's alone; slowly decaying families (power law with p near
    2) therefore do not force an absurd window.
    """
    S = initial_window
    for _ in range(20):
        b0_tail, b1_tail = profile._tails(S)
        if max(b0_tail, b1_tail) <= 0.5 * tol or S >= 1e6:
            break
        S *= 2.0
    b0_tail, b1_tail = profile._tails(S)
    b1_win, e1 = adaptive_quad(profile, 0.0, S, tol_abs=0.25 * tol, tol_rel=0.0)
    b0_win, e0 = adaptive_quad(lambda s: s * profile(s), 0.0, S,
                               tol_abs=0.25 * tol, tol_rel=0.0)
    return Moments(b0_win + b0_tail, b1_win + b1_tail, max(e0, e1))


_FAMILIES = {
    "zero": lambda params: ZeroProfile(),
    "exponential": lambda params: ExponentialProfile(params["lambda0"], params["a"]),
    "power_law": lambda params: PowerLawProfile(params["lambda0"], params["s0"], params["p"]),
    "linear_bump": lambda params: LinearBumpProfile(params["lambda0"], params["s1"]),
    "sampled": lambda params: SampledProfile(params["grid"], params["values"]),
}

_FAMILY_PARAMS = {
    "zero": set(),
    "exponential": {"lambda0", "a"},
    "power_law": {"lambda0", "s0", "p"},
    "linear_bump": {"lambda0", "s1"},
    "sampled": {"grid", "values"},
}


def profile_from_json(obj: dict) -> DecayProfile:
    """Inverse of DecayProfile.to_json; rejects unknown families and params."""
    if set(obj) != {"family", "params"}:
        raise ValueError(f"profile object must have exactly family/params, got {sorted(obj)}")
    family = obj["family"]
    if family not in _FAMILIES:
        raise ValueError(f"unknown profile family {family!r}")
    params = obj["params"]
    if set(params) != _FAMILY_PARAMS[family]:
        raise ValueError(
            f"profile family {family!r} takes params {sorted(_FAMILY_PARAMS[family])}, "
            f"got {sorted(params)}")
    return _FAMILIES[family](params)


def eval_lambda(profile: DecayProfile, s):
    """Evaluate lambda(s); rejects negative s."""
    return profile(s)


def moments(profile: DecayProfile, tol: float = 1e-10) -> Moments:
    """Certified (b0, b1) of an admissible profile."""
    return profile.moments(tol)


def shifted_profile(profile: DecayProfile, d_ox: float, speed: float,
                    n: int, alpha: float):
    """Decay envelope seen along a straight ray leaving a point at distance d_ox.

    Returns the function

        t -> ((n+alpha-1)/(n+alpha)) * speed^2 * lambda(|d_ox - t*speed|),

    which bounds the curvature term along a unit-time-parameterized ray
    whose radial speed is |speed| < 1. Nonnegative, peaks at
    t = d_ox/speed where the argument hits 0, and is nonincreasing past
    the peak because lambda is nonincreasing.
    """
    if d_ox < 0:
        raise ValueError("d_ox must be >= 0")
    if not 0.0 <= speed < 1.0:
        raise ValueError("speed must lie in [0, 1)")
    if n < 2 or alpha <= 0:
        raise ValueError("need n >= 2 and alpha > 0")
    factor = (n + alpha - 1.0) / (n + alpha) * speed ** 2

    def envelope(t):
        arg = np.abs(d_ox - np.asarray(t, dtype=float) * speed)
        out = factor * profile(arg)
        return float(out) if np.isscalar(t) else out

    return envelope
