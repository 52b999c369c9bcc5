import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import becomp as bc
from becomp.errors import HypothesisError
from becomp.odecmp import _solve_linear_ivp


def const_coeff(c):
    return lambda t: np.full_like(np.asarray(t, dtype=float), c)


# ---------------------------------------------------------------------------
# ScalarCurve invariants
# ---------------------------------------------------------------------------

def test_scalar_curve_rejects_bad_grids():
    with pytest.raises(ValueError):
        bc.ScalarCurve(np.array([0.0, 1.0, 1.0]), np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        bc.ScalarCurve(np.array([0.0, 1.0]), np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        bc.ScalarCurve(np.array([-1.0, 1.0]), np.zeros(2), np.zeros(2))


def test_scalar_curve_consistency_of_solved_curves():
    tol = 1e-10
    sol = bc.solve_h(const_coeff(1.0), 5.0, tol=tol)
    assert sol.h.consistency_error() <= sol.h.consistency_bound(tol)


def test_scalar_curve_csv_columns(tmp_path):
    sol = bc.solve_h(bc.ZeroProfile(), 1.0, tol=1e-10, grid_size=11)
    path = tmp_path / "curve.csv"
    sol.h.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == "t,value,deriv"


# ---------------------------------------------------------------------------
# solve_h oracles
# ---------------------------------------------------------------------------

def test_h_zero_profile_is_identity():
    sol = bc.solve_h(bc.ZeroProfile(), 7.0, tol=1e-12)
    assert np.max(np.abs(sol.h.values - sol.h.grid)) < 1e-9
    assert np.max(np.abs(sol.h.derivs - 1.0)) < 1e-9
    assert sol.hprime_limit_lower == 1.0
    assert sol.hprime_limit_upper == 1.0


def test_h_constant_coefficient_matches_sinh():
    sol = bc.solve_h(const_coeff(1.0), 5.0, tol=1e-10)
    exact = np.sinh(sol.h.grid)
    rel = np.abs(sol.h.values - exact)[1:] / exact[1:]
    assert np.max(rel) < 1e-6
    assert math.isinf(sol.hprime_limit_upper)  # bare callable: ODE-only


def test_h_power_law_closed_form():
    # lambda = 2(1+s)^-2 solves to ((1+t)^2 - (1+t)^-1)/3
    sol = bc.solve_h(bc.PowerLawProfile(2.0, 1.0, 2.0), 5.0, tol=1e-10)
    t = sol.h.grid
    exact = ((1.0 + t) ** 2 - (1.0 + t) ** -1) / 3.0
    rel = np.abs(sol.h.values - exact)[1:] / exact[1:]
    assert np.max(rel) < 1e-6


def test_h_growth_identity_cross_check():
    sol = bc.solve_h(bc.ExponentialProfile(1.0, 1.0), 30.0, tol=1e-10)
    assert sol.growth_identity_residual < 1e-7


def test_h_refinement_convergence():
    tol = 1e-8
    a = bc.solve_h(bc.ExponentialProfile(1.0, 1.0), 10.0, tol=tol)
    b = bc.solve_h(bc.ExponentialProfile(1.0, 1.0), 10.0, tol=tol / 10.0)
    assert abs(a.hprime_at_end - b.hprime_at_end) < tol
    assert abs(a.h.values[-1] - b.h.values[-1]) < tol * a.h.values[-1]


def test_h_input_validation():
    with pytest.raises(ValueError):
        bc.solve_h(bc.ZeroProfile(), -1.0)
    with pytest.raises(ValueError):
        bc.solve_h(bc.ZeroProfile(), 1.0, tol=0.0)


def test_hprime_monotone_and_bounded():
    prof = bc.ExponentialProfile(0.8, 1.2)
    sol = bc.solve_h(prof, 40.0, tol=1e-10)
    assert np.all(np.diff(sol.h.derivs) >= -1e-10)
    assert 1.0 - 1e-9 <= sol.hprime_at_end <= sol.hprime_limit_upper + 1e-8
    # derivative approaches the limit monotonically across windows
    smaller = bc.solve_h(prof, 20.0, tol=1e-10)
    assert sol.hprime_at_end >= smaller.hprime_at_end - 1e-10


# ---------------------------------------------------------------------------
# psi pairs
# ---------------------------------------------------------------------------

def test_psi_pair_zero_coefficient():
    p1, p2 = bc.solve_psi_pair(const_coeff(0.0), 3.0, tol=1e-12)
    assert np.max(np.abs(p1.values - p1.grid)) < 1e-10
    assert np.max(np.abs(p2.values - 1.0)) < 1e-10


def test_psi_pair_constant_coefficient():
    p1, p2 = bc.solve_psi_pair(const_coeff(1.0), 3.0, tol=1e-10)
    assert np.max(np.abs(p1.values - np.sinh(p1.grid))) < 1e-6
    assert np.max(np.abs(p2.values - np.cosh(p2.grid))) < 1e-6


def test_psi_pair_rejects_negative_coefficient():
    with pytest.raises(ValueError, match="negative"):
        bc.solve_psi_pair(lambda t: -np.ones_like(np.asarray(t, dtype=float)), 2.0)


@settings(max_examples=15, deadline=None)
@given(amp=st.floats(0.0, 3.0), rate=st.floats(0.2, 2.0), shift=st.floats(0.0, 4.0))
def test_psi_pair_bounds_and_wronskian(amp, rate, shift):
    def coeff(t):
        t = np.asarray(t, dtype=float)
        return amp * np.exp(-rate * np.abs(t - shift))

    tol = 1e-9
    p1, p2 = bc.solve_psi_pair(coeff, 6.0, tol=tol)
    assert np.all(p1.values >= p1.grid - 1e-9)       # psi1 >= t
    assert np.all(p2.values >= 1.0 - 1e-9)           # psi2 >= 1
    assert np.all(np.diff(p1.derivs) >= -1e-9)       # psi1 convex
    assert np.all(np.diff(p2.values) >= -1e-9)       # psi2 nondecreasing
    assert bc.wronskian_drift(p1, p2, relative=True) <= 10.0 * tol


# ---------------------------------------------------------------------------
# Riccati comparison
# ---------------------------------------------------------------------------

def _curve_from_fn(fn, dfn, t0, r, num=400):
    grid = np.linspace(t0, r, num)
    return bc.ScalarCurve(grid, fn(grid), dfn(grid))


def test_riccati_power_start_against_zero_coefficient():
    beta = 0.5
    g = _curve_from_fn(lambda t: beta / t, lambda t: -beta / t ** 2, 0.01, 5.0)
    rep = bc.riccati_compare(g, const_coeff(0.0), beta, 5.0, tol=1e-8)
    assert rep.verdict == bc.PASS


def test_riccati_equality_case_coth():
    g = _curve_from_fn(np.cosh, np.sinh, 0.01, 4.0)
    g = bc.ScalarCurve(g.grid, np.cosh(g.grid) / np.sinh(g.grid),
                       1.0 - (np.cosh(g.grid) / np.sinh(g.grid)) ** 2)
    rep = bc.riccati_compare(g, const_coeff(1.0), 1.0, 4.0, tol=1e-8)
    assert rep.verdict == bc.PASS
    # equality case: the comparison is tight
    assert abs(rep.constants["max_g_minus_ratio"]) < 1e-8


def test_riccati_classical_inequality_one_over_t():
    g = _curve_from_fn(lambda t: 1.0 / t, lambda t: -1.0 / t ** 2, 0.01, 5.0)
    rep = bc.riccati_compare(g, const_coeff(1.0), 1.0, 5.0, tol=1e-8)
    assert rep.verdict == bc.PASS  # t*coth(t) >= 1


def test_riccati_detects_hypothesis_violation():
    # g = c*coth(c t) has g' + g^2 = c^2 > G for c > 1
    c = 1.5
    grid = np.linspace(0.05, 3.0, 300)
    vals = c / np.tanh(c * grid)
    derivs = c ** 2 * (1.0 - 1.0 / np.tanh(c * grid) ** 2)
    g = bc.ScalarCurve(grid, vals, derivs)
    with pytest.raises(HypothesisError, match="subsolution"):
        bc.riccati_compare(g, const_coeff(1.0), 1.0, 3.0, tol=1e-8)


def test_riccati_rejects_negative_G_and_bad_beta():
    g = _curve_from_fn(lambda t: 1.0 / t, lambda t: -1.0 / t ** 2, 0.01, 2.0)
    with pytest.raises(HypothesisError):
        bc.riccati_compare(g, const_coeff(-1.0), 1.0, 2.0)
    with pytest.raises(ValueError):
        bc.riccati_compare(g, const_coeff(0.0), 1.5, 2.0)


def test_riccati_scale_consistency_of_log_derivative():
    # psi'/psi is invariant under rescaling the initial slope
    coeff = const_coeff(0.7)
    grid = np.linspace(0.05, 4.0, 200)
    base = _solve_linear_ivp(coeff, 4.0, 0.0, 1.0, 1e-11)(grid)
    scaled = _solve_linear_ivp(coeff, 4.0, 0.0, 3.0, 1e-11)(grid)
    assert base[1] / base[0] == pytest.approx(scaled[1] / scaled[0], rel=1e-8)


# ---------------------------------------------------------------------------
# ratio and growth bounds
# ---------------------------------------------------------------------------

def test_psi_ratio_bound_zero_envelope_equality():
    rep = bc.psi_ratio_bound_check(const_coeff(0.0), 0.0, r=2.5, tol=1e-8)
    assert rep.verdict == bc.PASS
    assert rep.constants["ratio"] == pytest.approx(1.0 / 2.5, abs=1e-9)


def test_psi_ratio_bound_shifted_exponential():
    env = bc.shifted_profile(bc.ExponentialProfile(1.0, 1.0), 1.0, 0.5, n=3, alpha=1.0)
    total = 2.0 * 0.75 * 1.0 * 0.5  # 2 * factor * b1 * speed
    rep = bc.psi_ratio_bound_check(env, total, r=10.0, tol=1e-8)
    assert rep.verdict == bc.PASS


def test_psi_ratio_bound_truncated_plateau():
    def env(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= 1.0, 1.0, 0.0)

    rep = bc.psi_ratio_bound_check(env, 1.0, r=4.0, tol=1e-8)
    assert rep.verdict == bc.PASS


def test_psi1_growth_zero_envelope_equality():
    rep = bc.psi1_growth_check(const_coeff(0.0), t_max=3.0, moment_bound=0.0, tol=1e-8)
    assert rep.verdict == bc.PASS
    assert rep.constants["max_psi1_over_cap"] == pytest.approx(1.0, abs=1e-8)


def test_psi1_growth_shifted_exponential():
    env = bc.shifted_profile(bc.ExponentialProfile(1.0, 1.0), 2.0, 0.5, n=3, alpha=1.0)
    bound = 0.75 * (2.0 * 2.0 * 1.0 + 1.0)  # factor * (2 d b1 + b0)
    rep = bc.psi1_growth_check(env, t_max=12.0, moment_bound=bound, tol=1e-8)
    assert rep.verdict == bc.PASS


def test_psi1_growth_truncated_plateau():
    def env(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= 1.0, 1.0, 0.0)

    rep = bc.psi1_growth_check(env, t_max=6.0, moment_bound=0.5, tol=1e-8)
    assert rep.verdict == bc.PASS
