import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import becomp as bc
from becomp.errors import AdmissibilityError


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def test_eval_zero_profile():
    assert bc.eval_lambda(bc.ZeroProfile(), 3.7) == 0.0


def test_eval_exponential_at_origin():
    assert bc.eval_lambda(bc.ExponentialProfile(1.0, 1.0), 0.0) == 1.0


def test_eval_power_law_direct_substitution():
    assert bc.eval_lambda(bc.PowerLawProfile(2.0, 1.0, 3.0), 1.0) == pytest.approx(0.25, abs=1e-15)


def test_eval_rejects_negative_argument():
    with pytest.raises(ValueError):
        bc.eval_lambda(bc.ExponentialProfile(1.0, 1.0), -0.1)


def test_eval_vectorized():
    prof = bc.LinearBumpProfile(2.0, 1.0)
    out = prof(np.array([0.0, 0.5, 2.0]))
    assert out == pytest.approx([2.0, 1.0, 0.0])


@pytest.mark.parametrize("bad", [
    lambda: bc.ExponentialProfile(0.0, 1.0),
    lambda: bc.ExponentialProfile(1.0, -1.0),
    lambda: bc.PowerLawProfile(-1.0, 1.0, 3.0),
    lambda: bc.PowerLawProfile(1.0, 0.0, 3.0),
    lambda: bc.LinearBumpProfile(1.0, 0.0),
])
def test_invalid_family_parameters_rejected(bad):
    with pytest.raises(ValueError):
        bad()


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

def test_moments_zero():
    mom = bc.moments(bc.ZeroProfile(), 1e-10)
    assert mom.b0 == 0.0 and mom.b1 == 0.0 and mom.abs_error_bound == 0.0


def test_moments_exponential_closed_form():
    mom = bc.moments(bc.ExponentialProfile(1.0, 1.0), 1e-10)
    assert mom.b0 == pytest.approx(1.0, abs=1e-10)
    assert mom.b1 == pytest.approx(1.0, abs=1e-10)
    assert mom.abs_error_bound <= 1e-10


@pytest.mark.parametrize("lam0", [1.0, 2.5])
def test_moments_power_law_closed_form(lam0):
    mom = bc.moments(bc.PowerLawProfile(lam0, 1.0, 3.0), 1e-10)
    assert mom.b0 == pytest.approx(lam0 / 2.0, abs=1e-9)
    assert mom.b1 == pytest.approx(lam0 / 2.0, abs=1e-9)


def test_moments_general_closed_forms():
    # exponential: b1 = lam0/a, b0 = lam0/a^2; bump: b1 = lam0 s1/2, b0 = lam0 s1^2/6
    mom = bc.moments(bc.ExponentialProfile(2.0, 0.5), 1e-10)
    assert mom.b1 == pytest.approx(4.0, abs=1e-9)
    assert mom.b0 == pytest.approx(8.0, abs=1e-9)
    mom = bc.moments(bc.LinearBumpProfile(2.0, 3.0), 1e-10)
    assert mom.b1 == pytest.approx(3.0, abs=1e-10)
    assert mom.b0 == pytest.approx(3.0, abs=1e-10)


def test_moments_error_bound_respects_tolerance():
    for tol in (1e-6, 1e-10):
        mom = bc.moments(bc.PowerLawProfile(1.0, 2.0, 2.5), tol)
        assert mom.abs_error_bound <= tol


def test_non_admissible_power_law_raises_naming_b0():
    with pytest.raises(AdmissibilityError, match="b0"):
        bc.moments(bc.PowerLawProfile(1.0, 1.0, 2.0), 1e-8)


def test_admissibility_flips_exactly_at_two():
    assert not bc.PowerLawProfile(1.0, 1.0, 2.0).admissible
    assert bc.PowerLawProfile(1.0, 1.0, 2.0 + 1e-9).admissible


def test_moments_scale_linearly():
    tol = 1e-10
    for make in (lambda c: bc.ExponentialProfile(c, 1.3),
                 lambda c: bc.PowerLawProfile(c, 1.0, 3.5),
                 lambda c: bc.LinearBumpProfile(c, 2.0)):
        base = bc.moments(make(1.0), tol)
        scaled = bc.moments(make(3.0), tol)
        assert scaled.b0 == pytest.approx(3.0 * base.b0, abs=2 * tol)
        assert scaled.b1 == pytest.approx(3.0 * base.b1, abs=2 * tol)


# ---------------------------------------------------------------------------
# monotonicity property across families
# ---------------------------------------------------------------------------

_profiles = st.one_of(
    st.just(bc.ZeroProfile()),
    st.builds(bc.ExponentialProfile,
              st.floats(0.1, 5.0), st.floats(0.1, 3.0)),
    st.builds(bc.PowerLawProfile,
              st.floats(0.1, 5.0), st.floats(0.2, 3.0), st.floats(0.5, 6.0)),
    st.builds(bc.LinearBumpProfile,
              st.floats(0.1, 5.0), st.floats(0.3, 8.0)),
)


@settings(max_examples=200, deadline=None)
@given(profile=_profiles, s=st.floats(0.0, 50.0), gap=st.floats(0.0, 50.0))
def test_profiles_are_nonincreasing(profile, s, gap):
    assert profile(s) >= profile(s + gap) - 1e-12


@settings(max_examples=50, deadline=None)
@given(profile=_profiles, s=st.floats(0.0, 20.0))
def test_profiles_are_nonnegative(profile, s):
    assert profile(s) >= 0.0


# ---------------------------------------------------------------------------
# sampled profiles
# ---------------------------------------------------------------------------

def _decaying_samples():
    grid = np.linspace(0.0, 20.0, 60)
    return grid, 2.0 * (1.0 + grid) ** -3.0


def test_sampled_profile_tail_fit_exact_on_power_data():
    grid = np.geomspace(1.0, 100.0, 80)
    prof = bc.SampledProfile(grid, 2.0 * grid ** -3.0)
    assert prof.tail_exponent == pytest.approx(3.0, abs=1e-12)
    assert prof.admissible


def test_sampled_profile_tail_fit_and_admissibility():
    grid, vals = _decaying_samples()
    prof = bc.SampledProfile(grid, vals)
    assert prof.admissible
    assert 2.0 < prof.tail_exponent < 3.05  # (1+s)^-3 on a short window
    # beyond-grid evaluation anchored at the last sample (continuity)
    assert prof(20.0) == pytest.approx(vals[-1], rel=1e-12)
    assert prof(40.0) == pytest.approx(vals[-1] * 2.0 ** -prof.tail_exponent, rel=1e-12)


def test_sampled_profile_monotone_on_dense_grid():
    grid, vals = _decaying_samples()
    prof = bc.SampledProfile(grid, vals)
    dense = np.linspace(0.0, 60.0, 3000)
    out = prof(dense)
    assert np.all(np.diff(out) <= 1e-12)


def test_sampled_rejects_non_monotone_input():
    grid = np.array([0.0, 1.0, 2.0])
    with pytest.raises(ValueError, match="nonincreasing"):
        bc.SampledProfile(grid, np.array([1.0, 0.5, 0.7]))


def test_sampled_rejects_identically_zero():
    with pytest.raises(ValueError, match="ZeroProfile"):
        bc.SampledProfile(np.array([0.0, 1.0]), np.array([0.0, 0.0]))


def test_sampled_compact_support_has_zero_tail_and_moments():
    grid = np.linspace(0.0, 4.0, 33)  # corner s=2 lies on the grid
    vals = np.maximum(0.0, 1.0 - grid / 2.0)
    prof = bc.SampledProfile(grid, vals)
    assert math.isinf(prof.tail_exponent)
    assert prof.admissible
    mom = prof.moments(1e-10)
    assert mom.b1 == pytest.approx(1.0, abs=1e-9)   # triangle area: 2 * 1/2
    assert mom.b0 == pytest.approx(2.0 / 3.0, abs=1e-9)


def test_sampled_slow_tail_flagged_non_admissible():
    grid = np.linspace(0.0, 40.0, 200)
    prof = bc.SampledProfile(grid, (1.0 + grid) ** -1.5)
    assert not prof.admissible
    with pytest.raises(AdmissibilityError):
        prof.moments(1e-8)


def test_sampled_constant_extension_below_grid():
    prof = bc.SampledProfile(np.array([1.0, 2.0, 4.0]), np.array([3.0, 2.0, 1.0]))
    assert prof(0.0) == 3.0
    assert prof(0.5) == 3.0


# ---------------------------------------------------------------------------
# shifted ray envelopes
# ---------------------------------------------------------------------------

def test_shifted_profile_zero_speed_vanishes():
    env = bc.shifted_profile(bc.ExponentialProfile(1.0, 1.0), 5.0, 0.0, n=3, alpha=1.0)
    assert env(0.0) == 0.0 and env(17.3) == 0.0


def test_shifted_profile_direct_substitution():
    env = bc.shifted_profile(bc.ExponentialProfile(1.0, 1.0), 2.0, 0.5, n=3, alpha=1.0)
    t = np.linspace(0.0, 12.0, 101)
    expected = 0.75 * 0.25 * np.exp(-np.abs(2.0 - 0.5 * t))
    assert env(t) == pytest.approx(expected, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(profile=_profiles, d_ox=st.floats(0.1, 10.0), speed=st.floats(0.01, 0.99))
def test_shifted_profile_peak_and_bound(profile, d_ox, speed):
    n, alpha = 4, 0.7
    env = bc.shifted_profile(profile, d_ox, speed, n=n, alpha=alpha)
    cap = (n + alpha - 1) / (n + alpha) * speed ** 2 * profile(0.0)
    t_peak = d_ox / speed
    assert env(t_peak) == pytest.approx(cap, rel=1e-12, abs=1e-300)
    t = np.linspace(0.0, t_peak + 30.0, 300)
    vals = env(t)
    assert np.all(vals >= 0.0)
    assert np.all(vals <= cap + 1e-12 * max(cap, 1.0))
    after = vals[t >= t_peak]
    assert np.all(np.diff(after) <= 1e-12 * max(cap, 1.0))


def test_shifted_profile_rejects_unit_speed():
    with pytest.raises(ValueError):
        bc.shifted_profile(bc.ZeroProfile(), 1.0, 1.0, n=3, alpha=1.0)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("profile", [
    bc.ZeroProfile(),
    bc.ExponentialProfile(1.5, 0.7),
    bc.PowerLawProfile(2.0, 1.5, 3.5),
    bc.LinearBumpProfile(0.8, 4.0),
    bc.SampledProfile(np.linspace(0, 10, 30), 2.0 * (1 + np.linspace(0, 10, 30)) ** -3),
])
def test_profile_json_roundtrip(profile):
    blob = json.dumps(profile.to_json())
    back = bc.profile_from_json(json.loads(blob))
    s = np.linspace(0.0, 30.0, 200)
    assert back(s) == pytest.approx(profile(s), rel=1e-12, abs=1e-300)


def test_profile_json_rejects_unknown_family_and_params():
    with pytest.raises(ValueError, match="family"):
        bc.profile_from_json({"family": "gaussian", "params": {}})
    with pytest.raises(ValueError):
        bc.profile_from_json({"family": "exponential", "params": {"lambda0": 1.0}})
    with pytest.raises(ValueError):
        bc.profile_from_json({"family": "zero", "params": {}, "extra": 1})
