import math

import numpy as np
import pytest

import becomp as bc
from becomp.errors import AdmissibilityError


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

def test_sphere_measure_unit_sphere(euclid3):
    assert bc.sphere_measure(euclid3, 1.0) == pytest.approx(4 * math.pi, rel=1e-14)


def test_sphere_measure_planar_circle():
    m = bc.ModelManifold(2, bc.EuclideanWarp(), bc.ConstantDensity(1.0))
    assert bc.sphere_measure(m, 2.0) == pytest.approx(4 * math.pi, rel=1e-14)


def test_sphere_measure_weighted():
    m = bc.ModelManifold(3, bc.EuclideanWarp(), bc.LogPolyDensity(1.6, 1.0))
    expected = 4 * math.pi * 2.0 ** (1.6 / 2.0)
    assert bc.sphere_measure(m, 1.0) == pytest.approx(expected, rel=1e-14)


def test_ball_measure_closed_forms(euclid3):
    assert bc.ball_measure(euclid3, 1.0, tol=1e-12) == pytest.approx(4 * math.pi / 3, rel=1e-10)
    m2 = bc.ModelManifold(2, bc.EuclideanWarp(), bc.ConstantDensity(1.0))
    assert bc.ball_measure(m2, 1.0, tol=1e-12) == pytest.approx(math.pi, rel=1e-10)


def test_ball_measure_monotone(euclid3):
    values = [bc.ball_measure(euclid3, r) for r in (0.5, 1.0, 2.0, 4.0)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_ball_derivative_is_sphere_measure(cone_logpoly):
    # fundamental theorem of calculus at a few radii
    rng = np.random.default_rng(7)
    for r in rng.uniform(0.5, 8.0, 5):
        h = 1e-5
        fd = (bc.ball_measure(cone_logpoly, r + h, tol=1e-12)
              - bc.ball_measure(cone_logpoly, r - h, tol=1e-12)) / (2 * h)
        assert fd == pytest.approx(bc.sphere_measure(cone_logpoly, r), rel=1e-7)


# ---------------------------------------------------------------------------
# comparison quotient curves
# ---------------------------------------------------------------------------

def test_bg_ratio_flat_closed_form(euclid3):
    radii = np.geomspace(0.01, 100.0, 250)
    curve = bc.bg_ratio_curve(euclid3, 1.0, bc.ZeroProfile(), radii, tol=1e-12)
    exact = 4 * math.pi / (3 * radii)
    assert np.max(np.abs(curve.ratio - exact) / exact) < 1e-6
    assert np.max(np.abs(curve.sphere_ratio - 4 * math.pi / radii)
                  / (4 * math.pi / radii)) < 1e-6


def test_bg_ratio_strictly_decreasing_flat(euclid3):
    radii = np.geomspace(0.1, 50.0, 100)
    curve = bc.bg_ratio_curve(euclid3, 1.0, bc.ZeroProfile(), radii)
    assert np.all(np.diff(curve.ratio) < 0)


def test_bg_ratio_monotone_for_admissible_profile_on_flat(euclid3):
    # flat space satisfies any admissible bound; quotient against the
    # corresponding comparison solution must still be nonincreasing
    radii = np.geomspace(0.1, 60.0, 150)
    curve = bc.bg_ratio_curve(euclid3, 1.0, bc.ExponentialProfile(1.0, 1.0), radii)
    ball_step, sphere_step = curve.monotonicity_slack()
    assert ball_step <= 1e-8
    assert sphere_step <= 1e-8


def test_bg_ratio_refuses_non_admissible_configuration(cone_logpoly):
    radii = np.geomspace(0.1, 50.0, 50)
    with pytest.raises(AdmissibilityError):
        bc.bg_ratio_curve(cone_logpoly, 1.0, bc.ZeroProfile(), radii)


def test_bg_ratio_rejects_bad_radii(euclid3):
    with pytest.raises(ValueError):
        bc.bg_ratio_curve(euclid3, 1.0, bc.ZeroProfile(), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        bc.bg_ratio_curve(euclid3, 1.0, bc.ZeroProfile(), np.array([2.0, 1.0]))


def test_ratio_curve_csv(tmp_path, euclid3):
    radii = np.geomspace(0.5, 5.0, 10)
    curve = bc.bg_ratio_curve(euclid3, 1.0, bc.ZeroProfile(), radii)
    path = tmp_path / "ratio.csv"
    curve.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r,ball_ratio,sphere_ratio"
    assert len(lines) == 11


# ---------------------------------------------------------------------------
# mean curvature comparison
# ---------------------------------------------------------------------------

def test_mean_curvature_flat_zero_profile(euclid3):
    rep = bc.mean_curvature_check(euclid3, 1.0, bc.ZeroProfile(), r_max=50.0)
    assert rep.verdict == bc.PASS
    # (n-1)/r vs (n+alpha-1)/r leaves alpha/r of margin at the worst end
    assert rep.worst_slack > 0


def test_mean_curvature_cone_envelope(cone_const):
    env = bc.required_envelope(cone_const, 1.0, r_max=200.0)
    rep = bc.mean_curvature_check(cone_const, 1.0, env, r_max=200.0)
    assert rep.verdict == bc.PASS


def test_mean_curvature_cone_logpoly(cone_logpoly, cone_logpoly_envelope):
    rep = bc.mean_curvature_check(cone_logpoly, 1.0, cone_logpoly_envelope,
                                  r_max=1000.0, tol=1e-8)
    assert rep.verdict == bc.PASS


# ---------------------------------------------------------------------------
# asymptotic volume ratio
# ---------------------------------------------------------------------------

def test_avr_flat_alpha_one(euclid3):
    res = bc.avr(euclid3, 1.0, bc.ZeroProfile(), r_max=1e4)
    assert res.estimate <= 1e-3
    assert res.upper_bound == pytest.approx(4 * math.pi / (3 * 1e4), rel=1e-6)


def test_avr_flat_alpha_to_zero_limit(euclid3):
    res = bc.avr(euclid3, 1e-6, bc.ZeroProfile(), r_max=1e4)
    assert res.estimate == pytest.approx(4 * math.pi / 3, rel=1e-2)


def test_avr_upper_bound_antitone_in_r_max(cone_const):
    env = bc.required_envelope(cone_const, 1e-6, r_max=1000.0)
    u1 = bc.avr(cone_const, 1e-6, env, r_max=300.0).upper_bound
    u2 = bc.avr(cone_const, 1e-6, env, r_max=3000.0).upper_bound
    assert u2 <= u1


def test_avr_cone_positive_and_stable(cone_const):
    env = bc.required_envelope(cone_const, 1e-6, r_max=1000.0)
    r3 = bc.avr(cone_const, 1e-6, env, r_max=1e3)
    r4 = bc.avr(cone_const, 1e-6, env, r_max=1e4)
    assert r3.estimate > 0
    assert abs(r3.estimate - r4.estimate) <= 0.01 * r4.estimate
    radii = np.geomspace(0.5, 1.0, 4)
    ratio_at_one = bc.bg_ratio_curve(cone_const, 1e-6, env, radii).ratio[-1]
    assert r3.estimate < ratio_at_one


def test_avr_estimate_below_upper_bound(cone_logpoly, cone_logpoly_envelope):
    res = bc.avr(cone_logpoly, 1.0, cone_logpoly_envelope, r_max=1000.0)
    assert 0.0 < res.estimate <= res.upper_bound
