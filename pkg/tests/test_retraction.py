import math

import numpy as np
import pytest

from vancal.coords import WedgeCoordinates
from vancal.cutoff import CutoffProfile, make_params
from vancal.retraction import (
    RetractionMap,
    level_set_curve_consistency,
    lipschitz_estimate,
    plane_volume_scaling,
    sample_wedge_points,
    top_volume_scaling,
    verify_area_nonincreasing,
)


@pytest.fixture(scope="module")
def retraction():
    params = make_params(3, 2.5)
    coords = WedgeCoordinates.from_axes(6, (0, 1, 2), (3, 4, 5))
    return RetractionMap(coords, CutoffProfile.from_params(params))


def test_identity_on_the_plane(retraction):
    p = np.array([0.3, -0.8, 1.1, 0.0, 0.0, 0.0])
    assert np.array_equal(retraction.apply(p), p)


def test_wedge_exterior_maps_to_zero(retraction):
    p = np.array([0.1, 0.0, 0.0, 1.0, 1.0, 1.0])
    assert float(retraction.coords.t(p)) > retraction.profile.tan_theta
    assert np.array_equal(retraction.apply(p), np.zeros(6))
    # continuity: both sides of the interface give 0 in the limit
    tan_theta = retraction.profile.tan_theta
    just_inside = np.array([1.0, 0, 0, tan_theta * (1 - 1e-9), 0, 0])
    assert np.linalg.norm(retraction.apply(just_inside)) < 1e-2


def test_one_homogeneous(retraction):
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((100, 6))
    scales = rng.uniform(0.1, 5.0, size=100)
    lhs = retraction.apply(scales[:, None] * pts)
    rhs = scales[:, None] * retraction.apply(pts)
    denom = np.maximum(1.0, np.abs(rhs))
    assert np.max(np.abs(lhs - rhs) / denom) < 1e-12


def test_idempotent(retraction):
    rng = np.random.default_rng(1)
    pts = rng.standard_normal((100, 6))
    once = retraction.apply(pts)
    assert np.max(np.abs(retraction.apply(once) - once)) < 1e-12


def test_jacobian_identity_block_on_plane(retraction):
    p = np.array([0.9, -0.4, 0.7, 0.0, 0.0, 0.0])
    jac = retraction.differential(p, 1e-6)
    assert np.allclose(jac[:3, :3], np.eye(3), atol=1e-9)
    assert np.allclose(jac[3:, :], 0.0, atol=1e-9)


def test_jacobian_zero_outside_wedge(retraction):
    p = np.array([0.3, 0.1, -0.2, 1.3, 0.8, 0.9])  # t well beyond tan(theta)
    jac = retraction.differential(p, 1e-6)
    assert np.allclose(jac, 0.0, atol=1e-12)


def test_jacobian_matches_chain_rule_oracle(retraction):
    rng = np.random.default_rng(2)
    pts = sample_wedge_points(
        retraction.coords, retraction.profile.tan_theta, 20, rng
    )
    for p in pts:
        fd = retraction.differential(p, 1e-6)
        exact = retraction.differential_exact(p)
        assert np.max(np.abs(fd - exact)) < 1e-8


def test_fd_jacobian_second_order(retraction):
    p = np.array([1.0, 0.2, -0.4, 0.3, 0.15, -0.1])
    exact = retraction.differential_exact(p)
    errors = [
        np.max(np.abs(retraction.differential(p, h) - exact)) for h in (1e-3, 5e-4, 2.5e-4)
    ]
    order = np.polyfit(np.log([1e-3, 5e-4, 2.5e-4]), np.log(errors), 1)[0]
    assert order > 1.8


def test_volume_scaling_equals_middle_expression(retraction):
    # the top-n scaling of the differential is exactly sqrt((c)^2 + (s)^2)
    rng = np.random.default_rng(3)
    pts = sample_wedge_points(retraction.coords, retraction.profile.tan_theta, 10, rng)
    for p in pts:
        t = float(retraction.coords.t(p))
        expected = math.sqrt(float(retraction.profile.middle_expression(t)))
        measured = top_volume_scaling(retraction.differential_exact(p), 3)
        assert measured == pytest.approx(expected, rel=1e-10)


def test_tangent_plane_scaling_is_one(retraction):
    p = np.array([0.8, 0.5, -0.3, 0.0, 0.0, 0.0])
    jac = retraction.differential(p, 1e-6)
    scaling = plane_volume_scaling(jac, retraction.coords.x_frame[None])
    assert scaling[0] == pytest.approx(1.0, abs=1e-9)


def test_verify_area_nonincreasing_passes(retraction):
    rep = verify_area_nonincreasing(retraction, 200, 40, seed=0)
    assert rep.passed
    assert rep.max_plane_scaling <= 1.0 + 1e-8
    assert rep.max_top_scaling <= 1.0 + 1e-8


def test_negative_control_detects_expansion():
    # c' > n(n-2)/2 makes the t^2 coefficient of the scaling positive,
    # violating the upper bound of the cutoff inequality near t = 0
    coords = WedgeCoordinates.from_axes(6, (0, 1, 2), (3, 4, 5))
    bad = RetractionMap(coords, CutoffProfile.forced(3, 2.0))
    rep = verify_area_nonincreasing(bad, 300, 40, seed=0)
    assert not rep.passed
    assert rep.max_top_scaling > 1.0


def test_lipschitz_estimate_finite(retraction):
    lip = lipschitz_estimate(retraction, 50_000, seed=4)
    assert math.isfinite(lip)
    assert lip >= 1.0  # the map is the identity on the plane


def test_level_set_curve_identity(retraction):
    thetas = np.linspace(0.05, retraction.profile.tan_theta and math.atan(
        retraction.profile.tan_theta) * 0.95, 9)
    assert level_set_curve_consistency(retraction, thetas) < 1e-10


def test_differential_guards(retraction):
    with pytest.raises(ValueError, match="interface"):
        tan_theta = retraction.profile.tan_theta
        p = np.array([1.0, 0.0, 0.0, tan_theta, 0.0, 0.0])
        retraction.differential(p, 1e-3)
    with pytest.raises(ValueError, match="singular axis"):
        retraction.differential(np.array([1e-9, 0, 0, 0.0, 0, 0]), 1e-3)


def test_retraction_with_shared_block():
    # with an l-block the map preserves the shared coordinates
    params = make_params(3, 2.5)
    coords = WedgeCoordinates.from_axes(7, (0, 1, 2), (3, 4, 5), (6,))
    retraction = RetractionMap(coords, CutoffProfile.from_params(params))
    p = np.array([0.2, 0.1, 0.05, 0.9, 0.8, 0.7, 1.5])  # far outside the wedge
    out = retraction.apply(p)
    assert np.array_equal(out, np.array([0, 0, 0, 0, 0, 0, 1.5]))
    q = np.array([0.5, -0.2, 0.4, 0.05, 0.02, -0.01, -0.8])
    out_q = retraction.apply(q)
    assert out_q[6] == -0.8
    assert np.all(out_q[3:6] == 0.0)


def test_profile_mismatch_rejected():
    params = make_params(4, 4.0)
    coords = WedgeCoordinates.from_axes(6, (0, 1, 2), (3, 4, 5))
    with pytest.raises(ValueError, match="does not match"):
        RetractionMap(coords, CutoffProfile.from_params(params))
