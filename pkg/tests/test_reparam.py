import math

import numpy as np
import pytest

from flowshift import fields as fl
from flowshift.errors import PositivityViolated
from flowshift.flow import integrate
from flowshift.reparam import alpha_of, beta_of, make_pair, verify_bridge, verify_image_equality, xi, xi_inverse

CIRCLES = fl.circle_grid([0.5, 1, 2], 8)
UNIT = fl.circle_grid([1.0], 6)


@pytest.fixture
def rot_r2():
    return make_pair(fl.rigid_rotation(), fl.radial_scalar(1, 1))


def test_alpha_constant_weight(cfg):
    pair = make_pair(fl.nonlinear_rotation(), fl.constant_scalar(fl.AmbientSpace.euclidean(2), 2.0))
    assert alpha_of(pair, [0.4, 0.1], 0.3, cfg) == pytest.approx(0.6, abs=1e-9)
    assert alpha_of(pair, [0.4, 0.1], 0.0, cfg) == 0.0


def test_alpha_orbit_constant(rot_r2, cfg):
    assert alpha_of(rot_r2, [1.0, 0.0], math.pi, cfg) == pytest.approx(2 * math.pi, abs=1e-6)


def test_beta(rot_r2, cfg):
    two = make_pair(fl.translation(), fl.constant_scalar(fl.AmbientSpace.euclidean(2), 2.0))
    assert beta_of(two, [0.0, 0.0], 1.0, cfg) == pytest.approx(0.5, abs=1e-9)
    assert beta_of(rot_r2, [1.0, 0.0], 2 * math.pi, cfg) == pytest.approx(math.pi, abs=1e-6)
    assert beta_of(rot_r2, [1.0, 0.0], 0.0, cfg) == 0.0


def test_xi_examples(rot_r2, cfg):
    two = make_pair(fl.rigid_rotation(), fl.constant_scalar(fl.AmbientSpace.euclidean(2), 2.0))
    np.testing.assert_array_equal(xi(two, 0.0, UNIT, cfg), np.zeros(len(UNIT)))
    np.testing.assert_allclose(xi(two, 1.0, UNIT, cfg), 2.0, atol=1e-9)
    np.testing.assert_allclose(xi(rot_r2, math.pi, UNIT, cfg), 2 * math.pi, atol=1e-6)
    np.testing.assert_array_equal(xi_inverse(two, 0.0, UNIT, cfg), np.zeros(len(UNIT)))
    np.testing.assert_allclose(xi_inverse(two, 2.0, UNIT, cfg), 1.0, atol=1e-9)


def test_roundtrip(backend, rot_r2, cfg):
    a = xi(rot_r2, 0.4, CIRCLES, cfg)
    np.testing.assert_allclose(xi_inverse(rot_r2, a, CIRCLES, cfg), 0.4, atol=1e-6)
    # a = 0.4 (1 + r^2) because mu is constant on each circle
    r2 = np.array([p @ p for p in CIRCLES])
    np.testing.assert_allclose(a, 0.4 * (1 + r2), atol=1e-7)


def test_bridge_unit_weight(cfg):
    pair = make_pair(fl.rigid_rotation(), fl.constant_scalar(fl.AmbientSpace.euclidean(2), 1.0))
    rep = verify_bridge(pair, CIRCLES, [0.1, 1.0, math.pi], cfg, tol=1e-9)
    assert rep.passed and rep.max_residual <= 1e-9


def test_bridge_rotation(backend, rot_r2, cfg):
    rep = verify_bridge(rot_r2, CIRCLES, [0.1, 1.0, math.pi], cfg)
    assert rep.passed and rep.max_residual <= 1e-6
    assert rep.n_points == 72


def test_bridge_blowup_closed_forms(cfg):
    F = fl.blowup()
    pair = make_pair(F, fl.constant_scalar(F.space, 2.0))
    grid = fl.make_grid(F.space, [[1.0]])
    rep = verify_bridge(pair, grid, [0.4], cfg)
    assert rep.max_residual <= 1e-8
    # both sides against the closed form 1 / (1 - 2 s)
    assert integrate(pair.G, [1.0], 0.4, cfg)[0] == pytest.approx(5.0, abs=1e-7)
    assert integrate(F, [1.0], alpha_of(pair, [1.0], 0.4, cfg), cfg)[0] == pytest.approx(5.0, abs=1e-7)


def test_bridge_reports_escapes(cfg):
    F = fl.blowup()
    pair = make_pair(F, fl.constant_scalar(F.space, 2.0))
    rep = verify_bridge(pair, fl.make_grid(F.space, [[1.0]]), [0.4, 0.6], cfg)
    assert not rep.passed and len(rep.failures) == 1


def test_image_equality_rotation(backend, rot_r2, cfg):
    gammas = [0.0, 1.0, fl.radial_scalar(0.0, 0.5)]
    rep = verify_image_equality(rot_r2, gammas, CIRCLES, cfg)
    assert rep.passed, rep.failures
    assert len(rep.extra["parts"]) == 12


def test_zero_gamma_gives_identity_on_both_sides(rot_r2, cfg):
    rep = verify_image_equality(rot_r2, [0.0], CIRCLES, cfg)
    assert rep.max_residual == 0.0


def test_vanishing_weight_refused(cfg):
    F = fl.unit_line()
    pair = make_pair(F, fl.linear_scalar(F.space, [1.0]))
    grid = fl.make_grid(F.space, [[-1.0], [0.5], [1.0]])
    with pytest.raises(PositivityViolated):
        verify_image_equality(pair, [0.5], grid, cfg)
    # the inclusion direction alone still works where mu > 0
    a = xi(pair, 0.5, fl.make_grid(F.space, [[0.5], [1.0]]), cfg)
    assert np.all(a > 0)


def test_trajectory_positivity_guard(cfg):
    # mu > 0 on the grid point but the G-trajectory runs into mu <= 0
    F = fl.unit_line()
    pair = make_pair(F, fl.linear_scalar(F.space, [-1.0], 1.0))
    with pytest.raises(PositivityViolated):
        beta_of(pair, [0.5], 2.0, cfg)
