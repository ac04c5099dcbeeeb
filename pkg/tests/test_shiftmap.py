import math

import numpy as np
import pytest

from flowshift import fields as fl
from flowshift.errors import DomainEscape
from flowshift.shiftmap import (ShiftFunction, ShiftValidationError, identity_map, maps_equal, shift_apply,
                                shift_on_grid)

BOX = fl.box_grid(fl.AmbientSpace.euclidean(2), [-1, -1], [1, 1], 5)


def test_zero_shift_is_identity(cfg):
    F = fl.nonlinear_rotation()
    img = shift_on_grid(ShiftFunction(0.0, F), BOX, cfg)
    for p, q in zip(BOX, img.images):
        np.testing.assert_array_equal(p, q)


def test_quarter_turn(cfg):
    y = shift_apply(ShiftFunction(math.pi / 2, fl.rigid_rotation()), [1.0, 0.0], cfg)
    np.testing.assert_allclose(y, [0.0, 1.0], atol=1e-8)


def test_blowup_shift_escapes(cfg):
    with pytest.raises(DomainEscape):
        shift_apply(ShiftFunction(1.0, fl.blowup()), [2.0], cfg)


def test_full_turn_on_grid(backend, cfg):
    img = shift_on_grid(ShiftFunction(2 * math.pi, fl.rigid_rotation()), BOX, cfg)
    assert maps_equal(img, identity_map(BOX), 1e-6).passed


def test_translation_by_one(cfg):
    img = shift_on_grid(ShiftFunction(1.0, fl.translation()), BOX, cfg)
    for p, q in zip(BOX, img.images):
        np.testing.assert_allclose(q, p + [1.0, 0.0], atol=1e-12)
    v = maps_equal(img, identity_map(BOX), 1e-6)
    assert not v.passed and v.max_distance == pytest.approx(1.0)


def test_equal_maps_have_zero_distance():
    v = maps_equal(identity_map(BOX), identity_map(BOX))
    assert v.passed and v.max_distance == 0.0


@pytest.mark.parametrize("k", [-1, 0, 1, 2])
def test_rotation_kernel(k, cfg):
    img = shift_on_grid(ShiftFunction(2 * math.pi * k, fl.rigid_rotation()), BOX, cfg)
    assert maps_equal(img, identity_map(BOX), 1e-6).passed


def test_half_turn_not_in_kernel(cfg):
    img = shift_on_grid(ShiftFunction(math.pi, fl.rigid_rotation()), BOX, cfg)
    assert not maps_equal(img, identity_map(BOX), 1e-6).passed


def test_grid_escapes_are_aggregated(cfg):
    grid = fl.make_grid(fl.AmbientSpace.euclidean(1), [[-1.0], [0.5], [2.0], [3.0]])
    sf = ShiftFunction(1.0, fl.blowup())
    with pytest.raises(ShiftValidationError) as info:
        shift_on_grid(sf, grid, cfg)
    assert [f["index"] for f in info.value.failures] == [2, 3]
    assert sf.validated_on is None


def test_torus_comparison_wraps(cfg):
    F = fl.torus_constant(1.0)
    grid = fl.make_grid(F.space, [[0.0, 0.0], [3.0, 1.0]])
    img = shift_on_grid(ShiftFunction(2 * math.pi, F), grid, cfg)
    assert maps_equal(img, identity_map(grid, F.space), 1e-9).passed


def test_sampled_shift_needs_index():
    sf = ShiftFunction(np.array([0.1, 0.2]), fl.translation())
    assert sf.value(None, 1) == 0.2
    with pytest.raises(Exception):
        sf.value(np.zeros(2))
