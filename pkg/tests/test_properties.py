"""Property-based checks of flow and reparametrization invariants."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from flowshift import fields as fl
from flowshift.flow import IntegratorConfig, flow_with_integral, integrate
from flowshift.reparam import alpha_of, beta_of, make_pair

CFG = IntegratorConfig()
coord = st.floats(-1.5, 1.5, allow_nan=False)
point = st.tuples(coord, coord).map(np.array)
time = st.floats(-3.0, 3.0, allow_nan=False)
FIELDS = [fl.rigid_rotation(), fl.nonlinear_rotation(), fl.translation(),
          fl.polynomial_field(2, [([1, 0], [0, 1]), ([0, -1], [1, 0]), ([0, -0.3], [2, 1])], name="vdp-like")]
field = st.sampled_from(FIELDS)
QUICK = settings(max_examples=25, deadline=None)


@QUICK
@given(field, point, time, time)
def test_group_law(F, x, s, t):
    lhs = integrate(F, integrate(F, x, s, CFG), t, CFG)
    rhs = integrate(F, x, s + t, CFG)
    assert np.linalg.norm(lhs - rhs) <= 1e-6 * max(1.0, np.linalg.norm(rhs))


@QUICK
@given(field, point, time)
def test_time_reversal(F, x, t):
    back = integrate(F, integrate(F, x, t, CFG), -t, CFG)
    assert np.linalg.norm(back - x) <= 1e-6


@QUICK
@given(point, st.floats(0.2, 5.0), st.floats(-2.0, 2.0))
def test_constant_scaling_is_time_change(x, c, t):
    F = fl.nonlinear_rotation()
    G = fl.scale_field(F, fl.constant_scalar(F.space, c))
    assert np.linalg.norm(integrate(G, x, t, CFG) - integrate(F, x, c * t, CFG)) <= 1e-6


@QUICK
@given(point, st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_alpha_is_monotone_for_positive_weight(x, s1, s2):
    pair = make_pair(fl.rigid_rotation(), fl.sine_scalar(fl.AmbientSpace.euclidean(2), 2.0, 1.0, 0))
    lo, hi = sorted((s1, s2))
    assert alpha_of(pair, x, lo, CFG) <= alpha_of(pair, x, hi, CFG) + 1e-12


@QUICK
@given(point, st.floats(-3.0, 3.0))
def test_alpha_beta_are_inverse(x, s):
    pair = make_pair(fl.rigid_rotation(), fl.sine_scalar(fl.AmbientSpace.euclidean(2), 2.0, 1.0, 1))
    a = alpha_of(pair, x, s, CFG)
    assert abs(beta_of(pair, x, a, CFG) - s) <= 1e-6


@QUICK
@given(point, st.floats(0.0, 2 * math.pi))
def test_constant_weight_integral(x, s):
    _, a = flow_with_integral(fl.rigid_rotation(), 3.0, x, s, CFG)
    assert abs(a - 3.0 * s) <= 1e-9 * max(1.0, s)


@QUICK
@given(st.floats(-6.0, 6.0), st.floats(-6.0, 6.0), st.floats(-5.0, 5.0))
def test_torus_flow_stays_in_fundamental_domain(a, b, t):
    F = fl.torus_constant(math.sqrt(2))
    y = integrate(F, np.array([a, b]), t, CFG)
    assert np.all(y >= 0) and np.all(y < 2 * math.pi)
    assert F.space.distance(y, F.analytic_flow(np.array([a, b]), t)) <= 1e-9
