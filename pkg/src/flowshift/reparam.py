"""Reparametrization G = mu F and the correspondence between shift functions.

For G = mu F the G-flow is a time change of the F-flow,

    G(x, s) = F(x, alpha(x, s)),   alpha(x, s) = int_0^s mu(G(x, tau)) dtau,

so every shift along G is a shift along F. When mu > 0 the inverse time
change is beta(x, s) = int_0^s dtau / mu(F(x, tau)), and
xi(gamma)(x) = alpha(x, gamma(x)) and xi_inverse(delta)(x) = beta(x, delta(x))
are mutually inverse maps between shift functions of G and of F.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import DomainEscape, PositivityViolated, WeightSingular
from .fields import SampleGrid, ScalarFieldSpec, VectorFieldSpec, scale_field
from .flow import DEFAULT_CONFIG, IntegratorConfig, flow_with_integral, integrate
from .reports import VerificationReport, merge, summarize
from .shiftmap import ShiftFunction, maps_equal, shift_on_grid

POSITIVITY_FLOOR = 1e-9
BRIDGE_TOL = 1e-6


@dataclass(frozen=True)
class ReparamPair:
    F: VectorFieldSpec
    mu: ScalarFieldSpec
    G: VectorFieldSpec
    name: str = ""


def make_pair(F: VectorFieldSpec, mu: ScalarFieldSpec, name="") -> ReparamPair:
    return ReparamPair(F, mu, scale_field(F, mu), name or f"{F.name}|{mu.name}")


def _guarded(mu: ScalarFieldSpec):
    m = mu.evaluate

    def weight(y):
        v = m(y)
        if v < POSITIVITY_FLOOR:
            raise PositivityViolated(f"{mu.name} = {v:.3g} < {POSITIVITY_FLOOR:g} at {np.asarray(y).tolist()}")
        return v
    return weight


def check_positive_on_grid(mu: ScalarFieldSpec, grid: SampleGrid):
    bad = [(p.tolist(), mu(p)) for p in grid if not mu(p) > POSITIVITY_FLOOR]
    if bad:
        raise PositivityViolated(f"{mu.name} is not positive at {len(bad)} grid point(s), e.g. {bad[0]}")


def alpha_of(pair: ReparamPair, x, s, cfg: IntegratorConfig = DEFAULT_CONFIG, guard=False):
    """Time along F that matches time ``s`` along G from ``x``."""
    weight = _guarded(pair.mu) if guard else pair.mu
    return flow_with_integral(pair.G, weight, x, s, cfg)[1]


def beta_of(pair: ReparamPair, x, s, cfg: IntegratorConfig = DEFAULT_CONFIG, guard=True):
    """Time along G that matches time ``s`` along F from ``x`` (needs mu > 0)."""
    weight = _guarded(pair.mu) if guard else pair.mu
    return flow_with_integral(pair.F, weight, x, s, cfg, reciprocal=True)[1]


def _samples(fn, grid: SampleGrid):
    if isinstance(fn, ScalarFieldSpec):
        return np.array([fn(p) for p in grid])
    if callable(fn):
        return np.array([float(fn(p)) for p in grid])
    arr = np.asarray(fn, dtype=float)
    if arr.ndim == 0:
        return np.full(len(grid), float(arr))
    if arr.shape != (len(grid),):
        raise ValueError("sampled function does not match the grid")
    return arr


def xi(pair: ReparamPair, gamma, grid: SampleGrid, cfg: IntegratorConfig = DEFAULT_CONFIG,
       guard=False):
    """Sampled x -> alpha(x, gamma(x)): a G-shift function turned into an F-shift function."""
    g = _samples(gamma, grid)
    return np.array([alpha_of(pair, x, gi, cfg, guard) for x, gi in zip(grid, g)])


def xi_inverse(pair: ReparamPair, delta, grid: SampleGrid, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Sampled x -> beta(x, delta(x)): the inverse correspondence (needs mu > 0)."""
    check_positive_on_grid(pair.mu, grid)
    d = _samples(delta, grid)
    return np.array([beta_of(pair, x, di, cfg) for x, di in zip(grid, d)])


def verify_bridge(pair: ReparamPair, grid: SampleGrid, s_values, cfg: IntegratorConfig = DEFAULT_CONFIG,
                  tol=BRIDGE_TOL, suite_name="bridge") -> VerificationReport:
    """Residuals dist(G(x, s), F(x, alpha(x, s))) over grid x and times s."""
    t0 = time.perf_counter()
    labels, points, res, failures = [], [], [], []
    space = pair.F.space
    for i, x in enumerate(grid):
        for s in s_values:
            try:
                gx, a = flow_with_integral(pair.G, pair.mu, x, s, cfg)
                fx = integrate(pair.F, x, a, cfg)
            except (DomainEscape, WeightSingular) as exc:
                failures.append({"index": i, "point": x.tolist(), "s": s, "error": str(exc)})
                continue
            labels.append(f"x{i}:s={s:.12g}")
            points.append(x)
            res.append(space.distance(gx, fx))
    rep = summarize(suite_name, labels, points, res, tol,
                    identity="G(x,s) = F(x, alpha(x,s)), alpha(x,s) = int_0^s mu(G(x,tau)) dtau",
                    failures=failures, extra={"pair": pair.name, "s_values": list(s_values)})
    rep.wall_time = time.perf_counter() - t0
    return rep


def verify_image_equality(pair: ReparamPair, gamma_list, grid: SampleGrid,
                          cfg: IntegratorConfig = DEFAULT_CONFIG, tol=BRIDGE_TOL,
                          suite_name="image-equality") -> VerificationReport:
    """Commuting-square check that shifts along G and along F give the same maps.

    For every gamma: shift_G(gamma) == shift_F(xi(gamma)) and
    shift_F(gamma) == shift_G(xi_inverse(gamma)), plus both roundtrips
    xi_inverse(xi(gamma)) == gamma and xi(xi_inverse(gamma)) == gamma.
    Refuses with ``PositivityViolated`` unless mu > 0 on the grid and along
    every integrated trajectory.
    """
    t0 = time.perf_counter()
    check_positive_on_grid(pair.mu, grid)
    parts = []
    for k, gamma in enumerate(gamma_list):
        gname = getattr(gamma, "name", None) or f"{float(gamma):g}"
        g = _samples(gamma, grid)
        a = xi(pair, g, grid, cfg, guard=True)
        b = xi_inverse(pair, g, grid, cfg)

        v1 = maps_equal(shift_on_grid(ShiftFunction(g, pair.G), grid, cfg),
                        shift_on_grid(ShiftFunction(a, pair.F), grid, cfg), tol)
        v2 = maps_equal(shift_on_grid(ShiftFunction(g, pair.F), grid, cfg),
                        shift_on_grid(ShiftFunction(b, pair.G), grid, cfg), tol)
        rt1 = np.abs(xi_inverse(pair, a, grid, cfg) - g)
        rt2 = np.abs(xi(pair, b, grid, cfg, guard=True) - g)
        for label, vals in (("G-vs-F", v1.distances), ("F-vs-G", v2.distances),
                            ("xi_inv(xi)", rt1), ("xi(xi_inv)", rt2)):
            parts.append(summarize(f"gamma{k}[{gname}]:{label}", [f"x{i}" for i in range(len(grid))],
                                   list(grid), vals, tol))
    rep = merge(suite_name, parts,
                identity="shift_G(gamma) = shift_F(xi(gamma)) and shift_F(delta) = shift_G(xi^-1(delta))",
                extra={"pair": pair.name, "n_gamma": len(gamma_list)})
    rep.wall_time = time.perf_counter() - t0
    return rep
