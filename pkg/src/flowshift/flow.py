"""Numerical local flows: endpoints, dense trajectories and augmented integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import _kernel
from ._tableau import BLOWUP, COLLAPSE, MAX_STEPS, REACHED
from .errors import ConfigError, DomainEscape, WeightSingular
from .fields import ScalarFieldSpec, VectorFieldSpec

WEIGHT_FLOOR = 1e-12


class Escape(str, Enum):
    REACHED_HORIZON = "ReachedHorizon"
    BLOW_UP = "BlowUp"
    STEP_COLLAPSE = "StepCollapse"


_STATUS = {
    REACHED: Escape.REACHED_HORIZON,
    BLOWUP: Escape.BLOW_UP,
    COLLAPSE: Escape.STEP_COLLAPSE,
    MAX_STEPS: Escape.STEP_COLLAPSE,
}


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-9
    atol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 1_000_000
    blowup_norm: float = 1e8
    min_step: float = 1e-14

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ConfigError("rtol and atol must be positive")
        if not (self.max_step > 0 and self.min_step > 0 and self.max_steps > 0):
            raise ConfigError("step limits must be positive")

    def with_(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class StepStats:
    n_steps: int
    n_fev: int
    t_reached: float
    status: Escape


def _solve(rhs, y0, t, cfg, n_check, dense=False):
    y, t_reached, status, n_steps, n_fev, ts, ys, qs = _kernel.dopri_solve(
        rhs, np.asarray(y0, dtype=float), float(t), cfg.rtol, cfg.atol, cfg.max_step,
        cfg.min_step, int(cfg.max_steps), cfg.blowup_norm, int(n_check), bool(dense))
    return y, StepStats(n_steps, n_fev, t_reached, _STATUS[status]), ts, ys, qs


def integrate_with_stats(F: VectorFieldSpec, x, t, cfg: IntegratorConfig = DEFAULT_CONFIG):
    x = np.asarray(x, dtype=float)
    if t == 0:
        return F.space.reduce(x.copy()), StepStats(0, 0, 0.0, Escape.REACHED_HORIZON)
    y, stats, *_ = _solve(F.evaluate, x, t, cfg, x.size)
    if stats.status is not Escape.REACHED_HORIZON:
        raise DomainEscape(stats.status, stats.t_reached, t, x)
    return F.space.reduce(y), stats


def integrate(F: VectorFieldSpec, x, t, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Position at time ``t`` of the integral curve of ``F`` through ``x``.

    Raises ``DomainEscape`` when the curve blows up or the step size
    collapses before ``t`` is reached. Torus fields are integrated in the
    covering space and reduced on output.
    """
    return integrate_with_stats(F, x, t, cfg)[0]


class _Branch:
    """Dense output of one integration direction."""

    def __init__(self, ts, ys, qs):
        self.ts = np.asarray(ts, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.qs = qs
        self.increasing = len(ts) < 2 or ts[-1] > ts[0]

    def __call__(self, t):
        ts = self.ts
        if len(ts) == 1:
            return self.ys[0].copy()
        if self.increasing:
            i = int(np.searchsorted(ts, t, side="right")) - 1
        else:
            i = int(np.searchsorted(-ts, -t, side="right")) - 1
        i = min(max(i, 0), len(ts) - 2)
        h = ts[i + 1] - ts[i]
        s = (t - ts[i]) / h
        return self.ys[i] + self.qs[i] @ np.array([s, s * s, s ** 3, s ** 4])


@dataclass(frozen=True)
class Trajectory:
    origin: np.ndarray
    t_lo: float
    t_hi: float
    t_lo_reached: float
    t_hi_reached: float
    escape_reason_lo: Escape
    escape_reason_hi: Escape
    forward: _Branch
    backward: _Branch
    space: object = None

    def covering_eval(self, t):
        """Dense interpolant in the covering space (no torus reduction)."""
        t = float(t)
        if not (self.t_lo_reached <= t <= self.t_hi_reached):
            raise DomainEscape(self.escape_reason_hi if t > 0 else self.escape_reason_lo,
                               self.t_hi_reached if t > 0 else self.t_lo_reached, t, self.origin)
        if t == 0:
            return self.origin.copy()
        return self.forward(t) if t > 0 else self.backward(t)

    def dense_eval(self, t):
        y = self.covering_eval(t)
        return self.space.reduce(y) if self.space is not None else y

    def step_times(self):
        return self.forward.ts


def trajectory(F: VectorFieldSpec, x, horizon=(-10.0, 10.0),
               cfg: IntegratorConfig = DEFAULT_CONFIG) -> Trajectory:
    """Dense integral curve through ``x`` over the reachable part of ``horizon``."""
    return _dense_path(F.evaluate, np.asarray(x, dtype=float), horizon, cfg, F.dimension, F.space)


def _dense_path(rhs, x, horizon, cfg, n_check, space):
    lo, hi = float(horizon[0]), float(horizon[1])
    if not (lo < 0 < hi):
        raise ConfigError("horizon must satisfy lo < 0 < hi")
    _, fs, fts, fys, fqs = _solve(rhs, x, hi, cfg, n_check, dense=True)
    _, bs, bts, bys, bqs = _solve(rhs, x, lo, cfg, n_check, dense=True)
    return Trajectory(x.copy(), lo, hi, bs.t_reached, fs.t_reached, bs.status, fs.status,
                      _Branch(fts, fys, fqs), _Branch(bts, bys, bqs), space)


def _augmented_rhs(F: VectorFieldSpec, weight, reciprocal, floor):
    f = F.evaluate
    n = F.dimension
    if reciprocal:
        def rhs(z):
            y = z[:n]
            m = weight(y)
            if abs(m) < floor:
                raise WeightSingular(f"|{getattr(weight, '__name__', 'mu')}| = {abs(m):.3g} "
                                     f"below {floor:g} at {y.tolist()}")
            out = np.empty(n + 1)
            out[:n] = f(y)
            out[n] = 1.0 / m
            return out
    else:
        def rhs(z):
            y = z[:n]
            out = np.empty(n + 1)
            out[:n] = f(y)
            out[n] = weight(y)
            return out
    return rhs


def _weight_callable(weight):
    if isinstance(weight, ScalarFieldSpec):
        return weight.evaluate
    if callable(weight):
        return weight
    c = float(weight)
    return lambda y: c


def flow_with_integral(F: VectorFieldSpec, weight, x, s, cfg: IntegratorConfig = DEFAULT_CONFIG,
                       reciprocal=False, floor=WEIGHT_FLOOR):
    """Flow ``F`` for time ``s`` while accumulating the integral of a weight.

    Returns ``(F(x, s), a)`` with ``a = int_0^s w(F(x, tau)) dtau`` where ``w``
    is ``weight`` or, with ``reciprocal=True``, ``1/weight``. The integral is
    carried as an extra ODE component so it shares the flow's error control.
    A reciprocal weight whose magnitude falls below ``floor`` at a stage
    point raises ``WeightSingular``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    w = _weight_callable(weight)
    if s == 0:
        if reciprocal and abs(w(x)) < floor:
            raise WeightSingular(f"|weight| below {floor:g} at {x.tolist()}")
        return F.space.reduce(x.copy()), 0.0
    z0 = np.concatenate([x, [0.0]])
    rhs = _augmented_rhs(F, w, reciprocal, floor)
    z, stats, *_ = _solve(rhs, z0, s, cfg, n)
    if stats.status is not Escape.REACHED_HORIZON:
        raise DomainEscape(stats.status, stats.t_reached, s, x)
    return F.space.reduce(z[:n]), float(z[n])


@dataclass(frozen=True)
class AugmentedIntegral:
    """Running integral of a weight along one trajectory, with dense output."""

    integrand: object
    reciprocal: bool
    path: Trajectory
    space: object

    def value_at(self, t):
        if t == 0:
            return 0.0
        return float(self.path.covering_eval(t)[-1])

    def point_at(self, t):
        return self.space.reduce(self.path.covering_eval(t)[:-1])


def integral_along(F: VectorFieldSpec, weight, x, horizon, cfg: IntegratorConfig = DEFAULT_CONFIG,
                   reciprocal=False, floor=WEIGHT_FLOOR) -> AugmentedIntegral:
    """Dense version of ``flow_with_integral`` over a time window."""
    x = np.asarray(x, dtype=float)
    rhs = _augmented_rhs(F, _weight_callable(weight), reciprocal, floor)
    path = _dense_path(rhs, np.concatenate([x, [0.0]]), horizon, cfg, x.size, None)
    return AugmentedIntegral(weight, reciprocal, path, F.space)


def backend():
    return _kernel.BACKEND
