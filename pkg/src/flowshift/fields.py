"""Vector fields, scalar fields, sample grids and the built-in catalog."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import reduce
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigError, NumericalDomainError

TWO_PI = 2.0 * math.pi


class SpaceKind(str, Enum):
    EUCLIDEAN = "euclidean"
    FLAT_TORUS = "torus"


@dataclass(frozen=True)
class AmbientSpace:
    kind: SpaceKind
    dimension: int
    torus_periods: Optional[tuple] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigError("dimension must be >= 1")
        if self.kind is SpaceKind.FLAT_TORUS:
            if self.torus_periods is None or len(self.torus_periods) != self.dimension:
                raise ConfigError("torus needs one period per coordinate")
            if any(p <= 0 for p in self.torus_periods):
                raise ConfigError("torus periods must be positive")
        elif self.torus_periods is not None:
            raise ConfigError("torus_periods given for a Euclidean space")

    @classmethod
    def euclidean(cls, dimension):
        return cls(SpaceKind.EUCLIDEAN, int(dimension))

    @classmethod
    def torus(cls, periods):
        periods = tuple(float(p) for p in periods)
        return cls(SpaceKind.FLAT_TORUS, len(periods), periods)

    @property
    def is_torus(self):
        return self.kind is SpaceKind.FLAT_TORUS

    def reduce(self, x):
        """Representative of ``x`` in the fundamental domain (no-op on R^n)."""
        x = np.asarray(x, dtype=float)
        if not self.is_torus:
            return x
        per = np.asarray(self.torus_periods)
        r = np.mod(x, per)
        # mod of a tiny negative number rounds up to the period itself
        return np.where(r >= per, 0.0, r)

    def displacement(self, a, b):
        """Shortest displacement from ``a`` to ``b`` (per-coordinate on tori)."""
        d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        if self.is_torus:
            per = np.asarray(self.torus_periods)
            d = d - per * np.round(d / per)
        return d

    def distance(self, a, b):
        return float(np.linalg.norm(self.displacement(a, b)))

    def to_dict(self):
        out = {"kind": self.kind.value, "dimension": self.dimension}
        if self.is_torus:
            out["periods"] = list(self.torus_periods)
        return out


@dataclass(frozen=True)
class VectorFieldSpec:
    """A smooth autonomous vector field on an ambient space.

    ``analytic_flow(x, t)``, when present, is a closed-form oracle used by the
    tests; the integrator never consults it. ``period_function`` is an
    optional closed form of the period function for periodic catalog fields.
    """

    space: AmbientSpace
    evaluate: Callable
    name: str
    jacobian: Optional[Callable] = None
    analytic_flow: Optional[Callable] = None
    period_function: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    @property
    def dimension(self):
        return self.space.dimension

    def __call__(self, x):
        return np.asarray(self.evaluate(np.asarray(x, dtype=float)), dtype=float)

    def jacobian_at(self, x, h=None):
        if self.jacobian is not None:
            return np.asarray(self.jacobian(np.asarray(x, dtype=float)), dtype=float)
        return finite_difference_jacobian(self, x, h)


@dataclass(frozen=True)
class ScalarFieldSpec:
    space: AmbientSpace
    evaluate: Callable
    name: str
    gradient: Optional[Callable] = None
    positive: bool = False

    def __call__(self, x):
        return float(self.evaluate(np.asarray(x, dtype=float)))

    def gradient_at(self, x, h=None):
        x = np.asarray(x, dtype=float)
        if self.gradient is not None:
            return np.asarray(self.gradient(x), dtype=float)
        if h is None:
            h = default_step(x)
        g = np.empty(x.size)
        for i in range(x.size):
            e = np.zeros(x.size)
            e[i] = h
            g[i] = (self(x + e) - self(x - e)) / (2 * h)
        return g


@dataclass(frozen=True)
class SampleGrid:
    points: tuple
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(np.asarray(p, dtype=float) for p in self.points))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def as_array(self):
        return np.array(self.points)

    def same_as(self, other):
        return len(self) == len(other) and all(
            np.array_equal(a, b) for a, b in zip(self.points, other.points))


def make_grid(space: AmbientSpace, points: Sequence, description: str = "") -> SampleGrid:
    pts = []
    for p in points:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.size != space.dimension:
            raise ConfigError(f"grid point {p.tolist()} has wrong dimension for {space.dimension}-space")
        pts.append(space.reduce(p))
    return SampleGrid(tuple(pts), description)


def circle_grid(radii, n_angles, center=(0.0, 0.0), include_center=False, phase=0.0):
    """Points on concentric circles in the plane."""
    pts = [np.asarray(center, dtype=float)] if include_center else []
    for r in radii:
        for k in range(n_angles):
            a = phase + TWO_PI * k / n_angles
            pts.append(np.asarray(center) + r * np.array([math.cos(a), math.sin(a)]))
    desc = f"circles r={list(radii)} x {n_angles} angles" + (" + center" if include_center else "")
    return make_grid(AmbientSpace.euclidean(2), pts, desc)


def box_grid(space, lo, hi, n):
    """Tensor grid with ``n`` points per axis spanning [lo, hi]."""
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (space.dimension,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (space.dimension,))
    axes = [np.linspace(lo[i], hi[i], n) for i in range(space.dimension)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    return make_grid(space, pts, f"box {lo.tolist()}..{hi.tolist()} n={n}")


def default_step(x):
    return 1e-5 * max(1.0, float(np.linalg.norm(x)))


def finite_difference_jacobian(F, x, h=None):
    """Central-difference Jacobian of ``F`` at ``x``; column j is dF/dx_j."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = default_step(x)
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    n = x.size
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        with np.errstate(all="ignore"):
            fp = np.asarray(F(x + e), dtype=float)
            fm = np.asarray(F(x - e), dtype=float)
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise NumericalDomainError(f"field not finite near {x.tolist()}")
        J[:, j] = (fp - fm) / (2 * h)
    return J


def scale_field(F: VectorFieldSpec, mu: ScalarFieldSpec, analytic_flow=None,
                period_function=None) -> VectorFieldSpec:
    """The reparametrized field x -> mu(x) F(x)."""
    if F.space != mu.space:
        raise ConfigError(f"cannot scale {F.name} by {mu.name}: different ambient spaces")
    f_eval = F.evaluate
    m_eval = mu.evaluate

    def evaluate(x):
        return m_eval(x) * np.asarray(f_eval(x), dtype=float)

    return VectorFieldSpec(
        space=F.space,
        evaluate=evaluate,
        name=f"({mu.name})*{F.name}",
        analytic_flow=analytic_flow,
        period_function=period_function,
        params={"base": F.name, "factor": mu.name},
    )


# scalar fields ---------------------------------------------------------------

def constant_scalar(space, value, name=None):
    value = float(value)
    return ScalarFieldSpec(
        space, lambda x: value, name or f"{value:g}",
        gradient=lambda x: np.zeros(space.dimension), positive=value > 0)


def polynomial_scalar(space, terms, name="poly"):
    """Scalar polynomial from ``[(coeff, exponents), ...]``."""
    coeffs = np.array([float(c) for c, _ in terms])
    exps = np.array([list(e) for _, e in terms], dtype=int).reshape(len(terms), space.dimension)

    def evaluate(x):
        return float(coeffs @ np.prod(x ** exps, axis=1))

    def gradient(x):
        g = np.zeros(space.dimension)
        for i in range(space.dimension):
            e = exps.copy()
            d = e[:, i].astype(float)
            e[:, i] = np.maximum(e[:, i] - 1, 0)
            g[i] = float((coeffs * d) @ np.prod(x ** e, axis=1))
        return g

    return ScalarFieldSpec(space, evaluate, name, gradient=gradient)


def radial_scalar(a=1.0, b=1.0, name=None):
    """mu(x, y) = a + b (x^2 + y^2); constant along every rotation orbit."""
    space = AmbientSpace.euclidean(2)
    return ScalarFieldSpec(
        space, lambda x: a + b * (x[0] ** 2 + x[1] ** 2), name or f"{a:g}+{b:g}r^2",
        gradient=lambda x: 2 * b * np.asarray(x, dtype=float),
        positive=a > 0 and b >= 0)


def sine_scalar(space, offset=2.0, amplitude=1.0, coord=0, name=None):
    """mu(x) = offset + amplitude * sin(x_coord)."""
    def gradient(x):
        g = np.zeros(space.dimension)
        g[coord] = amplitude * math.cos(x[coord])
        return g

    return ScalarFieldSpec(
        space, lambda x: offset + amplitude * math.sin(x[coord]),
        name or f"{offset:g}+{amplitude:g}sin(x{coord})", gradient=gradient,
        positive=offset > abs(amplitude))


def linear_scalar(space, coeffs, offset=0.0, name=None):
    c = np.asarray(coeffs, dtype=float)
    return ScalarFieldSpec(space, lambda x: offset + float(c @ x), name or f"linear{c.tolist()}",
                           gradient=lambda x: c.copy())


def period_scalar(F: VectorFieldSpec) -> ScalarFieldSpec:
    """The closed-form period function of a catalog field, as a scalar field."""
    if F.period_function is None:
        raise ConfigError(f"{F.name} has no closed-form period function")
    return ScalarFieldSpec(F.space, F.period_function, f"theta[{F.name}]", positive=True)


# vector-field catalog ------------------------------------------------------------

def rigid_rotation():
    space = AmbientSpace.euclidean(2)
    J = np.array([[0.0, -1.0], [1.0, 0.0]])

    def flow(x, t):
        c, s = math.cos(t), math.sin(t)
        return np.array([c * x[0] - s * x[1], s * x[0] + c * x[1]])

    return VectorFieldSpec(
        space, lambda x: np.array([-x[1], x[0]]), "rigid_rotation",
        jacobian=lambda x: J.copy(), analytic_flow=flow,
        period_function=lambda x: TWO_PI)


def nonlinear_rotation():
    space = AmbientSpace.euclidean(2)

    def evaluate(x):
        k = 1.0 + x[0] * x[0] + x[1] * x[1]
        return np.array([-k * x[1], k * x[0]])

    def flow(x, t):
        r2 = x[0] * x[0] + x[1] * x[1]
        a = (1.0 + r2) * t
        c, s = math.cos(a), math.sin(a)
        return np.array([c * x[0] - s * x[1], s * x[0] + c * x[1]])

    return VectorFieldSpec(
        space, evaluate, "nonlinear_rotation", analytic_flow=flow,
        period_function=lambda x: TWO_PI / (1.0 + x[0] ** 2 + x[1] ** 2))


def translation():
    space = AmbientSpace.euclidean(2)
    return VectorFieldSpec(
        space, lambda x: np.array([1.0, 0.0]), "translation",
        jacobian=lambda x: np.zeros((2, 2)),
        analytic_flow=lambda x, t: np.array([x[0] + t, x[1]]))


def unit_line():
    """F = d/dx on the real line."""
    space = AmbientSpace.euclidean(1)
    return VectorFieldSpec(space, lambda x: np.array([1.0]), "unit_line",
                           jacobian=lambda x: np.zeros((1, 1)),
                           analytic_flow=lambda x, t: np.array([x[0] + t]))


def blowup():
    """F(x) = x^2 on R; the flow x / (1 - t x) escapes at t = 1/x."""
    space = AmbientSpace.euclidean(1)

    def flow(x, t):
        x0 = float(x[0])
        den = 1.0 - t * x0
        if den <= 0:
            raise NumericalDomainError(f"t={t} outside the maximal interval of x={x0}")
        return np.array([x0 / den])

    return VectorFieldSpec(space, lambda x: np.array([x[0] * x[0]]), "blowup",
                           jacobian=lambda x: np.array([[2.0 * x[0]]]), analytic_flow=flow)


def rotation_blocks(rates=(1.0, 3.0), zero_dim=1):
    """Block-diagonal linear field: rotation blocks with the given rates plus a zero block."""
    rates = tuple(float(a) for a in rates)
    if any(a == 0 for a in rates):
        raise ConfigError("rotation rates must be nonzero")
    k = len(rates)
    n = 2 * k + int(zero_dim)
    M = np.zeros((n, n))
    for j, a in enumerate(rates):
        M[2 * j, 2 * j + 1] = -a
        M[2 * j + 1, 2 * j] = a

    def flow(x, t):
        out = np.array(x, dtype=float)
        for j, a in enumerate(rates):
            c, s = math.cos(a * t), math.sin(a * t)
            u, v = x[2 * j], x[2 * j + 1]
            out[2 * j] = c * u - s * v
            out[2 * j + 1] = s * u + c * v
        return out

    theta = None
    if all(float(a).is_integer() for a in rates):
        g = reduce(math.gcd, (abs(int(a)) for a in rates))
        period = TWO_PI / g
        theta = lambda x: period  # noqa: E731

    return VectorFieldSpec(
        AmbientSpace.euclidean(n), lambda x: M @ x, "rotation_blocks",
        jacobian=lambda x: M.copy(), analytic_flow=flow, period_function=theta,
        params={"rates": list(rates), "zero_dim": int(zero_dim)})


def torus_constant(gamma=math.sqrt(2.0), periods=(TWO_PI, TWO_PI)):
    """Constant field (1, gamma) on the flat torus."""
    space = AmbientSpace.torus(periods)
    v = np.array([1.0, float(gamma)])

    def flow(x, t):
        return space.reduce(np.asarray(x, dtype=float) + t * v)

    return VectorFieldSpec(space, lambda x: v.copy(), "torus_constant",
                           jacobian=lambda x: np.zeros((2, 2)), analytic_flow=flow,
                           params={"gamma": float(gamma)})


def polynomial_field(dim, terms, space=None, name="polynomial"):
    """Field sum_k c_k x^e_k from ``[(coeffs, exponents), ...]``; ``coeffs`` is a vector."""
    space = space or AmbientSpace.euclidean(dim)
    if space.dimension != dim:
        raise ConfigError("polynomial dim does not match the space")
    if not terms:
        raise ConfigError("polynomial field needs at least one term")
    C = np.array([list(map(float, c)) for c, _ in terms])
    X = np.array([list(map(int, e)) for _, e in terms])
    if C.shape[1] != dim or X.shape[1] != dim:
        raise ConfigError("polynomial term has wrong length")
    if np.any(X < 0):
        raise ConfigError("negative exponent in polynomial")

    def evaluate(x):
        return np.prod(x ** X, axis=1) @ C

    def jacobian(x):
        J = np.zeros((dim, dim))
        for j in range(dim):
            d = X[:, j].astype(float)
            e = X.copy()
            e[:, j] = np.maximum(e[:, j] - 1, 0)
            J[:, j] = (d * np.prod(x ** e, axis=1)) @ C
        return J

    return VectorFieldSpec(space, evaluate, name, jacobian=jacobian,
                           params={"terms": [[c.tolist(), e.tolist()] for c, e in zip(C, X)]})


CATALOG = {
    "rigid_rotation": rigid_rotation,
    "nonlinear_rotation": nonlinear_rotation,
    "translation": translation,
    "unit_line": unit_line,
    "blowup": blowup,
    "rotation_blocks": rotation_blocks,
    "torus_constant": torus_constant,
}


def make_field(name, **params) -> VectorFieldSpec:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise ConfigError(f"unknown catalog field {name!r}") from None
    try:
        F = factory(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name}: {exc}") from None
    if params:
        F = replace(F, params={**F.params, **params})
    return F


def builtin_catalog() -> list:
    return [rigid_rotation(), nonlinear_rotation(), translation(), blowup(),
            rotation_blocks(), torus_constant(), unit_line()]


def singular_points(F, grid, tol=1e-10):
    return [p for p in grid if np.linalg.norm(F(p)) <= tol]
