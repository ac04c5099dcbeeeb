"""Shift maps x -> F(x, alpha(x)) and their finite restrictions to grids."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, DomainEscape
from .fields import SampleGrid, ScalarFieldSpec, VectorFieldSpec
from .flow import DEFAULT_CONFIG, IntegratorConfig, integrate
from .reports import VerificationVerdict

DEFAULT_TOL = 1e-6


class ShiftValidationError(DomainEscape):
    """Some grid points have alpha(x) outside their maximal interval."""

    def __init__(self, failures):
        self.failures = failures
        first = failures[0]
        Exception.__init__(self, f"{len(failures)} grid point(s) escape; first: {first}")
        self.reason = first["reason"]
        self.t_reached = first["t_reached"]
        self.t_requested = first["alpha"]
        self.point = first["point"]


@dataclass
class ShiftFunction:
    """A shift amount for ``field``: a scalar field or per-grid-point samples."""

    alpha: Union[ScalarFieldSpec, np.ndarray, float]
    field: VectorFieldSpec
    validated_on: Optional[SampleGrid] = None

    def value(self, x, index=None):
        a = self.alpha
        if isinstance(a, ScalarFieldSpec):
            return a(x)
        if np.ndim(a) == 0:
            return float(a)
        if index is None:
            raise ConfigError("sampled shift functions are only defined at their grid points")
        return float(np.asarray(a)[index])


@dataclass
class MapOnGrid:
    grid: SampleGrid
    images: list
    tag: str = ""
    space: object = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.images) != len(self.grid):
            raise ConfigError("one image per grid point required")


def shift_apply(sf: ShiftFunction, x, cfg: IntegratorConfig = DEFAULT_CONFIG, index=None):
    return integrate(sf.field, x, sf.value(x, index), cfg)


def shift_on_grid(sf: ShiftFunction, grid: SampleGrid, cfg: IntegratorConfig = DEFAULT_CONFIG,
                  tag=None) -> MapOnGrid:
    images = []
    failures = []
    for i, x in enumerate(grid):
        a = sf.value(x, i)
        try:
            images.append(integrate(sf.field, x, a, cfg))
        except DomainEscape as exc:
            failures.append({"index": i, "point": x.tolist(), "alpha": a,
                             "reason": exc.reason, "t_reached": exc.t_reached})
    if failures:
        raise ShiftValidationError(failures)
    sf.validated_on = grid
    return MapOnGrid(grid, images, tag or f"shift[{sf.field.name}]", sf.field.space)


def identity_map(grid: SampleGrid, space=None) -> MapOnGrid:
    return MapOnGrid(grid, [p.copy() for p in grid], "id", space)


def maps_equal(a: MapOnGrid, b: MapOnGrid, tol=DEFAULT_TOL) -> VerificationVerdict:
    """Compare two grid maps pointwise (torus-aware when a space is attached)."""
    if not a.grid.same_as(b.grid):
        raise ConfigError("maps live on different grids")
    space = a.space or b.space
    if space is not None:
        d = [space.distance(p, q) for p, q in zip(a.images, b.images)]
    else:
        d = [float(np.linalg.norm(np.asarray(p) - np.asarray(q))) for p, q in zip(a.images, b.images)]
    mx = max(d) if d else 0.0
    mean = float(np.mean(d)) if d else 0.0
    return VerificationVerdict(mx <= tol, mx, mean, tol, d)
