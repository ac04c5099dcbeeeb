"""Shift maps along orbits of vector fields.

Numerical realization of local flows, shift maps, reparametrization
bridges, pushforwards by shift maps and period functions, with
verification suites and a command-line front end (``flowshift``).
"""

from ._kernel import BACKEND
from .errors import (CertificateFailed, ConfigError, DomainEscape, NonPositiveFactor,
                     NotGloballyPeriodic, PositivityViolated, PreconditionError, WeightSingular)
from .fields import (AmbientSpace, SampleGrid, ScalarFieldSpec, VectorFieldSpec, builtin_catalog,
                     finite_difference_jacobian, make_field, scale_field)
from .flow import Escape, IntegratorConfig, flow_with_integral, integrate, trajectory

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AmbientSpace", "SampleGrid", "ScalarFieldSpec", "VectorFieldSpec",
    "builtin_catalog", "finite_difference_jacobian", "make_field", "scale_field",
    "Escape", "IntegratorConfig", "flow_with_integral", "integrate", "trajectory",
    "CertificateFailed", "ConfigError", "DomainEscape", "NonPositiveFactor",
    "NotGloballyPeriodic", "PositivityViolated", "PreconditionError", "WeightSingular",
]
