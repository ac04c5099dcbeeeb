"""Exception hierarchy."""


class FlowshiftError(Exception):
    pass


class ConfigError(FlowshiftError):
    """A configuration or precondition problem (CLI exit code 2)."""


class NumericalDomainError(FlowshiftError):
    """A field could not be evaluated where it was needed."""


class DomainEscape(FlowshiftError):
    """The requested time lies outside the integrable horizon of a point."""

    def __init__(self, reason, t_reached, t_requested=None, point=None):
        self.reason = reason
        self.t_reached = t_reached
        self.t_requested = t_requested
        self.point = point
        msg = f"{reason.value} at t={t_reached:.6g}"
        if t_requested is not None:
            msg += f" before reaching t={t_requested:.6g}"
        super().__init__(msg)


class WeightSingular(FlowshiftError):
    """A reciprocal weight 1/mu met |mu| below the singularity floor."""


class PositivityViolated(FlowshiftError):
    """A reparametrization factor is not strictly positive where required."""


class NonPositiveFactor(PositivityViolated):
    """1 + F(alpha) is not positive on the grid."""


class PreconditionError(ConfigError):
    pass


class NotGloballyPeriodic(PreconditionError):
    pass


class CertificateFailed(FlowshiftError):
    def __init__(self, message, worst=None):
        self.worst = worst or []
        super().__init__(message)
