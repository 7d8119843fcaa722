"""Exception hierarchy for the swellfront package."""


class SwellfrontError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SwellfrontError):
    """A constructor argument is outside its admissible range."""


class AssumptionViolationError(SwellfrontError):
    """A derived quantity contradicts the model assumptions."""


class NoInverseError(SwellfrontError):
    """Requested inversion target lies above the ramp plateau."""


class DegenerateDomainError(SwellfrontError):
    """Front position does not exceed the pore edge."""


class FrontCollapseError(SwellfrontError):
    """The computed front reached the pore edge during a run."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class BoundarySolveError(SwellfrontError):
    """The scalar boundary solve failed to converge."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class ConfigError(SwellfrontError):
    """A config file failed to parse or is structurally invalid."""


class ConfigurationError(SwellfrontError):
    """A scheme configuration is unusable for the requested run."""
