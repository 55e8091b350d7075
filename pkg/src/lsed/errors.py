"""Exception hierarchy shared by all modules."""


class LSEDError(Exception):
    """Base class for every error raised by the package."""


class DomainError(LSEDError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(LSEDError, ValueError):
    """A model or experiment is missing a required setting."""


class ResolutionError(LSEDError):
    """A frequency grid is too coarse for the requested accuracy."""

    def __init__(self, message, suggested_n_modes=None):
        super().__init__(message)
        self.suggested_n_modes = suggested_n_modes


class IntegrationError(LSEDError):
    """The ODE integrator failed (step-size underflow, stiffness)."""


class EscapeError(IntegrationError):
    """The trajectory left the configured bounding region."""


class InsufficientWindowError(LSEDError):
    """An averaging window is too short compared with the field correlation time."""


class SingularResponseError(LSEDError):
    """A response factor is evaluated at a pole (e.g. zero frequency)."""


class DivergenceError(LSEDError):
    """The self-consistent solver did not converge."""

    def __init__(self, message, residual_trace=()):
        super().__init__(message)
        self.residual_trace = list(residual_trace)


class DegenerateSpectrumError(LSEDError):
    """Two transition frequencies coincide where nondegeneracy is assumed."""


class TruncationError(LSEDError):
    """The matrix truncation leaves no trusted interior block."""


class AmbiguityError(LSEDError):
    """More than one transition frequency where exactly one is required."""


class QuadratureError(LSEDError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class SchemaError(LSEDError):
    """Artifacts with incompatible schemas were combined."""
