"""Exception hierarchy shared by every module."""


class FockbicError(Exception):
    """Base class for all package errors."""


class DimensionError(FockbicError, ValueError):
    """A Fock label or operator does not fit the truncated basis."""


class TruncationError(FockbicError, ValueError):
    """The truncated basis is too small for the requested state.

    ``required_dim`` carries the smallest dimension that would satisfy
    the tail tolerance, when it can be computed.
    """

    def __init__(self, message, required_dim=None):
        super().__init__(message)
        self.required_dim = required_dim


class UnsupportedError(FockbicError, ValueError):
    """The operation does not apply to this input (e.g. a driven run on the diagonal path)."""


class UnsupportedModelError(UnsupportedError, TypeError):
    pass


class UndefinedObservableError(FockbicError, ValueError):
    pass


class AccuracyError(FockbicError, RuntimeError):
    """A numerical result missed its accuracy budget."""


class IntegratorError(FockbicError, RuntimeError):
    """The time integrator failed (step-size underflow, stiffness)."""


class ConfigError(FockbicError, ValueError):
    """Invalid scenario or simulation configuration."""
