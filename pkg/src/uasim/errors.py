"""Exception hierarchy shared by the simulator and the CLI."""


class UASimError(Exception):
    """Base class for all simulator errors."""


class DimensionError(UASimError, ValueError):
    """Operand mode counts or indices do not fit together."""


class NumericalError(UASimError, ArithmeticError):
    """A numerical step produced an unphysical or singular result."""


class ApproximationError(UASimError, ValueError):
    """An approximation was used outside the regime where it holds."""


class TruncationError(UASimError):
    """Fock-space truncation would discard more weight than allowed."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class OracleBoundsError(UASimError):
    """The requested Fock-space simulation is too large to run."""


class SaturatedEnhancement(UASimError, ZeroDivisionError):
    """Protected fidelity is exactly one, so enhancement is unbounded."""


class ConfigError(UASimError, ValueError):
    """Invalid experiment configuration."""
