"""Exception hierarchy shared by every engine and by the CLI.

Each class carries the process exit code the CLI reports when the error
escapes a command: 2 for bad input, 3 for an unsupported or singular case,
4 for a numerical failure inside an engine.
"""

from typing import Any, Dict


class QrocError(Exception):
    """Base class for all errors raised by this package."""

    exit_code: int = 1

    def to_record(self) -> Dict[str, Any]:
        """Machine-readable form written to stderr by the CLI."""
        return {
            "error": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


# --- Input validation (exit 2) ---

class ValidationError(QrocError):
    exit_code = 2


class NonHermitianInput(ValidationError):
    pass


class NotPositiveSemidefinite(ValidationError):
    pass


class TraceNotOne(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class ParameterOutOfRange(ValidationError, ValueError):
    pass


class RateOutOfRange(ParameterOutOfRange):
    """Hoeffding rate outside the open interval (0, S(rho1||rho2))."""


class DegenerateParameter(ValidationError):
    pass


class Unphysical(ValidationError):
    """Covariance violates the uncertainty relation V + i*Omega/2 >= 0."""


class AsymmetricCovariance(ValidationError):
    pass


class InvalidStateSpec(ValidationError):
    pass


class InvalidConfig(ValidationError):
    """config.yaml missing when named explicitly, empty, or with bad keys."""


class UsageError(ValidationError):
    """Bad command-line arguments."""


# --- Capability / singular input (exit 3) ---

class CapabilityError(QrocError):
    exit_code = 3


class SingularGaussianState(CapabilityError):
    """A pure or near-pure Gaussian state reached a formula needing Z > 0."""


class UnsupportedInput(CapabilityError):
    pass


class CutoffTooSmall(CapabilityError):
    pass


# --- Numerical failure (exit 4) ---

class NumericalError(QrocError):
    exit_code = 4


class IllConditioned(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass
