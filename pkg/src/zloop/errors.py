"""Exception hierarchy.

The CLI maps these onto exit codes: input/domain errors -> 2,
convergence guards -> 3, numerical failures -> 4.
"""


class ZloopError(Exception):
    """Base class for all library errors."""


class DomainError(ZloopError, ValueError):
    """An argument lies outside the domain of the function."""


class InvalidKilling(DomainError):
    """Killing rate below -1/4."""


class NotHyperbolic(DomainError):
    """A group element that should be hyperbolic is not."""


class SurfaceError(DomainError):
    """A surface description failed validation."""


class ConvergenceGuard(ZloopError):
    """Spectral parameter not strictly above the exponent of convergence."""


class Uncertified(ZloopError):
    """A length spectrum is not certified complete up to its cutoff."""


class ExplosionGuard(ZloopError):
    """Projected enumeration size exceeds the configured budget."""


class NumericalFailure(ZloopError):
    """Base class for numerical failures (exit code 4)."""


class QuadratureFailure(NumericalFailure):
    """Quadrature did not reach its tolerance within budget."""


class BranchError(NumericalFailure):
    """A derivative is not positive real where a real power is required."""


class ContractionError(NumericalFailure):
    """A Schottky disk system does not contract with positive margin."""


class NoRoot(NumericalFailure):
    """No sign change of the transfer determinant on the search interval."""
