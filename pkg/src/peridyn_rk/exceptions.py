"""Exception hierarchy shared by all modules.

Every error raised on purpose by the package derives from
:class:`PeridynError`, so callers (the CLI in particular) can separate
configuration problems from numerical failures.
"""

__all__ = [
    "PeridynError",
    "GridError",
    "MarginError",
    "DegenerateDomainError",
    "IndexOutOfRangeError",
    "CoverageError",
    "KernelError",
    "KernelSingularityError",
    "NonIntegrableKernelError",
    "QuadratureError",
    "EmptyPointSetError",
    "InfeasibleConstraintsError",
    "NonPositiveWeightError",
    "SolverError",
    "SingularMatrixError",
    "StagnationError",
    "NonconvergentSumError",
    "LadderError",
    "ConfigError",
]


class PeridynError(Exception):
    """Base class for all package errors."""


class GridError(PeridynError, ValueError):
    """Invalid grid construction or query."""


class MarginError(GridError):
    """The interaction layer is thinner than the evaluation margin."""


class DegenerateDomainError(GridError):
    """A domain extent is not strictly positive."""


class IndexOutOfRangeError(GridError, IndexError):
    """A multi-index lies outside the indexed region."""


class CoverageError(PeridynError, ValueError):
    """A field is evaluated where its coefficients are not defined."""


class KernelError(PeridynError, ValueError):
    """Invalid kernel definition."""


class KernelSingularityError(KernelError):
    """A singular kernel profile was evaluated at the origin."""


class NonIntegrableKernelError(KernelError):
    """The second moment of the kernel diverges."""


class QuadratureError(PeridynError, ValueError):
    """Base class for quadrature construction failures."""


class EmptyPointSetError(QuadratureError):
    """The lattice point set is empty."""


class InfeasibleConstraintsError(QuadratureError):
    """The moment constraints cannot be satisfied on the given points."""


class NonPositiveWeightError(QuadratureError):
    """The constrained least-squares weights are not all positive."""


class SolverError(PeridynError, ArithmeticError):
    """Base class for numerical failures in the linear solve."""


class SingularMatrixError(SolverError):
    """The collocation matrix is numerically singular."""


class StagnationError(SolverError):
    """The iterative solver did not reach the requested residual."""


class NonconvergentSumError(PeridynError, ArithmeticError):
    """A truncated lattice sum did not converge within the shell cap."""


class LadderError(PeridynError, ValueError):
    """A refinement ladder is too short or not halving."""


class ConfigError(PeridynError, ValueError):
    """Invalid run configuration; the message names the offending key."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
