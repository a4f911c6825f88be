"""Exception types shared across the package."""


class SwiptAllocError(Exception):
    """Base class for all package errors."""


class InvalidMatrix(SwiptAllocError):
    """Matrix input violates a structural requirement (finite, Hermitian, PSD)."""


class DimError(SwiptAllocError):
    """Dimension mismatch between operands."""


class InvalidDistance(SwiptAllocError):
    """Nonpositive propagation distance."""


class InvalidConfig(SwiptAllocError):
    """Scenario or sweep configuration violates its schema."""


class NumericalError(SwiptAllocError):
    """A numerical evaluation produced non-finite results."""


class InvalidSolution(SwiptAllocError):
    """Solver output lacks the pieces required by a post-processing step."""


class RestorationFailure(SwiptAllocError):
    """Rank-one restoration could not certify a feasible equal-objective policy."""


class DegenerateNullSpace(SwiptAllocError):
    """A baseline scheme's null-space construction collapsed numerically."""
