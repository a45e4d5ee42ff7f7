"""Exception types shared across the package."""


class HardyLabError(Exception):
    """Base class for all package-specific errors."""


class ParameterDomainError(HardyLabError, ValueError):
    """A parameter triple violates its domain constraints."""


class FeasibilityError(HardyLabError, ValueError):
    """A point lies outside the open feasible region."""


class BracketError(HardyLabError, ValueError):
    """A root bracket does not straddle a sign change."""


class NonConvergenceError(HardyLabError, RuntimeError):
    """An iterative routine exhausted its budget.

    Attributes
    ----------
    best : the best estimate available when the budget ran out.
    error_bound : the achieved error bound, when one is known.
    """

    def __init__(self, message, best=None, error_bound=None):
        super().__init__(message)
        self.best = best
        self.error_bound = error_bound


class ExponentDomainError(HardyLabError, ValueError):
    """A power exponent hits an unsupported resonance."""


class DivergenceError(HardyLabError, ValueError):
    """A requested norm or integral diverges."""


class TangencyError(HardyLabError, RuntimeError):
    """A required double-tangent structure could not be established."""


class GenerationError(HardyLabError, RuntimeError):
    """Random-structure generation exhausted its resampling budget."""


class BranchError(HardyLabError, RuntimeError):
    """No admissible certificate branch exists for the given parameters."""
