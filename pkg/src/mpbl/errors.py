"""Exception types shared across the package."""


class MpblError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(MpblError):
    """Raised when raw data fails dataset validation.

    Carries the full list of violations so callers can report every
    offending row at once instead of failing on the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"row {row}: {reason}" if row is not None else reason
                          for row, reason in self.violations)
        super().__init__(f"invalid dataset ({len(self.violations)} violation(s)): {lines}")


class TransformDomainError(MpblError):
    """Raised when the power transform is evaluated at a non-positive response."""


class SingularDesignError(MpblError):
    """Raised when a least-squares design matrix is numerically singular."""


class OptimizationError(MpblError):
    """Raised when no optimizer start produces a finite objective value."""


class GeneratorError(MpblError):
    """Raised when a simulation generator cannot produce a valid draw."""


class BootstrapError(MpblError):
    """Raised when too many bootstrap replicates fail to fit."""
