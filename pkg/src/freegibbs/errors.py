"""Exception types shared across the package."""


class FreeGibbsError(Exception):
    """Base class for all package errors."""


class SizeBudgetError(FreeGibbsError):
    """An enumeration would exceed the configured budget.

    Callers should either raise the budget explicitly or switch to a
    sampling-based estimator.
    """

    def __init__(self, requested, budget, what="configurations"):
        self.requested = requested
        self.budget = budget
        self.what = what
        super().__init__(
            f"enumeration of {requested} {what} exceeds budget {budget}"
        )


class DegenerateWeightError(FreeGibbsError):
    """All configuration weights vanished; energies are out of float range."""


class NotAttractiveError(FreeGibbsError):
    """Raised when a monotonicity-based criterion is applied to a
    structure that is not attractive for the supplied site orders."""
