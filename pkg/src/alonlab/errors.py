"""Exception types shared across the package.

The CLI maps these onto exit codes: invalid input -> 2,
non-convergence -> 3, budget exceeded -> 4.
"""


class InvalidInputError(ValueError):
    """Input violates a precondition (bad graph, infeasible tangle, ...)."""


class ConvergenceError(RuntimeError):
    """An iterative numerical method did not converge."""


class BudgetError(RuntimeError):
    """An enumeration or dense computation would exceed its resource budget."""
