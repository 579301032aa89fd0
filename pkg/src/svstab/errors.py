"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the admissible physical or parameter domain."""


class SingularPointError(ArithmeticError):
    """Evaluation requested at a singular point of an ODE."""


class ResonanceError(ArithmeticError):
    """The series recursion matrix is singular at some order."""

    def __init__(self, msg, order=None):
        super().__init__(msg)
        self.order = order


class BranchCollisionError(ArithmeticError):
    """The two asymptotic spatial eigenvalues coincide (branch point)."""


class IntegrationError(RuntimeError):
    """Adaptive integration failed; ``diagnostics`` carries context."""

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class CFLError(ValueError):
    """Time step violates the CFL restriction."""


class BudgetExceeded(RuntimeError):
    """A cooperative wall-clock budget ran out."""
