"""Exception hierarchy shared by every permlab module."""


class PermlabError(Exception):
    """Base class for all permlab failures."""


class DimensionError(PermlabError, ValueError):
    """Matrix has the wrong shape for the requested operation."""


class SymmetryError(PermlabError, ValueError):
    """Matrix expected to be symmetric is not, beyond tolerance."""


class DomainError(PermlabError, ValueError):
    """An entry lies outside the admissible domain (e.g. non-positive)."""


class ArityError(PermlabError, ValueError):
    """An operation received an empty argument list."""


class SizeError(PermlabError, ValueError):
    """Matrix dimension exceeds the configured enumeration guard."""


class InputError(PermlabError, ValueError):
    """Malformed or inconsistent input (bad JSON, residual too large, ...)."""


class ConvergenceError(PermlabError, RuntimeError):
    """Iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual, iterations):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class BudgetError(PermlabError, RuntimeError):
    """Enumeration would visit more items than the configured budget."""

    def __init__(self, estimate, budget):
        super().__init__(
            f"estimated {estimate:.3e} contingency tables exceeds budget {budget:.3e}"
        )
        self.estimate = estimate
        self.budget = budget


class DegenerateSpectrumError(PermlabError, ArithmeticError):
    """Fluctuation determinant vanishes: the spectral gap has collapsed."""

    def __init__(self, message, determinant):
        super().__init__(f"{message} (determinant={determinant:.3e})")
        self.determinant = determinant
