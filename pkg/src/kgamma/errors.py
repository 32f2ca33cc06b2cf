"""Exception hierarchy shared by every kgamma module."""


class KGammaError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(KGammaError, ValueError):
    """An argument lies outside the domain of the function (x <= 0, k <= 0, ...)."""


class OrderError(KGammaError, ValueError):
    """A derivative order is outside the supported range."""


class GammaOverflowError(KGammaError, OverflowError):
    """Gamma_k(x) is too large to return directly; use ln_gamma_k instead."""


class ConvergenceError(KGammaError, ArithmeticError):
    """A quadrature or series failed to reach its tolerance."""


class GridDomainError(KGammaError, ValueError):
    """A certification grid contains points outside the claim's domain."""


class UsageError(KGammaError):
    """Bad command-line usage; maps to exit code 3."""
