"""High-precision k-gamma evaluation and numerical certification of LCM claims."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    DomainError,
    GammaOverflowError,
    GridDomainError,
    KGammaError,
    OrderError,
)
from .kcore import EvalResult, KParams, digamma_k, gamma_k, ln_gamma_k, pochhammer_k, polygamma_k, psi_k  # noqa: E402
from .precision import PrecisionConfig  # noqa: E402

__all__ = [
    "ConvergenceError",
    "DomainError",
    "EvalResult",
    "GammaOverflowError",
    "GridDomainError",
    "KGammaError",
    "KParams",
    "OrderError",
    "PrecisionConfig",
    "digamma_k",
    "gamma_k",
    "ln_gamma_k",
    "pochhammer_k",
    "polygamma_k",
    "psi_k",
]
