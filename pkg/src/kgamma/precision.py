"""Working-precision configuration and per-thread mpmath contexts.

Every numeric routine in the package takes a :class:`PrecisionConfig` and
does its arithmetic in the mpmath context that the config hands out.  The
contexts are private to each thread, so concurrent callers never step on a
shared ``mp.dps``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

from mpmath import MPContext

__all__ = ["PrecisionConfig", "DEFAULT_PRECISION", "GUARD_DIGITS", "ROUNDING_ULPS", "context"]

GUARD_DIGITS = 6

#: Constant c in the rounding estimate ``c * eps * |operand|`` charged per
#: elementary step by every backend.  Deliberately generous; mpmath itself
#: keeps a few guard bits on every special-function call.
ROUNDING_ULPS = 16

_local = threading.local()


def context(dps: int) -> MPContext:
    """Return this thread's mpmath context fixed at ``dps`` decimal digits."""
    cache = getattr(_local, "contexts", None)
    if cache is None:
        cache = _local.contexts = {}
    ctx = cache.get(dps)
    if ctx is None:
        ctx = MPContext()
        ctx.dps = dps
        cache[dps] = ctx
    return ctx


@dataclass(frozen=True)
class PrecisionConfig:
    working_digits: int = 34
    target_digits: int = 16

    def __post_init__(self):
        if self.target_digits < 1:
            raise ValueError("target_digits must be positive")
        if self.working_digits < self.target_digits + GUARD_DIGITS:
            raise ValueError(
                f"working_digits={self.working_digits} leaves fewer than "
                f"{GUARD_DIGITS} guard digits over target_digits={self.target_digits}"
            )

    @property
    def ctx(self) -> MPContext:
        return context(self.working_digits)

    @property
    def eps(self):
        """Unit roundoff of the working context."""
        return self.ctx.eps

    @property
    def euler(self):
        """Euler-Mascheroni constant at working precision."""
        return +self.ctx.euler

    @property
    def pi(self):
        return +self.ctx.pi

    def doubled(self) -> "PrecisionConfig":
        """Same target, twice the working digits (used for certification retries)."""
        return PrecisionConfig(2 * self.working_digits, self.target_digits)


DEFAULT_PRECISION = PrecisionConfig()
