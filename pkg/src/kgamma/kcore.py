"""Gamma_k, ln Gamma_k, psi_k and the k-polygamma functions for real x > 0.

Three backends are selectable for every evaluator:

``reduction`` (default)
    Rewrites everything in terms of the classical functions through
    ``Gamma_k(x) = k**(x/k - 1) * Gamma(x/k)``, which follows from the
    limit definition by substituting ``n k`` for ``n`` in Gauss's limit for
    Gamma.  Derivatives follow as ``psi_k(x) = (ln k + psi(x/k)) / k`` and
    ``psi_k^(r)(x) = psi^(r)(x/k) / k**(r+1)``.
``series``
    Self-contained summation: the defining series of psi_k and psi_k^(r)
    summed term by term up to an index N, with the tail closed by the
    Euler-Maclaurin formula; ln Gamma_k via upward recurrence and the
    Stirling series.  All truncation errors come with explicit bounds.
``quadrature``
    The integral representations, delegated to :mod:`kgamma.oracles`.

Every evaluator returns an :class:`EvalResult` whose ``abs_error_bound`` is
the truncation bound plus a rounding charge of ``ROUNDING_ULPS * eps`` per
operand magnitude.  The bounds are conservative estimates, not interval
arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from .errors import DomainError, GammaOverflowError, OrderError
from .precision import DEFAULT_PRECISION, ROUNDING_ULPS, PrecisionConfig

__all__ = [
    "BACKENDS",
    "EvalResult",
    "KParams",
    "LOG_OVERFLOW",
    "digamma_k",
    "gamma_k",
    "ln_gamma_k",
    "pochhammer_k",
    "polygamma_k",
    "psi_k",
]

BACKENDS = ("reduction", "series", "quadrature")

#: ln of the largest IEEE double; gamma_k refuses to return anything larger.
LOG_OVERFLOW = math.log(1.7976931348623157e308)

#: Upward shift target for the psi_k series, in units of k.
DIGAMMA_SHIFT = 8


@dataclass(frozen=True)
class KParams:
    """Scale ``k``, multiplication order ``m`` and derivative order ``r``."""

    k: Any
    m: int = 2
    r: int = 1

    def __post_init__(self):
        if not float(self.k) > 0 or not math.isfinite(float(self.k)):
            raise DomainError(f"k must be a positive finite real, got {self.k!r}")
        if int(self.m) != self.m or self.m < 2:
            raise DomainError(f"m must be an integer >= 2, got {self.m!r}")
        if int(self.r) != self.r or self.r < 1:
            raise OrderError(f"r must be an integer >= 1, got {self.r!r}")


@dataclass(frozen=True)
class EvalResult:
    """A value together with a bound on its absolute error."""

    value: Any
    abs_error_bound: Any
    backend: str
    digits_requested: int

    def __float__(self):
        return float(self.value)

    def agrees_with(self, other: "EvalResult") -> bool:
        return abs(self.value - other.value) <= self.abs_error_bound + other.abs_error_bound


def _positive(ctx, name, v):
    try:
        y = ctx.mpf(v)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} must be a real number, got {v!r}") from exc
    if not ctx.isfinite(y) or y <= 0:
        raise DomainError(f"{name} must be positive and finite, got {v!r}")
    return y


def _order(r, minimum):
    if int(r) != r or r < minimum:
        raise OrderError(f"derivative order must be an integer >= {minimum}, got {r!r}")
    return int(r)


def _backend(name):
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    return name


def _precision(precision):
    return DEFAULT_PRECISION if precision is None else precision


def _asymptotic_threshold(precision: PrecisionConfig) -> int:
    # The smallest Euler-Maclaurin / Stirling term at argument z (units of k)
    # is about exp(-2*pi*z); z >= digits/2 leaves roughly a 2x digit margin.
    return max(DIGAMMA_SHIFT, math.ceil(precision.working_digits / 2))


def pochhammer_k(x, n: int, k, precision: PrecisionConfig | None = None):
    """Return ``x (x+k) (x+2k) ... (x+(n-1)k)``; the empty product is 1."""
    ctx = _precision(precision).ctx
    x = _positive(ctx, "x", x)
    k = _positive(ctx, "k", k)
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    out = ctx.mpf(1)
    for j in range(int(n)):
        out *= x + j * k
    return out


# -- reduction backend -------------------------------------------------------


def _ln_gamma_reduction(x, k, prec: PrecisionConfig) -> EvalResult:
    ctx = prec.ctx
    z = x / k
    lnk = ctx.ln(k)
    a = (z - 1) * lnk
    lg = ctx.loggamma(z)
    value = a + lg
    # argument rounding in z is amplified by d/dz = ln k + psi(z), |psi(z)| <= |ln z| + 1/z
    slope = abs(lnk) + abs(ctx.ln(z)) + 1 / z
    bound = ROUNDING_ULPS * prec.eps * (abs(a) + abs(lg) + abs(value) + z * slope)
    return EvalResult(value, bound, "reduction", prec.target_digits)


def _psi_reduction(n, x, k, prec: PrecisionConfig) -> EvalResult:
    ctx = prec.ctx
    eps = prec.eps
    z = x / k
    if n == 0:
        lnk = ctx.ln(k)
        p = ctx.psi(0, z)
        value = (lnk + p) / k
        # |psi'(z)| <= 1/z + 1/z^2
        slope = 1 / z + 1 / z**2
        bound = ROUNDING_ULPS * eps * ((abs(lnk) + abs(p) + z * slope) / k + abs(value))
        return EvalResult(value, bound, "reduction", prec.target_digits)
    p = ctx.psi(n, z)
    scale = k ** (n + 1)
    value = p / scale
    # |psi^(n+1)(z)| <= n!/z^(n+1) + (n+1)!/z^(n+2)
    slope = ctx.factorial(n) / z ** (n + 1) + ctx.factorial(n + 1) / z ** (n + 2)
    bound = ROUNDING_ULPS * eps * ((n + 2) * abs(p) + z * slope) / scale
    return EvalResult(value, bound, "reduction", prec.target_digits)


# -- series backend ----------------------------------------------------------


def _ln_gamma_series(x, k, prec: PrecisionConfig) -> EvalResult:
    ctx = prec.ctx
    eps = prec.eps
    threshold = _asymptotic_threshold(prec)
    # ln Gamma_k(x) = ln Gamma_k(x + j k) - ln prod_{i<j} (x + i k)
    y = x
    prod = ctx.mpf(1)
    shifts = 0
    while y / k < threshold:
        prod *= y
        y += k
        shifts += 1
    z = y / k
    lnz = ctx.ln(z)
    lead = (z - ctx.mpf(0.5)) * lnz - z + ctx.ln(2 * ctx.pi) / 2
    corr = ctx.mpf(0)
    j = 1
    while True:
        term = ctx.bernoulli(2 * j) / (2 * j * (2 * j - 1) * z ** (2 * j - 1))
        if abs(term) < eps * abs(lead) or j > 200:
            break
        corr += term
        j += 1
    # Stirling remainder for real z > 0 is bounded by the first omitted term
    truncation = abs(term)
    lnk = ctx.ln(k)
    a = (z - 1) * lnk
    lshift = ctx.ln(prod)
    value = a + lead + corr - lshift
    rounding = ROUNDING_ULPS * eps * (abs(a) + abs(z * lnz) + z + abs(lshift) * (shifts + 1) + abs(value))
    return EvalResult(value, truncation + rounding, "series", prec.target_digits)


def _digamma_series(x, k, prec: PrecisionConfig) -> EvalResult:
    ctx = prec.ctx
    eps = prec.eps
    # psi_k(x) = psi_k(x + k) - 1/x, applied until x/k >= DIGAMMA_SHIFT
    y = x
    shift = ctx.mpf(0)
    while y / k < DIGAMMA_SHIFT:
        shift += 1 / y
        y += k
    big_n = _asymptotic_threshold(prec)
    head = ctx.mpf(0)
    absum = ctx.mpf(0)
    for n in range(big_n):
        u, v = 1 / (n * k + k), 1 / (n * k + y)
        head += u - v
        absum += u + v
    # Euler-Maclaurin tail of sum_{n>=N} [1/(nk+k) - 1/(nk+y)]
    a_k = big_n * k + k
    a_y = big_n * k + y
    tail = ctx.log1p((y - k) / a_k) / k + (1 / a_k - 1 / a_y) / 2
    j = 1
    while True:
        b = ctx.bernoulli(2 * j) * k ** (2 * j - 1) / (2 * j)
        t_k, t_y = b / a_k ** (2 * j), b / a_y ** (2 * j)
        if max(abs(t_k), abs(t_y)) < eps * abs(head + tail) / 4 or j > 200:
            break
        tail += t_k - t_y
        absum += abs(t_k) + abs(t_y)
        j += 1
    # for completely monotone summands the remainder is bounded by the first
    # omitted term; doubled for safety
    truncation = 2 * (abs(t_k) + abs(t_y))
    const = (ctx.ln(k) - prec.euler) / k
    value = const + head + tail - shift
    rounding = ROUNDING_ULPS * eps * (abs(const) + absum + abs(tail) + shift * (big_n + 1) + abs(value))
    return EvalResult(value, truncation + rounding, "series", prec.target_digits)


def _polygamma_series(r, x, k, prec: PrecisionConfig) -> EvalResult:
    ctx = prec.ctx
    eps = prec.eps
    # S = sum_{n>=0} (nk + x)^-(r+1); psi_k^(r)(x) = (-1)^(r+1) r! S
    big_n = max(0, math.ceil(_asymptotic_threshold(prec) - float(x / k)))
    head = ctx.fsum((n * k + x) ** -(r + 1) for n in range(big_n))
    a = big_n * k + x
    # integral comparison: sum_{n>=N} f(n) ~ a^-r / (r k) + f(N)/2 + ...
    tail = a**-r / (r * k) + a ** -(r + 1) / 2
    j = 1
    while True:
        term = ctx.bernoulli(2 * j) / ctx.factorial(2 * j) * ctx.rf(r + 1, 2 * j - 1) * k ** (2 * j - 1) * a ** -(r + 2 * j)
        if abs(term) < eps * (head + tail) / 4 or j > 200:
            break
        tail += term
        j += 1
    truncation = 2 * abs(term)
    s = head + tail
    fact = ctx.factorial(r)
    value = (-1) ** (r + 1) * fact * s
    rounding = ROUNDING_ULPS * eps * (big_n + j + 3) * s
    return EvalResult(value, fact * (truncation + rounding), "series", prec.target_digits)


# -- quadrature backend (thin adapters over the oracles) ---------------------


def _quad_spec(prec: PrecisionConfig):
    from .oracles import QuadratureSpec

    tol = 10.0 ** -(prec.target_digits + 4)
    return QuadratureSpec(abs_tolerance=tol, rel_tolerance=tol, working_digits=prec.working_digits)


def _relabel(res: EvalResult, prec: PrecisionConfig) -> EvalResult:
    return EvalResult(res.value, res.abs_error_bound, "quadrature", prec.target_digits)


def _ln_gamma_quadrature(x, k, prec: PrecisionConfig) -> EvalResult:
    from .oracles import gamma_k_integral

    ctx = prec.ctx
    res = gamma_k_integral(x, k, _quad_spec(prec))
    rel = res.abs_error_bound / res.value
    if rel >= 1:
        raise DomainError("quadrature error bound exceeds the value; cannot take its logarithm")
    value = ctx.ln(res.value)
    bound = -ctx.log1p(-rel) + ROUNDING_ULPS * prec.eps * abs(value)
    return EvalResult(value, bound, "quadrature", prec.target_digits)


# -- public evaluators -------------------------------------------------------


def ln_gamma_k(x, k, backend: str = "reduction", precision: PrecisionConfig | None = None) -> EvalResult:
    """ln Gamma_k(x) for x > 0, k > 0."""
    prec = _precision(precision)
    ctx = prec.ctx
    x = _positive(ctx, "x", x)
    k = _positive(ctx, "k", k)
    backend = _backend(backend)
    if backend == "reduction":
        return _ln_gamma_reduction(x, k, prec)
    if backend == "series":
        return _ln_gamma_series(x, k, prec)
    return _ln_gamma_quadrature(x, k, prec)


def gamma_k(x, k, backend: str = "reduction", precision: PrecisionConfig | None = None) -> EvalResult:
    """Gamma_k(x) for x > 0, k > 0.

    Raises :class:`GammaOverflowError` when the result would exceed the
    largest IEEE double; callers needing such values should work with
    :func:`ln_gamma_k`.
    """
    prec = _precision(precision)
    ctx = prec.ctx
    x = _positive(ctx, "x", x)
    k = _positive(ctx, "k", k)
    backend = _backend(backend)
    if backend == "quadrature":
        from .oracles import gamma_k_integral

        res = gamma_k_integral(x, k, _quad_spec(prec))
        if ctx.ln(res.value) > LOG_OVERFLOW:
            raise GammaOverflowError(f"Gamma_k({x}) with k={k} overflows; use ln_gamma_k")
        return _relabel(res, prec)
    log_res = ln_gamma_k(x, k, backend, prec)
    if log_res.value > LOG_OVERFLOW:
        raise GammaOverflowError(f"Gamma_k({x}) with k={k} overflows; use ln_gamma_k")
    value = ctx.exp(log_res.value)
    bound = value * ctx.expm1(log_res.abs_error_bound) + ROUNDING_ULPS * prec.eps * value
    return EvalResult(value, bound, backend, prec.target_digits)


def digamma_k(x, k, backend: str = "reduction", precision: PrecisionConfig | None = None) -> EvalResult:
    """psi_k(x) = d/dx ln Gamma_k(x)."""
    prec = _precision(precision)
    ctx = prec.ctx
    x = _positive(ctx, "x", x)
    k = _positive(ctx, "k", k)
    backend = _backend(backend)
    if backend == "reduction":
        return _psi_reduction(0, x, k, prec)
    if backend == "series":
        return _digamma_series(x, k, prec)
    from .oracles import digamma_k_integral

    return _relabel(digamma_k_integral(x, k, _quad_spec(prec)), prec)


def polygamma_k(r: int, x, k, backend: str = "reduction", precision: PrecisionConfig | None = None) -> EvalResult:
    """psi_k^(r)(x) for r >= 1; its sign is (-1)**(r+1)."""
    r = _order(r, 1)
    prec = _precision(precision)
    ctx = prec.ctx
    x = _positive(ctx, "x", x)
    k = _positive(ctx, "k", k)
    backend = _backend(backend)
    if backend == "reduction":
        return _psi_reduction(r, x, k, prec)
    if backend == "series":
        return _polygamma_series(r, x, k, prec)
    from .oracles import polygamma_k_integral

    return _relabel(polygamma_k_integral(r, x, k, _quad_spec(prec)), prec)


def psi_k(n: int, x, k, backend: str = "reduction", precision: PrecisionConfig | None = None) -> EvalResult:
    """psi_k^(n)(x) with n = 0 meaning psi_k itself."""
    n = _order(n, 0)
    if n == 0:
        return digamma_k(x, k, backend, precision)
    return polygamma_k(n, x, k, backend, precision)
