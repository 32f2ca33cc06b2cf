"""Residual checks for the functional identities satisfied by Gamma_k.

Each check evaluates both sides of an identity, forms the residual, and
passes when ``|residual| <= SAFETY * (lhs bound + rhs bound)``.  Genuine
violations are O(1), so a factor of ten over the propagated bounds separates
them from rounding noise.  Products and ratios of gammas are always handled
as sums of logarithms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .errors import DomainError, OrderError
from .kcore import EvalResult, ln_gamma_k, psi_k
from .precision import DEFAULT_PRECISION, ROUNDING_ULPS, PrecisionConfig

__all__ = [
    "IDENTITIES",
    "IdentityOutcome",
    "SAFETY",
    "check_digamma_multiplication",
    "check_euler_product",
    "check_gauss_multiplication",
    "check_lemma3",
    "check_polygamma_multiplication",
    "check_power_kernel",
    "check_recurrence",
]

SAFETY = 10


@dataclass(frozen=True)
class IdentityOutcome:
    identity_id: str
    inputs: dict
    lhs: EvalResult
    rhs: EvalResult
    residual: Any
    threshold: Any
    passed: bool
    # strict-positivity checks pass on residual > threshold instead of |residual| <= threshold
    mode: str = field(default="equality")


def _prec(precision):
    return DEFAULT_PRECISION if precision is None else precision


def _sum(results, prec: PrecisionConfig, coeffs=None, const=0, label="reduction") -> EvalResult:
    """Linear combination ``const + sum c_i * r_i`` with its propagated bound."""
    ctx = prec.ctx
    coeffs = coeffs or [1] * len(results)
    terms = [c * r.value for c, r in zip(coeffs, results)]
    value = ctx.fsum(terms) + const
    bound = ctx.fsum(abs(c) * r.abs_error_bound for c, r in zip(coeffs, results))
    bound += ROUNDING_ULPS * prec.eps * (ctx.fsum(abs(t) for t in terms) + abs(const))
    return EvalResult(value, bound, label, prec.target_digits)


def _equality(identity_id, inputs, lhs: EvalResult, rhs: EvalResult) -> IdentityOutcome:
    residual = lhs.value - rhs.value
    threshold = SAFETY * (lhs.abs_error_bound + rhs.abs_error_bound)
    return IdentityOutcome(identity_id, inputs, lhs, rhs, residual, threshold, bool(abs(residual) <= threshold))


def _check_m(m):
    if int(m) != m or m < 2:
        raise DomainError(f"m must be an integer >= 2, got {m!r}")
    return int(m)


def check_recurrence(x, k, backend="reduction", precision: PrecisionConfig | None = None) -> IdentityOutcome:
    """ln Gamma_k(x + k) against ln x + ln Gamma_k(x)."""
    prec = _prec(precision)
    ctx = prec.ctx
    xm, km = ctx.mpf(x), ctx.mpf(k)
    base = ln_gamma_k(xm, km, backend, prec)
    lhs = ln_gamma_k(xm + km, km, backend, prec)
    rhs = _sum([base], prec, const=ctx.ln(xm), label=backend)
    return _equality("recurrence", {"x": x, "k": k}, lhs, rhs)


def _gauss_constant(ctx, x, k, m):
    return (
        (m * x / k - ctx.mpf(0.5)) * ctx.ln(m)
        + (m - 1) * ctx.ln(k) / 2
        + (1 - m) * ctx.ln(2 * ctx.pi) / 2
    )


def check_gauss_multiplication(x, k, m: int, backend="reduction", precision: PrecisionConfig | None = None) -> IdentityOutcome:
    """ln Gamma_k(mx) against the log of the k-Gauss multiplication product."""
    m = _check_m(m)
    prec = _prec(precision)
    ctx = prec.ctx
    xm, km = ctx.mpf(x), ctx.mpf(k)
    lhs = ln_gamma_k(m * xm, km, backend, prec)
    parts = [ln_gamma_k(xm + s * km / m, km, backend, prec) for s in range(m)]
    rhs = _sum(parts, prec, const=_gauss_constant(ctx, xm, km, m), label=backend)
    return _equality("gauss-mult", {"x": x, "k": k, "m": m}, lhs, rhs)


def check_euler_product(k, m: int, backend="reduction", precision: PrecisionConfig | None = None) -> IdentityOutcome:
    """sum_{s=1}^{m-1} ln Gamma_k(sk/m) against its closed form."""
    m = _check_m(m)
    prec = _prec(precision)
    ctx = prec.ctx
    km = ctx.mpf(k)
    parts = [ln_gamma_k(s * km / m, km, backend, prec) for s in range(1, m)]
    lhs = _sum(parts, prec, label=backend)
    closed = (1 - m) * ctx.ln(km) / 2 + (m - 1) * ctx.ln(2 * ctx.pi) / 2 - ctx.ln(m) / 2
    rhs = EvalResult(closed, ROUNDING_ULPS * prec.eps * (abs(closed) + m * abs(ctx.ln(km)) + m), "closed-form", prec.target_digits)
    return _equality("euler-product", {"k": k, "m": m}, lhs, rhs)


def check_polygamma_multiplication(r: int, x, k, m: int, backend="reduction", precision: PrecisionConfig | None = None) -> IdentityOutcome:
    """psi_k^(r)(mx) against m^-(r+1) sum_s psi_k^(r)(x + sk/m), r >= 1."""
    if int(r) != r or r < 1:
        raise OrderError(f"the polygamma multiplication formula needs r >= 1, got {r!r}")
    r = int(r)
    m = _check_m(m)
    prec = _prec(precision)
    ctx = prec.ctx
    xm, km = ctx.mpf(x), ctx.mpf(k)
    lhs = psi_k(r, m * xm, km, backend, prec)
    parts = [psi_k(r, xm + s * km / m, km, backend, prec) for s in range(m)]
    w = ctx.mpf(m) ** -(r + 1)
    rhs = _sum(parts, prec, coeffs=[w] * m, label=backend)
    return _equality("polygamma-mult", {"r": r, "x": x, "k": k, "m": m}, lhs, rhs)


def check_digamma_multiplication(x, k, m: int, backend="reduction", precision: PrecisionConfig | None = None) -> IdentityOutcome:
    """psi_k(mx) against (ln m)/k + (1/m) sum_s psi_k(x + sk/m).

    The (ln m)/k term is what distinguishes order 0 from the r >= 1 formula.
    """
    m = _check_m(m)
    prec = _prec(precision)
    ctx = prec.ctx
    xm, km = ctx.mpf(x), ctx.mpf(k)
    lhs = psi_k(0, m * xm, km, backend, prec)
    parts = [psi_k(0, xm + s * km / m, km, backend, prec) for s in range(m)]
    rhs = _sum(parts, prec, coeffs=[ctx.one / m] * m, const=ctx.ln(m) / km, label=backend)
    return _equality("digamma-mult", {"x": x, "k": k, "m": m}, lhs, rhs)


def check_lemma3(n: int, t, precision: PrecisionConfig | None = None) -> IdentityOutcome:
    """Strict positivity of sum_{s=1}^n e^{-st/(n+1)} - n e^{-t}.

    The difference is formed as e^{-t} * sum_s expm1(t (1 - s/(n+1))), a sum
    of positive terms, so it carries no cancellation even for tiny t.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    prec = _prec(precision)
    ctx = prec.ctx
    tm = ctx.mpf(t)
    if not tm > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    eps = prec.eps
    lhs_v = ctx.fsum(ctx.exp(-s * tm / (n + 1)) for s in range(1, n + 1))
    rhs_v = n * ctx.exp(-tm)
    lhs = EvalResult(lhs_v, ROUNDING_ULPS * eps * lhs_v, "direct", prec.target_digits)
    rhs = EvalResult(rhs_v, ROUNDING_ULPS * eps * rhs_v, "direct", prec.target_digits)
    delta = ctx.exp(-tm) * ctx.fsum(ctx.expm1(tm * (1 - ctx.mpf(s) / (n + 1))) for s in range(1, n + 1))
    # every summand is positive, so the relative rounding error stays O(n eps)
    bound = ROUNDING_ULPS * eps * (n + 2) * delta
    threshold = SAFETY * bound
    return IdentityOutcome("lemma3", {"n": n, "t": t}, lhs, rhs, delta, threshold, bool(delta > threshold), "positive")


def check_power_kernel(r: int, x, spec=None) -> IdentityOutcome:
    """Quadrature of int_0^inf t^r e^{-xt} dt against r!/x^(r+1)."""
    from .oracles import QuadratureSpec, power_kernel_integral

    spec = spec or QuadratureSpec()
    prec = spec.precision
    ctx = prec.ctx
    lhs = power_kernel_integral(r, x, spec)
    exact = ctx.factorial(r) / ctx.mpf(x) ** (r + 1)
    rhs = EvalResult(exact, ROUNDING_ULPS * prec.eps * exact * (r + 2), "closed-form", prec.target_digits)
    return _equality("power-kernel", {"r": r, "x": x}, lhs, rhs)


IDENTITIES = {
    "recurrence": check_recurrence,
    "gauss-mult": check_gauss_multiplication,
    "euler-product": check_euler_product,
    "polygamma-mult": check_polygamma_multiplication,
    "digamma-mult": check_digamma_multiplication,
    "lemma3": check_lemma3,
    "power-kernel": check_power_kernel,
}
