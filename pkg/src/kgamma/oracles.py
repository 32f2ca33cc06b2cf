"""Slow, independent evaluations used to cross-check the kcore backends.

All improper integrals are cut at a finite point T whose tail is bounded
analytically, and the finite part is integrated by an adaptive driver:
the range is split at breakpoints, each piece is integrated with mpmath's
tanh-sinh (or Gauss-Legendre) rule, and the piece with the worst error
estimate is bisected until the summed estimate meets the tolerance.

The returned bound is quadrature estimate + tail bound + endpoint
approximation error (where applicable) + rounding.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ConvergenceError, DomainError, OrderError
from .kcore import EvalResult
from .precision import GUARD_DIGITS, ROUNDING_ULPS, PrecisionConfig

__all__ = [
    "QuadratureSpec",
    "digamma_k_integral",
    "gamma_k_integral",
    "gamma_k_limit",
    "polygamma_k_integral",
    "power_kernel_integral",
]

RULES = ("tanh-sinh", "gauss-legendre")

#: Leading-order endpoint region for the polygamma integrand is (0, EPS_SPLIT / max(k, x)).
EPS_SPLIT = 1e-6


@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = "tanh-sinh"
    abs_tolerance: float = 1e-24
    rel_tolerance: float = 1e-24
    max_subdivisions: int = 200
    upper_cutoff: float | None = None
    working_digits: int = 34

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if not self.abs_tolerance > 0 or not self.rel_tolerance > 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.upper_cutoff is not None and not self.upper_cutoff > 0:
            raise ValueError("upper_cutoff must be positive")

    @property
    def precision(self) -> PrecisionConfig:
        return PrecisionConfig(self.working_digits, max(1, self.working_digits - GUARD_DIGITS - 2))

    def tolerance(self, magnitude) -> float:
        return max(self.abs_tolerance, self.rel_tolerance * float(abs(magnitude)))


def _positive(ctx, name, v):
    y = ctx.mpf(v)
    if not ctx.isfinite(y) or y <= 0:
        raise DomainError(f"{name} must be positive and finite, got {v!r}")
    return y


def _adaptive(ctx, f, points, spec: QuadratureSpec, tol_of):
    """Integrate ``f`` over consecutive breakpoints, bisecting the worst piece.

    ``tol_of(total)`` maps the running estimate to the absolute tolerance.
    Returns (value, error_estimate, sum of |piece values|).
    """
    method = spec.rule
    pieces = []
    for a, b in zip(points[:-1], points[1:]):
        v, e = ctx.quad(f, [a, b], method=method, error=True)
        pieces.append([a, b, v, abs(e)])
    while True:
        total = ctx.fsum(p[2] for p in pieces)
        err = ctx.fsum(p[3] for p in pieces)
        if err <= tol_of(total):
            break
        if len(pieces) >= spec.max_subdivisions:
            raise ConvergenceError(
                f"quadrature error estimate {float(err):.3g} above tolerance "
                f"{float(tol_of(total)):.3g} after {len(pieces)} subintervals"
            )
        worst = max(range(len(pieces)), key=lambda i: pieces[i][3])
        a, b, _, _ = pieces.pop(worst)
        mid = (a + b) / 2
        for lo, hi in ((a, mid), (mid, b)):
            v, e = ctx.quad(f, [lo, hi], method=method, error=True)
            pieces.insert(worst, [lo, hi, v, abs(e)])
            worst += 1
    magnitude = ctx.fsum(abs(p[2]) for p in pieces)
    return total, err, magnitude


def _geometric(ctx, lo, hi, factor=4):
    pts = [lo]
    t = lo * factor
    while t < hi:
        pts.append(t)
        t *= factor
    pts.append(hi)
    return pts


def _choose_cutoff(spec: QuadratureSpec, start, tail_bound, budget):
    """Smallest doubling of ``start`` whose tail bound is below ``budget``.

    An explicit ``spec.upper_cutoff`` is honoured but must meet the budget.
    """
    if spec.upper_cutoff is not None:
        t = spec.upper_cutoff
        if tail_bound(t) > budget:
            raise ConvergenceError(f"tail bound beyond upper_cutoff={t} exceeds tolerance/2")
        return t
    t = start
    for _ in range(200):
        if tail_bound(t) <= budget:
            return t
        t *= 2
    raise ConvergenceError("could not find an upper cutoff meeting the tail tolerance")


def _result(ctx, value, bound, spec: QuadratureSpec, magnitude):
    bound = bound + ROUNDING_ULPS * ctx.eps * (magnitude + abs(value))
    return EvalResult(value, bound, "quadrature", spec.precision.target_digits)


def gamma_k_integral(x, k, spec: QuadratureSpec = QuadratureSpec()) -> EvalResult:
    """Gamma_k(x) = int_0^inf t^(x-1) exp(-t^k / k) dt.

    On (0, 1) the substitution u = t^x removes the endpoint singularity:
    int_0^1 ... dt = (1/x) int_0^1 exp(-u^(k/x) / k) du.
    The tail beyond T equals k^(x/k - 1) Gamma(x/k, T^k/k) exactly and is
    used only as a bound.
    """
    ctx = spec.precision.ctx
    x = _positive(ctx, "x", x)
    k = _positive(ctx, "k", k)
    ratio = k / x

    def head(u):
        return ctx.exp(-(u**ratio) / k) / x

    def body(t):
        return ctx.exp((x - 1) * ctx.ln(t) - t**k / k)

    v0, e0, mag0 = _adaptive(ctx, head, [ctx.zero, ctx.one], spec, lambda tot: spec.tolerance(tot) / 4)

    def tail(t):
        t = ctx.mpf(t)
        return k ** (x / k - 1) * ctx.gammainc(x / k, t**k / k)

    peak = (x - 1) ** (1 / k) if x > 1 else ctx.one
    # first pass: integrate up to a generous multiple of the peak
    t0 = max(ctx.mpf(2), 4 * peak)
    pts = _geometric(ctx, ctx.one, t0, factor=2)
    v1, e1, mag1 = _adaptive(ctx, body, pts, spec, lambda tot: spec.tolerance(tot + v0) / 4)
    estimate = v0 + v1
    budget = spec.tolerance(estimate) / 2
    cutoff = _choose_cutoff(spec, t0, tail, budget)
    cutoff = ctx.mpf(cutoff)
    v2 = e2 = mag2 = ctx.zero
    if cutoff > t0:
        pts = _geometric(ctx, t0, cutoff, factor=2)
        v2, e2, mag2 = _adaptive(ctx, body, pts, spec, lambda tot: spec.tolerance(estimate) / 4)
    elif cutoff < t0:
        # explicit cutoff below the first pass: redo the body on [1, cutoff]
        pts = _geometric(ctx, ctx.one, cutoff, factor=2)
        v1, e1, mag1 = _adaptive(ctx, body, pts, spec, lambda tot: spec.tolerance(tot + v0) / 4)
    value = v0 + v1 + v2
    bound = e0 + e1 + e2 + tail(cutoff)
    return _result(ctx, value, bound, spec, mag0 + mag1 + mag2)


def gamma_k_limit(x, k, n: int, working_digits: int = 34):
    """n-th term n! k^n (nk)^(x/k - 1) / (x)_{n,k} of the limit defining Gamma_k.

    Converges like O(1/n); useful only as a low-precision sanity check.
    """
    from .precision import context

    ctx = context(working_digits)
    x = _positive(ctx, "x", x)
    k = _positive(ctx, "k", k)
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    log_poch = ctx.fsum(ctx.ln(x + j * k) for j in range(n))
    log_term = ctx.loggamma(n + 1) + n * ctx.ln(k) + (x / k - 1) * ctx.ln(n * k) - log_poch
    return ctx.exp(log_term)


def digamma_k_integral(x, k, spec: QuadratureSpec = QuadratureSpec(), form: str = "exp") -> EvalResult:
    """psi_k(x) from its integral representation.

    ``form="exp"`` integrates (e^{-kt} - e^{-xt}) / (1 - e^{-kt}) over (0, inf)
    with the numerator and denominator in expm1 form, so there is no
    cancellation near t = 0.  ``form="unit"`` integrates the equivalent
    (t^{k-1} - t^{x-1}) / (1 - t^k) over (0, 1) after substituting t = u^p
    with p * min(x, k) >= 1, which leaves a bounded integrand at u = 0.
    """
    ctx = spec.precision.ctx
    prec = spec.precision
    x = _positive(ctx, "x", x)
    k = _positive(ctx, "k", k)
    const = (ctx.ln(k) - prec.euler) / k
    if form == "unit":

        p = max(1, int(ctx.ceil(1 / min(x, k))))

        def g(u):
            lt = p * ctx.ln(u)
            return p * (ctx.expm1(k * lt) - ctx.expm1(x * lt)) / (-u * ctx.expm1(k * lt))

        v, e, mag = _adaptive(ctx, g, [ctx.zero, ctx.mpf(0.5), ctx.one], spec, lambda tot: spec.tolerance(tot))
        return _result(ctx, const + v, e, spec, mag + abs(const))
    if form != "exp":
        raise ValueError(f"unknown form {form!r}; expected 'exp' or 'unit'")

    def f(t):
        return (ctx.expm1(-k * t) - ctx.expm1(-x * t)) / -ctx.expm1(-k * t)

    def tail(t):
        t = ctx.mpf(t)
        return (ctx.exp(-k * t) / k + ctx.exp(-x * t) / x) / -ctx.expm1(-k * t)

    # rough magnitude of psi_k(x), used only to scale the relative tolerance
    size = abs(const) + abs(ctx.ln(x / k)) / k + 1 / x
    rate = min(x, k)
    budget = spec.tolerance(size) / 2
    cutoff = ctx.mpf(_choose_cutoff(spec, 4 / rate, tail, budget))
    lo = ctx.mpf(0.125) / max(x, k)
    pts = [ctx.zero] + _geometric(ctx, lo, cutoff)
    v, e, mag = _adaptive(ctx, f, pts, spec, lambda tot: spec.tolerance(tot + const) / 2)
    return _result(ctx, const + v, e + tail(cutoff), spec, mag + abs(const))


def polygamma_k_integral(r: int, x, k, spec: QuadratureSpec = QuadratureSpec()) -> EvalResult:
    """psi_k^(r)(x) = (-1)^(r+1) int_0^inf t^r e^{-xt} / (1 - e^{-kt}) dt.

    Near t = 0 the integrand behaves like t^(r-1)/k.  On (0, eps) with
    eps = 1e-6 / max(k, x) it is replaced by its first-order expansion
    t^(r-1)/k * (1 + (k/2 - x) t); the neglected part is at most
    t^(r+1) (x^2 + x k + k^2) / k, whose integral joins the error bound.
    Beyond T the tail is at most Gamma(r+1, xT) / (x^(r+1) (1 - e^{-kT})).
    """
    if int(r) != r or r < 1:
        raise OrderError(f"r must be an integer >= 1, got {r!r}")
    r = int(r)
    ctx = spec.precision.ctx
    x = _positive(ctx, "x", x)
    k = _positive(ctx, "k", k)
    eps_split = ctx.mpf(EPS_SPLIT) / max(k, x)
    lead = (eps_split**r / r + (k / 2 - x) * eps_split ** (r + 1) / (r + 1)) / k
    lead_err = eps_split ** (r + 2) * (x * x + x * k + k * k) / ((r + 2) * k)

    def f(t):
        return t**r * ctx.exp(-x * t) / -ctx.expm1(-k * t)

    def tail(t):
        t = ctx.mpf(t)
        return ctx.gammainc(r + 1, x * t) / (x ** (r + 1) * -ctx.expm1(-k * t))

    # the integral exceeds r!/x^(r+1), so the tolerance is known up front
    floor = ctx.factorial(r) / x ** (r + 1)
    budget = spec.tolerance(floor) / 2
    cutoff = ctx.mpf(_choose_cutoff(spec, (r + 4) / x, tail, budget))
    pts = _geometric(ctx, eps_split, cutoff, factor=8)
    v, e, mag = _adaptive(ctx, f, pts, spec, lambda tot: spec.tolerance(tot) / 4)
    value = (-1) ** (r + 1) * (lead + v)
    return _result(ctx, value, e + lead_err + tail(cutoff), spec, mag + lead)


def power_kernel_integral(r: int, x, spec: QuadratureSpec = QuadratureSpec()) -> EvalResult:
    """int_0^inf t^r e^{-xt} dt by quadrature; should equal r!/x^(r+1)."""
    if int(r) != r or r < 0:
        raise OrderError(f"r must be a nonnegative integer, got {r!r}")
    r = int(r)
    ctx = spec.precision.ctx
    x = _positive(ctx, "x", x)

    def f(t):
        return t**r * ctx.exp(-x * t)

    def tail(t):
        return ctx.gammainc(r + 1, x * ctx.mpf(t)) / x ** (r + 1)

    # r = 0 has no interior peak; t^r e^{-xt} >= ... lower-bound the integral by
    # its value on [0, (r+1)/x] to fix the tolerance before integrating
    peak = max(ctx.mpf(r), ctx.one) / x
    v0, e0, m0 = _adaptive(ctx, f, [ctx.zero, peak], spec, lambda tot: spec.tolerance(tot) / 4)
    cutoff = ctx.mpf(_choose_cutoff(spec, 2 * peak, tail, spec.tolerance(v0) / 2))
    pts = _geometric(ctx, peak, cutoff, factor=2)
    v1, e1, m1 = _adaptive(ctx, f, pts, spec, lambda tot: spec.tolerance(v0) / 4)
    return _result(ctx, v0 + v1, e0 + e1 + tail(cutoff), spec, m0 + m1)
