"""Grid certification of the sign claims made about the ratios F, G and 1/G.

With ``F(x) = Gamma_k(mx) / (x^(m-1) Gamma_k(x)^m)`` and
``G(x) = Gamma_k(mx) / Gamma_k(x)^m``, every claim is encoded as a quantity
that should be strictly positive at each admissible point:

* the alternating log-derivatives ``s_r(x) = (-1)^r (ln h)^(r)(x)`` for
  h = F or 1/G (logarithmic complete monotonicity, one order at a time);
* the slacks of the two-sided bounds on G and on the k-trigamma averages;
* the exponential-sum difference used to prove positivity of those integrands.

A point is *certified positive* when value >= 10 * bound, *certified
negative* when value <= -10 * bound, and indeterminate otherwise.
Indeterminate points are re-evaluated once at twice the working digits.
A certificate FAILs when any point is certified negative, PASSes when all
are certified positive, and is INDETERMINATE otherwise.  Nothing about the
expected outcome is hard-coded: the certifier reports what it computes.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import partial
from typing import Any, Optional

from .errors import DomainError, GridDomainError, OrderError
from .identities import SAFETY, check_lemma3
from .kcore import EvalResult, KParams, ln_gamma_k, psi_k
from .precision import DEFAULT_PRECISION, ROUNDING_ULPS, PrecisionConfig

__all__ = [
    "CLAIMS",
    "COR1_EXCLUSION",
    "Certificate",
    "Claim",
    "ClaimId",
    "DEFAULT_GRID",
    "GridSpec",
    "LEMMA3_GRID",
    "RatioSpec",
    "Verdict",
    "Witness",
    "certify_claim",
    "certify_sign_pattern",
    "check_inequality",
    "classify",
    "finite_diff_log_deriv",
    "log_deriv",
    "log_deriv_F",
    "log_deriv_invG",
    "log_ratio",
    "ratio_F",
    "ratio_G",
    "restrict_to_claim",
    "sign_quantity",
]

#: Relative half-width of the neighbourhood of x = k dropped for the G-bound claims (cor1-*).
COR1_EXCLUSION = 1e-6


class ClaimId(str, Enum):
    THM1A_LCM_F = "thm1a"
    THM1B_LCM_INVG = "thm1b"
    COR1_LOWER = "cor1-lower"
    COR1_UPPER = "cor1-upper"
    COR1_REVERSED = "cor1-reversed"
    COR1_REVERSED_UPPER = "cor1-reversed-upper"
    COR2 = "cor2"
    COR3_LOWER = "cor3-lower"
    COR3_UPPER = "cor3-upper"
    LEMMA3 = "lemma3"


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INDETERMINATE = "INDETERMINATE"


@dataclass(frozen=True)
class Claim:
    id: ClaimId
    statement: str
    domain: str  # "positive" | "above_k" | "below_k" | "t"


CLAIMS = {
    c.id: c
    for c in (
        Claim(ClaimId.THM1A_LCM_F, "(-1)^r (ln F)^(r)(x) > 0 for x > 0", "positive"),
        Claim(ClaimId.THM1B_LCM_INVG, "(-1)^r (ln 1/G)^(r)(x) > 0 for x > 0", "positive"),
        Claim(ClaimId.COR1_LOWER, "G(x) > k^(m-1) (m-1)! for x > k", "above_k"),
        Claim(ClaimId.COR1_UPPER, "G(x) < x^(m-1) (m-1)! for x > k", "above_k"),
        Claim(ClaimId.COR1_REVERSED, "G(x) < k^(m-1) (m-1)! for 0 < x < k", "below_k"),
        Claim(ClaimId.COR1_REVERSED_UPPER, "G(x) > x^(m-1) (m-1)! for 0 < x < k", "below_k"),
        Claim(ClaimId.COR2, "G(x) < x^(m-1) / m for x > 0", "positive"),
        Claim(
            ClaimId.COR3_LOWER,
            "(1/m) sum_{s<m} psi_k'(x + sk/m) < psi_k'(x) for x > 0",
            "positive",
        ),
        Claim(
            ClaimId.COR3_UPPER,
            "psi_k'(x) < (1/m) sum_{s<m} psi_k'(x + sk/m) + (m-1)/(m x^2) for x > 0",
            "positive",
        ),
        Claim(ClaimId.LEMMA3, "sum_{s=1}^n e^(-st/(n+1)) - n e^(-t) > 0 for t > 0", "t"),
    )
}

SIGN_CLAIMS = {ClaimId.THM1A_LCM_F: "F", ClaimId.THM1B_LCM_INVG: "invG"}


@dataclass(frozen=True)
class RatioSpec:
    which: str
    params: KParams

    def __post_init__(self):
        if self.which not in ("F", "G", "invG"):
            raise ValueError(f"which must be 'F', 'G' or 'invG', got {self.which!r}")


@dataclass(frozen=True)
class GridSpec:
    """Deterministic sampling plan in x (or t for the exponential-sum claim).

    ``window`` keeps only points strictly inside (lo, hi); it is how grids are
    split around x = k without moving the remaining points.
    """

    x_min: float = 1e-3
    x_max: float = 1e3
    points: int = 200
    spacing: str = "log"
    extra_points: tuple = ()
    window: Optional[tuple] = None

    def __post_init__(self):
        if not (0 < self.x_min < self.x_max) or not math.isfinite(self.x_max):
            raise ValueError(f"need 0 < x_min < x_max, got {self.x_min}, {self.x_max}")
        if int(self.points) != self.points or self.points < 2:
            raise ValueError(f"points must be an integer >= 2, got {self.points}")
        if self.spacing not in ("log", "linear"):
            raise ValueError(f"spacing must be 'log' or 'linear', got {self.spacing!r}")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``min:max:points:log|lin``."""
        try:
            lo, hi, n, kind = text.split(":")
            spacing = {"log": "log", "lin": "linear", "linear": "linear"}[kind]
            return cls(float(lo), float(hi), int(n), spacing)
        except (ValueError, KeyError) as exc:
            raise ValueError(f"bad grid {text!r}; expected min:max:points:log|lin") from exc

    def values(self) -> list[float]:
        n = self.points
        if self.spacing == "log":
            a, b = math.log(self.x_min), math.log(self.x_max)
            xs = [math.exp(a + (b - a) * i / (n - 1)) for i in range(n)]
        else:
            xs = [self.x_min + (self.x_max - self.x_min) * i / (n - 1) for i in range(n)]
        xs[0], xs[-1] = self.x_min, self.x_max
        xs = sorted(set(xs) | {float(p) for p in self.extra_points})
        if self.window is not None:
            lo, hi = self.window
            xs = [x for x in xs if lo < x < hi]
        return xs

    def to_dict(self) -> dict:
        out = {
            "x_min": self.x_min,
            "x_max": self.x_max,
            "points": self.points,
            "spacing": self.spacing,
        }
        if self.extra_points:
            out["extra_points"] = list(self.extra_points)
        if self.window is not None:
            out["window"] = [self.window[0], self.window[1] if math.isfinite(self.window[1]) else "inf"]
        return out


DEFAULT_GRID = GridSpec()
IDENTITY_GRID = GridSpec(1e-2, 1e2, 50)
LEMMA3_GRID = GridSpec(1e-3, 1e2, 100)


@dataclass(frozen=True)
class Witness:
    x: float
    value: Any
    error_bound: Any
    margin: Any  # value / error_bound; +-inf when the bound is zero


@dataclass
class Certificate:
    claim_id: ClaimId
    params: Optional[KParams]
    grid: GridSpec
    verdict: Verdict
    witnesses: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    order: Optional[int] = None  # derivative order r for sign-pattern claims
    n: Optional[int] = None  # exponential-sum claim only


# -- ratios and their log-derivatives ---------------------------------------


def _prec(precision):
    return DEFAULT_PRECISION if precision is None else precision


def _combine(values, bounds, prec: PrecisionConfig, label="reduction") -> EvalResult:
    ctx = prec.ctx
    value = ctx.fsum(values)
    bound = ctx.fsum(bounds) + ROUNDING_ULPS * prec.eps * ctx.fsum(abs(v) for v in values)
    return EvalResult(value, bound, label, prec.target_digits)


def log_ratio(which: str, x, params: KParams, precision: PrecisionConfig | None = None) -> EvalResult:
    """ln F(x), ln G(x) or ln(1/G)(x), assembled from ln Gamma_k."""
    RatioSpec(which, params)
    prec = _prec(precision)
    ctx = prec.ctx
    x = ctx.mpf(x)
    k, m = ctx.mpf(params.k), params.m
    big = ln_gamma_k(m * x, k, precision=prec)
    small = ln_gamma_k(x, k, precision=prec)
    values = [big.value, -m * small.value]
    bounds = [big.abs_error_bound, m * small.abs_error_bound]
    if which == "F":
        values.append(-(m - 1) * ctx.ln(x))
    res = _combine(values, bounds, prec)
    if which == "invG":
        res = replace(res, value=-res.value)
    return res


def _exp_result(log_res: EvalResult, prec: PrecisionConfig) -> EvalResult:
    ctx = prec.ctx
    value = ctx.exp(log_res.value)
    bound = value * ctx.expm1(log_res.abs_error_bound) + ROUNDING_ULPS * prec.eps * value
    return EvalResult(value, bound, log_res.backend, prec.target_digits)


def ratio_F(x, params: KParams, precision: PrecisionConfig | None = None) -> EvalResult:
    prec = _prec(precision)
    return _exp_result(log_ratio("F", x, params, prec), prec)


def ratio_G(x, params: KParams, precision: PrecisionConfig | None = None) -> EvalResult:
    prec = _prec(precision)
    return _exp_result(log_ratio("G", x, params, prec), prec)


def log_deriv(which: str, r: int, x, params: KParams, precision: PrecisionConfig | None = None) -> EvalResult:
    """r-th derivative of ln F, ln G or ln(1/G) at x, in closed form.

    (ln G)^(r)(x) = m^r psi_k^(r-1)(mx) - m psi_k^(r-1)(x), and ln F adds the
    derivative of -(m-1) ln x.  Obtained by direct differentiation, without
    any multiplication formula.
    """
    RatioSpec(which, params)
    if int(r) != r or r < 1:
        raise OrderError(f"r must be an integer >= 1, got {r!r}")
    r = int(r)
    prec = _prec(precision)
    ctx = prec.ctx
    x = ctx.mpf(x)
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    k, m = ctx.mpf(params.k), params.m
    a = psi_k(r - 1, m * x, k, precision=prec)
    b = psi_k(r - 1, x, k, precision=prec)
    mr = ctx.mpf(m) ** r
    values = [mr * a.value, -m * b.value]
    bounds = [mr * a.abs_error_bound, m * b.abs_error_bound]
    if which == "F":
        values.append((-1) ** r * (m - 1) * ctx.factorial(r - 1) / x**r)
    res = _combine(values, bounds, prec)
    if which == "invG":
        res = replace(res, value=-res.value)
    return res


def log_deriv_F(r: int, x, params: KParams, precision: PrecisionConfig | None = None) -> EvalResult:
    return log_deriv("F", r, x, params, precision)


def log_deriv_invG(r: int, x, params: KParams, precision: PrecisionConfig | None = None) -> EvalResult:
    return log_deriv("invG", r, x, params, precision)


def finite_diff_log_deriv(which: str, r: int, x, params: KParams, h, precision: PrecisionConfig | None = None):
    """r-th central difference of ln F (or ln 1/G) with step h; error O(h^2)."""
    if which not in ("F", "invG", "G"):
        raise ValueError(f"which must be 'F', 'G' or 'invG', got {which!r}")
    if int(r) != r or r < 1:
        raise OrderError(f"r must be an integer >= 1, got {r!r}")
    r = int(r)
    prec = _prec(precision)
    ctx = prec.ctx
    x, h = ctx.mpf(x), ctx.mpf(h)
    if not h > 0:
        raise DomainError(f"h must be positive, got {h}")
    if not x - r * h / 2 > 0:
        raise DomainError(f"stencil x - r h/2 = {x - r * h / 2} leaves (0, inf)")
    total = ctx.fsum(
        (-1) ** j * math.comb(r, j) * log_ratio(which, x + (ctx.mpf(r) / 2 - j) * h, params, prec).value
        for j in range(r + 1)
    )
    return total / h**r


def sign_quantity(which: str, r: int, x, params: KParams, precision: PrecisionConfig | None = None) -> EvalResult:
    """(-1)^r (ln h)^(r)(x); order 0 is ln h(x) itself."""
    if r == 0:
        return log_ratio(which, x, params, precision)
    res = log_deriv(which, r, x, params, precision)
    return res if r % 2 == 0 else replace(res, value=-res.value)


# -- inequalities ------------------------------------------------------------


def _cor1_bounds(ctx, x, k, m):
    lower = (m - 1) * ctx.ln(k) + ctx.loggamma(m)
    upper = (m - 1) * ctx.ln(x) + ctx.loggamma(m)
    return lower, upper


def _slack(claim: ClaimId, x, params: KParams, prec: PrecisionConfig) -> EvalResult:
    ctx = prec.ctx
    x = ctx.mpf(x)
    k, m = ctx.mpf(params.k), params.m
    if claim in (ClaimId.COR3_LOWER, ClaimId.COR3_UPPER):
        base = psi_k(1, x, k, precision=prec)
        shifted = [psi_k(1, x + s * k / m, k, precision=prec) for s in range(m)]
        sign = 1 if claim is ClaimId.COR3_LOWER else -1
        values = [sign * base.value] + [-sign * p.value / m for p in shifted]
        bounds = [base.abs_error_bound] + [p.abs_error_bound / m for p in shifted]
        if claim is ClaimId.COR3_UPPER:
            values.append(ctx.mpf(m - 1) / (m * x * x))
        return _combine(values, bounds, prec)
    ln_g = log_ratio("G", x, params, prec)
    lower, upper = _cor1_bounds(ctx, x, k, m)
    if claim is ClaimId.COR1_LOWER:
        values = [ln_g.value, -lower]
    elif claim is ClaimId.COR1_REVERSED:
        values = [lower, -ln_g.value]
    elif claim is ClaimId.COR1_UPPER:
        values = [upper, -ln_g.value]
    elif claim is ClaimId.COR1_REVERSED_UPPER:
        values = [ln_g.value, -upper]
    elif claim is ClaimId.COR2:
        values = [(m - 1) * ctx.ln(x) - ctx.ln(m), -ln_g.value]
    else:
        raise ValueError(f"{claim} is not an inequality claim")
    return _combine(values, [ln_g.abs_error_bound], prec)


def classify(q: EvalResult) -> Verdict:
    if q.value > 0 and q.value >= SAFETY * q.abs_error_bound:
        return Verdict.PASS
    if q.value < 0 and q.value <= -SAFETY * q.abs_error_bound:
        return Verdict.FAIL
    return Verdict.INDETERMINATE


def _in_domain(claim: ClaimId, x, k) -> bool:
    dom = CLAIMS[claim].domain
    if dom == "above_k":
        return x > k * (1 + COR1_EXCLUSION)
    if dom == "below_k":
        return 0 < x < k * (1 - COR1_EXCLUSION)
    return x > 0


def check_inequality(claim: ClaimId, x, params: KParams, precision: PrecisionConfig | None = None):
    """Signed slack of an inequality claim at x (positive means it holds).

    Returns ``(slack, verdict)`` where the verdict classifies the single point.
    """
    claim = ClaimId(claim)
    if claim in SIGN_CLAIMS or claim is ClaimId.LEMMA3:
        raise ValueError(f"{claim.value} is not an inequality claim")
    prec = _prec(precision)
    if not float(x) > 0:
        raise DomainError(f"x must be positive, got {x}")
    if CLAIMS[claim].domain in ("above_k", "below_k") and not _in_domain(claim, float(x), float(params.k)):
        raise DomainError(f"x={x} is outside the domain of {claim.value} (k={params.k})")
    q = _slack(claim, x, params, prec)
    return q, classify(q)


# -- grid sweeps -------------------------------------------------------------


def restrict_to_claim(grid: GridSpec, claim: ClaimId, k) -> GridSpec:
    """Window the grid to the claim's domain, dropping a neighbourhood of x = k."""
    dom = CLAIMS[ClaimId(claim)].domain
    k = float(k)
    if dom == "above_k":
        return replace(grid, window=(k * (1 + COR1_EXCLUSION), math.inf))
    if dom == "below_k":
        return replace(grid, window=(0.0, k * (1 - COR1_EXCLUSION)))
    return grid


def _quantity(claim: ClaimId, params, order, n, precision, x) -> EvalResult:
    if claim in SIGN_CLAIMS:
        return sign_quantity(SIGN_CLAIMS[claim], order, x, params, precision)
    if claim is ClaimId.LEMMA3:
        out = check_lemma3(n, x, precision)
        return EvalResult(out.residual, out.threshold / SAFETY, "direct", precision.target_digits)
    return _slack(claim, x, params, precision)


def _point(claim, params, order, n, precision, x):
    q = _quantity(claim, params, order, n, precision, x)
    verdict = classify(q)
    retried = False
    if verdict is Verdict.INDETERMINATE:
        retried = True
        q = _quantity(claim, params, order, n, precision.doubled(), x)
        verdict = classify(q)
    return x, q, verdict, retried


def _point_packed(claim, params, order, n, precision, x):
    # private-context mpf classes do not pickle; ship the raw mantissa tuples
    x, q, verdict, retried = _point(claim, params, order, n, precision, x)
    return x, (q.value._mpf_, q.abs_error_bound._mpf_, q.backend, q.digits_requested), verdict, retried


def _unpack(ctx, row):
    x, (v, b, backend, digits), verdict, retried = row
    return x, EvalResult(ctx.make_mpf(v), ctx.make_mpf(b), backend, digits), verdict, retried


def _margin(q: EvalResult):
    if q.abs_error_bound == 0:
        return math.inf if q.value > 0 else -math.inf
    return q.value / q.abs_error_bound


def _sweep(claim, params, order, n, grid: GridSpec, precision, workers) -> Certificate:
    xs = grid.values()
    if not xs:
        raise GridDomainError(f"grid has no points inside the domain of {claim.value}")
    if workers and workers > 1:
        job = partial(_point_packed, claim, params, order, n, precision)
        ctx = precision.doubled().ctx
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(xs) // (4 * workers))
            rows = [_unpack(ctx, row) for row in pool.map(job, xs, chunksize=chunk)]
    else:
        job = partial(_point, claim, params, order, n, precision)
        rows = [job(x) for x in xs]
    counts = {v: 0 for v in Verdict}
    for _, _, v, _ in rows:
        counts[v] += 1
    if counts[Verdict.FAIL]:
        verdict = Verdict.FAIL
    elif counts[Verdict.INDETERMINATE]:
        verdict = Verdict.INDETERMINATE
    else:
        verdict = Verdict.PASS
    if verdict is Verdict.PASS:
        tight = min(rows, key=lambda row: _margin(row[1]))
        chosen = [tight]
    else:
        chosen = [row for row in rows if row[2] is verdict]
    witnesses = [Witness(x, q.value, q.abs_error_bound, _margin(q)) for x, q, _, _ in sorted(chosen, key=lambda row: row[0])]
    stats = {
        "points": len(rows),
        "pass": counts[Verdict.PASS],
        "fail": counts[Verdict.FAIL],
        "indeterminate": counts[Verdict.INDETERMINATE],
        "retried": sum(1 for row in rows if row[3]),
        "working_digits": precision.working_digits,
    }
    return Certificate(claim, params, grid, verdict, witnesses, stats, order, n)


def certify_sign_pattern(
    claim: ClaimId,
    params: KParams,
    r_max: int,
    grid: GridSpec = DEFAULT_GRID,
    *,
    include_r0: bool = False,
    precision: PrecisionConfig | None = None,
    workers: int = 1,
) -> list[Certificate]:
    """One certificate per order r = 1..r_max (0..r_max with ``include_r0``).

    Order 0 asks ln h >= 0 and is off by default: for F it fails for a trivial
    reason (F(0+) = 1/m < 1) unrelated to the alternating-sign structure.
    """
    claim = ClaimId(claim)
    if claim not in SIGN_CLAIMS:
        raise ValueError(f"{claim.value} is not a sign-pattern claim")
    if int(r_max) != r_max or r_max < 1:
        raise OrderError(f"r_max must be an integer >= 1, got {r_max!r}")
    prec = _prec(precision)
    certs = []
    for r in range(0 if include_r0 else 1, int(r_max) + 1):
        p = replace(params, r=max(r, 1))
        certs.append(_sweep(claim, p, r, None, grid, prec, workers))
    return certs


def certify_claim(
    claim: ClaimId,
    params: KParams | None,
    grid: GridSpec | None = None,
    *,
    n: int | None = None,
    precision: PrecisionConfig | None = None,
    workers: int = 1,
) -> Certificate:
    """Certificate for one claim over one grid.

    Sign-pattern claims use ``params.r`` as the order.  The exponential-sum
    claim takes ``n`` and treats the grid as t values; ``params`` is ignored.
    Every grid point must lie in the claim's domain (see
    :func:`restrict_to_claim`).
    """
    claim = ClaimId(claim)
    prec = _prec(precision)
    if claim is ClaimId.LEMMA3:
        n = 1 if n is None else n
        if int(n) != n or n < 1:
            raise DomainError(f"n must be a positive integer, got {n!r}")
        return _sweep(claim, None, None, int(n), grid or LEMMA3_GRID, prec, workers)
    if params is None:
        raise ValueError(f"{claim.value} needs KParams")
    grid = grid or restrict_to_claim(DEFAULT_GRID, claim, params.k)
    k = float(params.k)
    bad = [x for x in grid.values() if not _in_domain(claim, x, k)]
    if bad:
        raise GridDomainError(
            f"{len(bad)} grid point(s) outside the domain of {claim.value} for k={params.k}, e.g. x={bad[0]}"
        )
    order = params.r if claim in SIGN_CLAIMS else None
    return _sweep(claim, params, order, None, grid, prec, workers)
