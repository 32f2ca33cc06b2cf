"""Command-line front end.

    kgamma eval gammak --k 2 --x 6
    kgamma identity euler-product --k 1 --m 2
    kgamma certify thm1b --k 1 --m 2 --rmax 6
    kgamma sweep --claims thm1b --k 0.5,1,2,3 --m 2,3,4,5 --rmax 6

Numeric flags accept comma-separated lists (and ``a..b`` integer ranges for
--n, --m, --order); every command runs over the Cartesian product.
Exit codes: 0 all PASS, 1 any FAIL, 2 INDETERMINATE but no FAIL,
3 usage or domain error.
"""
from __future__ import annotations

import argparse
import itertools
import sys
from pathlib import Path

from . import __version__
from .certifier import (
    DEFAULT_GRID,
    LEMMA3_GRID,
    ClaimId,
    GridSpec,
    certify_claim,
    certify_sign_pattern,
    log_deriv,
    ratio_F,
    ratio_G,
    restrict_to_claim,
)
from .errors import KGammaError, UsageError
from .identities import (
    check_digamma_multiplication,
    check_euler_product,
    check_gauss_multiplication,
    check_lemma3,
    check_polygamma_multiplication,
    check_power_kernel,
    check_recurrence,
)
from .kcore import BACKENDS, KParams, digamma_k, gamma_k, ln_gamma_k, polygamma_k
from .precision import PrecisionConfig
from .report import EXIT_USAGE, Report, certificate_record, error_record, eval_record, identity_record

EVAL_SELECTORS = ("gammak", "lngammak", "digammak", "polygammak", "ratioF", "ratioG", "logderivF", "logderivInvG")
IDENTITY_SELECTORS = (
    "recurrence",
    "gauss-mult",
    "euler-product",
    "polygamma-mult",
    "digamma-mult",
    "lemma3",
    "power-kernel",
)
CLAIM_ALIASES = {
    "cor1": [ClaimId.COR1_LOWER, ClaimId.COR1_UPPER, ClaimId.COR1_REVERSED, ClaimId.COR1_REVERSED_UPPER],
    "cor3": [ClaimId.COR3_LOWER, ClaimId.COR3_UPPER],
}
CLAIM_SELECTORS = tuple(c.value for c in ClaimId) + tuple(CLAIM_ALIASES)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    out = []
    try:
        for part in text.split(","):
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            elif part.strip():
                out.append(int(part))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected integers or a..b ranges, got {text!r}") from exc
    return out


def _grid(text: str) -> GridSpec:
    try:
        return GridSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--k", type=_floats, help="scale parameter(s) k > 0")
    common.add_argument("--m", type=_ints, help="multiplication order(s) m >= 2")
    common.add_argument("--x", type=_floats, help="argument(s) x > 0")
    common.add_argument("--order", type=_ints, help="derivative order(s) r")
    common.add_argument("--rmax", type=int, default=6, help="highest order for sign-pattern claims (default 6)")
    common.add_argument("--n", type=_ints, help="exponential-sum index n (list or a..b)")
    common.add_argument("--t", type=_floats, help="exponential-sum argument(s) t > 0")
    common.add_argument("--grid", type=_grid, help="min:max:points:log|lin")
    common.add_argument("--backend", choices=BACKENDS, default="reduction")
    common.add_argument("--digits", type=int, default=34, help="working decimal digits (default 34)")
    common.add_argument("--target-digits", type=int, default=16, help="digits written to reports (default 16)")
    common.add_argument("--include-r0", action="store_true", help="also certify order 0 (ln h >= 0)")
    common.add_argument("--workers", type=int, default=1, help="worker processes for grid sweeps")
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")

    parser = _Parser(prog="kgamma", description="k-gamma evaluation and claim certification")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("eval", parents=[common], help="evaluate one function").add_argument("selector", choices=EVAL_SELECTORS)
    sub.add_parser("identity", parents=[common], help="identity residual checks").add_argument(
        "selector", choices=IDENTITY_SELECTORS
    )
    sub.add_parser("certify", parents=[common], help="certify one claim").add_argument("selector", choices=CLAIM_SELECTORS)
    sw = sub.add_parser("sweep", parents=[common], help="certify several claims over k, m lists")
    sw.add_argument("--claims", required=True, help="comma-separated claim selectors")
    return parser


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} {getattr(args, 'selector', '')} needs --" + ", --".join(missing))


def _config(args) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if isinstance(value, GridSpec):
            value = value.to_dict()
        elif isinstance(value, Path):
            value = str(value)
        out[key] = value
    return out


def _xs(args) -> list[float]:
    if args.x is not None:
        return args.x
    if args.grid is not None:
        return args.grid.values()
    raise UsageError(f"{args.command} {args.selector} needs --x or --grid")


def _guarded(results, fn, inputs):
    try:
        results.append(fn())
    except KGammaError as exc:
        results.append(error_record(exc, inputs))


def run_eval(args) -> Report:
    prec = PrecisionConfig(args.digits, args.target_digits)
    sel = args.selector
    _require(args, "k", "x")
    if sel in ("polygammak", "logderivF", "logderivInvG"):
        _require(args, "order")
    if sel in ("ratioF", "ratioG", "logderivF", "logderivInvG"):
        _require(args, "m")
    orders = args.order or [None]
    ms = args.m or [None]
    results = []
    for k, m, r, x in itertools.product(args.k, ms, orders, args.x):
        inputs = {key: v for key, v in (("k", k), ("m", m), ("order", r), ("x", x)) if v is not None}

        def compute(k=k, m=m, r=r, x=x):
            if sel == "gammak":
                res = gamma_k(x, k, args.backend, prec)
            elif sel == "lngammak":
                res = ln_gamma_k(x, k, args.backend, prec)
            elif sel == "digammak":
                res = digamma_k(x, k, args.backend, prec)
            elif sel == "polygammak":
                res = polygamma_k(r, x, k, args.backend, prec)
            elif sel == "ratioF":
                res = ratio_F(x, KParams(k, m), prec)
            elif sel == "ratioG":
                res = ratio_G(x, KParams(k, m), prec)
            else:
                res = log_deriv("F" if sel == "logderivF" else "invG", r, x, KParams(k, m), prec)
            return eval_record(sel, inputs, res, prec.target_digits)

        _guarded(results, compute, inputs)
    return Report.build(_config(args), results)


def run_identity(args) -> Report:
    prec = PrecisionConfig(args.digits, args.target_digits)
    sel = args.selector
    digits = prec.target_digits
    results = []
    jobs = []
    if sel == "lemma3":
        _require(args, "n")
        ts = args.t if args.t is not None else (args.grid or LEMMA3_GRID).values()
        jobs = [({"n": n, "t": t}, lambda n=n, t=t: check_lemma3(n, t, prec)) for n in args.n for t in ts]
    elif sel == "power-kernel":
        _require(args, "order", "x")
        from .oracles import QuadratureSpec

        spec = QuadratureSpec(working_digits=prec.working_digits)
        jobs = [({"r": r, "x": x}, lambda r=r, x=x: check_power_kernel(r, x, spec)) for r in args.order for x in args.x]
    elif sel == "euler-product":
        _require(args, "k", "m")
        jobs = [
            ({"k": k, "m": m}, lambda k=k, m=m: check_euler_product(k, m, args.backend, prec))
            for k in args.k
            for m in args.m
        ]
    elif sel == "recurrence":
        _require(args, "k")
        jobs = [
            ({"x": x, "k": k}, lambda x=x, k=k: check_recurrence(x, k, args.backend, prec))
            for k in args.k
            for x in _xs(args)
        ]
    elif sel in ("gauss-mult", "digamma-mult"):
        _require(args, "k", "m")
        fn = check_gauss_multiplication if sel == "gauss-mult" else check_digamma_multiplication
        jobs = [
            ({"x": x, "k": k, "m": m}, lambda x=x, k=k, m=m, fn=fn: fn(x, k, m, args.backend, prec))
            for k in args.k
            for m in args.m
            for x in _xs(args)
        ]
    else:
        _require(args, "order", "k", "m")
        jobs = [
            (
                {"r": r, "x": x, "k": k, "m": m},
                lambda r=r, x=x, k=k, m=m: check_polygamma_multiplication(r, x, k, m, args.backend, prec),
            )
            for r in args.order
            for k in args.k
            for m in args.m
            for x in _xs(args)
        ]
    for inputs, job in jobs:
        _guarded(results, lambda job=job: identity_record(job(), digits), inputs)
    return Report.build(_config(args), results)


def _expand_claims(selectors) -> list[ClaimId]:
    out = []
    for sel in selectors:
        if sel in CLAIM_ALIASES:
            out.extend(CLAIM_ALIASES[sel])
        else:
            try:
                out.append(ClaimId(sel))
            except ValueError as exc:
                raise UsageError(f"unknown claim {sel!r}; choose from {', '.join(CLAIM_SELECTORS)}") from exc
    return out


def _certify(args, claims) -> tuple[list, list]:
    prec = PrecisionConfig(args.digits, args.target_digits)
    digits = prec.target_digits
    results, combos = [], []
    for claim in claims:
        if claim is ClaimId.LEMMA3:
            _require(args, "n")
            grid = args.grid or LEMMA3_GRID
            for n in args.n:
                start = len(results)
                _guarded(
                    results,
                    lambda n=n: certificate_record(certify_claim(claim, None, grid, n=n, precision=prec, workers=args.workers), digits),
                    {"claim": claim.value, "n": n},
                )
                combos.append(_combo(claim, {"n": n}, results[start:]))
            continue
        _require(args, "k", "m")
        for k, m in itertools.product(args.k, args.m):
            start = len(results)
            inputs = {"claim": claim.value, "k": k, "m": m}
            try:
                params = KParams(k, m)
                grid = restrict_to_claim(args.grid or DEFAULT_GRID, claim, k)
                if claim in (ClaimId.THM1A_LCM_F, ClaimId.THM1B_LCM_INVG):
                    certs = certify_sign_pattern(
                        claim, params, args.rmax, grid, include_r0=args.include_r0, precision=prec, workers=args.workers
                    )
                else:
                    certs = [certify_claim(claim, params, grid, precision=prec, workers=args.workers)]
                results.extend(certificate_record(c, digits) for c in certs)
            except KGammaError as exc:
                results.append(error_record(exc, inputs))
            combos.append(_combo(claim, {"k": k, "m": m}, results[start:]))
    return results, combos


def _combo(claim, params, records) -> dict:
    counts = {"pass": 0, "fail": 0, "indeterminate": 0, "error": 0}
    for rec in records:
        key = rec.get("verdict", "ERROR").lower()
        counts[key if key in counts else "error"] += 1
    return {"claim": claim.value, **params, **counts}


def run_certify(args) -> Report:
    results, _ = _certify(args, _expand_claims([args.selector]))
    return Report.build(_config(args), results)


def run_sweep(args) -> Report:
    claims = _expand_claims([c.strip() for c in args.claims.split(",") if c.strip()])
    results, combos = _certify(args, claims)
    return Report.build(_config(args), results, combinations=combos)


COMMANDS = {"eval": run_eval, "identity": run_identity, "certify": run_certify, "sweep": run_sweep}


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        try:
            PrecisionConfig(args.digits, args.target_digits)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        report = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"kgamma: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(report.render(args.format), args.out)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
