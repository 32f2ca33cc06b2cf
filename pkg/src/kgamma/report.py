"""Report records and their JSON / CSV / text serializations.

All computed numbers travel as decimal strings rounded to the target digit
count, so a report reads back identically regardless of the arithmetic used
to produce it.  Inputs (grid points, k, m, ...) are echoed as plain JSON
numbers since they are exact binary floats supplied by the caller.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

import mpmath

from . import __version__
from .certifier import CLAIMS, Certificate, Verdict
from .identities import IdentityOutcome
from .kcore import EvalResult

__all__ = [
    "CSV_FIELDS",
    "REPORT_SCHEMA",
    "Report",
    "certificate_record",
    "error_record",
    "eval_record",
    "exit_code_for",
    "identity_record",
    "summarize",
]

EXIT_PASS, EXIT_FAIL, EXIT_INDETERMINATE, EXIT_USAGE = 0, 1, 2, 3

_DECIMAL = {"type": "string", "pattern": r"^[+-]?(inf|nan|\d+(\.\d*)?(e[+-]?\d+)?)$"}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["version", "timestamp", "config", "results", "summary", "exit_code"],
    "properties": {
        "version": {"type": "string"},
        "timestamp": {"type": "string"},
        "config": {"type": "object"},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind"],
                "properties": {"kind": {"enum": ["eval", "identity", "certificate", "error"]}},
                "allOf": [
                    {
                        "if": {"properties": {"kind": {"const": "eval"}}},
                        "then": {
                            "required": ["quantity", "inputs", "value", "abs_error_bound", "backend"],
                            "properties": {"value": _DECIMAL, "abs_error_bound": _DECIMAL},
                        },
                    },
                    {
                        "if": {"properties": {"kind": {"const": "identity"}}},
                        "then": {
                            "required": ["identity_id", "inputs", "lhs", "rhs", "residual", "threshold", "pass", "verdict"],
                            "properties": {"residual": _DECIMAL, "threshold": _DECIMAL, "pass": {"type": "boolean"}},
                        },
                    },
                    {
                        "if": {"properties": {"kind": {"const": "certificate"}}},
                        "then": {
                            "required": ["claim_id", "verdict", "witnesses", "stats", "grid"],
                            "properties": {
                                "verdict": {"enum": ["PASS", "FAIL", "INDETERMINATE"]},
                                "witnesses": {
                                    "type": "array",
                                    "items": {
                                        "type": "object",
                                        "required": ["x", "value", "error_bound", "margin"],
                                        "properties": {"value": _DECIMAL, "error_bound": _DECIMAL, "margin": _DECIMAL},
                                    },
                                },
                            },
                        },
                    },
                    {
                        "if": {"properties": {"kind": {"const": "error"}}},
                        "then": {"required": ["error", "message"]},
                    },
                ],
            },
        },
        "summary": {
            "type": "object",
            "required": ["pass", "fail", "indeterminate"],
            "properties": {
                "pass": {"type": "integer", "minimum": 0},
                "fail": {"type": "integer", "minimum": 0},
                "indeterminate": {"type": "integer", "minimum": 0},
            },
        },
        "exit_code": {"enum": [0, 1, 2, 3]},
    },
}


def dec(v, digits: int) -> str:
    return mpmath.nstr(v, digits)


def eval_record(quantity: str, inputs: dict, res: EvalResult, digits: int) -> dict:
    return {
        "kind": "eval",
        "quantity": quantity,
        "inputs": inputs,
        "value": dec(res.value, digits),
        "abs_error_bound": dec(res.abs_error_bound, digits),
        "backend": res.backend,
    }


def _side(res: EvalResult, digits):
    return {"value": dec(res.value, digits), "abs_error_bound": dec(res.abs_error_bound, digits), "backend": res.backend}


def identity_record(out: IdentityOutcome, digits: int) -> dict:
    return {
        "kind": "identity",
        "identity_id": out.identity_id,
        "inputs": out.inputs,
        "lhs": _side(out.lhs, digits),
        "rhs": _side(out.rhs, digits),
        "residual": dec(out.residual, digits),
        "threshold": dec(out.threshold, digits),
        "mode": out.mode,
        "pass": out.passed,
        "verdict": Verdict.PASS.value if out.passed else Verdict.FAIL.value,
    }


def certificate_record(cert: Certificate, digits: int) -> dict:
    params = None
    if cert.params is not None:
        params = {"k": cert.params.k, "m": cert.params.m}
        if cert.order is not None:
            params["r"] = cert.order
    return {
        "kind": "certificate",
        "claim_id": cert.claim_id.value,
        "statement": CLAIMS[cert.claim_id].statement,
        "params": params,
        "n": cert.n,
        "grid": cert.grid.to_dict(),
        "verdict": cert.verdict.value,
        "stats": dict(cert.stats),
        "witnesses": [
            {
                "x": w.x,
                "value": dec(w.value, digits),
                "error_bound": dec(w.error_bound, digits),
                "margin": dec(w.margin, 6),
            }
            for w in cert.witnesses
        ],
    }


def error_record(exc: Exception, context: dict | None = None) -> dict:
    return {"kind": "error", "error": type(exc).__name__, "message": str(exc), "inputs": context or {}}


def summarize(results: list[dict]) -> dict:
    out = {"pass": 0, "fail": 0, "indeterminate": 0}
    for rec in results:
        verdict = rec.get("verdict")
        if verdict == "PASS":
            out["pass"] += 1
        elif verdict == "FAIL":
            out["fail"] += 1
        elif verdict == "INDETERMINATE":
            out["indeterminate"] += 1
    return out


def exit_code_for(results: list[dict], summary: dict) -> int:
    if any(rec["kind"] == "error" for rec in results):
        return EXIT_USAGE
    if summary["fail"]:
        return EXIT_FAIL
    if summary["indeterminate"]:
        return EXIT_INDETERMINATE
    return EXIT_PASS


@dataclass
class Report:
    config: dict
    results: list = field(default_factory=list)
    version: str = __version__
    timestamp: str = ""
    summary: dict = field(default_factory=dict)
    exit_code: int = 0
    combinations: list | None = None

    @classmethod
    def build(cls, config: dict, results: list[dict], combinations: list | None = None) -> "Report":
        summary = summarize(results)
        return cls(
            config=config,
            results=results,
            timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            summary=summary,
            exit_code=exit_code_for(results, summary),
            combinations=combinations,
        )

    def to_dict(self) -> dict:
        out = {
            "version": self.version,
            "timestamp": self.timestamp,
            "config": self.config,
            "results": self.results,
            "summary": self.summary,
            "exit_code": self.exit_code,
        }
        if self.combinations is not None:
            out["combinations"] = self.combinations
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        return cls(
            config=data["config"],
            results=data["results"],
            version=data["version"],
            timestamp=data["timestamp"],
            summary=data["summary"],
            exit_code=data["exit_code"],
            combinations=data.get("combinations"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for i, rec in enumerate(self.results):
            for row in _csv_rows(rec):
                writer.writerow({"record": i, **row})
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"kgamma {self.version}  exit={self.exit_code}  summary={self.summary}"]
        for rec in self.results:
            kind = rec["kind"]
            if kind == "eval":
                lines.append(f"{rec['quantity']} {rec['inputs']} = {rec['value']} (+/- {rec['abs_error_bound']}, {rec['backend']})")
            elif kind == "identity":
                lines.append(
                    f"{rec['verdict']:13s} {rec['identity_id']} {rec['inputs']} residual={rec['residual']} threshold={rec['threshold']}"
                )
            elif kind == "certificate":
                s = rec["stats"]
                lines.append(
                    f"{rec['verdict']:13s} {rec['claim_id']} params={rec['params']} n={rec['n']} "
                    f"points={s['points']} fail={s['fail']} indeterminate={s['indeterminate']}"
                )
                for w in rec["witnesses"][:5]:
                    lines.append(f"    x={w['x']!r} value={w['value']} bound={w['error_bound']} margin={w['margin']}")
                if len(rec["witnesses"]) > 5:
                    lines.append(f"    ... {len(rec['witnesses']) - 5} more witnesses")
            else:
                lines.append(f"ERROR {rec['error']}: {rec['message']}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        if fmt == "text":
            return self.to_text()
        raise ValueError(f"unknown format {fmt!r}")


CSV_FIELDS = [
    "record",
    "kind",
    "id",
    "inputs",
    "verdict",
    "x",
    "value",
    "abs_error_bound",
    "lhs_value",
    "lhs_bound",
    "rhs_value",
    "rhs_bound",
    "residual",
    "threshold",
    "margin",
    "message",
]


def _inputs(d) -> str:
    return json.dumps(d, sort_keys=True) if d is not None else ""


def _csv_rows(rec: dict):
    kind = rec["kind"]
    if kind == "eval":
        yield {
            "kind": "eval",
            "id": rec["quantity"],
            "inputs": _inputs(rec["inputs"]),
            "value": rec["value"],
            "abs_error_bound": rec["abs_error_bound"],
        }
    elif kind == "identity":
        yield {
            "kind": "identity",
            "id": rec["identity_id"],
            "inputs": _inputs(rec["inputs"]),
            "verdict": rec["verdict"],
            "lhs_value": rec["lhs"]["value"],
            "lhs_bound": rec["lhs"]["abs_error_bound"],
            "rhs_value": rec["rhs"]["value"],
            "rhs_bound": rec["rhs"]["abs_error_bound"],
            "residual": rec["residual"],
            "threshold": rec["threshold"],
        }
    elif kind == "certificate":
        params = dict(rec["params"] or {})
        if rec["n"] is not None:
            params["n"] = rec["n"]
        base = {"kind": "certificate", "id": rec["claim_id"], "inputs": _inputs(params), "verdict": rec["verdict"]}
        yield base
        for w in rec["witnesses"]:
            yield {
                **base,
                "kind": "witness",
                "x": repr(w["x"]),
                "value": w["value"],
                "abs_error_bound": w["error_bound"],
                "margin": w["margin"],
            }
    else:
        yield {"kind": "error", "id": rec["error"], "inputs": _inputs(rec.get("inputs")), "message": rec["message"]}
