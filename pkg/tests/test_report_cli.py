import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

from kgamma import __version__
from kgamma.cli import main
from kgamma.report import REPORT_SCHEMA, Report, exit_code_for, summarize


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(argv, capsys):
    code, out, _ = run(argv, capsys)
    data = json.loads(out)
    jsonschema.validate(data, REPORT_SCHEMA)
    assert data["exit_code"] == code
    return code, data


def test_eval_gammak(capsys):
    code, data = run_json(["eval", "gammak", "--k", "2", "--x", "6"], capsys)
    assert code == 0
    (rec,) = data["results"]
    assert float(rec["value"]) == 8.0
    assert rec["backend"] == "reduction"
    assert data["version"] == __version__


def test_eval_ratio_f(capsys):
    _, data = run_json(["eval", "ratioF", "--k", "1", "--m", "3", "--x", "1"], capsys)
    assert float(data["results"][0]["value"]) == 2.0


def test_eval_lists_form_product(capsys):
    _, data = run_json(["eval", "polygammak", "--k", "1,2", "--x", "1,2,3", "--order", "1..2"], capsys)
    assert len(data["results"]) == 12


@pytest.mark.parametrize("backend", ["series", "quadrature"])
def test_eval_backends(backend, capsys):
    _, data = run_json(["eval", "digammak", "--k", "1", "--x", "1", "--backend", backend], capsys)
    assert abs(float(data["results"][0]["value"]) + 0.5772156649015329) < 1e-15


def test_eval_missing_order_is_usage_error(capsys):
    code, out, err = run(["eval", "polygammak", "--k", "1", "--x", "1"], capsys)
    assert code == 3 and out == "" and "--order" in err


def test_eval_domain_error_record(capsys):
    code, data = run_json(["eval", "gammak", "--k", "1", "--x", "-1"], capsys)
    assert code == 3
    assert data["results"][0]["kind"] == "error"
    assert data["results"][0]["error"] == "DomainError"


@pytest.mark.parametrize(
    "argv",
    [[], ["frobnicate"], ["eval", "zeta", "--x", "1"], ["eval", "gammak", "--k", "x", "--x", "1"],
     ["eval", "gammak", "--k", "1", "--x", "1", "--digits", "10"], ["certify", "thm9"],
     ["sweep", "--claims", "nope", "--k", "1", "--m", "2"], ["eval", "gammak", "--k", "1", "--x", "1", "--workers", "0"]],
)
def test_usage_errors(argv, capsys):
    assert run(argv, capsys)[0] == 3


def test_identity_pass(capsys):
    code, data = run_json(["identity", "euler-product", "--k", "1", "--m", "2"], capsys)
    assert code == 0 and data["results"][0]["pass"] is True
    code, data = run_json(["identity", "gauss-mult", "--k", "0.5,2", "--m", "3", "--grid", "0.01:100:5:log"], capsys)
    assert code == 0 and data["summary"]["pass"] == 10


def test_identity_lemma3(capsys):
    code, data = run_json(["identity", "lemma3", "--n", "1", "--t", "1"], capsys)
    assert code == 0
    assert data["results"][0]["residual"].startswith("0.23865121854119")


def test_certify_thm1a_reports_fail(capsys):
    code, data = run_json(["certify", "thm1a", "--k", "1", "--m", "2", "--rmax", "3"], capsys)
    assert code == 1
    assert [r["verdict"] for r in data["results"]] == ["FAIL", "PASS", "PASS"]
    assert data["summary"] == {"pass": 2, "fail": 1, "indeterminate": 0}


def test_certify_cor1_alias(capsys):
    code, data = run_json(["certify", "cor1", "--k", "1", "--m", "2"], capsys)
    verdicts = {r["claim_id"]: r["verdict"] for r in data["results"]}
    assert verdicts == {
        "cor1-lower": "PASS", "cor1-upper": "FAIL", "cor1-reversed": "PASS", "cor1-reversed-upper": "FAIL",
    }
    assert code == 1


def test_sweep_combinations(capsys):
    code, data = run_json(["sweep", "--claims", "thm1b,cor3", "--k", "1,2", "--m", "2", "--rmax", "2",
                           "--grid", "0.01:100:20:log"], capsys)
    assert code == 0
    assert len(data["combinations"]) == 6  # (thm1b, cor3-lower, cor3-upper) x 2 k
    assert all(c["fail"] == 0 and c["error"] == 0 for c in data["combinations"])


def test_report_round_trip(capsys):
    _, out, _ = run(["certify", "cor2", "--k", "1", "--m", "2", "--grid", "0.5:4:8:lin"], capsys)
    report = Report.from_json(out)
    assert report.to_json() == out


def test_determinism_modulo_timestamp(capsys):
    argv = ["certify", "cor3", "--k", "0.5", "--m", "3", "--grid", "0.01:100:30:log"]
    _, a = run_json(argv, capsys)
    _, b = run_json(argv, capsys)
    a.pop("timestamp"), b.pop("timestamp")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_csv_matches_json(capsys):
    argv = ["certify", "cor1-upper", "--k", "1", "--m", "2", "--grid", "1:10:6:lin"]
    _, data = run_json(argv, capsys)
    code, out, _ = run(argv + ["--format", "csv"], capsys)
    assert code == 1
    rows = list(csv.DictReader(io.StringIO(out)))
    witnesses = [r for r in rows if r["kind"] == "witness"]
    expected = data["results"][0]["witnesses"]
    assert len(witnesses) == len(expected) > 0
    for row, w in zip(witnesses, expected):
        assert float(row["x"]) == w["x"]
        assert row["value"] == w["value"] and row["abs_error_bound"] == w["error_bound"]


def test_text_format(capsys):
    code, out, _ = run(["certify", "cor2", "--k", "1", "--m", "2", "--format", "text"], capsys)
    assert code == 1 and out.startswith("kgamma ") and "FAIL" in out


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = run(["eval", "gammak", "--k", "2", "--x", "6", "--out", str(target)], capsys)
    assert out == "" and code == 0
    jsonschema.validate(json.loads(target.read_text()), REPORT_SCHEMA)


def test_summary_and_exit_codes():
    recs = [{"kind": "identity", "verdict": "PASS"}, {"kind": "certificate", "verdict": "INDETERMINATE"}]
    s = summarize(recs)
    assert s == {"pass": 1, "fail": 0, "indeterminate": 1}
    assert exit_code_for(recs, s) == 2
    recs.append({"kind": "certificate", "verdict": "FAIL"})
    assert exit_code_for(recs, summarize(recs)) == 1
    recs.append({"kind": "error", "error": "DomainError", "message": ""})
    assert exit_code_for(recs, summarize(recs)) == 3
    assert exit_code_for([], summarize([])) == 0


def test_render_rejects_unknown_format():
    with pytest.raises(ValueError):
        Report.build({}, []).render("xml")


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "kgamma", "eval", "gammak", "--k", "1", "--x", "5"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert float(json.loads(proc.stdout)["results"][0]["value"]) == 24.0
