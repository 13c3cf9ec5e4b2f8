from __future__ import annotations

import csv
import io
import json

import jsonschema
import pytest

from bundlegraphs.cli import CSV_COLUMNS, main, report_schema


def run(capsys, *argv):
    status = main(list(argv))
    out = capsys.readouterr()
    return status, out.out, out.err


def payload(text: str) -> dict:
    data = json.loads(text)
    data.pop("meta", None)
    return data


def test_verify_json_example(capsys):
    status, out, _ = run(capsys, "verify", "--w", "0,1,0", "--kappa", "2", "--embedding", "l1", "--pairs", "all", "--format", "json")
    data = json.loads(out)
    jsonschema.validate(data, report_schema())
    assert status == 0
    assert data["distortion"] == "2" and data["bound"] == "2" and data["pass"] is True
    assert set(data) >= {
        "code", "kappa", "embedding", "pairs", "c1", "c2", "c1_exact", "c2_exact", "distortion",
        "distortion_exact", "bound", "bound_exact", "comparable_equality", "pass", "meta",
    }


def test_json_output_is_deterministic(capsys):
    argv = ["verify", "--w", "0,2,1,0", "--kappa", "2", "--embedding", "esa", "--format", "json"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert json.dumps(payload(first)) == json.dumps(payload(second))
    argv = ["suite", "--codes", "0,1,0", "--kappa", "2", "--axiom-trials", "50", "--format", "json"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert payload(first) == payload(second)
    jsonschema.validate(json.loads(first), report_schema())


def test_dist_example(capsys):
    status, out, _ = run(capsys, "dist", "--w", "0,0,1,0,0,2,1,1,1,2,1,0", "--u", "5:(1,1)", "--v", "9:(0,1)")
    assert status == 0 and out == "6\n"
    status, out, _ = run(capsys, "dist", "--w", "0,0,1,0,0,2,1,1,1,2,1,0", "--u", "5:(1,1)", "--v", "9:(1,0)", "--bfs", "--format", "json")
    assert payload(out) == {"formula": 4, "bfs": 4}


def test_oslash_example(capsys):
    status, out, _ = run(capsys, "oslash", "--w", "0,1,0", "--w2", "0,1,0")
    assert status == 0 and out == "0,2,1,2,0\n"
    status, out, _ = run(capsys, "oslash", "--w", "0,1,0", "--w2", "0,1,0", "--n", "0", "--check-iso", "--format", "json")
    assert status == 0 and payload(out) == {"code": "0,2,1,0", "isomorphism": True}


def test_family_and_csv_sweep(capsys):
    status, out, _ = run(capsys, "family", "--w", "0,0,1,0", "--k", "2")
    assert out.strip().count(",") == 9
    status, out, _ = run(capsys, "family", "--w", "0,1,0", "--k", "2", "--embedding", "linf", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert status == 0 and tuple(rows[0]) == CSV_COLUMNS
    assert [r["k"] for r in rows] == ["1", "2"] and rows[1]["vertices"] == "12"
    status, out, _ = run(capsys, "verify", "--w", "0,1,0", "--kappa", "2", "--embedding", "linf", "--format", "csv")
    assert out.splitlines()[0] == ",".join(CSV_COLUMNS)


def test_pw(capsys):
    status, out, _ = run(capsys, "pw", "--w", "0,1,0")
    assert status == 0 and out == "positive 1\ninclude_zero 2\n"


def test_graph_and_embed(capsys, tmp_path):
    target = tmp_path / "g.txt"
    status, out, _ = run(capsys, "graph", "--w", "0,1,0", "--kappa", "2", "--out", str(target))
    assert status == 0 and out == ""
    assert target.read_text().splitlines()[0] == "0:()"
    for embedding in ("linf", "l1", "esa"):
        status, out, _ = run(capsys, "embed", "--w", "0,1,0", "--kappa", "2", "--embedding", embedding, "--format", "json")
        assert status == 0 and len(json.loads(out)["vertices"]) == 4


def test_suite_text_and_exit_status(capsys):
    status, out, _ = run(capsys, "suite", "--max-height", "3", "--max-depth", "1", "--kappa", "2", "--suites", "metric_oracle,bounds")
    assert status == 0 and out.startswith("metric_oracle: pass")
    status, out, _ = run(capsys, "suite", "--codes", "0,1,1,0;0,1,0", "--kappa", "2", "--suites", "products")
    assert status == 1 and "FAIL" in out
    status, out, _ = run(capsys, "suite", "--codes", "", "--suites", "metric_oracle")
    assert status == 0 and "vacuous" in out


def test_verification_failure_exit_code(capsys, monkeypatch):
    import bundlegraphs.harness as harness

    monkeypatch.setattr(harness, "dist_linf", lambda a, b: 0)
    status, _, _ = run(capsys, "verify", "--w", "0,1,0", "--kappa", "2", "--embedding", "linf")
    assert status == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--w", "0,1,1", "--kappa", "2", "--embedding", "l1"],
        ["dist", "--w", "0,1,0", "--u", "1:(0", "--v", "0:()"],
        ["graph", "--w", "0,9,0", "--kappa", "3", "--limit", "100"],
        ["verify", "--w", "0,1,0", "--kappa", "2", "--embedding", "l2"],
        ["verify", "--w", "0,1,0", "--kappa", "2", "--embedding", "l1", "--pairs", "some"],
        ["pw", "--w", "0,1,0", "--format", "csv"],
        [],
    ],
)
def test_usage_and_guard_errors(capsys, argv):
    status, out, err = run(capsys, *argv, "--json-errors")
    assert status == 2 and out == ""
    assert "error" in json.loads(err)


def test_plain_error_message(capsys):
    status, _, err = run(capsys, "pw", "--w", "1,0")
    assert status == 2 and err.startswith("error:")
