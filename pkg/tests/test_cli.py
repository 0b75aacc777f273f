"""Command-line interface: exit codes, reports, round trips."""
import json

import pytest

from bigphase.cli import main
from bigphase.model import ingest_gw_table
from bigphase.series import first_bad_monomial
from bigphase.trr import CATALOG_IDS

DEGREE = ["--degree", "2", "--max-level", "6"]


def run(capsys, argv):
    code = main(argv)
    text = capsys.readouterr().out
    return code, json.loads(text) if text.strip() else None


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def test_verify_all_pass(capsys):
    code, doc = run(capsys, ["verify", "--model", "point"] + DEGREE)
    assert code == 0
    assert doc["format"] == "bigphase-report"
    assert doc["summary"]["fail"] == 0
    ids = [c["id"] for c in doc["checks"]]
    assert "model:validation" in ids
    assert "structural:qprod-associative" in ids
    assert "virasoro g=2 n=2" in ids
    assert set(CATALOG_IDS) <= set(ids)


def test_verify_suite_filter(capsys):
    code, doc = run(capsys,
                    ["verify", "--suite", "trr-g1"] + DEGREE)
    assert code == 0
    assert [c["id"] for c in doc["checks"]] == ["trr-g1"]


def test_verify_unknown_suite(capsys):
    assert main(["verify", "--suite", "no-such-suite"] + DEGREE) == 3


def test_verify_is_deterministic_under_jobs(capsys):
    argv = ["verify", "--suite", "structural", "--suite", "virasoro"] + DEGREE
    _, doc1 = run(capsys, argv + ["--jobs", "1"])
    _, doc4 = run(capsys, argv + ["--jobs", "4"])
    assert doc1 == doc4


def test_bad_flags(capsys):
    assert main(["verify", "--shift", "abc"] + DEGREE) == 3
    assert main(["verify", "--degree", "-1"]) == 3
    assert main(["verify", "--jobs", "0"] + DEGREE) == 3
    assert main(["verify", "--model", "nope"] + DEGREE) == 3
    assert main(["verify", "--gw-table", "/nonexistent.json"] + DEGREE) == 3


# ---------------------------------------------------------------------------
# export and table round trips
# ---------------------------------------------------------------------------

@pytest.fixture()
def table(tmp_path, capsys):
    path = tmp_path / "table.json"
    code = main(["export", "--model", "point", "--shift", "1",
                 "--out", str(path)] + DEGREE)
    capsys.readouterr()
    assert code == 0
    return path


def test_export_roundtrip(table, tmp_path):
    report = json.loads((table.parent / "table.json.report.json").read_text())
    assert report["summary"]["fail"] == 0
    assert {c["id"] for c in report["checks"]} == {"roundtrip F0",
                                                   "roundtrip F1",
                                                   "roundtrip F2"}
    assert (table.parent / "table.json.report.txt").exists()
    _, genfun, warnings = ingest_gw_table(str(table))
    assert warnings == []
    assert genfun.has(2)


def test_verify_on_exported_table(table, capsys):
    code, doc = run(capsys, ["verify", "--gw-table", str(table),
                             "--suite", "virasoro"])
    assert code == 0
    assert doc["summary"]["fail"] == 0


def test_corrupted_table_fails_with_named_monomial(table, tmp_path, capsys):
    doc = json.loads(table.read_text())
    victim = next(r for r in doc["records"] if r["genus"] == 2)
    victim["value"] = victim["value"] + "7"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, report = run(capsys, ["verify", "--gw-table", str(bad),
                                "--suite", "catalog"])
    assert code == 1
    failing = [c for c in report["checks"] if c["status"] == "fail"]
    assert failing
    assert all("t[" in c["detail"] for c in failing)


def test_export_needs_out(capsys):
    assert main(["export", "--model", "point"] + DEGREE) == 3


def test_export_degree_beyond_table(table, tmp_path, capsys):
    out = tmp_path / "bigger.json"
    assert main(["export", "--gw-table", str(table), "--degree", "9",
                 "--out", str(out)]) == 3


# ---------------------------------------------------------------------------
# solve-f2
# ---------------------------------------------------------------------------

def test_solve_f2(capsys):
    code, doc = run(capsys, ["solve-f2", "--model", "point",
                             "--shift", "1"] + DEGREE)
    assert code == 0
    assert doc["euler_relation"]["n"] == 0
    assert doc["euler_relation"]["f"][0]["1"] == "1"
    assert doc["summary"]["fail"] == 0
    # coefficients serialize as exact p/q strings
    assert all("/" in v or v.lstrip("-").isdigit()
               for v in doc["F2"].values())


def test_solve_f2_origin_is_structured_error(capsys):
    code, doc = run(capsys, ["solve-f2", "--model", "point",
                             "--shift", "0"] + DEGREE)
    assert code == 2
    assert doc["error"]["kind"] == "solver-precondition"
    assert "degenerate base point" in doc["error"]["message"]


def test_solve_f2_compare_matches_oracle(table, capsys):
    code, doc = run(capsys, ["solve-f2", "--model", "point", "--shift", "1",
                             "--compare", str(table)] + DEGREE)
    assert code == 0
    assert doc["diff"] == {}


def test_solve_f2_compare_base_mismatch(table, capsys):
    code = main(["solve-f2", "--model", "point", "--shift", "2",
                 "--compare", str(table)] + DEGREE)
    capsys.readouterr()
    assert code == 3
