import io
import json
import shutil

import pytest

from archpat import __version__
from archpat.cli import LASSO_SCHEMA, build_parser, run
from conftest import ARCH, GOLDEN
from test_smv import normalize


def call(*argv, cwd=None, monkeypatch=None):
    if cwd is not None:
        monkeypatch.chdir(cwd)
    out, err = io.StringIO(), io.StringIO()
    report = run(list(argv), out, err)
    return report, out.getvalue(), err.getvalue()


@pytest.fixture
def mutant_file(tmp_path):
    target = tmp_path / "singleton_mutant_grant.arch"
    shutil.copy(ARCH / target.name, target)
    return target


# ------------------------------------------------------------- check

def test_check_singleton_passes(tmp_path):
    rep, out, _ = call("check", "--pattern", "singleton", "--out-dir", str(tmp_path))
    assert rep.exit_code == 0
    assert [p.status for p in rep.properties] == ["PASS", "PASS"]
    assert "2 properties, 2 pass" in out
    assert (tmp_path / "singleton.report.json").exists()


def test_check_failure_writes_lasso_beside_the_report(mutant_file):
    rep, out, _ = call("check", str(mutant_file))
    assert rep.exit_code == 1
    assert {p.name: p.status for p in rep.properties} == {"S1": "PASS", "S2": "FAIL"}
    lasso = mutant_file.parent / "singleton_mutant_grant.S2.lasso.json"
    report = mutant_file.parent / "singleton_mutant_grant.report.json"
    assert lasso.exists() and report.exists()
    doc = json.loads(lasso.read_text())
    assert doc["schema"] == LASSO_SCHEMA and doc["property"] == "S2"
    assert doc["cycle"] and all(isinstance(s, dict) for s in doc["prefix"] + doc["cycle"])
    assert "singleton_mutant_grant.S2.lasso.json" in out


def test_check_mvc_mutant_file_fails(tmp_path):
    src = tmp_path / "mvc_mutant_idle.arch"
    shutil.copy(ARCH / src.name, src)
    rep, _, _ = call("check", str(src), "--prop", "M2@view1,7", "--prop", "M1")
    assert rep.exit_code == 1
    assert [(p.name, p.status) for p in rep.properties] == [("M2@view1,7", "FAIL"), ("M1", "PASS")]
    assert [p.name for p in tmp_path.glob("*.lasso.json")] == ["mvc_mutant_idle.M2_view1_7.lasso.json"]


def test_json_format_has_one_entry_per_property(tmp_path):
    rep, out, _ = call("check", "--pattern", "broker", "--format", "json",
                       "--prop", "B1@client1,1", "--prop", "B2@server2",
                       "--out-dir", str(tmp_path))
    doc = json.loads(out)
    assert doc["schema"] == "archpat-report/1"
    assert [p["name"] for p in doc["properties"]] == ["B1@client1,1", "B2@server2"]
    assert all(p["holds"] is True and p["states"] > 0 for p in doc["properties"])
    assert doc["exit_code"] == rep.exit_code == 0
    assert json.loads((tmp_path / "broker.report.json").read_text()) == doc


def test_inconclusive_exit_code(tmp_path):
    rep, out, _ = call("check", "--pattern", "broker", "--max-states", "10",
                       "--prop", "B2@server1", "--out-dir", str(tmp_path))
    assert rep.exit_code == 3
    assert rep.properties[0].status == "INCONCLUSIVE"
    assert "INCONCLUSIVE" in out


def test_invalid_spec_exit_code(tmp_path):
    bad = tmp_path / "bad.arch"
    text = (ARCH / "singleton.arch").read_text().replace("request", "requets", 1)
    bad.write_text(text)
    rep, _, err = call("check", str(bad), "--format", "json")
    assert rep.exit_code == 2
    assert rep.diagnostics and "error" in err.lower()
    rep, _, _ = call("validate", str(bad))
    assert rep.exit_code == 2


def test_syntax_error_reports_location(tmp_path):
    bad = tmp_path / "broken.arch"
    bad.write_text("pattern p {\n  interface i {\n    in x : bool\n")
    rep, _, err = call("validate", str(bad))
    assert rep.exit_code == 2
    assert "broken.arch:" in err


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["check"],
    ["check", "--pattern", "observer"],
    ["check", "--pattern", "singleton", "--prop", "S9"],
    ["check", "--pattern", "singleton", "--max-states", "-5"],
    ["check", "--pattern", "singleton", "--max-time", "soon"],
    ["check", "--pattern", "singleton", "--format", "xml"],
    ["validate", "/nonexistent/x.arch"],
    ["explain", "/nonexistent/x.json"],
    ["patterns", "show"],
])
def test_usage_errors_exit_4(argv, tmp_path, monkeypatch):
    rep, _, err = call(*argv, cwd=tmp_path, monkeypatch=monkeypatch)
    assert rep.exit_code == 4, err
    assert err


def test_version_and_help(capsys):
    assert call("--version")[0].exit_code == 0
    assert __version__ in capsys.readouterr().out
    assert call("check", "--help")[0].exit_code == 0


def test_validate_ok():
    rep, out, _ = call("validate", str(ARCH / "mvc.arch"))
    assert rep.exit_code == 0 and rep.spec_name == "mvc"


# ------------------------------------------------------------- emit

def test_emit_matches_golden(tmp_path):
    target = tmp_path / "mvc.smv"
    rep, _, _ = call("emit", "--pattern", "mvc", "-o", str(target))
    assert rep.exit_code == 0
    assert normalize(target.read_text()) == normalize((GOLDEN / "mvc.smv").read_text())


def test_emit_from_file_to_stdout():
    rep, out, _ = call("emit", str(ARCH / "singleton.arch"))
    assert rep.exit_code == 0
    assert out.startswith("-- pattern: singleton")
    assert "MODULE main" in out


# ------------------------------------------------------------- patterns

def test_patterns_list():
    rep, out, _ = call("patterns", "list")
    assert rep.exit_code == 0
    for line in ("singleton", "mvc", "broker"):
        assert line in out
    assert "30 properties" in out and "6 components" in out
    assert "mvc_mutant_idle" in out


# ------------------------------------------------------------- explain

def _lasso_for(mutant_file):
    call("check", str(mutant_file), "--prop", "S2")
    return mutant_file.parent / "singleton_mutant_grant.S2.lasso.json"


def test_explain_certifies(mutant_file):
    rep, out, _ = call("explain", str(_lasso_for(mutant_file)))
    assert rep.exit_code == 0
    assert "-- cycle starts here --" in out
    assert "certified" in out
    assert "\x1b[" not in out


def test_explain_rejects_a_broken_seam(mutant_file):
    path = _lasso_for(mutant_file)
    doc = json.loads(path.read_text())
    doc["cycle"] = [doc["prefix"][0]]
    path.write_text(json.dumps(doc))
    rep, out, _ = call("explain", str(path))
    assert rep.exit_code == 1
    assert "rejected: not a transition at" in out
    assert "seam" in out or "wrap-around" in out


def test_explain_rejects_a_trace_that_satisfies_the_property(mutant_file):
    path = _lasso_for(mutant_file)
    doc = json.loads(path.read_text())
    doc["property"] = "S1"
    path.write_text(json.dumps(doc))
    rep, out, _ = call("explain", str(path))
    assert rep.exit_code == 1
    assert "rejected: trace satisfies the formula" in out


def test_explain_malformed_file_is_a_usage_error(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"schema": "something-else"}')
    assert call("explain", str(p))[0].exit_code == 4
    p.write_text("not json")
    assert call("explain", str(p))[0].exit_code == 4


def test_color_can_be_forced(mutant_file, monkeypatch):
    monkeypatch.setenv("ARCHPAT_COLOR", "1")
    _, out, _ = call("explain", str(_lasso_for(mutant_file)))
    assert "\x1b[32m" in out


def test_parser_builds():
    assert build_parser().prog == "archpat"
