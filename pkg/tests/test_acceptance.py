"""Acceptance criteria 1 to 9.

Each test records a PASS, FAIL or SKIP line; the lines are printed at the
end of the pytest run. Run this file alone with
``pytest tests/test_acceptance.py -v``.
"""

import io
import json
import shutil
import subprocess
import sys
import time

import pytest

from archpat import (
    check_all, check_formula, emit_file, parse_pattern, pretty_print, validate_spec, verify_lasso,
)
from archpat.cli import run
from archpat.patterns import PATTERN_IDS, get_pattern, get_spec
from conftest import ARCH, GOLDEN
from helpers import brute_force_holds, count_temporal, criterion, oracle_cases, pattern_verdicts
from test_smv import normalize

COUNTS = {"singleton": 2, "mvc": 30, "broker": 6}
BUDGET_S = 120


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    return run(list(argv), out, err), out.getvalue()


def _subprocess_json(*argv) -> dict:
    proc = subprocess.run([sys.executable, "-m", "archpat.cli", *argv],
                          capture_output=True, text=True, timeout=600)
    assert proc.returncode in (0, 1), proc.stderr
    return json.loads(proc.stdout)


def test_1_property_counts(tmp_path):
    with criterion(1, "check --pattern singleton|mvc|broker verifies 2/30/6, all pass, < 120 s each") as c:
        timings = []
        for pid in PATTERN_IDS:
            t0 = time.perf_counter()
            rep, _ = _cli("check", "--pattern", pid, "--out-dir", str(tmp_path))
            took = time.perf_counter() - t0
            timings.append(f"{pid} {len(rep.properties)} in {took:.1f}s")
            assert rep.exit_code == 0, pid
            assert len(rep.properties) == COUNTS[pid], pid
            assert all(p.status == "PASS" for p in rep.properties), pid
            assert took < BUDGET_S, f"{pid} took {took:.1f}s"
        c.detail = ", ".join(timings)


def test_2_golden_emission():
    with criterion(2, "MVC emission matches the golden and is byte-identical across runs"):
        first = emit_file(get_spec("mvc")).rendered.encode()
        second = emit_file(get_spec("mvc")).rendered.encode()
        assert first == second
        assert normalize(first.decode()) == normalize((GOLDEN / "mvc.smv").read_text())


def test_3_m1_and_startup_mutant():
    with criterion(3, "M1 passes on MVC; the startup mutant fails an M2 instance with a certified lasso") as c:
        base = get_spec("mvc")
        assert check_formula(base, base.property("M1").formula).holds
        res = parse_pattern((ARCH / "mvc_mutant_idle.arch").read_text(), "mvc_mutant_idle.arch")
        mutant = res.spec
        assert mutant is not None and validate_spec(mutant) == []
        m2 = [p.name for p in mutant.properties if p.name.startswith("M2@")]
        failing = []
        for name, v in check_all(mutant, names=m2):
            if not v.holds:
                assert verify_lasso(mutant, mutant.property(name).formula, v.counterexample), name
                failing.append(name)
        assert failing
        c.detail = f"{len(failing)} of {len(m2)} M2 instances fail, e.g. {failing[0]}"


def test_4_m2_instances_hold():
    with criterion(4, "every M2 instantiation passes on the base MVC model") as c:
        m2 = [(n, v) for n, v in pattern_verdicts("mvc") if n.startswith("M2@")]
        assert len(m2) == 29
        assert all(v.holds for _, v in m2), [n for n, v in m2 if not v.holds]
        c.detail = "29 instances"


def test_5_singleton():
    with criterion(5, "Singleton S1 and S2 pass; S2-strict fails with a certified lasso"):
        entry = get_pattern("singleton")
        spec = entry.spec
        assert check_formula(spec, spec.property("S1").formula).holds
        assert check_formula(spec, spec.property("S2").formula).holds
        (name, strict, _), = entry.alternatives
        v = check_formula(spec, strict)
        assert not v.holds
        assert verify_lasso(spec, strict, v.counterexample)


def test_6_oracle_equivalence():
    with criterion(6, "checker agrees with brute-force lasso enumeration on random small specs") as c:
        cases = oracle_cases(20, seed=20_000)
        assert len(cases) >= 20
        checked, disagreements = 0, []
        for spec, formulas, bound in cases:
            for f in formulas:
                assert count_temporal(f) <= 2
                expected, _ = brute_force_holds(spec, f, bound)
                if check_formula(spec, f).holds != expected:
                    disagreements.append((spec.name, f))
                checked += 1
        assert disagreements == []
        c.detail = f"{len(cases)} specs, {checked} formulas, 0 disagreements"


def test_7_round_trip():
    with criterion(7, "parse(pretty_print(spec)) equals spec; shipped .arch files parse to the built-ins"):
        for pid in PATTERN_IDS:
            spec = get_spec(pid)
            text = pretty_print(spec)
            assert parse_pattern(text).spec == spec, pid
            shipped = (ARCH / f"{pid}.arch").read_text()
            assert parse_pattern(shipped, f"{pid}.arch").spec == spec, pid
            assert shipped == text, pid


def test_8_determinism(tmp_path):
    with criterion(8, "state counts, verdicts and emitted bytes identical over 3 runs and worker counts") as c:
        for pid in PATTERN_IDS:
            runs = [_subprocess_json("check", "--pattern", pid, "--format", "json",
                                     "--out-dir", str(tmp_path / f"{pid}{k}")) for k in range(3)]
            runs.append(_subprocess_json("check", "--pattern", pid, "--format", "json",
                                         "--workers", "2", "--out-dir", str(tmp_path / f"{pid}w")))
            keyed = [[(p["name"], p["holds"], p["states"], p["product_states"])
                      for p in r["properties"]] for r in runs]
            assert all(k == keyed[0] for k in keyed), pid
            emitted = {subprocess.run([sys.executable, "-m", "archpat.cli", "emit", "--pattern", pid],
                                      capture_output=True, timeout=120).stdout for _ in range(3)}
            assert len(emitted) == 1, pid
        c.detail = "3 serial runs + 1 run with 2 workers per pattern"


SMV_TOOLS = [t for t in ("NuSMV", "nuXmv") if shutil.which(t)]


def test_9_external_checker(tmp_path):
    with criterion(9, "external SMV checker agrees on all 38 built-in properties (gated)") as c:
        if not SMV_TOOLS:
            pytest.skip("no NuSMV or nuXmv on PATH")
        from external_smv import external_verdicts
        total = 0
        for pid in PATTERN_IDS:
            ours = {n: v.holds for n, v in pattern_verdicts(pid)}
            assert external_verdicts(SMV_TOOLS[0], get_spec(pid), tmp_path) == ours, pid
            total += len(ours)
        assert total == 38
        c.detail = SMV_TOOLS[0]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
