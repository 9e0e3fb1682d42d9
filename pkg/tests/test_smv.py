import hashlib
import re
import shutil

import pytest

from archpat import emit_file, emit_ltlspecs
from archpat.patterns import MUTANTS, PATTERN_IDS, get_pattern, get_spec
from archpat.smv import UnsupportedAtom, emit_module
from conftest import GOLDEN
from smv_check import SmvError, check

ALL = list(PATTERN_IDS) + list(MUTANTS)


def normalize(text: str) -> str:
    lines = [l for l in text.splitlines() if not l.startswith("--|")]
    return "\n".join(" ".join(l.split()) for l in lines if l.strip())


def test_mvc_matches_golden():
    golden = (GOLDEN / "mvc.smv").read_text()
    assert normalize(emit_file(get_spec("mvc")).rendered) == normalize(golden)


def _squash(line: str) -> str:
    return re.sub(r"\s+", "", line).replace("notifacte", "notificate")


def test_mvc_follows_the_listing_lines():
    emitted = {_squash(l) for l in emit_file(get_spec("mvc")).rendered.splitlines()}
    for raw in (GOLDEN / "mvc_listing.txt").read_text().splitlines():
        if not raw.strip() or raw.startswith("#"):
            continue
        if "=>" in raw:
            before, after = (x.strip() for x in raw.split("=>"))
            assert _squash(before) not in emitted, before
            assert _squash(after) in emitted, after
        else:
            assert _squash(raw) in emitted, raw


def test_m1_spec_line():
    text = emit_file(get_spec("mvc")).rendered
    assert ("LTLSPEC G ((controller1.service + controller2.service + controller3.service > -3)"
            " -> ((F view1.getData) & (F view2.getData) & (F view3.getData)))") in text


@pytest.mark.parametrize("name", ALL)
def test_structure(name):
    mods = check(emit_file(get_spec(name)).rendered)
    spec = get_spec(name)
    assert set(mods) == {i.name for i in spec.interfaces} | {"main"}
    assert len(mods["main"].specs) == len(spec.properties)


def test_array_inputs_are_passed_element_wise():
    mods = check(emit_file(get_spec("mvc")).rendered)
    assert mods["view"].params == ["notification", "model_data_0", "model_data_1",
                                   "model_data_2", "element"]


def test_checker_catches_broken_text():
    good = emit_file(get_spec("mvc")).rendered
    with pytest.raises(SmvError):
        check(good.replace("model.output_2, 0)", "0)"))
    with pytest.raises(SmvError):
        check(good.replace("getData := view1.getData", "getData := view9.getData"))
    with pytest.raises(SmvError):
        check(good.replace("  next(service_ele) := service;\n", ""))


@pytest.mark.parametrize("name", ALL)
def test_emission_is_deterministic_and_hashed(name):
    a, b = emit_file(get_spec(name)), emit_file(get_spec(name))
    assert a.rendered.encode() == b.rendered.encode()
    digest = hashlib.sha256(a.body.encode()).hexdigest()
    assert f"-- content-hash: sha256:{digest}" in a.header


def test_module_without_inputs_has_no_parameter_list():
    spec = get_spec("broker")
    text = emit_module(spec.interface("driver"), spec.behavior("driver"))
    assert text.splitlines()[0] == "MODULE driver"


def test_activation_atoms_are_rejected():
    entry = get_pattern("singleton")
    (name, formula, _), = entry.alternatives
    with pytest.raises(UnsupportedAtom, match="active"):
        emit_ltlspecs([(name, formula)], entry.spec)


def test_locals_without_update_keep_their_value():
    text = emit_file(get_spec("mvc")).rendered
    assert "next(view_ele) := view_ele;" in text


SMV_TOOLS = [t for t in ("NuSMV", "nuXmv") if shutil.which(t)]


@pytest.mark.skipif(not SMV_TOOLS, reason="no external SMV checker on PATH")
@pytest.mark.parametrize("name", list(PATTERN_IDS))
def test_external_checker_agrees(tmp_path, name):
    from external_smv import external_verdicts
    from archpat import check_all
    spec = get_spec(name)
    ours = {n: v.holds for n, v in check_all(spec)}
    assert external_verdicts(SMV_TOOLS[0], spec, tmp_path) == ours
