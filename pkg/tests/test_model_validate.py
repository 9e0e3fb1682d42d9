from dataclasses import replace

import pytest

from archpat import parse_pattern, validate_spec
from archpat.model import Assign, InterfaceSpec, PortDecl
from archpat.patterns import MUTANTS, PATTERN_IDS, get_spec
from archpat.patterns._build import (
    BOOL, behavior, component, interface, rng,
)
from archpat.model import ArchitectureSpec, PatternSpec
from archpat.validate import dependency_graph, has_errors, strongly_connected

ALL = list(PATTERN_IDS) + list(MUTANTS)


def codes(spec):
    return sorted({d.code for d in validate_spec(spec) if d.is_error})


@pytest.mark.parametrize("name", ALL)
def test_builtins_have_no_diagnostics(name):
    assert validate_spec(get_spec(name)) == []


def _with_iface(spec, iface):
    return replace(spec, interfaces=tuple(iface if i.name == iface.name else i
                                          for i in spec.interfaces))


def test_duplicate_port_is_rejected():
    spec = get_spec("mvc")
    view = spec.interface("view")
    dup = InterfaceSpec("view", view.ports + (PortDecl("getData", "output", BOOL),))
    assert "duplicate" in codes(_with_iface(spec, dup))


def test_unbound_input_is_rejected():
    spec = get_spec("mvc")
    arch = spec.architecture
    view1 = arch.instance("view1")
    cut = replace(view1, bindings=view1.bindings[:-1])
    insts = tuple(cut if i.name == "view1" else i for i in arch.instances)
    assert "unbound" in codes(replace(spec, architecture=replace(arch, instances=insts)))


def test_binding_unknown_port_is_rejected():
    spec = get_spec("singleton")
    arch = spec.architecture
    s1 = arch.instance("s1")
    extra = replace(s1, bindings=s1.bindings + (Assign("nope", s1.bindings[0].expr),))
    insts = tuple(extra if i.name == "s1" else i for i in arch.instances)
    assert "undeclared" in codes(replace(spec, architecture=replace(arch, instances=insts)))


def _relay_spec(closed: bool) -> PatternSpec:
    relay = interface("relay", ("in", "a", BOOL), ("out", "b", BOOL))
    beh = behavior("relay", ["s"], "s", defines=[("b", "a")])
    second = "r1.b" if closed else True
    arch = ArchitectureSpec((component("r1", "relay", a="r2.b"),
                             component("r2", "relay", a=second)))
    return PatternSpec("relay", (relay,), (beh,), arch, ())


def test_combinational_cycle_is_rejected():
    assert codes(_relay_spec(True)) == ["cycle"]
    assert codes(_relay_spec(False)) == []


def test_cycle_names_its_members():
    diags = [d for d in validate_spec(_relay_spec(True)) if d.code == "cycle"]
    assert len(diags) == 1
    for member in ("r1.a", "r1.b", "r2.a", "r2.b"):
        assert member in diags[0].message


def test_strongly_connected_orders_dependencies_first():
    graph = dependency_graph(get_spec("mvc"))
    order = [c[0] for c in strongly_connected(graph)]
    pos = {n: i for i, n in enumerate(order)}
    for node, deps in graph.items():
        for d in deps:
            assert pos[d] <= pos[node]


def test_type_errors_are_located():
    text = open_arch("singleton").replace(
        "trans on -> inactive when release", "trans on -> inactive when pick")
    res = parse_pattern(text, "s.arch")
    diags = [d for d in validate_spec(res.spec) if d.is_error]
    assert [d.code for d in diags] == ["type"]
    line = next(i for i, l in enumerate(text.splitlines(), 1) if "when pick" in l)
    assert diags[0].span.line_start == line


def _narrowed_event(lo, hi):
    spec = get_spec("mvc")
    ctl = spec.interface("controller")
    narrow = InterfaceSpec("controller", tuple(
        replace(p, sort=rng(lo, hi)) if p.name == "event_actual" else p for p in ctl.ports))
    return validate_spec(_with_iface(spec, narrow))


def test_range_warning_only_when_disjoint():
    # init -1 is disjoint from both; next ranges over -1..2, which overlaps 0..1 only
    disjoint = _narrowed_event(5, 6)
    overlap = _narrowed_event(0, 1)
    assert not has_errors(disjoint) and not has_errors(overlap)
    assert sorted(d.message.split(":")[0] for d in disjoint) == [
        "init of 'event_actual'", "next of 'event_actual'"]
    assert [d.message.split(":")[0] for d in overlap] == ["init of 'event_actual'"]


def test_spans_do_not_affect_equality():
    a = parse_pattern(open_arch("broker"), "one.arch").spec
    b = parse_pattern("\n\n" + open_arch("broker"), "two.arch").spec
    assert a == b
    assert hash(a) == hash(b)
    assert a.interfaces[0].span != b.interfaces[0].span


def open_arch(name):
    from conftest import ARCH
    return (ARCH / f"{name}.arch").read_text()
