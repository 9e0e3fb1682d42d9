"""Built-in pattern formalizations and quantifier expansion."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from ..model import LtlFormula, PatternSpec
from . import broker, mvc, singleton


class UnknownPattern(KeyError):
    pass


@dataclass(frozen=True)
class PropertyFamily:
    """A quantified guarantee and the finite domain it is instantiated over."""
    name: str
    template: str
    domain: tuple[tuple, ...]
    instantiate: Callable[..., LtlFormula]

    def instance_name(self, binding: tuple) -> str:
        return f"{self.name}@{','.join(map(str, binding))}" if binding else self.name


@dataclass(frozen=True)
class PatternCatalogEntry:
    id: str
    spec: PatternSpec
    property_families: tuple[PropertyFamily, ...]
    notes: str
    alternatives: tuple[tuple[str, LtlFormula, bool], ...] = ()  # (name, formula, expected to hold)


def expand_properties(entry: PatternCatalogEntry) -> list[tuple[str, LtlFormula]]:
    """Instantiate every family over its domain, in family then domain order."""
    out = []
    for fam in entry.property_families:
        for binding in fam.domain:
            out.append((fam.instance_name(binding), fam.instantiate(*binding)))
    return out


_NOTES = {
    "singleton": (
        "Reconstruction. Only the two guarantees come from the source; the model is ours. "
        "Three potential instances share one component type; the environment raises "
        "requests, picks a candidate and releases the active instance. S2 uses the "
        "'none or one' reading; S2-strict is the same-instance reading and fails."),
    "mvc": (
        "Model module as in the reference SMV text. View and controller behavior follow the diagrams. "
        "Outputs are typed -1..10 so the empty output [-1,-1,-1] fits. Controllers may "
        "emit the idle event -1. M1 is the reference first specification; M2 ranges over "
        "views and data values 0..9 in view-major order and keeps the first 29, which "
        "reproduces the reference count of 30 but not necessarily the exact instances."),
    "broker": (
        "Reconstruction. Two clients, two servers, one broker and an environment driver. "
        "Service ids 1..2 (0 means no request), client and server ids 0..1. One request "
        "is handled at a time and clients are served round-robin."),
}


def _families(pid: str) -> tuple[PropertyFamily, ...]:
    if pid == "singleton":
        return (
            PropertyFamily("S1", "G (request -> F granted)", ((),), singleton.s1),
            PropertyFamily("S2", "G (active_count <= 1)", ((),), singleton.s2),
        )
    if pid == "mvc":
        return (
            PropertyFamily("M1", "G (sum(c.service) > -3 -> F v1.getData & F v2.getData & "
                                 "F v3.getData)", ((),), mvc.m1),
            PropertyFamily("M2", "forall v, x: G (model.data[v.view_ele] = x -> "
                                 "F v.view_data = x)", tuple(mvc.m2_domain()), mvc.m2),
        )
    if pid == "broker":
        return (
            PropertyFamily("B1", "forall c, s: G (c.request = s -> F executed(c, s))",
                           tuple((c, s) for c in broker.CLIENTS for s in broker.SERVICES),
                           broker.b1),
            PropertyFamily("B2", "forall s: G (s.regreq -> F broker.registered[s])",
                           tuple((s,) for s in broker.SERVERS), broker.b2),
        )
    raise UnknownPattern(pid)


_BUILDERS = {"singleton": singleton.build, "mvc": mvc.build, "broker": broker.build}

MUTANTS: dict[str, tuple[Callable[[], PatternSpec], str, str]] = {
    # name -> (builder, base pattern, property expected to fail)
    "mvc_mutant_idle": (mvc.mutant_idle, "mvc", "M2@view1,7"),
    "singleton_mutant_grant": (singleton.mutant_grant, "singleton", "S2"),
    "broker_mutant_ack": (broker.mutant_ack, "broker", "B2@server1"),
}

PATTERN_IDS = tuple(_BUILDERS)


@lru_cache(maxsize=None)
def get_pattern(pid: str) -> PatternCatalogEntry:
    if pid not in _BUILDERS:
        raise UnknownPattern(pid)
    spec = _BUILDERS[pid]()
    alternatives = ()
    if pid == "singleton":
        alternatives = (("S2-strict", singleton.s2_strict(), False),)
    return PatternCatalogEntry(pid, spec, _families(pid), _NOTES[pid], alternatives)


@lru_cache(maxsize=None)
def get_mutant(name: str) -> PatternSpec:
    if name not in MUTANTS:
        raise UnknownPattern(name)
    return MUTANTS[name][0]()


def get_spec(name: str) -> PatternSpec:
    """A built-in pattern or mutant by name."""
    if name in _BUILDERS:
        return get_pattern(name).spec
    return get_mutant(name)


__all__ = ["PATTERN_IDS", "MUTANTS", "PatternCatalogEntry", "PropertyFamily", "UnknownPattern",
           "expand_properties", "get_mutant", "get_pattern", "get_spec"]
