"""Singleton: a pool of three potential instances of one component type.

The environment raises requests, picks which instance would serve one and
releases the active instance at will. An instance activates only when it
is picked and no other instance is active, so at most one is active at a
time (the "none or one" reading). Identity may change across activation
cycles; the stronger reading is available as `s2_strict`, which fails.
"""

from __future__ import annotations

from ..model import Active, ArchitectureSpec, LAnd, LNot, PatternSpec, Property
from ._build import (
    BOOL, F, G, add, and_, at, behavior, case, choice, component, define, env, eq,
    interface, le, limplies, lor, not_, or_, rng,
)

INSTANCES = ("s1", "s2", "s3")

SINGLETON = interface(
    "singleton",
    ("in", "id", rng(1, 3)),
    ("in", "request", BOOL),
    ("in", "pick", rng(1, 3)),
    ("in", "others_active", BOOL),
    ("in", "release", BOOL),
    ("out", "active", BOOL),
)


def singleton_behavior(guarded: bool = True):
    grant = and_("request", eq("pick", "id"), not_("others_active")) if guarded \
        else and_("request", eq("pick", "id"))
    return behavior(
        "singleton", ["inactive", "on"], "inactive",
        trans=[("inactive", "on", grant),
               ("on", "inactive", "release")],
        defines=[("active", at("on"))],
    )


def architecture() -> ArchitectureSpec:
    comps = []
    for k, name in enumerate(INSTANCES):
        others = [f"{o}.active" for o in INSTANCES if o != name]
        comps.append(component(name, "singleton", id=k + 1, request="request", pick="pick",
                               others_active=or_(*others), release="release"))
    flags = [case((f"{s}.active", 1), (True, 0)) for s in INSTANCES]
    count = add(add(flags[0], flags[1]), flags[2])
    return ArchitectureSpec(
        tuple(comps),
        (env("request", BOOL, False, choice(False, True)),
         env("pick", rng(1, 3), 1, choice(1, 2, 3)),
         env("release", BOOL, False, choice(False, True))),
        (define("active_count", count),
         define("granted", or_(*(f"{s}.active" for s in INSTANCES)))),
    )


def s1():
    """Whenever an instance is required, one is eventually active."""
    return G(limplies("request", F("granted")))


def s2():
    """At most one instance is active at any time."""
    return G(le("active_count", 1))


def s2_strict():
    """Once an instance has been active, no other instance is ever active."""
    parts = []
    for s in INSTANCES:
        others = lor(*(Active(o) for o in INSTANCES if o != s))
        parts.append(G(limplies(Active(s), G(LNot(others)))))
    return LAnd(LAnd(parts[0], parts[1]), parts[2])


def properties():
    return (Property("S1", s1()), Property("S2", s2()))


def build(guarded: bool = True, name: str = "singleton") -> PatternSpec:
    return PatternSpec(name, (SINGLETON,), (singleton_behavior(guarded),), architecture(),
                       properties())


def mutant_grant() -> PatternSpec:
    """Activation no longer waits for the other instances to be inactive."""
    return build(False, "singleton_mutant_grant")
