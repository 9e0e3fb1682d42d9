"""Shared test utilities: random small specs and a brute-force LTL oracle."""

from __future__ import annotations

import random

from archpat.certify import NaiveObserver, atom_value, eval_lasso
from archpat.model import (
    ArchitectureSpec, Atom, EnumLit, Finally, Globally, LAnd, LImplies, LNot, LOr, LtlFormula,
    Next, PatternSpec, Until, ltl_children,
)
from archpat.patterns._build import (
    BOOL, E, and_, at, behavior, case, choice, component, define, env, eq, interface, ne, not_,
    or_, rng,
)
from archpat.semantics import compile_system, explore


def random_spec(r: random.Random, name: str = "rand") -> PatternSpec:
    """One or two small components driven by a boolean environment input."""
    n_comp = r.choice((1, 1, 2))
    ifaces, behaviors, comps = [], [], []
    for c in range(n_comp):
        iname = f"m{c}"
        states = ["a", "b", "c"][: r.choice((2, 2, 3))]
        ifaces.append(interface(iname, ("in", "e", BOOL), ("local", "x", rng(0, 1)),
                                ("out", "o", BOOL)))
        guards = ["e", not_("e"), eq("x", 1), eq("x", 0), True, and_("e", eq("x", 0))]
        trans = []
        for s in states:
            for _ in range(r.choice((0, 1, 1, 2))):
                trans.append((s, r.choice(states), r.choice(guards)))
        x_next = r.choice([
            case((at(states[0]), 1), (True, 0)),
            case(("e", 1), (True, "x")),
            case((eq("x", 1), 0), (True, 1)),
            "x",
        ])
        o_def = r.choice([at(states[-1]), eq("x", 1), and_("e", at(states[0])), ne("x", 0)])
        behaviors.append(behavior(iname, states, states[0], inits=[("x", r.choice((0, 1)))],
                                  trans=trans, nexts=[("x", x_next)], defines=[("o", o_def)]))
        comps.append(component(f"c{c}", iname, e="e" if c == 0 else "c0.o"))
    arch = ArchitectureSpec(tuple(comps), (env("e", BOOL, r.choice((False, True)),
                                               choice(False, True)),),
                            (define("any", or_(*(f"c{c}.o" for c in range(n_comp)))),))
    return PatternSpec(name, tuple(ifaces), tuple(behaviors), arch, ())


def _atoms(spec: PatternSpec) -> list[LtlFormula]:
    out = [Atom(E(x)) for x in ("e", "any", "c0.o", "c0.x")]
    last = spec.behaviors[0].control_states[-1]
    out.append(Atom(eq("c0.controlState", EnumLit(last))))
    return out


def random_formula(r: random.Random, spec: PatternSpec, temporal: int = 2,
                   atoms: list[LtlFormula] | None = None) -> LtlFormula:
    """A formula with at most `temporal` temporal operators."""
    atoms = atoms or _atoms(spec)

    def atom():
        a = r.choice(atoms)
        return LNot(a) if r.random() < 0.3 else a

    def gen(budget: int) -> tuple[LtlFormula, int]:
        if budget == 0 or r.random() < 0.25:
            return atom(), 0
        k = r.randrange(7)
        if k == 0:
            x, used = gen(budget - 1)
            return Globally(x), used + 1
        if k == 1:
            x, used = gen(budget - 1)
            return Finally(x), used + 1
        if k == 2:
            x, used = gen(budget - 1)
            return Next(x), used + 1
        if k == 3:
            a, ua = gen((budget - 1) // 2)
            b, ub = gen(budget - 1 - ua)
            return Until(a, b), ua + ub + 1
        node = (LAnd, LOr, LImplies, LNot)[k - 4]
        if node is LNot:
            x, used = gen(budget)
            return LNot(x), used
        a, ua = gen(budget)
        b, ub = gen(budget - ua)
        return node(a, b), ua + ub

    f, _ = gen(temporal)
    return f


def count_temporal(f: LtlFormula) -> int:
    own = isinstance(f, (Globally, Finally, Next, Until))
    return own + sum(count_temporal(c) for c in ltl_children(f))


def brute_force_holds(spec: PatternSpec, f: LtlFormula, max_len: int) -> tuple[bool, tuple | None]:
    """Enumerate every lasso of length <= max_len from an initial state.

    Returns (holds, witness) where witness is (states, loop) for a violation.
    Atoms are evaluated with the recursive observer, formulas directly on
    the lasso; no automata are involved.
    """
    system = compile_system(spec)
    g = explore(system, keep_frames=False)
    obs = NaiveObserver(spec)
    sigs = [obs.signals(system.to_mapping(s)) for s in g.states]
    memo: dict = {}

    def av(a, i):
        key = (a, i)
        if key not in memo:
            memo[key] = atom_value(spec, a, sigs[i])
        return memo[key]

    path: list[int] = []

    def dfs(v: int):
        path.append(v)
        try:
            for w in g.succ[v]:
                for j, u in enumerate(path):
                    if u == w:
                        ids = list(path)
                        if not eval_lasso(f, len(ids), j, lambda a, i: av(a, ids[i])):
                            return ([g.states[k] for k in ids], j)
                if len(path) < max_len:
                    hit = dfs(w)
                    if hit:
                        return hit
        finally:
            path.pop()
        return None

    for s in sorted(set(g.initial)):
        hit = dfs(s)
        if hit:
            return False, hit
    return True, None


def path_count(spec: PatternSpec, max_len: int) -> int:
    """Number of paths with at most `max_len` states from an initial state."""
    g = explore(compile_system(spec), keep_frames=False)
    ways = {s: 1 for s in set(g.initial)}
    total = sum(ways.values())
    for _ in range(max_len - 1):
        nxt: dict[int, int] = {}
        for v, k in ways.items():
            for w in g.succ[v]:
                nxt[w] = nxt.get(w, 0) + k
        ways = nxt
        total += sum(ways.values())
    return total


def oracle_cases(count: int, seed: int = 0, per_spec: int = 3, budget: int = 20_000):
    """Random (spec, formulas, bound) triples small enough for `brute_force_holds`.

    Specs are drawn until their lasso enumeration fits the budget; the
    selection looks at sizes only, never at verdicts.
    """
    r = random.Random(seed)
    out = []
    while len(out) < count:
        spec = random_spec(r, f"rand{len(out)}")
        g = explore(compile_system(spec), keep_frames=False)
        bound = len(g.states) + 2
        if path_count(spec, bound) > budget:
            continue
        formulas = [random_formula(r, spec) for _ in range(per_spec)]
        out.append((spec, formulas, bound))
    return out


_VERDICTS: dict[str, list] = {}


def pattern_verdicts(name: str) -> list:
    """check_all on a built-in spec, computed once per test session."""
    from archpat import check_all
    from archpat.patterns import get_spec
    if name not in _VERDICTS:
        _VERDICTS[name] = check_all(get_spec(name))
    return _VERDICTS[name]


# criterion number -> (PASS | FAIL | SKIP, title, detail); printed by conftest
ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


class criterion:
    """Record the outcome of the enclosed block as an acceptance line."""

    def __init__(self, n: int, title: str):
        self.n, self.title, self.detail = n, title, ""

    def __enter__(self):
        return self

    def __exit__(self, kind, exc, tb):
        import pytest
        if kind is None:
            ACCEPTANCE[self.n] = ("PASS", self.title, self.detail)
        elif issubclass(kind, pytest.skip.Exception):
            ACCEPTANCE[self.n] = ("SKIP", self.title, str(exc))
        else:
            ACCEPTANCE[self.n] = ("FAIL", self.title, f"{kind.__name__}: {exc}"[:200])
        return False
