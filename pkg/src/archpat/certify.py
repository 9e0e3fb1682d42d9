"""Independent counterexample certification.

`verify_lasso` replays a lasso against the transition relation and then
evaluates the formula directly on the ultimately periodic word, with no
automata involved. Atoms are evaluated by the reference interpreter in
`semantics.eval_expr`, resolving combinational signals on demand instead
of through the compiled dependency order.
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

from .model import (
    Active, Atom, Connected, Finally, Globally, LAnd, LImplies, LNot,
    LOr, LtlFormula, Next, PatternSpec, PortRef, Until, ArraySort, port_refs,
)
from .semantics import SemanticsError, compile_system, eval_expr


def eval_lasso(f: LtlFormula, n: int, loop: int, atom: Callable[[LtlFormula, int], bool]) -> bool:
    """Truth of `f` at position 0 of a word with `n` positions looping back to `loop`.

    `atom(a, i)` gives the value of atomic formula `a` at position `i`.
    """
    succ = [i + 1 for i in range(n)]
    succ[-1] = loop

    def ev(f) -> list[bool]:
        match f:
            case LNot(x):
                return [not v for v in ev(x)]
            case LAnd(a, b):
                return [x and y for x, y in zip(ev(a), ev(b))]
            case LOr(a, b):
                return [x or y for x, y in zip(ev(a), ev(b))]
            case LImplies(a, b):
                return [(not x) or y for x, y in zip(ev(a), ev(b))]
            case Next(x):
                v = ev(x)
                return [v[succ[i]] for i in range(n)]
            case Until(a, b):
                return _until(ev(a), ev(b))
            case Finally(x):
                return _until([True] * n, ev(x))
            case Globally(x):
                return [not v for v in _until([True] * n, [not v for v in ev(x)])]
        return [bool(atom(f, i)) for i in range(n)]

    def _until(va: list[bool], vb: list[bool]) -> list[bool]:
        # least fixpoint of  u = b | (a & X u)
        u = list(vb)
        changed = True
        while changed:
            changed = False
            for i in range(n - 1, -1, -1):
                if not u[i] and va[i] and u[succ[i]]:
                    u[i] = True
                    changed = True
        return u

    return ev(f)[0]


class NaiveObserver:
    """Resolves every signal of a state by recursive evaluation, without caching
    across states and without relying on a precomputed evaluation order."""

    def __init__(self, spec: PatternSpec):
        self.spec = spec
        arch = spec.architecture
        self.defs = {d.target: d.expr for d in arch.shared_defs}
        self.bind = {}
        self.outs = {}
        self.array_lo: dict[str, int] = {}
        for inst in arch.instances:
            iface = spec.interface(inst.interface)
            b = spec.behavior(inst.interface)
            for a in inst.bindings:
                self.bind[f"{inst.name}.{a.target}"] = a.expr
            for a in b.output_defs:
                self.outs[f"{inst.name}.{a.target}"] = (inst.name, a.expr)
            for p in iface.ports:
                if isinstance(p.sort, ArraySort):
                    self.array_lo[f"{inst.name}.{p.name}"] = p.sort.index_lo
        for v in arch.env_vars:
            if isinstance(v.sort, ArraySort):
                self.array_lo[v.name] = v.sort.index_lo

    def signals(self, state: Mapping[str, object]) -> dict[str, object]:
        values = dict(state)
        busy: set[str] = set()

        def need(name: str):
            if name in values:
                return
            if name in busy:
                raise SemanticsError("combinational cycle", name)
            busy.add(name)
            if name in self.defs:
                expr, inst = self.defs[name], None
            elif name in self.bind:
                expr, inst = self.bind[name], None
            elif name in self.outs:
                inst, expr = self.outs[name]
            else:
                raise SemanticsError(f"unresolved name '{name}'")
            for ref in port_refs(expr):
                need(_qualify(ref, inst))
            values[name] = eval_expr(expr, values, instance=inst, index_base=self.array_lo)

        for name in list(self.defs) + list(self.bind) + list(self.outs):
            need(name)
        return values


def _qualify(ref: PortRef, inst: str | None) -> str:
    if ref.instance is not None:
        return f"{ref.instance}.{ref.port}"
    return f"{inst}.{ref.port}" if inst is not None else ref.port


def atom_value(spec: PatternSpec, a: LtlFormula, signals: Mapping[str, object]) -> bool:
    """Value of an atomic proposition given every signal of a state."""
    match a:
        case Atom(expr):
            base = NaiveObserver(spec).array_lo
            return bool(eval_expr(expr, signals, index_base=base))
        case Active(inst):
            key = f"{inst}.active"
            return bool(signals[key]) if key in signals else True
        case Connected(p, q):
            return compile_system(spec).connected(str(p), str(q))
    raise TypeError(f"not an atom: {a!r}")


def word_violates(spec: PatternSpec, f: LtlFormula, states: Sequence[tuple], loop: int) -> bool:
    system = compile_system(spec)
    obs = NaiveObserver(spec)
    sigs = [obs.signals(system.to_mapping(s)) for s in states]
    return not eval_lasso(f, len(states), loop, lambda a, i: atom_value(spec, a, sigs[i]))


def verify_lasso(spec: PatternSpec, f: LtlFormula, lasso) -> bool:
    """True iff `lasso` is a run of `spec` whose infinite word violates `f`."""
    return diagnose_lasso(spec, f, lasso) is None


def diagnose_lasso(spec: PatternSpec, f: LtlFormula, lasso) -> str | None:
    """None for a certified counterexample, otherwise the reason it is rejected."""
    try:
        system = compile_system(spec)
        prefix = [tuple(s) for s in lasso.prefix]
        cycle = [tuple(s) for s in lasso.cycle]
        if not cycle:
            return "empty cycle"
        word = prefix + cycle
        for s in word:
            if len(s) != system.n_state:
                return "state has the wrong number of components"
        if word[0] not in system.initial_states():
            return "first state is not initial"
        for i in range(len(word)):
            a = word[i]
            b = word[i + 1] if i + 1 < len(word) else cycle[0]
            if b not in system.next_states(a):
                where = ("cycle wrap-around" if i + 1 == len(word)
                         else "prefix-to-cycle seam" if i + 1 == len(prefix)
                         else f"step {i} -> {i + 1}")
                return f"not a transition at {where}"
        if not word_violates(spec, f, word, len(prefix)):
            return "trace satisfies the formula"
    except (SemanticsError, KeyError, TypeError, IndexError) as err:
        return f"evaluation failed: {err}"
    return None
