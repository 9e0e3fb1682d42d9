"""LTL to Büchi automata via the tableau construction of Gerth, Peled,
Vardi and Wolper, followed by degeneralization.

Formulas are first brought into negation normal form over a small
internal algebra (`_Lit`, `_And`, `_Or`, `_X`, `_U`, `_R`). Tableau nodes
carry the literals that must hold at the position where the node is
current, so every transition into a node is guarded by those literals and
reads the letter of the position it enters. States that cannot reach an
accepting cycle are pruned and bisimilar states merged.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count

from .model import (
    LTL_ATOMS, Atom, BoolLit, Finally, Globally, LAnd, LImplies, LNot, LOr,
    LtlFormula, Next, Until,
)


@dataclass(frozen=True)
class _Const:
    value: bool


@dataclass(frozen=True)
class _Lit:
    atom: int
    positive: bool


@dataclass(frozen=True)
class _And:
    a: object
    b: object


@dataclass(frozen=True)
class _Or:
    a: object
    b: object


@dataclass(frozen=True)
class _X:
    a: object


@dataclass(frozen=True)
class _U:
    a: object
    b: object


@dataclass(frozen=True)
class _R:
    a: object
    b: object


TRUE, FALSE = _Const(True), _Const(False)


def _and(a, b):
    if a == FALSE or b == FALSE:
        return FALSE
    if a == TRUE:
        return b
    if b == TRUE or a == b:
        return a
    return _And(a, b)


def _or(a, b):
    if a == TRUE or b == TRUE:
        return TRUE
    if a == FALSE:
        return b
    if b == FALSE or a == b:
        return a
    return _Or(a, b)


def _until(a, b):
    if b in (TRUE, FALSE):
        return b
    return _U(a, b)


def _release(a, b):
    if b in (TRUE, FALSE):
        return b
    return _R(a, b)


def _next(a):
    return a if isinstance(a, _Const) else _X(a)


class AtomTable:
    """Interns LTL atoms; identical atoms share one index."""

    def __init__(self):
        self.atoms: list[LtlFormula] = []
        self._index: dict[LtlFormula, int] = {}

    def intern(self, a: LtlFormula) -> int:
        if a not in self._index:
            self._index[a] = len(self.atoms)
            self.atoms.append(a)
        return self._index[a]


def to_nnf(f: LtlFormula, table: AtomTable, negate: bool = False):
    """Negation normal form; boolean literal atoms fold to constants."""
    match f:
        case Atom(BoolLit(v)):
            return _Const(v != negate)
        case _ if isinstance(f, LTL_ATOMS):
            return _Lit(table.intern(f), not negate)
        case LNot(x):
            return to_nnf(x, table, not negate)
        case LAnd(a, b):
            na, nb = to_nnf(a, table, negate), to_nnf(b, table, negate)
            return _or(na, nb) if negate else _and(na, nb)
        case LOr(a, b):
            na, nb = to_nnf(a, table, negate), to_nnf(b, table, negate)
            return _and(na, nb) if negate else _or(na, nb)
        case LImplies(a, b):
            return to_nnf(LOr(LNot(a), b), table, negate)
        case Next(x):
            return _next(to_nnf(x, table, negate))
        case Finally(x):
            nx = to_nnf(x, table, negate)
            return _release(FALSE, nx) if negate else _until(TRUE, nx)
        case Globally(x):
            nx = to_nnf(x, table, negate)
            return _until(TRUE, nx) if negate else _release(FALSE, nx)
        case Until(a, b):
            na, nb = to_nnf(a, table, negate), to_nnf(b, table, negate)
            return _release(na, nb) if negate else _until(na, nb)
    raise TypeError(f"not an LTL formula: {f!r}")


Guard = tuple[tuple[int, bool], ...]


@dataclass
class BuchiAutomaton:
    """Büchi automaton with guarded transitions.

    A guard is a conjunction of atom literals, given as (atom index,
    polarity) pairs, and is evaluated on the letter read by the transition.
    `init` holds the entry edges that read the first letter; `succ[q]` holds
    the (guard, target) pairs leaving `q`, each reading the next letter.
    """
    atoms: list[LtlFormula]
    states: list[int]
    init: list[tuple[Guard, int]]
    accepting: set[int]
    succ: list[list[tuple[Guard, int]]]

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def initial(self) -> list[int]:
        return sorted({q for _, q in self.init})

    @property
    def transitions(self) -> list[tuple[int | None, Guard, int]]:
        """All edges as (source or None for entry edges, guard, target)."""
        return [(None, g, q) for g, q in self.init] + [
            (p, g, q) for p in self.states for g, q in self.succ[p]]

    @staticmethod
    def holds(guard: Guard, valuation) -> bool:
        return all(bool(valuation[a]) == pos for a, pos in guard)


@dataclass
class _Node:
    name: int
    incoming: set
    new: list
    old: frozenset
    next: frozenset


_INIT = -1


def _tableau(phi) -> tuple[list[_Node], list]:
    ids = count()
    done: dict[tuple[frozenset, frozenset], _Node] = {}
    nodes: list[_Node] = []
    stack = [_Node(next(ids), {_INIT}, [phi], frozenset(), frozenset())]
    while stack:
        node = stack.pop()
        if not node.new:
            key = (node.old, node.next)
            hit = done.get(key)
            if hit is not None:
                hit.incoming |= node.incoming
                continue
            done[key] = node
            nodes.append(node)
            stack.append(_Node(next(ids), {node.name}, list(node.next), frozenset(), frozenset()))
            continue
        eta = node.new.pop()
        if eta in node.old:
            stack.append(node)
            continue
        old = node.old | {eta}
        match eta:
            case _Const(True):
                stack.append(_Node(node.name, node.incoming, node.new, old, node.next))
            case _Const(False):
                pass
            case _Lit(a, pos):
                if _Lit(a, not pos) not in node.old:
                    stack.append(_Node(node.name, node.incoming, node.new, old, node.next))
            case _And(a, b):
                stack.append(_Node(node.name, node.incoming, node.new + [a, b], old, node.next))
            case _X(a):
                stack.append(_Node(node.name, node.incoming, node.new, old, node.next | {a}))
            case _Or(a, b) | _U(a, b) | _R(a, b):
                if isinstance(eta, _Or):
                    first, nxt1, second = [a], frozenset(), [b]
                elif isinstance(eta, _U):
                    first, nxt1, second = [a], frozenset({eta}), [b]
                else:
                    first, nxt1, second = [b], frozenset({eta}), [a, b]
                n1 = _Node(next(ids), set(node.incoming), node.new + first, old, node.next | nxt1)
                n2 = _Node(next(ids), set(node.incoming), node.new + second, old, node.next)
                stack.append(n2)
                stack.append(n1)
    untils = sorted({f for n in nodes for f in n.old if isinstance(f, _U)}, key=repr)
    return nodes, untils


def to_buchi(f: LtlFormula) -> BuchiAutomaton:
    """Büchi automaton accepting exactly the words that satisfy `f`."""
    table = AtomTable()
    phi = to_nnf(f, table)
    nodes, untils = _tableau(phi)
    index = {n.name: i for i, n in enumerate(nodes)}
    labels = []
    for n in nodes:
        lits = sorted((x.atom, x.positive) for x in n.old if isinstance(x, _Lit))
        labels.append(tuple(lits))
    # generalized acceptance: one set per until subformula
    acc_sets = [{index[n.name] for n in nodes if u not in n.old or u.b in n.old}
                for u in untils]
    g_succ: list[list[int]] = [[] for _ in nodes]
    g_init = []
    for n in nodes:
        for src in sorted(n.incoming):
            if src == _INIT:
                g_init.append(index[n.name])
            elif src in index:
                g_succ[index[src]].append(index[n.name])
    k = max(1, len(acc_sets))
    acc_sets = acc_sets or [set(range(len(nodes)))]

    # degeneralize: copies 0..k-1; leave copy i after visiting set i
    ids: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int]] = []

    def sid(n: int, i: int) -> int:
        key = (n, i)
        if key not in ids:
            ids[key] = len(order)
            order.append(key)
        return ids[key]

    initial = [sid(n, 0) for n in sorted(set(g_init))]
    succ: list[list[int]] = []
    i = 0
    while i < len(order):
        n, c = order[i]
        c2 = (c + 1) % k if n in acc_sets[c] else c
        outs = sorted({sid(m, c2) for m in g_succ[n]})
        succ.append(outs)
        i += 1
    accepting = {ids[(n, 0)] for n in acc_sets[0] if (n, 0) in ids}
    aut_labels = [labels[n] for n, _ in order]
    keep = _live_states(len(order), succ, accepting)
    remap = {q: i for i, q in enumerate(keep)}
    init = [(aut_labels[q], remap[q]) for q in initial if q in remap]
    g_edges = [[(aut_labels[r], remap[r]) for r in succ[q] if r in remap] for q in keep]
    return _quotient(table.atoms, init, {remap[q] for q in accepting if q in remap}, g_edges)


def _live_states(n: int, succ: list[list[int]], accepting: set[int]) -> list[int]:
    """States that can reach an accepting cycle, in increasing order."""
    pred: list[list[int]] = [[] for _ in range(n)]
    for p in range(n):
        for q in succ[p]:
            pred[q].append(p)
    comp = _scc(n, succ)
    good_comp = set()
    for q in accepting:
        if any(comp[r] == comp[q] for r in succ[q]):
            good_comp.add(comp[q])
    live = {q for q in range(n) if comp[q] in good_comp}
    stack = list(live)
    while stack:
        q = stack.pop()
        for p in pred[q]:
            if p not in live:
                live.add(p)
                stack.append(p)
    return sorted(live)


def _quotient(atoms, init, accepting, succ) -> BuchiAutomaton:
    """Merge bisimilar states (same acceptance, same guarded moves into the same classes)."""
    n = len(succ)
    cls = [int(q in accepting) for q in range(n)]
    while True:
        sigs = [(cls[q], frozenset((g, cls[r]) for g, r in succ[q])) for q in range(n)]
        ids: dict = {}
        new = [ids.setdefault(sg, len(ids)) for sg in sigs]
        done = len(ids) == len(set(cls))
        cls = new
        if done:
            break
    k = len(set(cls))
    out: list[list[tuple[Guard, int]]] = [[] for _ in range(k)]
    seen = [False] * k
    for q in range(n):
        c = cls[q]
        if not seen[c]:
            seen[c] = True
            out[c] = sorted({(g, cls[r]) for g, r in succ[q]})
    return BuchiAutomaton(atoms, list(range(k)), sorted({(g, cls[q]) for g, q in init}),
                          {cls[q] for q in accepting}, out)


def _scc(n: int, succ: list[list[int]]) -> list[int]:
    """Component id per node (iterative Tarjan)."""
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on[w] = True
                    work.append((w, 0))
                elif on[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return comp


def accepts_lasso(aut: BuchiAutomaton, prefix: list, cycle: list) -> bool:
    """Whether `aut` accepts prefix·cycle^ω, each letter a sequence of atom values."""
    word = list(prefix) + list(cycle)
    n, loop = len(word), len(prefix)

    def nxt(i: int) -> int:
        return i + 1 if i + 1 < n else loop

    # product graph over (position, state); accept iff an accepting cycle is reachable
    start = [(0, q) for g, q in aut.init if aut.holds(g, word[0])]
    seen = set(start)
    stack = list(start)
    edges: dict[tuple[int, int], list[tuple[int, int]]] = {}
    while stack:
        v = stack.pop()
        i, q = v
        j = nxt(i)
        outs = [(j, r) for g, r in aut.succ[q] if aut.holds(g, word[j])]
        edges[v] = outs
        for w in outs:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    nodes = sorted(seen)
    idx = {v: k for k, v in enumerate(nodes)}
    succ = [[idx[w] for w in edges[v]] for v in nodes]
    comp = _scc(len(nodes), succ)
    for v in nodes:
        if v[1] in aut.accepting and v[0] >= loop:
            k = idx[v]
            if any(comp[w] == comp[k] for w in succ[k]):
                return True
    return False
