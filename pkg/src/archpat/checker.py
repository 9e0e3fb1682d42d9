"""Explicit-state LTL model checking.

The reachable state graph of a spec is built once and cached. A property
is checked by translating its negation to a Büchi automaton and searching
the product of graph and automaton for a reachable accepting cycle. Two
emptiness engines share that product:

* ``scc`` (default) builds the product edges with numpy and finds strongly
  connected components with scipy;
* ``ndfs`` runs a nested depth-first search over the same product.

Both return a lasso counterexample when the property fails. Lassos are not
guaranteed to be shortest.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .buchi import BuchiAutomaton, to_buchi
from .model import Active, Atom, Connected, LNot, LtlFormula, PatternSpec
from .semantics import SemanticsError, StateGraph, System, compile_system, explore

DEFAULT_MAX_STATES = 5_000_000
DEFAULT_MAX_TIME = 120.0


@dataclass(frozen=True)
class Limits:
    max_states: int = DEFAULT_MAX_STATES
    max_time: float = DEFAULT_MAX_TIME


@dataclass
class Stats:
    product_states: int = 0
    time_ms: float = 0.0
    system_states: int = 0
    buchi_states: int = 0


@dataclass
class Lasso:
    """A run `prefix · cycle^ω`; the cycle is non-empty."""
    prefix: list[tuple]
    cycle: list[tuple]

    @property
    def states(self) -> list[tuple]:
        return list(self.prefix) + list(self.cycle)


@dataclass
class Verdict:
    holds: bool
    counterexample: Lasso | None = None
    stats: Stats = field(default_factory=Stats)


class Inconclusive(Exception):
    """A state or time limit was hit before a verdict was reached."""

    def __init__(self, reason: str, stats: Stats | None = None):
        super().__init__(reason)
        self.reason = reason
        self.stats = stats or Stats()

    def __reduce__(self):
        return (Inconclusive, (self.reason, self.stats))


class UnknownProperty(KeyError):
    pass


# ---------------------------------------------------------------- state graph

@dataclass
class _Graph:
    system: System
    graph: StateGraph
    src: np.ndarray
    dst: np.ndarray
    init: np.ndarray
    seconds: float


_GRAPHS: dict[int, tuple[PatternSpec, _Graph]] = {}


def state_graph(spec: PatternSpec, limits: Limits, deadline: float | None = None) -> _Graph:
    """The full reachable graph, or Inconclusive when it exceeds the limits."""
    hit = _GRAPHS.get(id(spec))
    if hit is not None and hit[0] is spec:
        g = hit[1]
        if len(g.graph.states) > limits.max_states:
            raise Inconclusive(f"more than {limits.max_states} reachable states",
                               Stats(system_states=limits.max_states))
        if g.seconds > limits.max_time:
            raise Inconclusive(f"state space exploration exceeded {limits.max_time} s",
                               Stats(system_states=len(g.graph.states)))
        return g
    system = compile_system(spec)
    t0 = time.monotonic()
    if deadline is None:
        deadline = t0 + limits.max_time
    g = explore(system, max_states=limits.max_states, deadline=deadline, stop_on_error=True)
    seconds = time.monotonic() - t0
    if not g.exhausted:
        if len(g.states) >= limits.max_states:
            raise Inconclusive(f"more than {limits.max_states} reachable states",
                               Stats(system_states=len(g.states)))
        raise Inconclusive(f"state space exploration exceeded {limits.max_time} s",
                           Stats(system_states=len(g.states)))
    lens = np.fromiter((len(x) for x in g.succ), dtype=np.int64, count=len(g.succ))
    src = np.repeat(np.arange(len(g.succ), dtype=np.int64), lens)
    dst = np.fromiter((j for x in g.succ for j in x), dtype=np.int64, count=int(lens.sum()))
    out = _Graph(system, g, src, dst, np.array(sorted(set(g.initial)), dtype=np.int64), seconds)
    if len(_GRAPHS) > 8:
        _GRAPHS.clear()
    _GRAPHS[id(spec)] = (spec, out)
    return out


def atom_mask(g: _Graph, atom: LtlFormula) -> np.ndarray:
    """Truth value of an atomic proposition in every reachable state."""
    system = g.system
    n = len(g.graph.states)
    match atom:
        case Atom(expr):
            fn = system._scoped(None, "property").compile(expr)
            out = np.empty(n, dtype=bool)
            for i, fr in enumerate(g.graph.frames):
                try:
                    out[i] = bool(fn(fr))
                except SemanticsError as err:
                    err.state = g.graph.states[i]
                    raise
            return out
        case Active(inst):
            slot = system.index.get(f"{inst}.active")
            if slot is None:
                return np.ones(n, dtype=bool)
            return np.fromiter((bool(fr[slot]) for fr in g.graph.frames), dtype=bool, count=n)
        case Connected(a, b):
            return np.full(n, system.connected(str(a), str(b)), dtype=bool)
    raise TypeError(f"not an atom: {atom!r}")


def _guard_masks(g: _Graph, aut: BuchiAutomaton) -> dict:
    """Truth of every transition guard in every reachable state."""
    masks = [atom_mask(g, a) for a in aut.atoms]
    n = len(g.graph.states)
    out = {}
    for _, guard, _ in aut.transitions:
        if guard not in out:
            m = np.ones(n, dtype=bool)
            for a, pos in guard:
                m &= masks[a] if pos else ~masks[a]
            out[guard] = m
    return out


# ---------------------------------------------------------------- emptiness

def _product_scc(g: _Graph, aut: BuchiAutomaton, guards: dict, limits: Limits):
    nq = aut.size
    n = len(g.graph.states)
    total = n * nq
    rows, cols = [], []
    for q in range(nq):
        for guard, r in aut.succ[q]:
            sel = guards[guard][g.dst]
            rows.append(g.src[sel] * nq + q)
            cols.append(g.dst[sel] * nq + r)
    init = [int(s) * nq + q for s in g.init for guard, q in aut.init if guards[guard][s]]
    # virtual root `total` points at every initial product state
    rows.append(np.full(len(init), total, dtype=np.int64))
    cols.append(np.array(init, dtype=np.int64))
    r = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    mat = csr_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(total + 1, total + 1))
    mat.sum_duplicates()
    order, pred = breadth_first_order(mat, total, directed=True, return_predecessors=True)
    reach = order[order != total]
    n_reach = len(reach)
    if n_reach > limits.max_states:
        raise Inconclusive(f"more than {limits.max_states} product states",
                           Stats(product_states=n_reach, system_states=n, buchi_states=nq))
    if n_reach == 0:
        return n_reach, None
    sub = mat[reach][:, reach]
    _, comp = connected_components(sub, directed=True, connection="strong")
    sizes = np.bincount(comp)
    diag = sub.diagonal() != 0
    acc = np.zeros(nq, dtype=bool)
    acc[list(aut.accepting)] = True
    is_acc = acc[reach % nq]
    cyclic = (sizes[comp] > 1) | diag
    cand = np.flatnonzero(is_acc & cyclic)
    if len(cand) == 0:
        return n_reach, None
    # earliest accepting node in BFS order gives a short prefix
    pos = np.full(total + 1, -1, dtype=np.int64)
    pos[order] = np.arange(len(order))
    k = int(cand[np.argmin(pos[reach[cand]])])
    seed = int(reach[k])
    prefix = []
    v = int(pred[seed])
    while v != total and v >= 0:
        prefix.append(v)
        v = int(pred[v])
    prefix.reverse()
    # shortest path from the seed back to itself inside its component
    members = np.flatnonzero(comp == comp[k])
    local = sub[members][:, members]
    li = int(np.flatnonzero(members == k)[0])
    if diag[k]:
        cycle = [seed]
    else:
        order2, pred2 = breadth_first_order(local, li, directed=True, return_predecessors=True)
        back = local[:, li].nonzero()[0]
        depth = np.full(len(members), -1, dtype=np.int64)
        depth[order2] = np.arange(len(order2))
        back = [int(b) for b in back if depth[b] >= 0]
        last = min(back, key=lambda b: depth[b])
        path = [last]
        while path[-1] != li:
            path.append(int(pred2[path[-1]]))
        path.reverse()
        cycle = [int(reach[members[x]]) for x in path]
    return n_reach, (prefix, cycle)


def _product_ndfs(g: _Graph, aut: BuchiAutomaton, guards: dict, limits: Limits,
                  deadline: float):
    nq = aut.size
    succ_sys = g.graph.succ
    lab = {k: m.tolist() for k, m in guards.items()}
    acc = aut.accepting

    def succ(v: int) -> list[int]:
        s, q = divmod(v, nq)
        out = dict.fromkeys(t * nq + r for t in succ_sys[s] for guard, r in aut.succ[q]
                            if lab[guard][t])
        return list(out)

    roots = list(dict.fromkeys(int(s) * nq + q for s in g.init for guard, q in aut.init
                               if lab[guard][s]))
    blue: set[int] = set()
    red: set[int] = set()
    for root in roots:
        if root in blue:
            continue
        blue.add(root)
        stack = [root]
        iters = [iter(succ(root))]
        on_stack = {root: 0}
        while stack:
            v = stack[-1]
            w = next(iters[-1], None)
            if w is not None:
                if w not in blue:
                    blue.add(w)
                    if len(blue) > limits.max_states:
                        raise Inconclusive(f"more than {limits.max_states} product states",
                                           Stats(product_states=len(blue)))
                    if len(blue) % 4096 == 0 and time.monotonic() > deadline:
                        raise Inconclusive(f"search exceeded {limits.max_time} s",
                                           Stats(product_states=len(blue)))
                    on_stack[w] = len(stack)
                    stack.append(w)
                    iters.append(iter(succ(w)))
                continue
            if v % nq in acc:
                found = _red_search(v, succ, red, on_stack)
                if found is not None:
                    target, path = found
                    i = on_stack[target]
                    prefix = stack[:i]
                    cycle = stack[i:] + path[:-1]
                    return len(blue), (prefix, cycle)
            stack.pop()
            iters.pop()
            del on_stack[v]
    return len(blue), None


def _red_search(seed: int, succ, red: set[int], on_stack: dict[int, int]):
    """Look for a path from `seed` back to the blue stack; returns (target, path)."""
    parent = {seed: None}
    stack = [seed]
    iters = [iter(succ(seed))]
    while stack:
        w = next(iters[-1], None)
        if w is None:
            stack.pop()
            iters.pop()
            continue
        if w in on_stack:
            path = [w]
            v = stack[-1]
            while v is not None:
                path.append(v)
                v = parent[v]
            path.reverse()  # seed ... w
            return w, path[1:] if path[0] == seed and len(path) > 1 else path
        if w not in red:
            red.add(w)
            parent[w] = stack[-1]
            stack.append(w)
            iters.append(iter(succ(w)))
    return None


# ---------------------------------------------------------------- public API

def check_formula(spec: PatternSpec, f: LtlFormula, limits: Limits | None = None,
                  engine: str = "scc") -> Verdict:
    """Decide whether every run of `spec` satisfies `f`."""
    limits = limits or Limits()
    t0 = time.monotonic()
    deadline = t0 + limits.max_time
    g = state_graph(spec, limits, deadline)
    aut = to_buchi(LNot(f))
    n = len(g.graph.states)
    if aut.size == 0 or not aut.init:
        stats = Stats(0, (time.monotonic() - t0) * 1000, n, aut.size)
        return Verdict(True, None, stats)
    guards = _guard_masks(g, aut)
    if engine == "scc":
        product, found = _product_scc(g, aut, guards, limits)
    elif engine == "ndfs":
        product, found = _product_ndfs(g, aut, guards, limits, deadline)
    else:
        raise ValueError(f"unknown engine '{engine}'")
    stats = Stats(product, (time.monotonic() - t0) * 1000, n, aut.size)
    if time.monotonic() > deadline:
        raise Inconclusive(f"check exceeded {limits.max_time} s", stats)
    if found is None:
        return Verdict(True, None, stats)
    prefix, cycle = found
    states = g.graph.states
    nq = aut.size
    lasso = Lasso([states[v // nq] for v in prefix], [states[v // nq] for v in cycle])
    return Verdict(False, lasso, stats)


def check_property(spec: PatternSpec, prop_name: str, limits: Limits | None = None,
                   engine: str = "scc") -> Verdict:
    prop = spec.property(prop_name)
    if prop is None:
        raise UnknownProperty(prop_name)
    return check_formula(spec, prop.formula, limits, engine)


def _check_one(args):
    spec, name, limits, engine = args
    try:
        return check_property(spec, name, limits, engine)
    except (Inconclusive, SemanticsError, UnknownProperty) as err:
        return err


_WORKER_SPEC: PatternSpec | None = None


def _init_worker(spec: PatternSpec) -> None:
    # one spec object per worker process so its state graph is explored once
    global _WORKER_SPEC
    _WORKER_SPEC = spec


def _check_in_worker(args):
    name, limits, engine = args
    return _check_one((_WORKER_SPEC, name, limits, engine))


def check_all(spec: PatternSpec, limits: Limits | None = None, workers: int = 1,
              names: list[str] | None = None, engine: str = "scc"):
    """Check properties in declaration order.

    Returns ``(name, result)`` pairs where result is a `Verdict` or the
    exception that prevented one. Results do not depend on `workers`.
    """
    limits = limits or Limits()
    names = [p.name for p in spec.properties] if names is None else list(names)
    if workers <= 1 or len(names) <= 1:
        results = [_check_one((spec, n, limits, engine)) for n in names]
    else:
        jobs = [(n, limits, engine) for n in names]
        with ProcessPoolExecutor(max_workers=min(workers, len(names)), initializer=_init_worker,
                                 initargs=(spec,)) as pool:
            results = list(pool.map(_check_in_worker, jobs))
    return list(zip(names, results))
