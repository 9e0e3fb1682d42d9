"""Execution semantics: synchronous composition of Mealy components.

A global state is a flat tuple of values laid out by `System.names`:
for every instance (declaration order) its control state followed by its
local ports, then every environment variable. Values are plain Python
objects: ``bool``, ``int``, ``str`` (enum labels) and tuples (arrays), so
states hash and compare canonically.

Outputs, inputs and shared defines are combinational. Each step evaluates
them at the current state in dependency order, fires the first enabled
transition of every component (or stutters), applies local updates and
environment `next` expressions, and expands every set choice into one
successor per value.
"""

from __future__ import annotations

import itertools
import operator
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from .model import (
    CONTROL, ArrayLit, ArraySort, BinOp, BoolLit, BoolSort, Case, EnumLit,
    EnumSort, Expr, Index, IntLit, IntRange, PatternSpec, PortRef, SetChoice,
    SortType, UnOp,
)
from .validate import dependency_graph, strongly_connected

Value = Any  # bool | int | str | tuple
GlobalState = tuple
Frame = list


class SemanticsError(Exception):
    """Evaluation failure attributed to a component port or variable."""

    def __init__(self, message: str, where: str | None = None, state: GlobalState | None = None):
        super().__init__(message)
        self.where = where
        self.state = state

    def __str__(self) -> str:
        base = super().__str__()
        return f"{self.where}: {base}" if self.where else base

    def __reduce__(self):
        return (type(self), (self.args[0], self.where, self.state))


class RangeError(SemanticsError):
    pass


class MissingBranch(SemanticsError):
    pass


@dataclass(frozen=True)
class StepLabel:
    outputs: dict = field(default_factory=dict)  # (instance, port) -> Value
    inputs: dict = field(default_factory=dict)


@dataclass
class ReachabilityReport:
    states_visited: int
    frontier_exhausted: bool
    sample_violations: list = field(default_factory=list)


# ---------------------------------------------------------------- reference interpreter

def c_mod(a: int, b: int) -> int:
    """Remainder with the sign of the dividend (SMV/C semantics)."""
    if b == 0:
        raise RangeError("modulo by zero")
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul, "mod": c_mod}
_CMP = {"=": operator.eq, "!=": operator.ne, "<": operator.lt, "<=": operator.le,
        ">": operator.gt, ">=": operator.ge}


def eval_expr(e: Expr, state: Mapping[str, Value], label: Mapping[str, Value] | None = None,
              instance: str | None = None, index_base: Mapping[str, int] | None = None) -> Value:
    """Evaluate an expression by walking the tree.

    `state` and `label` map qualified names (``"model.data"``, ``"random"``)
    to values; bare port names are qualified with `instance`. Array index
    ranges default to starting at 0 unless `index_base` says otherwise.
    Set choices are rejected: they only make sense when enumerating
    successors.
    """
    label = label or {}

    def lookup(ref: PortRef) -> Value:
        if ref.instance is not None:
            key = f"{ref.instance}.{ref.port}"
        elif instance is not None:
            key = f"{instance}.{ref.port}"
        else:
            key = ref.port
        if key in label:
            return label[key]
        if key in state:
            return state[key]
        raise SemanticsError(f"unresolved name '{key}'")

    def base_of(e: Expr) -> int:
        if index_base and isinstance(e, PortRef):
            key = str(e) if e.instance or instance is None else f"{instance}.{e.port}"
            return index_base.get(key, 0)
        return 0

    def ev(e: Expr) -> Value:
        match e:
            case BoolLit(v) | IntLit(v):
                return v
            case EnumLit(label_):
                return label_
            case ArrayLit(items):
                return tuple(ev(x) for x in items)
            case PortRef():
                return lookup(e)
            case Index(base, idx):
                arr = ev(base)
                i = ev(idx) - base_of(base)
                if not 0 <= i < len(arr):
                    raise RangeError(f"index {i + base_of(base)} out of bounds")
                return arr[i]
            case UnOp("!", x):
                return not ev(x)
            case UnOp("-", x):
                return -ev(x)
            case BinOp("&", a, b):
                return ev(a) and ev(b)
            case BinOp("|", a, b):
                return ev(a) or ev(b)
            case BinOp("->", a, b):
                return (not ev(a)) or ev(b)
            case BinOp(op, a, b) if op in _ARITH:
                return _ARITH[op](ev(a), ev(b))
            case BinOp(op, a, b) if op in _CMP:
                return _CMP[op](ev(a), ev(b))
            case Case(branches):
                for c, v in branches:
                    if ev(c):
                        return ev(v)
                raise MissingBranch("no case branch is true")
            case SetChoice():
                raise SemanticsError("set choice cannot be evaluated to a single value")
        raise SemanticsError(f"cannot evaluate {type(e).__name__}")

    return ev(e)


def conforms(sort: SortType, v: Value) -> bool:
    match sort:
        case BoolSort():
            return v is True or v is False
        case IntRange(lo, hi):
            return type(v) is int and lo <= v <= hi
        case EnumSort(labels):
            return v in labels
        case ArraySort(lo, hi, el):
            return (isinstance(v, tuple) and len(v) == hi - lo + 1
                    and all(conforms(el, x) for x in v))
    return False


# ---------------------------------------------------------------- compiler

def _const(v):
    return lambda fr: v


def _checker(sort: SortType) -> Callable[[Value], bool]:
    match sort:
        case BoolSort():
            return lambda v: v is True or v is False
        case IntRange(lo, hi):
            return lambda v: type(v) is int and lo <= v <= hi
        case EnumSort(labels):
            s = frozenset(labels)
            return lambda v: v in s
        case ArraySort(lo, hi, el):
            n = hi - lo + 1
            inner = _checker(el)
            return lambda v: isinstance(v, tuple) and len(v) == n and all(map(inner, v))
    raise TypeError(sort)


class _Compiler:
    """Turns expressions into closures over a frame (a list of values)."""

    def __init__(self, resolve: Callable[[PortRef], int], index_lo: Callable[[PortRef], int],
                 where: str):
        self.resolve = resolve
        self.index_lo = index_lo
        self.where = where

    def compile(self, e: Expr) -> Callable[[Frame], Value]:
        where = self.where
        match e:
            case BoolLit(v) | IntLit(v):
                return _const(v)
            case EnumLit(label):
                return _const(label)
            case ArrayLit(items):
                fns = [self.compile(x) for x in items]
                return lambda fr: tuple([f(fr) for f in fns])
            case PortRef():
                return operator.itemgetter(self.resolve(e))
            case Index(base, idx):
                bf, ix = self.compile(base), self.compile(idx)
                lo = self.index_lo(base) if isinstance(base, PortRef) else 0

                def index(fr):
                    arr = bf(fr)
                    i = ix(fr) - lo
                    if 0 <= i < len(arr):
                        return arr[i]
                    raise RangeError(f"index {i + lo} out of bounds", where)
                return index
            case UnOp("!", x):
                f = self.compile(x)
                return lambda fr: not f(fr)
            case UnOp("-", x):
                f = self.compile(x)
                return lambda fr: -f(fr)
            case BinOp("&", a, b):
                fa, fb = self.compile(a), self.compile(b)
                return lambda fr: fa(fr) and fb(fr)
            case BinOp("|", a, b):
                fa, fb = self.compile(a), self.compile(b)
                return lambda fr: fa(fr) or fb(fr)
            case BinOp("->", a, b):
                fa, fb = self.compile(a), self.compile(b)
                return lambda fr: (not fa(fr)) or fb(fr)
            case BinOp("mod", a, b):
                fa, fb = self.compile(a), self.compile(b)

                def mod(fr):
                    try:
                        return c_mod(fa(fr), fb(fr))
                    except RangeError as err:
                        raise RangeError(str(err), where) from None
                return mod
            case BinOp(op, a, b):
                fn = _ARITH.get(op) or _CMP[op]
                fa, fb = self.compile(a), self.compile(b)
                return lambda fr: fn(fa(fr), fb(fr))
            case Case(branches):
                pairs = [(self.compile(c), self.compile(v)) for c, v in branches]

                def case(fr):
                    for c, v in pairs:
                        if c(fr):
                            return v(fr)
                    raise MissingBranch("no case branch is true", where)
                return case
            case SetChoice():
                raise SemanticsError("set choice outside an init/next position", where)
        raise SemanticsError(f"cannot compile {type(e).__name__}", where)

    def compile_choice(self, e: Expr) -> tuple[Callable[[Frame], Any], bool]:
        """Compile an init/next expression; the flag says it yields a list."""
        if isinstance(e, SetChoice):
            fns = [self.compile(v) for v in e.values]
            return (lambda fr: [f(fr) for f in fns]), True
        if isinstance(e, Case) and any(isinstance(v, SetChoice) for _, v in e.branches):
            pairs = []
            for c, v in e.branches:
                vf, many = self.compile_choice(v)
                pairs.append((self.compile(c), vf, many))
            where = self.where

            def case(fr):
                for c, v, many in pairs:
                    if c(fr):
                        return v(fr) if many else [v(fr)]
                raise MissingBranch("no case branch is true", where)
            return case, True
        return self.compile(e), False


@dataclass
class _Slot:
    name: str
    sort: SortType
    check: Callable[[Value], bool]


class System:
    """Compiled transition system of a validated `PatternSpec`."""

    def __init__(self, spec: PatternSpec):
        self.spec = spec
        arch = spec.architecture
        self.slots: list[_Slot] = []
        self.index: dict[str, int] = {}
        self.instance_iface = {}
        self._array_lo: dict[str, int] = {}

        def add(name: str, sort: SortType) -> int:
            self.index[name] = len(self.slots)
            self.slots.append(_Slot(name, sort, _checker(sort)))
            if isinstance(sort, ArraySort):
                self._array_lo[name] = sort.index_lo
            return self.index[name]

        for inst in arch.instances:
            iface = spec.interface(inst.interface)
            b = spec.behavior(inst.interface)
            self.instance_iface[inst.name] = (iface, b)
            add(f"{inst.name}.{CONTROL}", EnumSort(b.control_states))
            for p in iface.locals:
                add(f"{inst.name}.{p.name}", p.sort)
        for v in arch.env_vars:
            add(v.name, v.sort)
        self.n_state = len(self.slots)
        self.names = [s.name for s in self.slots]

        # derived signals: outputs, inputs, shared defines
        derived_sorts: dict[str, SortType | None] = {}
        for inst in arch.instances:
            iface, _ = self.instance_iface[inst.name]
            for p in iface.inputs + iface.outputs:
                derived_sorts[f"{inst.name}.{p.name}"] = p.sort
        for d in arch.shared_defs:
            derived_sorts[d.target] = None
        for name, sort in derived_sorts.items():
            self.index[name] = len(self.slots)
            self.slots.append(_Slot(name, sort, _checker(sort) if sort else (lambda v: True)))
            if isinstance(sort, ArraySort):
                self._array_lo[name] = sort.index_lo
        self.n_frame = len(self.slots)

        self._derived: list[tuple[int, Callable, Callable | None, str]] = []
        self._compile_derived()
        self._compile_steps()
        self._compile_inits()
        self._statics = self._static_wiring()

    # -- name resolution
    def _scoped(self, inst: str | None, where: str) -> _Compiler:
        def resolve(ref: PortRef) -> int:
            if ref.instance is not None:
                key = f"{ref.instance}.{ref.port}"
            elif inst is not None:
                key = f"{inst}.{ref.port}"
            else:
                key = ref.port
            try:
                return self.index[key]
            except KeyError:
                raise SemanticsError(f"unresolved name '{key}'", where) from None

        def index_lo(ref: PortRef) -> int:
            return self._array_lo.get(self.names_all[resolve(ref)], 0)
        return _Compiler(resolve, index_lo, where)

    @property
    def names_all(self) -> list[str]:
        return [s.name for s in self.slots]

    def _compile_derived(self) -> None:
        spec = self.spec
        arch = spec.architecture
        exprs: dict[tuple, tuple[Expr, str | None, str]] = {}
        for d in arch.shared_defs:
            exprs[("def", d.target)] = (d.expr, None, d.target)
        for inst in arch.instances:
            iface, b = self.instance_iface[inst.name]
            for a in inst.bindings:
                exprs[("in", inst.name, a.target)] = (a.expr, None, f"{inst.name}.{a.target}")
            for a in b.output_defs:
                exprs[("out", inst.name, a.target)] = (a.expr, inst.name, f"{inst.name}.{a.target}")
        graph = dependency_graph(spec)
        # Tarjan emits components in reverse topological order: dependencies first.
        order = [c[0] for c in strongly_connected(graph)]
        seen = set(order)
        order += [k for k in exprs if k not in seen]
        names_all = self.names_all
        for key in order:
            if key not in exprs:
                continue
            expr, scope, name = exprs[key]
            fn = self._scoped(scope, name).compile(expr)
            slot = self.index[name]
            sort = self.slots[slot].sort
            check = self.slots[slot].check if sort is not None else None
            self._derived.append((slot, fn, check, names_all[slot]))

    def _compile_steps(self) -> None:
        spec = self.spec
        self._ctrl: list[tuple[int, dict[str, list[tuple[Callable, str]]]]] = []
        self._updates: list[tuple[int, Callable, bool, Callable, str]] = []
        for inst in spec.architecture.instances:
            iface, b = self.instance_iface[inst.name]
            comp = self._scoped(inst.name, f"{inst.name}.{CONTROL}")
            table: dict[str, list] = {s: [] for s in b.control_states}
            for t in b.transitions:
                table[t.source].append((comp.compile(t.guard), t.target))
            self._ctrl.append((self.index[f"{inst.name}.{CONTROL}"], table))
            for a in b.local_updates:
                name = f"{inst.name}.{a.target}"
                fn, many = self._scoped(inst.name, name).compile_choice(a.expr)
                slot = self.index[name]
                self._updates.append((slot, fn, many, self.slots[slot].check, name))
        for v in spec.architecture.env_vars:
            fn, many = self._scoped(None, v.name).compile_choice(v.next)
            slot = self.index[v.name]
            self._updates.append((slot, fn, many, self.slots[slot].check, v.name))
        self._updates.sort(key=lambda u: u[0])

    def _compile_inits(self) -> None:
        spec = self.spec
        self._inits: list[tuple[int, Callable, bool, Callable, str]] = []
        self._init_frame: Frame = [None] * self.n_frame
        for inst in spec.architecture.instances:
            iface, b = self.instance_iface[inst.name]
            self._init_frame[self.index[f"{inst.name}.{CONTROL}"]] = b.initial_control
            # inits may read statically bound inputs
            for a in inst.bindings:
                try:
                    val = self._scoped(None, a.target).compile(a.expr)([])
                except (SemanticsError, IndexError, TypeError):
                    continue
                self._init_frame[self.index[f"{inst.name}.{a.target}"]] = val
            for a in b.local_init:
                name = f"{inst.name}.{a.target}"
                fn, many = self._scoped(inst.name, name).compile_choice(a.expr)
                slot = self.index[name]
                self._inits.append((slot, fn, many, self.slots[slot].check, name))
        for v in spec.architecture.env_vars:
            fn, many = self._scoped(None, v.name).compile_choice(v.init)
            slot = self.index[v.name]
            self._inits.append((slot, fn, many, self.slots[slot].check, v.name))
        self._inits.sort(key=lambda u: u[0])

    def _static_wiring(self) -> set[tuple[str, str]]:
        """Pairs (output, input) of qualified port names wired together."""
        graph = dependency_graph(self.spec)
        pairs: set[tuple[str, str]] = set()

        def sources(node, seen):
            for dep in graph.get(node, ()):
                if dep in seen:
                    continue
                seen.add(dep)
                if dep[0] == "out":
                    yield f"{dep[1]}.{dep[2]}"
                elif dep[0] == "def":
                    yield from sources(dep, seen)
        for node in graph:
            if node[0] == "in":
                for src in sources(node, set()):
                    pairs.add((src, f"{node[1]}.{node[2]}"))
        return pairs

    def connected(self, a: str, b: str) -> bool:
        return (a, b) in self._statics or (b, a) in self._statics

    # -- evaluation
    def frame(self, state: GlobalState) -> Frame:
        """State values followed by every derived signal."""
        fr = list(state)
        fr.extend([None] * (self.n_frame - self.n_state))
        for slot, fn, check, name in self._derived:
            try:
                v = fn(fr)
            except SemanticsError as err:
                err.state = state
                raise
            except (TypeError, IndexError) as err:
                raise SemanticsError(f"evaluation failed: {err}", name, state) from None
            if check is not None and not check(v):
                raise RangeError(f"value {v!r} outside {_sort_text(self.slots[slot].sort)}",
                                 name, state)
            fr[slot] = v
        return fr

    def label(self, state: GlobalState) -> StepLabel:
        fr = self.frame(state)
        outputs, inputs = {}, {}
        for inst in self.spec.architecture.instances:
            iface, _ = self.instance_iface[inst.name]
            for p in iface.outputs:
                outputs[(inst.name, p.name)] = fr[self.index[f"{inst.name}.{p.name}"]]
            for p in iface.inputs:
                inputs[(inst.name, p.name)] = fr[self.index[f"{inst.name}.{p.name}"]]
        return StepLabel(outputs, inputs)

    def to_mapping(self, state: GlobalState) -> dict[str, Value]:
        return dict(zip(self.names, state))

    def observe(self, state: GlobalState) -> dict[str, Value]:
        """Every named signal at a state: variables, ports and defines."""
        return dict(zip(self.names_all, self.frame(state)))

    def from_mapping(self, values: Mapping[str, Value]) -> GlobalState:
        out = []
        for s in self.slots[:self.n_state]:
            if s.name not in values:
                raise KeyError(s.name)
            v = values[s.name]
            if isinstance(v, list):
                v = tuple(v)
            out.append(v)
        return tuple(out)

    def _expand(self, base: list, choices: list[tuple[int, list]]) -> list[GlobalState]:
        if not choices:
            return [tuple(base)]
        slots = [c[0] for c in choices]
        out = []
        seen = set()
        for combo in itertools.product(*(c[1] for c in choices)):
            for slot, v in zip(slots, combo):
                base[slot] = v
            t = tuple(base)
            if t not in seen:
                seen.add(t)
                out.append(t)
        return out

    def initial_states(self) -> list[GlobalState]:
        fr = list(self._init_frame)
        base = fr[:self.n_state]
        choices = []
        for slot, fn, many, check, name in self._inits:
            vals = fn(fr) if many else [fn(fr)]
            for v in vals:
                if not check(v):
                    raise RangeError(f"initial value {v!r} outside "
                                     f"{_sort_text(self.slots[slot].sort)}", name)
            if many:
                choices.append((slot, list(dict.fromkeys(vals))))
            else:
                base[slot] = vals[0]
        return self._expand(base, choices)

    def next_states(self, state: GlobalState, fr: Frame | None = None) -> list[GlobalState]:
        if fr is None:
            fr = self.frame(state)
        base = list(state)
        for slot, table in self._ctrl:
            cur = state[slot]
            for guard, target in table[cur]:
                try:
                    ok = guard(fr)
                except SemanticsError as err:
                    err.state = state
                    raise
                if ok:
                    base[slot] = target
                    break
        choices = []
        for slot, fn, many, check, name in self._updates:
            try:
                v = fn(fr)
            except SemanticsError as err:
                err.state = state
                raise
            except (TypeError, IndexError) as err:
                raise SemanticsError(f"evaluation failed: {err}", name, state) from None
            if many:
                for x in v:
                    if not check(x):
                        raise RangeError(f"next value {x!r} outside "
                                         f"{_sort_text(self.slots[slot].sort)}", name, state)
                choices.append((slot, list(dict.fromkeys(v))))
            else:
                if not check(v):
                    raise RangeError(f"next value {v!r} outside "
                                     f"{_sort_text(self.slots[slot].sort)}", name, state)
                base[slot] = v
        return self._expand(base, choices)

    def successors(self, state: GlobalState) -> list[tuple[StepLabel, GlobalState]]:
        lab = self.label(state)
        return [(lab, s) for s in self.next_states(state)]


def _sort_text(sort: SortType | None) -> str:
    from .parser import sort_text
    return sort_text(sort) if sort is not None else "?"


# ---------------------------------------------------------------- module-level API

_CACHE: dict[int, tuple[PatternSpec, System]] = {}


def compile_system(spec: PatternSpec) -> System:
    """Compiled system for `spec`, memoised on object identity."""
    hit = _CACHE.get(id(spec))
    if hit is not None and hit[0] is spec:
        return hit[1]
    system = System(spec)
    if len(_CACHE) > 32:
        _CACHE.clear()
    _CACHE[id(spec)] = (spec, system)
    return system


def initial_states(spec: PatternSpec) -> list[GlobalState]:
    return compile_system(spec).initial_states()


def successors(spec: PatternSpec, s: GlobalState) -> list[tuple[StepLabel, GlobalState]]:
    return compile_system(spec).successors(s)


@dataclass
class StateGraph:
    """Explicit reachable fragment: states, successor ids and frames."""
    states: list[GlobalState]
    succ: list[list[int]]
    frames: list[Frame]
    initial: list[int]
    exhausted: bool
    errors: list[SemanticsError]


def explore(system: System, max_states: int | None = None, deadline: float | None = None,
            keep_frames: bool = True, stop_on_error: bool = False) -> StateGraph:
    """Breadth-first construction of the reachable state graph."""
    index: dict[GlobalState, int] = {}
    states: list[GlobalState] = []
    succ: list[list[int]] = []
    frames: list[Frame] = []
    errors: list[SemanticsError] = []
    init = []
    for s in system.initial_states():
        if s not in index:
            if max_states is not None and len(states) >= max_states:
                return StateGraph(states, succ, frames, init, False, errors)
            index[s] = len(states)
            states.append(s)
            succ.append([])
        init.append(index[s])
    queue = deque(range(len(states)))
    exhausted = True
    checks = 0
    while queue:
        i = queue.popleft()
        s = states[i]
        try:
            fr = system.frame(s)
            nexts = system.next_states(s, fr)
        except SemanticsError as err:
            err.state = s
            if stop_on_error:
                raise
            errors.append(err)
            fr, nexts = None, []
        if keep_frames:
            while len(frames) <= i:
                frames.append(None)
            frames[i] = fr
        ids = []
        for t in nexts:
            j = index.get(t)
            if j is None:
                if max_states is not None and len(states) >= max_states:
                    exhausted = False
                    continue
                j = len(states)
                index[t] = j
                states.append(t)
                succ.append([])
                queue.append(j)
            ids.append(j)
        succ[i] = ids
        checks += 1
        if deadline is not None and checks % 1024 == 0 and time.monotonic() > deadline:
            exhausted = False
            break
    if queue:
        exhausted = False
    return StateGraph(states, succ, frames, init, exhausted, errors)


def reachable(spec: PatternSpec, bound: int | None = None) -> ReachabilityReport:
    """BFS from the initial states, visiting at most `bound` states."""
    g = explore(compile_system(spec), max_states=bound, keep_frames=False)
    return ReachabilityReport(len(g.states), g.exhausted, g.errors[:10])


def flat_state(spec: PatternSpec, s: GlobalState) -> dict[str, Value]:
    return compile_system(spec).to_mapping(s)


def state_from_mapping(spec: PatternSpec, values: Mapping[str, Value]) -> GlobalState:
    return compile_system(spec).from_mapping(values)


def iter_pairs(xs: Sequence) -> Iterable[tuple]:
    return zip(xs, xs[1:])
