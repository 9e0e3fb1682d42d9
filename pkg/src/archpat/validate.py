"""Static checks for pattern specifications.

`validate_spec` never raises and never mutates its argument; every problem
becomes a `Diagnostic`. Integer sorts are inferred as intervals; an
assignment whose inferred interval cannot meet the target sort at all is a
warning, while a possible overflow is left to the checker, which reports
it as a `RangeError` on the concrete state.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable

from .model import (
    ARITH_OPS, BOOL_OPS, COMPARE_OPS, CONTROL, Active, ArrayLit, ArraySort,
    BehaviorSpec, BinOp, BoolLit, BoolSort, Case, Connected,
    Diagnostic, EnumLit, EnumSort, Expr, Index, InterfaceSpec, IntLit,
    IntRange, LtlFormula, PatternSpec, PortRef, SetChoice, SortType,
    SourceSpan, UnOp, ltl_atoms, port_refs,
)


@dataclass(frozen=True)
class Symbol:
    kind: str  # control | local | input | output | env | def
    sort: SortType | None
    instance: str | None = None


# ---------------------------------------------------------------- sort helpers

def sort_str(s: SortType | None) -> str:
    match s:
        case BoolSort():
            return "bool"
        case IntRange(lo, hi):
            return f"{lo}..{hi}"
        case ArraySort(lo, hi, el):
            return f"array {lo}..{hi} of {sort_str(el)}"
        case EnumSort(labels):
            return "{" + ", ".join(labels) + "}"
    return "?"


def same_kind(a: SortType, b: SortType) -> bool:
    if isinstance(a, ArraySort) and isinstance(b, ArraySort):
        return (a.index_lo, a.index_hi) == (b.index_lo, b.index_hi) and \
            same_kind(a.element, b.element)
    if isinstance(a, EnumSort) and isinstance(b, EnumSort):
        return bool(set(a.labels) & set(b.labels))
    return type(a) is type(b)


def join(a: SortType, b: SortType) -> SortType:
    match a, b:
        case IntRange(l1, h1), IntRange(l2, h2):
            return IntRange(min(l1, l2), max(h1, h2))
        case EnumSort(x), EnumSort(y):
            return EnumSort(tuple(dict.fromkeys(x + y)))
        case ArraySort(lo, hi, e1), ArraySort(_, _, e2):
            return ArraySort(lo, hi, join(e1, e2))
    return a


def fits(value_sort: SortType, target: SortType) -> bool | None:
    """True if every value fits, False if none can, None if some might not."""
    match value_sort, target:
        case IntRange(l1, h1), IntRange(l2, h2):
            if l2 <= l1 and h1 <= h2:
                return True
            if h1 < l2 or l1 > h2:
                return False
            return None
        case EnumSort(x), EnumSort(y):
            if set(x) <= set(y):
                return True
            return False if not set(x) & set(y) else None
        case ArraySort(_, _, e1), ArraySort(_, _, e2):
            return fits(e1, e2)
    return True


def _interval_mul(a: IntRange, b: IntRange) -> IntRange:
    prods = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi]
    return IntRange(min(prods), max(prods))


def _interval_mod(a: IntRange, b: IntRange) -> IntRange:
    m = max(abs(b.lo), abs(b.hi))
    if m == 0:
        return IntRange(0, 0)
    lo = 0 if a.lo >= 0 else -(m - 1)
    hi = 0 if a.hi <= 0 else m - 1
    if a.lo >= 0 and a.hi < m:
        return a
    return IntRange(lo, hi)


def is_constant(e: Expr) -> bool:
    match e:
        case BoolLit() | IntLit() | EnumLit():
            return True
        case ArrayLit(items):
            return all(is_constant(x) for x in items)
        case UnOp("-", x):
            return is_constant(x)
    return False


# ---------------------------------------------------------------- validator

class _Validator:
    def __init__(self, spec: PatternSpec):
        self.spec = spec
        self.diags: list[Diagnostic] = []
        self._def_sorts: dict[str, SortType | None] = {}
        self._def_busy: set[str] = set()

    # -- reporting
    def error(self, msg: str, span: SourceSpan | None, code: str) -> None:
        self.diags.append(Diagnostic("error", msg, span, code))

    def warn(self, msg: str, span: SourceSpan | None, code: str) -> None:
        self.diags.append(Diagnostic("warning", msg, span, code))

    def dupes(self, names: Iterable[tuple[str, SourceSpan | None]], what: str) -> None:
        seen: set[str] = set()
        for name, span in names:
            if name in seen:
                self.error(f"duplicate {what} '{name}'", span, "duplicate")
            seen.add(name)

    # -- sorts
    def check_sort(self, s: SortType, where: str) -> None:
        match s:
            case IntRange(lo, hi) if lo > hi:
                self.error(f"empty range {lo}..{hi} in {where}", s.span, "sort")
            case ArraySort(lo, hi, el):
                if lo > hi:
                    self.error(f"empty index range {lo}..{hi} in {where}", s.span, "sort")
                if isinstance(el, ArraySort):
                    self.error(f"nested array sort in {where}", s.span, "sort")
                elif isinstance(el, EnumSort):
                    self.error(f"array of enum in {where}: elements must be bool or integer",
                               s.span, "sort")
                else:
                    self.check_sort(el, where)
            case EnumSort(labels):
                if not labels:
                    self.error(f"empty enumeration in {where}", s.span, "sort")
                for label, n in Counter(labels).items():
                    if n > 1:
                        self.error(f"duplicate label '{label}' in {where}", s.span, "sort")

    # -- expressions
    def infer(self, e: Expr, resolve: Callable[[PortRef], Symbol | None],
              choice_ok: bool = False) -> SortType | None:
        match e:
            case BoolLit():
                return BoolSort()
            case IntLit(v):
                return IntRange(v, v)
            case EnumLit(label):
                return EnumSort((label,))
            case ArrayLit(items):
                sorts = [self.infer(x, resolve) for x in items]
                if not items:
                    self.error("empty array literal", e.span, "type")
                    return None
                if any(s is None for s in sorts):
                    return None
                el = sorts[0]
                for s in sorts[1:]:
                    if not same_kind(el, s) or isinstance(s, ArraySort):
                        self.error("array literal elements must share one scalar sort",
                                   e.span, "type")
                        return None
                    el = join(el, s)
                return ArraySort(0, len(items) - 1, el)
            case PortRef():
                sym = resolve(e)
                return None if sym is None else sym.sort
            case Index(base, idx):
                bs = self.infer(base, resolve)
                ix = self.infer(idx, resolve)
                if bs is None or ix is None:
                    return None
                if not isinstance(bs, ArraySort):
                    self.error("indexing a non-array value", e.span, "type")
                    return None
                if not isinstance(ix, IntRange):
                    self.error("array index must be an integer", idx.span or e.span, "type")
                    return None
                if fits(ix, IntRange(bs.index_lo, bs.index_hi)) is False:
                    self.warn(f"index range {sort_str(ix)} never within "
                              f"{bs.index_lo}..{bs.index_hi}", e.span, "range")
                return bs.element
            case UnOp("!", x):
                s = self.infer(x, resolve)
                if s is not None and not isinstance(s, BoolSort):
                    self.error("'!' applied to a non-boolean", e.span, "type")
                return BoolSort()
            case UnOp("-", x):
                s = self.infer(x, resolve)
                if s is None:
                    return None
                if not isinstance(s, IntRange):
                    self.error("unary '-' applied to a non-integer", e.span, "type")
                    return None
                return IntRange(-s.hi, -s.lo)
            case BinOp(op, a, b):
                return self.infer_binop(e, op, a, b, resolve)
            case Case(branches):
                out: SortType | None = None
                if not branches:
                    self.error("case without branches", e.span, "type")
                    return None
                for cond, val in branches:
                    cs = self.infer(cond, resolve)
                    if cs is not None and not isinstance(cs, BoolSort):
                        self.error("case condition is not boolean", cond.span or e.span, "type")
                    vs = self.infer(val, resolve, choice_ok=choice_ok)
                    if vs is None:
                        continue
                    if out is None:
                        out = vs
                    elif not same_kind(out, vs):
                        self.error(f"case branches disagree: {sort_str(out)} vs "
                                   f"{sort_str(vs)}", val.span or e.span, "type")
                    else:
                        out = join(out, vs)
                return out
            case SetChoice(values):
                if not choice_ok:
                    self.error("set choice {...} is only allowed in init and next "
                               "positions", e.span, "choice")
                if not values:
                    self.error("empty set choice", e.span, "choice")
                    return None
                out = None
                for v in values:
                    if not is_constant(v):
                        self.error("set choice values must be constants", v.span or e.span,
                                   "choice")
                        continue
                    vs = self.infer(v, resolve)
                    if vs is None:
                        continue
                    if out is None:
                        out = vs
                    elif not same_kind(out, vs):
                        self.error("set choice values must share one sort", e.span, "type")
                    else:
                        out = join(out, vs)
                return out
        self.error(f"unsupported expression {type(e).__name__}", getattr(e, "span", None),
                   "type")
        return None

    def infer_binop(self, e, op, a, b, resolve) -> SortType | None:
        sa = self.infer(a, resolve)
        sb = self.infer(b, resolve)
        if op in BOOL_OPS:
            for s, x in ((sa, a), (sb, b)):
                if s is not None and not isinstance(s, BoolSort):
                    self.error(f"operand of '{op}' is not boolean", x.span or e.span, "type")
            return BoolSort()
        if sa is None or sb is None:
            return BoolSort() if op in COMPARE_OPS else None
        if op in COMPARE_OPS:
            if op in ("=", "!="):
                if not same_kind(sa, sb):
                    self.error(f"cannot compare {sort_str(sa)} with {sort_str(sb)}",
                               e.span, "type")
            elif not (isinstance(sa, IntRange) and isinstance(sb, IntRange)):
                self.error(f"'{op}' needs integer operands", e.span, "type")
            return BoolSort()
        if op in ARITH_OPS:
            if not (isinstance(sa, IntRange) and isinstance(sb, IntRange)):
                self.error(f"'{op}' needs integer operands", e.span, "type")
                return None
            if op == "+":
                return IntRange(sa.lo + sb.lo, sa.hi + sb.hi)
            if op == "-":
                return IntRange(sa.lo - sb.hi, sa.hi - sb.lo)
            if op == "*":
                return _interval_mul(sa, sb)
            if sb.lo == sb.hi == 0:
                self.error("modulo by zero", e.span, "range")
            return _interval_mod(sa, sb)
        self.error(f"unknown operator '{op}'", e.span, "type")
        return None

    def check_assign(self, target: SortType | None, e: Expr, resolve, what: str,
                     choice_ok: bool = False) -> None:
        s = self.infer(e, resolve, choice_ok=choice_ok)
        if s is None or target is None:
            return
        if not same_kind(s, target):
            self.error(f"{what}: {sort_str(s)} is not assignable to {sort_str(target)}",
                       e.span, "type")
            return
        if fits(s, target) is False:
            if isinstance(s, EnumSort):
                self.error(f"{what}: label not in {sort_str(target)}", e.span, "type")
            else:
                self.warn(f"{what}: value range {sort_str(s)} lies outside "
                          f"{sort_str(target)}", e.span, "range")

    def expect_bool(self, e: Expr, resolve, what: str) -> None:
        s = self.infer(e, resolve)
        if s is not None and not isinstance(s, BoolSort):
            self.error(f"{what} must be boolean, got {sort_str(s)}", e.span, "type")

    # -- scopes
    def behavior_scope(self, iface: InterfaceSpec, b: BehaviorSpec,
                       allowed: frozenset[str], what: str):
        control = EnumSort(tuple(b.control_states))

        def resolve(ref: PortRef) -> Symbol | None:
            if ref.instance is not None:
                self.error(f"{what} in behavior '{b.interface}' may not reference "
                           f"'{ref}' of another component", ref.span, "scope")
                return None
            if ref.port == CONTROL:
                sym = Symbol("control", control)
            else:
                p = iface.port(ref.port)
                if p is None:
                    self.error(f"undeclared port '{ref.port}' in behavior "
                               f"'{b.interface}'", ref.span, "undeclared")
                    return None
                sym = Symbol(p.kind, p.sort)
            if sym.kind not in allowed:
                self.error(f"{what} may not reference {sym.kind} '{ref.port}'",
                           ref.span, "scope")
                return None
            return sym
        return resolve

    def arch_resolver(self, allowed: frozenset[str], what: str):
        spec = self.spec
        envs = {v.name: v for v in spec.architecture.env_vars}
        defs = {d.target: d for d in spec.architecture.shared_defs}

        def resolve(ref: PortRef) -> Symbol | None:
            if ref.instance is None:
                if ref.port in envs:
                    sym = Symbol("env", envs[ref.port].sort)
                elif ref.port in defs:
                    sym = Symbol("def", self.def_sort(ref.port))
                else:
                    self.error(f"undeclared name '{ref.port}' in {what}", ref.span,
                               "undeclared")
                    return None
            else:
                inst = spec.architecture.instance(ref.instance)
                if inst is None:
                    self.error(f"undeclared component '{ref.instance}' in {what}",
                               ref.span, "undeclared")
                    return None
                iface = spec.interface(inst.interface)
                if iface is None:
                    return None
                if ref.port == CONTROL:
                    b = spec.behavior(iface.name)
                    if b is None:
                        return None
                    sym = Symbol("control", EnumSort(tuple(b.control_states)), inst.name)
                else:
                    p = iface.port(ref.port)
                    if p is None:
                        self.error(f"undeclared port '{ref.port}' of component "
                                   f"'{inst.name}' in {what}", ref.span, "undeclared")
                        return None
                    sym = Symbol(p.kind, p.sort, inst.name)
            if sym.kind not in allowed:
                self.error(f"{what} may not reference {sym.kind} '{ref}'", ref.span, "scope")
                return None
            return sym
        return resolve

    def def_sort(self, name: str) -> SortType | None:
        if name in self._def_sorts:
            return self._def_sorts[name]
        if name in self._def_busy:
            return None  # cycle; reported by the cycle check
        self._def_busy.add(name)
        d = next(d for d in self.spec.architecture.shared_defs if d.target == name)
        quiet = _Validator(self.spec)
        quiet._def_sorts = self._def_sorts
        quiet._def_busy = self._def_busy
        s = quiet.infer(d.expr, quiet.arch_resolver(WIRING, "define"))
        self._def_busy.discard(name)
        self._def_sorts[name] = s
        return s

    # -- top level
    def run(self) -> list[Diagnostic]:
        spec = self.spec
        self.dupes(((i.name, i.span) for i in spec.interfaces), "interface")
        self.dupes(((b.interface, b.span) for b in spec.behaviors), "behavior for interface")
        self.dupes(((p.name, p.span) for p in spec.properties), "property")
        for iface in spec.interfaces:
            self.dupes(((p.name, p.span) for p in iface.ports),
                       f"port in interface '{iface.name}'")
            for p in iface.ports:
                if not p.name:
                    self.error(f"empty port name in interface '{iface.name}'", p.span, "name")
                if p.name == CONTROL:
                    self.error(f"'{CONTROL}' is reserved", p.span, "name")
                self.check_sort(p.sort, f"port '{iface.name}.{p.name}'")
        for b in spec.behaviors:
            self.check_behavior(b)
        self.check_architecture()
        self.check_cycles()
        for prop in spec.properties:
            self.check_property(prop.name, prop.formula)
        return self.diags

    def check_behavior(self, b: BehaviorSpec) -> None:
        iface = self.spec.interface(b.interface)
        if iface is None:
            self.error(f"behavior for undeclared interface '{b.interface}'", b.span,
                       "undeclared")
            return
        self.dupes(((s, b.span) for s in b.control_states), "control state")
        if b.initial_control not in b.control_states:
            self.error(f"initial control state '{b.initial_control}' is not declared",
                       b.span, "undeclared")
        for t in b.transitions:
            for s in (t.source, t.target):
                if s not in b.control_states:
                    self.error(f"transition uses undeclared control state '{s}'",
                               t.span, "undeclared")
            scope = self.behavior_scope(iface, b, frozenset({"control", "local", "input"}),
                                        "transition guard")
            self.expect_bool(t.guard, scope, "transition guard")

        locals_ = {p.name: p for p in iface.locals}
        outputs = {p.name: p for p in iface.outputs}
        self.dupes(((a.target, a.span) for a in b.local_init), "init for")
        self.dupes(((a.target, a.span) for a in b.local_updates), "next for")
        self.dupes(((a.target, a.span) for a in b.output_defs), "define for")
        init_scope = self.behavior_scope(iface, b, frozenset({"input"}), "local init")
        for a in b.local_init:
            if a.target not in locals_:
                self.error(f"init for '{a.target}', which is not a local port of "
                           f"'{iface.name}'", a.span, "undeclared")
                continue
            self.check_assign(locals_[a.target].sort, a.expr, init_scope,
                              f"init of '{a.target}'", choice_ok=True)
        inited = {a.target for a in b.local_init}
        for name, p in locals_.items():
            if name not in inited:
                self.error(f"local port '{name}' of '{iface.name}' has no init",
                           b.span, "missing")
        upd_scope = self.behavior_scope(
            iface, b, frozenset({"control", "local", "input", "output"}), "next")
        for a in b.local_updates:
            if a.target not in locals_:
                self.error(f"next for '{a.target}', which is not a local port of "
                           f"'{iface.name}'", a.span, "undeclared")
                continue
            self.check_assign(locals_[a.target].sort, a.expr, upd_scope,
                              f"next of '{a.target}'", choice_ok=True)
        def_scope = self.behavior_scope(
            iface, b, frozenset({"control", "local", "input", "output"}), "define")
        for a in b.output_defs:
            if a.target not in outputs:
                self.error(f"define for '{a.target}', which is not an output port of "
                           f"'{iface.name}'", a.span, "undeclared")
                continue
            self.check_assign(outputs[a.target].sort, a.expr, def_scope,
                              f"output '{a.target}'")
        defined = {a.target for a in b.output_defs}
        for name in outputs:
            if name not in defined:
                self.error(f"output port '{name}' of '{iface.name}' has no define",
                           b.span, "missing")

    def check_architecture(self) -> None:
        spec = self.spec
        arch = spec.architecture
        names = [(i.name, i.span) for i in arch.instances]
        names += [(v.name, v.span) for v in arch.env_vars]
        names += [(d.target, d.span) for d in arch.shared_defs]
        self.dupes(names, "architecture name")
        binding_scope = self.arch_resolver(WIRING, "binding")
        for inst in arch.instances:
            iface = spec.interface(inst.interface)
            if iface is None:
                self.error(f"component '{inst.name}' has undeclared interface "
                           f"'{inst.interface}'", inst.span, "undeclared")
                continue
            b = spec.behavior(iface.name)
            if b is None:
                self.error(f"interface '{iface.name}' of component '{inst.name}' has no "
                           f"behavior", inst.span, "missing")
            self.dupes(((a.target, a.span) for a in inst.bindings),
                       f"binding in component '{inst.name}'")
            inputs = {p.name: p for p in iface.inputs}
            for a in inst.bindings:
                p = inputs.get(a.target)
                if p is None:
                    self.error(f"component '{inst.name}' binds '{a.target}', which is not an "
                               f"input port of '{iface.name}'", a.span, "undeclared")
                    continue
                for ref in port_refs(a.expr):
                    if ref.instance == inst.name:
                        self.error(f"component '{inst.name}' binds its own port '{ref}'",
                                   ref.span, "scope")
                self.check_assign(p.sort, a.expr, binding_scope,
                                  f"binding of '{inst.name}.{a.target}'")
            bound = {a.target for a in inst.bindings}
            for name in inputs:
                if name not in bound:
                    self.error(f"input port '{name}' of component '{inst.name}' is not bound",
                               inst.span, "unbound")
            if b is not None:
                static = {a.target for a in inst.bindings if is_constant(a.expr)}
                for a in b.local_init:
                    for ref in port_refs(a.expr):
                        if ref.port in inputs and ref.port not in static:
                            self.error(f"init of '{a.target}' reads input '{ref.port}', but "
                                       f"component '{inst.name}' binds it to a non-constant",
                                       inst.span, "scope")
        env_init = self.arch_resolver(frozenset(), "env init")
        env_next = self.arch_resolver(WIRING | {"env"}, "env next")
        for v in arch.env_vars:
            self.check_sort(v.sort, f"env '{v.name}'")
            self.check_assign(v.sort, v.init, env_init, f"init of '{v.name}'", choice_ok=True)
            self.check_assign(v.sort, v.next, env_next, f"next of '{v.name}'", choice_ok=True)
        for d in arch.shared_defs:
            self.infer(d.expr, binding_scope)

    def check_cycles(self) -> None:
        graph = dependency_graph(self.spec)
        for comp in strongly_connected(graph):
            if len(comp) > 1 or comp[0] in graph.get(comp[0], ()):
                members = sorted(_node_name(n) for n in comp)
                self.error("combinational cycle through " + ", ".join(members),
                           self.spec.architecture.span, "cycle")

    def check_property(self, name: str, f: LtlFormula) -> None:
        spec = self.spec
        resolve = self.arch_resolver(ANY_ARCH, f"property '{name}'")
        for atom in ltl_atoms(f):
            match atom:
                case Active(inst):
                    if spec.architecture.instance(inst) is None:
                        self.error(f"active() of undeclared component '{inst}'",
                                   atom.span, "undeclared")
                case Connected(a, b):
                    for ref in (a, b):
                        if ref.instance is None:
                            self.error(f"conn() needs component ports, got '{ref}'",
                                       ref.span, "scope")
                        else:
                            resolve(ref)
                case _:
                    self.expect_bool(atom.expr, resolve, f"atom of property '{name}'")


WIRING = frozenset({"output", "env", "def"})
ANY_ARCH = frozenset({"control", "local", "input", "output", "env", "def"})


def _node_name(node: tuple) -> str:
    return node[1] if node[0] == "def" else f"{node[1]}.{node[2]}"


def dependency_graph(spec: PatternSpec) -> dict[tuple, list[tuple]]:
    """Combinational dependencies between shared defines, outputs and inputs."""
    graph: dict[tuple, list[tuple]] = {}
    arch = spec.architecture
    defs = {d.target for d in arch.shared_defs}

    def wiring_deps(e: Expr) -> list[tuple]:
        out = []
        for ref in port_refs(e):
            if ref.instance is None:
                if ref.port in defs:
                    out.append(("def", ref.port))
            else:
                inst = arch.instance(ref.instance)
                iface = spec.interface(inst.interface) if inst else None
                p = iface.port(ref.port) if iface else None
                if p is not None and p.kind == "output":
                    out.append(("out", ref.instance, ref.port))
        return out

    for d in arch.shared_defs:
        graph[("def", d.target)] = wiring_deps(d.expr)
    for inst in arch.instances:
        iface = spec.interface(inst.interface)
        b = spec.behavior(inst.interface)
        if iface is None:
            continue
        for a in inst.bindings:
            graph[("in", inst.name, a.target)] = wiring_deps(a.expr)
        if b is None:
            continue
        for a in b.output_defs:
            deps = []
            for ref in port_refs(a.expr):
                p = iface.port(ref.port)
                if p is not None and p.kind == "input":
                    deps.append(("in", inst.name, ref.port))
                elif p is not None and p.kind == "output":
                    deps.append(("out", inst.name, ref.port))
            graph[("out", inst.name, a.target)] = deps
    return graph


def strongly_connected(graph: dict) -> list[list]:
    """Tarjan's algorithm, iterative; components in discovery order."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list[list] = []
    counter = 0
    for root in graph:
        if root in index:
            continue
        work = [(root, iter(graph.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(graph.get(nxt, ()))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                out.append(comp)
    return out


def validate_spec(spec: PatternSpec) -> list[Diagnostic]:
    """Check every structural and typing invariant of a pattern spec."""
    return _Validator(spec).run()


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)

