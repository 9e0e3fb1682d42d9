"""SMV text generation.

Each interface becomes a module whose parameters are its input ports,
whose VAR section holds the control state and local ports, whose ASSIGN
section holds init/next logic and whose DEFINE section holds the outputs.
The main module instantiates components, declares environment variables
and shared defines, and is followed by one LTLSPEC per property.

Array-valued outputs, input parameters and shared defines are rendered
element-wise (``output_0``, ``output_1``, ...), since array-valued DEFINEs
are not portable across SMV dialects. Local and environment arrays stay
SMV arrays. A dynamic index into an element-wise array becomes an inline
case expression. Locals without an update get an explicit ``next(x) := x``
so that they keep their value, as in the DSL semantics.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable

from . import __version__
from .model import (
    CONTROL, Active, ArrayLit, ArraySort, ArchitectureSpec, Atom, BinOp,
    BoolLit, BoolSort, Case, Connected, EnumLit, EnumSort, Expr, Index,
    InterfaceSpec, BehaviorSpec, IntLit, IntRange, LtlFormula, PatternSpec,
    PortRef, SetChoice, SortType, UnOp, LNot, LAnd, LOr, LImplies, Globally,
    Finally, Next, Until,
)
from .parser import Printer, expr_prec, PREC

INDENT = "  "


class UnsupportedAtom(ValueError):
    pass


class UnsupportedSort(ValueError):
    pass


@dataclass(frozen=True)
class SmvDocument:
    header: str
    modules: tuple[str, ...]

    @property
    def body(self) -> str:
        return "\n".join(self.modules)

    @property
    def rendered(self) -> str:
        return self.header + "\n" + self.body


class SmvPrinter(Printer):
    true_kw = "TRUE"
    false_kw = "FALSE"

    def expr(self, e: Expr) -> str:
        match e:
            case UnOp("!", x):
                # `!` binds tighter than everything in SMV
                inner = self.expr(x)
                if expr_prec(x) < PREC["postfix"]:
                    inner = f"({inner})"
                return "!" + inner
            case BinOp(op, a, b) if op in ("&", "|", "->"):
                return f"{self._bool_operand(a, op)} {op} {self._bool_operand(b, op)}"
        return super().expr(e)

    def _bool_operand(self, x: Expr, op: str) -> str:
        s = self.expr(x)
        if isinstance(x, BinOp) and x.op in ("&", "|", "->") and (op == "->" or x.op != op):
            return f"({s})"
        if isinstance(x, Case):
            return f"({s})"
        return s

    def ltl(self, f: LtlFormula) -> str:
        match f:
            case Atom(e):
                return self.expr(e)
            case Active() | Connected():
                kind = "active" if isinstance(f, Active) else "conn"
                raise UnsupportedAtom(
                    f"{kind}(...) has no SMV counterpart; encode activation as a boolean "
                    f"'active' port and refer to it directly")
            case LNot(x):
                return "!" + self._ltl_operand(x)
            case Globally(x) | Finally(x) | Next(x):
                op = {Globally: "G", Finally: "F", Next: "X"}[type(f)]
                return f"{op} {self._ltl_operand(x)}"
            case LAnd(a, b) | LOr(a, b) | LImplies(a, b) | Until(a, b):
                op = {LAnd: "&", LOr: "|", LImplies: "->", Until: "U"}[type(f)]
                return f"{self._ltl_operand(a, op)} {op} {self._ltl_operand(b, op)}"
        raise TypeError(f"cannot print {f!r}")

    def _ltl_operand(self, x: LtlFormula, op: str | None = None) -> str:
        s = self.ltl(x)
        if isinstance(x, Atom):
            e = x.expr
            if isinstance(e, (BoolLit, IntLit, EnumLit, PortRef, Index)):
                return s
            return f"({s})"
        if isinstance(x, (Active, Connected)):
            return s
        if op is not None and type(x) in (LAnd, LOr) and {LAnd: "&", LOr: "|"}[type(x)] == op:
            return s
        return f"({s})"


_PRINTER = SmvPrinter()


def render_sort(sort: SortType) -> str:
    match sort:
        case BoolSort():
            return "boolean"
        case IntRange(lo, hi):
            return f"{lo}..{hi}"
        case EnumSort(labels):
            return "{" + ", ".join(labels) + "}"
        case ArraySort(lo, hi, el) if not isinstance(el, ArraySort):
            return f"array {lo}..{hi} of {render_sort(el)}"
    raise UnsupportedSort(f"no SMV rendering for sort {sort!r}")


# ---------------------------------------------------------------- lowering

# A scope maps a reference to (array sort or None, element-wise?)
Scope = Callable[[PortRef], tuple[ArraySort | None, bool]]


class _Lower:
    """Rewrites expressions so that element-wise arrays only appear by element."""

    def __init__(self, scope: Scope):
        self.scope = scope

    def array_sort(self, e: Expr) -> ArraySort | None:
        match e:
            case PortRef():
                return self.scope(e)[0]
            case ArrayLit(items):
                return ArraySort(0, len(items) - 1, BoolSort())
            case Case(branches):
                for _, v in branches:
                    s = self.array_sort(v)
                    if s is not None:
                        return s
            case SetChoice(values):
                for v in values:
                    if self.array_sort(v) is not None:
                        raise UnsupportedSort("set choice over arrays has no element-wise rendering")
        return None

    def elem(self, e: Expr, j: int) -> Expr:
        """Element at position `j` (0-based) of an array-valued expression."""
        match e:
            case ArrayLit(items):
                return self.lower(items[j])
            case PortRef(inst, port):
                sort, split = self.scope(e)
                k = sort.index_lo + j
                if split:
                    return PortRef(inst, f"{port}_{k}")
                return Index(e, IntLit(k))
            case Case(branches):
                return Case(tuple((self.lower(c), self.elem(v, j)) for c, v in branches))
        raise UnsupportedSort(f"cannot take an element of {e!r}")

    def lower(self, e: Expr) -> Expr:
        match e:
            case Index(base, idx):
                sort = self.array_sort(base)
                lo = sort.index_lo if isinstance(base, PortRef) else 0
                n = (sort.index_hi - sort.index_lo + 1) if isinstance(base, PortRef) else len(base.items)
                if isinstance(idx, IntLit):
                    return self.elem(base, idx.value - lo)
                if isinstance(idx, UnOp) and idx.op == "-" and isinstance(idx.operand, IntLit):
                    return self.elem(base, -idx.operand.value - lo)
                if isinstance(base, PortRef) and not self.scope(base)[1]:
                    return Index(base, self.lower(idx))
                li = self.lower(idx)
                branches = [(BinOp("=", li, IntLit(lo + j)), self.elem(base, j)) for j in range(n - 1)]
                branches.append((BoolLit(True), self.elem(base, n - 1)))
                return Case(tuple(branches))
            case BinOp(op, a, b) if op in ("=", "!="):
                sa, sb = self.array_sort(a), self.array_sort(b)
                if sa is None and sb is None:
                    return BinOp(op, self.lower(a), self.lower(b))
                s = sa or sb
                n = s.index_hi - s.index_lo + 1
                join = "&" if op == "=" else "|"
                out = BinOp(op, self.elem(a, 0), self.elem(b, 0))
                for j in range(1, n):
                    out = BinOp(join, out, BinOp(op, self.elem(a, j), self.elem(b, j)))
                return out
            case BinOp(op, a, b):
                return BinOp(op, self.lower(a), self.lower(b))
            case UnOp(op, x):
                return UnOp(op, self.lower(x))
            case Case(branches):
                return Case(tuple((self.lower(c), self.lower(v)) for c, v in branches))
            case SetChoice(values):
                return SetChoice(tuple(self.lower(v) for v in values))
            case ArrayLit(items):
                return ArrayLit(tuple(self.lower(x) for x in items))
        return e

    def lower_ltl(self, f: LtlFormula) -> LtlFormula:
        match f:
            case Atom(e):
                return Atom(self.lower(e))
            case LNot(x) | Globally(x) | Finally(x) | Next(x):
                return type(f)(self.lower_ltl(x))
            case LAnd(a, b) | LOr(a, b) | LImplies(a, b) | Until(a, b):
                return type(f)(self.lower_ltl(a), self.lower_ltl(b))
        return f


def _width(sort: SortType) -> int:
    return sort.index_hi - sort.index_lo + 1 if isinstance(sort, ArraySort) else 1


def _split_names(name: str, sort: SortType) -> list[str]:
    if isinstance(sort, ArraySort):
        return [f"{name}_{k}" for k in range(sort.index_lo, sort.index_hi + 1)]
    return [name]


def _assign(lhs: str, e: Expr, op: str = ":=") -> list[str]:
    """One assignment; top-level case expressions span several lines."""
    if isinstance(e, Case):
        lines = [f"{INDENT}{lhs} {op} case"]
        for c, v in e.branches:
            lines.append(f"{INDENT * 2}{_PRINTER.expr(c)} : {_PRINTER.expr(v)};")
        lines.append(f"{INDENT}esac;")
        return lines
    return [f"{INDENT}{lhs} {op} {_PRINTER.expr(e)};"]


def _module_scope(i: InterfaceSpec) -> Scope:
    def scope(ref: PortRef):
        if ref.instance is None:
            p = i.port(ref.port)
            if p is not None and isinstance(p.sort, ArraySort):
                return p.sort, p.kind != "local"
        return None, False
    return scope


def _array_assign(kw: str, name: str, sort: ArraySort, e: Expr, low: _Lower) -> list[str]:
    lines = []
    for j in range(_width(sort)):
        lines += _assign(f"{kw}({name}[{sort.index_lo + j}])", low.elem(e, j))
    return lines


def _control_next(b: BehaviorSpec) -> Case:
    ctrl = PortRef(None, CONTROL)
    branches: list[tuple[Expr, Expr]] = []
    unconditional = set()
    for t in b.transitions:
        cond: Expr = BinOp("=", ctrl, EnumLit(t.source))
        if not (isinstance(t.guard, BoolLit) and t.guard.value):
            cond = BinOp("&", cond, t.guard)
        else:
            unconditional.add(t.source)
        branches.append((cond, EnumLit(t.target)))
    # The default branch fires only in states without an unconditional
    # transition; when there is exactly one such state it is a constant.
    stutter = [s for s in b.control_states if s not in unconditional]
    default: Expr = EnumLit(stutter[0]) if len(stutter) == 1 else ctrl
    while branches and branches[-1][1] == default:
        branches.pop()
    branches.append((BoolLit(True), default))
    return Case(tuple(branches))


def emit_module(i: InterfaceSpec, b: BehaviorSpec) -> str:
    """One SMV module for a component type."""
    if b.interface != i.name:
        raise ValueError(f"behavior of '{b.interface}' does not match interface '{i.name}'")
    low = _Lower(_module_scope(i))
    params = [n for p in i.inputs for n in _split_names(p.name, p.sort)]
    lines = [f"MODULE {i.name} ({', '.join(params)})" if params else f"MODULE {i.name}"]
    lines.append("VAR")
    lines.append(f"{INDENT}{CONTROL} : {render_sort(EnumSort(b.control_states))};")
    for p in i.locals:
        lines.append(f"{INDENT}{p.name} : {render_sort(p.sort)};")
    for p in i.outputs:
        render_sort(p.sort)
    lines.append("ASSIGN")
    lines.append(f"{INDENT}init({CONTROL}) := {b.initial_control};")
    inits = {a.target: a.expr for a in b.local_init}
    for p in i.locals:
        if p.name not in inits:
            continue
        if isinstance(p.sort, ArraySort):
            lines += _array_assign("init", p.name, p.sort, inits[p.name], low)
        else:
            lines += _assign(f"init({p.name})", low.lower(inits[p.name]))
    lines += _assign(f"next({CONTROL})", _control_next(b))
    updates = {a.target: a.expr for a in b.local_updates}
    for p in i.locals:
        e = updates.get(p.name, PortRef(None, p.name))
        if isinstance(p.sort, ArraySort):
            lines += _array_assign("next", p.name, p.sort, e, low)
        else:
            lines += _assign(f"next({p.name})", low.lower(e))
    defs = {a.target: a.expr for a in b.output_defs}
    if i.outputs:
        lines.append("DEFINE")
    for p in i.outputs:
        e = defs[p.name]
        if isinstance(p.sort, ArraySort):
            for j, name in enumerate(_split_names(p.name, p.sort)):
                lines += _assign(name, low.elem(e, j))
        else:
            lines += _assign(p.name, low.lower(e))
    return "\n".join(lines) + "\n"


def _main_scope(spec: PatternSpec) -> Scope:
    arch = spec.architecture
    env = {v.name: v.sort for v in arch.env_vars}
    def_sorts: dict[str, ArraySort | None] = {}

    def scope(ref: PortRef):
        if ref.instance is not None:
            inst = arch.instance(ref.instance)
            iface = spec.interface(inst.interface) if inst else None
            p = iface.port(ref.port) if iface else None
            if p is not None and isinstance(p.sort, ArraySort):
                return p.sort, p.kind != "local"
            return None, False
        if ref.port in env:
            s = env[ref.port]
            return (s if isinstance(s, ArraySort) else None), False
        if ref.port in def_sorts:
            return def_sorts[ref.port], True
        return None, False

    low = _Lower(scope)
    for d in arch.shared_defs:
        s = low.array_sort(d.expr)
        if isinstance(d.expr, ArrayLit):
            s = ArraySort(0, len(d.expr.items) - 1, BoolSort())
        def_sorts[d.target] = s
    return scope


def emit_main(a: ArchitectureSpec, spec: PatternSpec | None = None) -> str:
    """The main module: instances, environment variables and shared defines."""
    if spec is None:
        spec = PatternSpec("main", architecture=a)
    else:
        spec = PatternSpec(spec.name, spec.interfaces, spec.behaviors, a, spec.properties)
    low = _Lower(_main_scope(spec))
    lines = ["MODULE main", "VAR"]
    for inst in a.instances:
        iface = spec.interface(inst.interface)
        args = []
        ports = iface.inputs if iface is not None else ()
        for p in ports:
            e = inst.binding(p.name)
            if isinstance(p.sort, ArraySort):
                args += [_PRINTER.expr(low.elem(e, j)) for j in range(_width(p.sort))]
            else:
                args.append(_PRINTER.expr(low.lower(e)))
        call = f"{inst.interface}({', '.join(args)})" if args else inst.interface
        lines.append(f"{INDENT}{inst.name} : {call};")
    for v in a.env_vars:
        lines.append(f"{INDENT}{v.name} : {render_sort(v.sort)};")
    if a.env_vars:
        lines.append("ASSIGN")
        for v in a.env_vars:
            for kw, e in (("init", v.init), ("next", v.next)):
                if isinstance(v.sort, ArraySort):
                    lines += _array_assign(kw, v.name, v.sort, e, low)
                else:
                    lines += _assign(f"{kw}({v.name})", low.lower(e))
    if a.shared_defs:
        lines.append("DEFINE")
        scope = _main_scope(spec)
        for d in a.shared_defs:
            sort, _ = scope(PortRef(None, d.target))
            if sort is not None:
                for j in range(_width(sort)):
                    lines += _assign(f"{d.target}_{sort.index_lo + j}", low.elem(d.expr, j))
            else:
                lines += _assign(d.target, low.lower(d.expr))
    return "\n".join(lines) + "\n"


def emit_ltlspecs(props, spec: PatternSpec | None = None) -> str:
    """One commented LTLSPEC line per (name, formula) pair."""
    low = _Lower(_main_scope(spec)) if spec is not None else None
    lines = []
    for name, f in props:
        g = low.lower_ltl(f) if low is not None else f
        lines.append(f"-- {name}")
        lines.append(f"LTLSPEC {_PRINTER.ltl(g)}")
    return "\n".join(lines) + ("\n" if lines else "")


def emit_file(spec: PatternSpec) -> SmvDocument:
    """The complete SMV document: component modules, main, then LTLSPECs."""
    modules = []
    for i in spec.interfaces:
        b = spec.behavior(i.name)
        if b is not None:
            modules.append(emit_module(i, b))
    main = emit_main(spec.architecture, spec)
    specs = emit_ltlspecs([(p.name, p.formula) for p in spec.properties], spec)
    modules.append(main + ("\n" + specs if specs else ""))
    body = "\n".join(modules)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    header = (f"-- pattern: {spec.name}\n"
              f"-- generator: archpat {__version__}\n"
              f"-- content-hash: sha256:{digest}\n")
    return SmvDocument(header, tuple(modules))
