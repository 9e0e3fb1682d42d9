"""Typed abstract syntax for architecture pattern specifications.

Every node is an immutable dataclass. Source spans ride along on nodes for
diagnostics but never take part in equality, so a parsed spec compares
equal to the same spec built by hand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line_start: int
    col_start: int
    line_end: int
    col_end: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line_start}:{self.col_start}"

    def merge(self, other: SourceSpan | None) -> SourceSpan:
        if other is None:
            return self
        return SourceSpan(self.file, self.line_start, self.col_start,
                          other.line_end, other.col_end)


def _span():
    return field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Node:
    span: SourceSpan | None = _span()


# ---------------------------------------------------------------- sorts

@dataclass(frozen=True)
class BoolSort(Node):
    pass


@dataclass(frozen=True)
class IntRange(Node):
    lo: int
    hi: int


@dataclass(frozen=True)
class ArraySort(Node):
    index_lo: int
    index_hi: int
    element: SortType


@dataclass(frozen=True)
class EnumSort(Node):
    labels: tuple[str, ...]


SortType = Union[BoolSort, IntRange, ArraySort, EnumSort]


def sort_values(sort: SortType) -> list:
    """All values of a finite sort, in canonical order."""
    match sort:
        case BoolSort():
            return [False, True]
        case IntRange(lo, hi):
            return list(range(lo, hi + 1))
        case EnumSort(labels):
            return list(labels)
        case ArraySort(lo, hi, elem):
            out: list = [()]
            for _ in range(lo, hi + 1):
                out = [t + (v,) for t in out for v in sort_values(elem)]
            return out
    raise TypeError(f"not a sort: {sort!r}")


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class BoolLit(Node):
    value: bool


@dataclass(frozen=True)
class IntLit(Node):
    value: int


@dataclass(frozen=True)
class EnumLit(Node):
    label: str


@dataclass(frozen=True)
class ArrayLit(Node):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class PortRef(Node):
    """`instance.port`, or a bare name resolved in the enclosing scope."""
    instance: str | None
    port: str

    def __str__(self) -> str:
        return self.port if self.instance is None else f"{self.instance}.{self.port}"


@dataclass(frozen=True)
class Index(Node):
    base: Expr
    index: Expr


@dataclass(frozen=True)
class UnOp(Node):
    op: str  # "!" or "-"
    operand: Expr


ARITH_OPS = frozenset({"+", "-", "*", "mod"})
COMPARE_OPS = frozenset({"=", "!=", "<", "<=", ">", ">="})
BOOL_OPS = frozenset({"&", "|", "->"})


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Case(Node):
    branches: tuple[tuple[Expr, Expr], ...]


@dataclass(frozen=True)
class SetChoice(Node):
    values: tuple[Expr, ...]


Expr = Union[BoolLit, IntLit, EnumLit, ArrayLit, PortRef, Index, UnOp, BinOp,
             Case, SetChoice]

CONTROL = "controlState"


def subexprs(e: Expr) -> Iterator[Expr]:
    """Pre-order walk over an expression tree."""
    yield e
    match e:
        case ArrayLit(items) | SetChoice(items):
            for x in items:
                yield from subexprs(x)
        case Index(base, idx):
            yield from subexprs(base)
            yield from subexprs(idx)
        case UnOp(_, x):
            yield from subexprs(x)
        case BinOp(_, a, b):
            yield from subexprs(a)
            yield from subexprs(b)
        case Case(branches):
            for c, v in branches:
                yield from subexprs(c)
                yield from subexprs(v)


def port_refs(e: Expr) -> Iterator[PortRef]:
    for x in subexprs(e):
        if isinstance(x, PortRef):
            yield x


# ---------------------------------------------------------------- LTL

@dataclass(frozen=True)
class Atom(Node):
    expr: Expr


@dataclass(frozen=True)
class Active(Node):
    instance: str


@dataclass(frozen=True)
class Connected(Node):
    a: PortRef
    b: PortRef


@dataclass(frozen=True)
class LNot(Node):
    operand: LtlFormula


@dataclass(frozen=True)
class LAnd(Node):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class LOr(Node):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class LImplies(Node):
    left: LtlFormula
    right: LtlFormula


@dataclass(frozen=True)
class Globally(Node):
    operand: LtlFormula


@dataclass(frozen=True)
class Finally(Node):
    operand: LtlFormula


@dataclass(frozen=True)
class Next(Node):
    operand: LtlFormula


@dataclass(frozen=True)
class Until(Node):
    left: LtlFormula
    right: LtlFormula


LtlFormula = Union[Atom, Active, Connected, LNot, LAnd, LOr, LImplies,
                   Globally, Finally, Next, Until]

LTL_ATOMS = (Atom, Active, Connected)
TEMPORAL = (Globally, Finally, Next, Until)


def ltl_children(f: LtlFormula) -> tuple[LtlFormula, ...]:
    match f:
        case LNot(x) | Globally(x) | Finally(x) | Next(x):
            return (x,)
        case LAnd(a, b) | LOr(a, b) | LImplies(a, b) | Until(a, b):
            return (a, b)
    return ()


def ltl_atoms(f: LtlFormula) -> Iterator[LtlFormula]:
    if isinstance(f, LTL_ATOMS):
        yield f
    for c in ltl_children(f):
        yield from ltl_atoms(c)


def temporal_depth(f: LtlFormula) -> int:
    """Number of temporal operators in a formula."""
    own = 1 if isinstance(f, TEMPORAL) else 0
    return own + sum(temporal_depth(c) for c in ltl_children(f))


# ---------------------------------------------------------------- declarations

PORT_KINDS = ("local", "input", "output")


@dataclass(frozen=True)
class PortDecl(Node):
    name: str
    kind: str
    sort: SortType


@dataclass(frozen=True)
class InterfaceSpec(Node):
    name: str
    ports: tuple[PortDecl, ...] = ()

    def port(self, name: str) -> PortDecl | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def of_kind(self, kind: str) -> tuple[PortDecl, ...]:
        return tuple(p for p in self.ports if p.kind == kind)

    @property
    def inputs(self) -> tuple[PortDecl, ...]:
        return self.of_kind("input")

    @property
    def locals(self) -> tuple[PortDecl, ...]:
        return self.of_kind("local")

    @property
    def outputs(self) -> tuple[PortDecl, ...]:
        return self.of_kind("output")


@dataclass(frozen=True)
class Assign(Node):
    """`target := expr`, used for inits, updates, defines and bindings."""
    target: str
    expr: Expr


@dataclass(frozen=True)
class Transition(Node):
    source: str
    target: str
    guard: Expr


@dataclass(frozen=True)
class BehaviorSpec(Node):
    interface: str
    control_states: tuple[str, ...]
    initial_control: str
    local_init: tuple[Assign, ...] = ()
    transitions: tuple[Transition, ...] = ()
    output_defs: tuple[Assign, ...] = ()
    local_updates: tuple[Assign, ...] = ()


@dataclass(frozen=True)
class Instance(Node):
    name: str
    interface: str
    bindings: tuple[Assign, ...] = ()

    def binding(self, port: str) -> Expr | None:
        for b in self.bindings:
            if b.target == port:
                return b.expr
        return None


@dataclass(frozen=True)
class EnvVar(Node):
    name: str
    sort: SortType
    init: Expr
    next: Expr


@dataclass(frozen=True)
class ArchitectureSpec(Node):
    instances: tuple[Instance, ...] = ()
    env_vars: tuple[EnvVar, ...] = ()
    shared_defs: tuple[Assign, ...] = ()

    def instance(self, name: str) -> Instance | None:
        for i in self.instances:
            if i.name == name:
                return i
        return None


@dataclass(frozen=True)
class Property(Node):
    name: str
    formula: LtlFormula


@dataclass(frozen=True)
class PatternSpec(Node):
    name: str
    interfaces: tuple[InterfaceSpec, ...] = ()
    behaviors: tuple[BehaviorSpec, ...] = ()
    architecture: ArchitectureSpec = ArchitectureSpec()
    properties: tuple[Property, ...] = ()

    def interface(self, name: str) -> InterfaceSpec | None:
        for i in self.interfaces:
            if i.name == name:
                return i
        return None

    def behavior(self, interface: str) -> BehaviorSpec | None:
        for b in self.behaviors:
            if b.interface == interface:
                return b
        return None

    def property(self, name: str) -> Property | None:
        for p in self.properties:
            if p.name == name:
                return p
        return None


# ---------------------------------------------------------------- diagnostics

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: SourceSpan | None = None
    code: str = ""

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.severity}: {self.message}"
