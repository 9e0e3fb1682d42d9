"""Small constructors for writing specs in Python.

The shapes they produce are exactly what the parser produces for the same
text (left-associative `&`/`|`, pure boolean subformulas folded into one
`Atom`, negative literals as `IntLit`), so built-in specs compare equal to
their `.arch` files.
"""

from __future__ import annotations

from ..model import (
    CONTROL, Active, Connected, ArrayLit, ArraySort, Assign, Atom, BehaviorSpec, BinOp, BoolLit,
    BoolSort, Case, EnumLit, Expr, Finally, Globally, Index, Instance,
    IntLit, IntRange, InterfaceSpec, LAnd, LImplies, LNot, LOr, LtlFormula,
    Next, PortDecl, PortRef, SetChoice, Transition, UnOp, Until, EnvVar,
)

BOOL = BoolSort()


def rng(lo: int, hi: int) -> IntRange:
    return IntRange(lo, hi)


def array(lo: int, hi: int, element) -> ArraySort:
    return ArraySort(lo, hi, element)


def E(x) -> Expr:
    """Coerce Python values: bool/int to literals, "a.b" or "x" to port refs."""
    if isinstance(x, bool):
        return BoolLit(x)
    if isinstance(x, int):
        return IntLit(x)
    if isinstance(x, str):
        if "." in x:
            inst, port = x.split(".", 1)
            return PortRef(inst, port)
        return PortRef(None, x)
    return x


def st(label: str) -> EnumLit:
    return EnumLit(label)


def at(label: str) -> Expr:
    """`controlState = label`"""
    return BinOp("=", PortRef(None, CONTROL), EnumLit(label))


def _bin(op):
    def f(a, b):
        return BinOp(op, E(a), E(b))
    return f


eq, ne, lt, le, gt, ge = (_bin(o) for o in ("=", "!=", "<", "<=", ">", ">="))
add, sub, mul, mod = (_bin(o) for o in ("+", "-", "*", "mod"))


def and_(*xs) -> Expr:
    out = E(xs[0])
    for x in xs[1:]:
        out = BinOp("&", out, E(x))
    return out


def or_(*xs) -> Expr:
    out = E(xs[0])
    for x in xs[1:]:
        out = BinOp("|", out, E(x))
    return out


def implies(a, b) -> Expr:
    return BinOp("->", E(a), E(b))


def not_(x) -> Expr:
    return UnOp("!", E(x))


def idx(a, i) -> Index:
    return Index(E(a), E(i))


def arr(*items) -> ArrayLit:
    return ArrayLit(tuple(E(x) for x in items))


def choice(*values) -> SetChoice:
    return SetChoice(tuple(E(v) for v in values))


def case(*pairs) -> Case:
    return Case(tuple((E(c), E(v)) for c, v in pairs))


# ---------------------------------------------------------------- LTL

def L(x) -> LtlFormula:
    if isinstance(x, (Globally, Finally, Next, Until, LAnd, LOr, LImplies, LNot, Atom,
                      Active, Connected)):
        return x
    return Atom(E(x))


def G(x) -> Globally:
    return Globally(L(x))


def F(x) -> Finally:
    return Finally(L(x))


def X(x) -> Next:
    return Next(L(x))


def U(a, b) -> Until:
    return Until(L(a), L(b))


def _fold(op, node):
    def f(*xs):
        out = L(xs[0])
        for x in xs[1:]:
            y = L(x)
            if isinstance(out, Atom) and isinstance(y, Atom):
                out = Atom(BinOp(op, out.expr, y.expr))
            else:
                out = node(out, y)
        return out
    return f


land = _fold("&", LAnd)
lor = _fold("|", LOr)


def limplies(a, b) -> LtlFormula:
    a, b = L(a), L(b)
    if isinstance(a, Atom) and isinstance(b, Atom):
        return Atom(BinOp("->", a.expr, b.expr))
    return LImplies(a, b)


# ---------------------------------------------------------------- declarations

def interface(name: str, *ports: tuple[str, str, object]) -> InterfaceSpec:
    """`ports` are (kind, name, sort) triples with kind in local/in/out."""
    kinds = {"local": "local", "in": "input", "out": "output"}
    return InterfaceSpec(name, tuple(PortDecl(n, kinds[k], s) for k, n, s in ports))


def behavior(iface: str, states: list[str], init: str, *, inits=(), trans=(), nexts=(),
             defines=()) -> BehaviorSpec:
    return BehaviorSpec(
        iface, tuple(states), init,
        tuple(Assign(n, E(e)) for n, e in inits),
        tuple(Transition(a, b, E(g)) for a, b, g in trans),
        tuple(Assign(n, E(e)) for n, e in defines),
        tuple(Assign(n, E(e)) for n, e in nexts),
    )


def component(name: str, iface: str, **bindings) -> Instance:
    return Instance(name, iface, tuple(Assign(k, E(v)) for k, v in bindings.items()))


def env(name: str, sort, init, nxt) -> EnvVar:
    return EnvVar(name, sort, E(init), E(nxt))


def define(name: str, e) -> Assign:
    return Assign(name, E(e))
