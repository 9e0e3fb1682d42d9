"""A small structural checker for emitted SMV text.

It tokenizes the document, splits it into modules and statements, and
checks that instantiations match module signatures, that every name used
in an expression is declared, that every plain variable gets its init and
next, and that delimiters balance. It is deliberately independent of the
emitter's own code.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

TOKEN = re.compile(r"\s+|--[^\n]*|(?P<tok>:=|\.\.|->|<->|!=|<=|>=|-?\d+|[A-Za-z_][A-Za-z0-9_]*"
                   r"|[-+*/()\[\]{},;:.=<>!&|])")
KEYWORDS = {"MODULE", "VAR", "ASSIGN", "DEFINE", "LTLSPEC", "case", "esac", "TRUE", "FALSE",
            "mod", "init", "next", "array", "of", "boolean", "G", "F", "X", "U"}


class SmvError(AssertionError):
    pass


def tokenize(text: str) -> list[str]:
    out, pos = [], 0
    while pos < len(text):
        m = TOKEN.match(text, pos)
        if not m:
            raise SmvError(f"bad character {text[pos]!r} at offset {pos}")
        if m.group("tok"):
            out.append(m.group("tok"))
        pos = m.end()
    return out


@dataclass
class Module:
    name: str
    params: list[str]
    vars: dict[str, list[str]] = field(default_factory=dict)  # name -> type tokens
    defines: dict[str, list[str]] = field(default_factory=dict)
    inits: list[str] = field(default_factory=list)
    nexts: list[str] = field(default_factory=list)
    exprs: list[list[str]] = field(default_factory=list)
    specs: list[list[str]] = field(default_factory=list)


def statements(toks: list[str]):
    """Split at top-level ';' (not inside case/esac or brackets)."""
    depth, case, cur = 0, 0, []
    for t in toks:
        if t in "([{":
            depth += 1
        elif t in ")]}":
            depth -= 1
            if depth < 0:
                raise SmvError("unbalanced closing bracket")
        elif t == "case":
            case += 1
        elif t == "esac":
            case -= 1
            if case < 0:
                raise SmvError("esac without case")
        if t == ";" and depth == 0 and case == 0:
            yield cur
            cur = []
        else:
            cur.append(t)
    if depth or case:
        raise SmvError("unbalanced delimiters")
    if cur:
        yield cur


def parse(text: str) -> dict[str, Module]:
    toks = tokenize(text)
    mods: dict[str, Module] = {}
    i = 0
    while i < len(toks):
        if toks[i] != "MODULE":
            raise SmvError(f"expected MODULE, got {toks[i]!r}")
        name = toks[i + 1]
        i += 2
        params = []
        if i < len(toks) and toks[i] == "(":
            j = toks.index(")", i)
            params = [t for t in toks[i + 1:j] if t != ","]
            i = j + 1
        j = i
        while j < len(toks) and toks[j] != "MODULE":
            j += 1
        mods[name] = _module(name, params, toks[i:j])
        i = j
    return mods


def _module(name, params, toks) -> Module:
    m = Module(name, params)
    section, i = None, 0
    chunks: dict[str, list[str]] = {"VAR": [], "ASSIGN": [], "DEFINE": []}
    while i < len(toks):
        t = toks[i]
        if t in chunks:
            section = t
        elif t == "LTLSPEC":
            j = i + 1
            while j < len(toks) and toks[j] not in ("LTLSPEC",):
                j += 1
            m.specs.append(toks[i + 1:j])
            i = j
            continue
        else:
            if section is None:
                raise SmvError(f"{name}: token {t!r} outside a section")
            chunks[section].append(t)
        i += 1
    for st in statements(chunks["VAR"]):
        if len(st) < 3 or st[1] != ":":
            raise SmvError(f"{name}: bad VAR declaration {st}")
        m.vars[st[0]] = st[2:]
    for st in statements(chunks["DEFINE"]):
        if len(st) < 3 or st[1] != ":=":
            raise SmvError(f"{name}: bad DEFINE {st}")
        m.defines[st[0]] = st[2:]
        m.exprs.append(st[2:])
    for st in statements(chunks["ASSIGN"]):
        if st[0] not in ("init", "next") or st[1] != "(":
            raise SmvError(f"{name}: bad ASSIGN {st}")
        close = st.index(")")
        target = "".join(st[2:close])
        if st[close + 1] != ":=":
            raise SmvError(f"{name}: bad ASSIGN {st}")
        (m.inits if st[0] == "init" else m.nexts).append(target)
        m.exprs.append(st[2:close] + [";"] + st[close + 2:])
    return m


def _labels(m: Module) -> set[str]:
    out = set()
    for typ in m.vars.values():
        if typ and typ[0] == "{":
            out |= {t for t in typ[1:-1] if t != ","}
    return out


def _instances(m: Module, mods) -> dict[str, str]:
    out = {}
    for v, typ in m.vars.items():
        if typ and typ[0] in mods:
            out[v] = typ[0]
    return out


def check(text: str) -> dict[str, Module]:
    mods = parse(text)
    if "main" not in mods:
        raise SmvError("no main module")
    for m in mods.values():
        insts = _instances(m, mods)
        labels = _labels(m)
        local = set(m.params) | set(m.vars) | set(m.defines)

        def resolve(expr: list[str], where: str):
            k = 0
            while k < len(expr):
                t = expr[k]
                if re.fullmatch(r"[A-Za-z_]\w*", t) and t not in KEYWORDS:
                    if k + 2 < len(expr) and expr[k + 1] == "." and t in insts:
                        target = mods[insts[t]]
                        port = expr[k + 2]
                        if port not in target.vars and port not in target.defines:
                            raise SmvError(f"{m.name}: {where}: {t}.{port} is not declared")
                        k += 3
                        continue
                    if t not in local and t not in labels:
                        raise SmvError(f"{m.name}: {where}: undeclared name {t!r}")
                k += 1

        for v, typ in m.vars.items():
            if typ[0] in mods:
                sub = mods[typ[0]]
                args = list(statements_args(typ[1:]))
                if len(args) != len(sub.params):
                    raise SmvError(f"{m.name}: {v} passes {len(args)} arguments to "
                                   f"{sub.name}, which takes {len(sub.params)}")
                for a in args:
                    resolve(a, f"argument of {v}")
            elif typ[0] == "array":
                lo, hi = int(typ[1]), int(typ[3])
                for k in range(lo, hi + 1):
                    for kind, seen in (("init", m.inits), ("next", m.nexts)):
                        if f"{v}[{k}]" not in seen:
                            raise SmvError(f"{m.name}: no {kind} for {v}[{k}]")
            else:
                for kind, seen in (("init", m.inits), ("next", m.nexts)):
                    if seen.count(v) != 1:
                        raise SmvError(f"{m.name}: {seen.count(v)} {kind} assignments for {v}")
        for e in m.exprs:
            resolve(e, "expression")
        for s in m.specs:
            resolve(s, "LTLSPEC")
    return mods


def statements_args(toks: list[str]):
    """Arguments of `(a, b, ...)`, split at top-level commas."""
    if not toks:
        return
    if toks[0] != "(" or toks[-1] != ")":
        raise SmvError(f"bad instantiation {toks}")
    depth, case, cur = 0, 0, []
    for t in toks[1:-1]:
        depth += t in "([{"
        depth -= t in ")]}"
        case += t == "case"
        case -= t == "esac"
        if t == "," and depth == 0 and case == 0:
            yield cur
            cur = []
        else:
            cur.append(t)
    if cur:
        yield cur
