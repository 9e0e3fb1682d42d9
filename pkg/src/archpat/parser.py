"""Parser and pretty printer for the `.arch` pattern DSL.

The grammar is line-friendly but token-driven: every item inside a block
starts with a keyword, so a malformed item is skipped up to the next
keyword and parsing resumes there. Expressions and LTL share one
precedence table (loosest first)::

    ->   |   &   U   ! G F X   = != < <= > >=   + -   * mod   unary -   x[i]

Pure boolean sub-trees of a property are kept as a single `Atom`, so a
property written ``G (a & b)`` becomes ``Globally(Atom(a & b))``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .model import (
    CONTROL, Active, ArchitectureSpec, ArrayLit, ArraySort, Assign, Atom,
    BehaviorSpec, BinOp, BoolLit, BoolSort, Case, Connected, Diagnostic,
    EnumLit, EnumSort, EnvVar, Expr, Finally, Globally, Index, Instance,
    InterfaceSpec, IntLit, IntRange, LAnd, LImplies, LNot, LOr, LtlFormula,
    Next, PatternSpec, PortDecl, PortRef, Property, SetChoice, SortType,
    SourceSpan, Transition, UnOp, Until,
)

KEYWORDS = frozenset("""
    pattern interface behavior architecture property local in out states init
    trans when next define component env bool array of case esac mod true
    false TRUE FALSE G F X U active conn
""".split())

BLOCK_KEYWORDS = frozenset({"interface", "behavior", "architecture", "property"})
# keywords that are plain names unless followed by "("
SOFT_KEYWORDS = frozenset({"active", "conn"})

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:@[A-Za-z0-9_,=]+)?)
  | (?P<int>[0-9]+)
  | (?P<op>:=|\.\.|->|!=|<=|>=|[-+*=<>!&|()\[\]{},:;.])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | kw | int | op | eof
    text: str
    span: SourceSpan


@dataclass
class ParseResult:
    spec: PatternSpec | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.spec is not None


class _Error(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.diag = Diagnostic("error", message, span, "syntax")


def tokenize(text: str, file: str = "<input>") -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, line_start, pos = 1, 0, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            # Swallow a run of unknown characters as one error.
            end = pos + 1
            while end < n and _TOKEN_RE.match(text, end) is None:
                end += 1
            bad = text[pos:end]
            span = SourceSpan(file, line, col, line, col + len(bad))
            diags.append(Diagnostic("error", f"unexpected character(s) {bad!r}", span, "lexical"))
            pos = end
            continue
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ident", "int", "op"):
            span = SourceSpan(file, line, col, line, col + len(value))
            if kind == "ident" and value in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, value, span))
        pos = m.end()
    col = pos - line_start + 1
    tokens.append(Token("eof", "", SourceSpan(file, line, col, line, col)))
    return tokens, diags


# ---------------------------------------------------------------- parser

_COMPARE = ("=", "!=", "<", "<=", ">", ">=")


def _is_ltl(x) -> bool:
    return isinstance(x, (Atom, Active, Connected, LNot, LAnd, LOr, LImplies,
                          Globally, Finally, Next, Until))


def _as_ltl(x) -> LtlFormula:
    return x if _is_ltl(x) else Atom(x, span=x.span)


class _Parser:
    def __init__(self, tokens: list[Token], file: str):
        self.toks = tokens
        self.i = 0
        self.file = file
        self.diags: list[Diagnostic] = []

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "op") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            t = self.tok
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise _Error(f"expected '{text}', found {found}", t.span)
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "ident" and not (t.kind == "kw" and t.text in SOFT_KEYWORDS):
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise _Error(f"expected {what}, found {found}", t.span)
        return self.advance()

    def integer(self) -> tuple[int, SourceSpan]:
        start = self.tok.span
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        t = self.tok
        if t.kind != "int":
            raise _Error(f"expected integer, found {t.text or 'end of input'!r}", t.span)
        self.advance()
        v = int(t.text)
        return (-v if neg else v), start.merge(t.span)

    def span_from(self, start: SourceSpan) -> SourceSpan:
        prev = self.toks[self.i - 1] if self.i > 0 else self.tok
        return start.merge(prev.span)

    def sync(self, stops: frozenset[str]) -> None:
        """Skip ahead to a token that can start a new item or block."""
        if self.tok.kind != "eof":
            self.advance()
        while self.tok.kind != "eof":
            if self.tok.kind == "kw" and (self.tok.text in stops or
                                          self.tok.text in BLOCK_KEYWORDS):
                return
            self.advance()

    # -- top level
    def spec(self) -> PatternSpec | None:
        if self.tok.kind == "eof":
            self.diags.append(Diagnostic("error", "empty specification", self.tok.span, "empty"))
            return None
        start = self.tok.span
        try:
            self.expect("pattern")
            name = self.ident("pattern name").text
        except _Error as err:
            self.diags.append(err.diag)
            name = "<unnamed>"
            self.sync(BLOCK_KEYWORDS)
        interfaces: list[InterfaceSpec] = []
        behaviors: list[BehaviorSpec] = []
        archs: list[ArchitectureSpec] = []
        props: list[Property] = []
        while self.tok.kind != "eof":
            t = self.tok
            try:
                if self.at("interface"):
                    interfaces.append(self.interface())
                elif self.at("behavior"):
                    behaviors.append(self.behavior())
                elif self.at("architecture"):
                    archs.append(self.architecture())
                elif self.at("property"):
                    props.append(self.property())
                else:
                    raise _Error(f"expected interface, behavior, architecture or property, "
                                 f"found {t.text!r}", t.span)
            except _Error as err:
                self.diags.append(err.diag)
                self.sync(BLOCK_KEYWORDS)
        if len(archs) > 1:
            self.diags.append(Diagnostic("error", "duplicate architecture block",
                                         archs[1].span, "duplicate"))
        arch = archs[0] if archs else ArchitectureSpec()
        spec = PatternSpec(name, tuple(interfaces), tuple(behaviors), arch, tuple(props),
                           span=self.span_from(start))
        self.check_duplicates(spec)
        return resolve_names(spec)

    def check_duplicates(self, spec: PatternSpec) -> None:
        def dup(items, what):
            seen = set()
            for name, span in items:
                if name in seen:
                    self.diags.append(Diagnostic("error", f"duplicate {what} '{name}'",
                                                 span, "duplicate"))
                seen.add(name)
        dup(((i.name, i.span) for i in spec.interfaces), "interface")
        dup(((b.interface, b.span) for b in spec.behaviors), "behavior")
        dup(((p.name, p.span) for p in spec.properties), "property")
        for i in spec.interfaces:
            dup(((p.name, p.span) for p in i.ports), f"port in interface '{i.name}'")
        arch = spec.architecture
        dup([(x.name, x.span) for x in arch.instances] +
            [(x.name, x.span) for x in arch.env_vars] +
            [(x.target, x.span) for x in arch.shared_defs], "architecture name")

    # -- blocks
    def interface(self) -> InterfaceSpec:
        start = self.expect("interface").span
        name = self.ident("interface name").text
        ports: list[PortDecl] = []
        kinds = {"local": "local", "in": "input", "out": "output"}
        while self.at("local", "in", "out"):
            try:
                t = self.advance()
                pname = self.ident("port name").text
                self.expect(":")
                sort = self.sort()
                ports.append(PortDecl(pname, kinds[t.text], sort, span=self.span_from(t.span)))
            except _Error as err:
                self.diags.append(err.diag)
                self.sync(frozenset({"local", "in", "out"}))
        return InterfaceSpec(name, tuple(ports), span=self.span_from(start))

    def sort(self) -> SortType:
        start = self.tok.span
        if self.at("bool"):
            self.advance()
            return BoolSort(span=start)
        if self.at("array"):
            self.advance()
            lo, _ = self.integer()
            self.expect("..")
            hi, _ = self.integer()
            self.expect("of")
            el = self.sort()
            return ArraySort(lo, hi, el, span=self.span_from(start))
        if self.at("{"):
            self.advance()
            labels = [self.ident("enumeration label").text]
            while self.at(","):
                self.advance()
                labels.append(self.ident("enumeration label").text)
            self.expect("}")
            return EnumSort(tuple(labels), span=self.span_from(start))
        if self.tok.kind == "int" or self.at("-"):
            lo, _ = self.integer()
            self.expect("..")
            hi, _ = self.integer()
            return IntRange(lo, hi, span=self.span_from(start))
        raise _Error(f"expected a sort, found {self.tok.text or 'end of input'!r}", start)

    def behavior(self) -> BehaviorSpec:
        start = self.expect("behavior").span
        iface = self.ident("interface name").text
        self.expect("states")
        states = [self.ident("control state").text]
        while self.at(","):
            self.advance()
            states.append(self.ident("control state").text)
        self.expect("init")
        initial = self.ident("initial control state").text
        inits: list[Assign] = []
        trans: list = []
        updates: list[Assign] = []
        defs: list[Assign] = []
        items = frozenset({"init", "trans", "next", "define"})
        while self.at(*items):
            try:
                t = self.tok
                if self.at("trans"):
                    self.advance()
                    src = self.ident("control state").text
                    self.expect("->")
                    dst = self.ident("control state").text
                    self.expect("when")
                    guard = self.expr()
                    trans.append(Transition(src, dst, guard, span=self.span_from(t.span)))
                else:
                    self.advance()
                    target = self.ident("port name").text
                    self.expect(":=")
                    e = self.expr()
                    a = Assign(target, e, span=self.span_from(t.span))
                    {"init": inits, "next": updates, "define": defs}[t.text].append(a)
            except _Error as err:
                self.diags.append(err.diag)
                self.sync(items)
        return BehaviorSpec(iface, tuple(states), initial, tuple(inits), tuple(trans),
                            tuple(defs), tuple(updates), span=self.span_from(start))

    def architecture(self) -> ArchitectureSpec:
        start = self.expect("architecture").span
        instances: list[Instance] = []
        envs: list[EnvVar] = []
        defs: list[Assign] = []
        items = frozenset({"component", "env", "define"})
        while self.at(*items):
            t = self.tok
            try:
                if self.at("component"):
                    self.advance()
                    name = self.ident("component name").text
                    self.expect(":")
                    iface = self.ident("interface name").text
                    self.expect("(")
                    binds: list[Assign] = []
                    if not self.at(")"):
                        binds.append(self.binding())
                        while self.at(","):
                            self.advance()
                            binds.append(self.binding())
                    self.expect(")")
                    instances.append(Instance(name, iface, tuple(binds),
                                              span=self.span_from(t.span)))
                elif self.at("env"):
                    self.advance()
                    name = self.ident("variable name").text
                    self.expect(":")
                    sort = self.sort()
                    self.expect("init")
                    init = self.expr()
                    self.expect("next")
                    nxt = self.expr()
                    envs.append(EnvVar(name, sort, init, nxt, span=self.span_from(t.span)))
                else:
                    self.advance()
                    name = self.ident("define name").text
                    self.expect(":=")
                    defs.append(Assign(name, self.expr(), span=self.span_from(t.span)))
            except _Error as err:
                self.diags.append(err.diag)
                self.sync(items)
        return ArchitectureSpec(tuple(instances), tuple(envs), tuple(defs),
                                span=self.span_from(start))

    def binding(self) -> Assign:
        t = self.ident("input port name")
        self.expect(":=")
        e = self.expr()
        return Assign(t.text, e, span=self.span_from(t.span))

    def property(self) -> Property:
        start = self.expect("property").span
        name = self.ident("property name").text
        self.expect(":")
        f = _as_ltl(self.formula())
        return Property(name, f, span=self.span_from(start))

    # -- expressions / formulas
    def expr(self) -> Expr:
        start = self.tok.span
        x = self.formula()
        if _is_ltl(x):
            raise _Error("temporal operator outside a property", start.merge(x.span))
        return x

    def formula(self):
        return self.implies()

    def _bool_bin(self, op: str, a, b, start: SourceSpan):
        span = self.span_from(start)
        if not _is_ltl(a) and not _is_ltl(b):
            return BinOp(op, a, b, span=span)
        cls = {"&": LAnd, "|": LOr, "->": LImplies}[op]
        return cls(_as_ltl(a), _as_ltl(b), span=span)

    def implies(self):
        start = self.tok.span
        left = self.disj()
        if self.at("->"):
            self.advance()
            right = self.implies()
            return self._bool_bin("->", left, right, start)
        return left

    def disj(self):
        start = self.tok.span
        left = self.conj()
        while self.at("|"):
            self.advance()
            left = self._bool_bin("|", left, self.conj(), start)
        return left

    def conj(self):
        start = self.tok.span
        left = self.until()
        while self.at("&"):
            self.advance()
            left = self._bool_bin("&", left, self.until(), start)
        return left

    def until(self):
        start = self.tok.span
        left = self.unary()
        if self.at("U"):
            self.advance()
            right = self.until()
            return Until(_as_ltl(left), _as_ltl(right), span=self.span_from(start))
        return left

    def unary(self):
        start = self.tok.span
        if self.at("!"):
            self.advance()
            x = self.unary()
            if _is_ltl(x):
                return LNot(x, span=self.span_from(start))
            return UnOp("!", x, span=self.span_from(start))
        if self.at("G", "F", "X"):
            op = self.advance().text
            x = _as_ltl(self.unary())
            cls = {"G": Globally, "F": Finally, "X": Next}[op]
            return cls(x, span=self.span_from(start))
        return self.comparison()

    def _need_expr(self, x, start: SourceSpan) -> Expr:
        if _is_ltl(x):
            raise _Error("temporal formula used as a value", start.merge(x.span))
        return x

    def comparison(self):
        start = self.tok.span
        left = self.additive()
        if self.at(*_COMPARE):
            op = self.advance().text
            right = self.additive()
            return BinOp(op, self._need_expr(left, start), self._need_expr(right, start),
                         span=self.span_from(start))
        return left

    def additive(self):
        start = self.tok.span
        left = self.multiplicative()
        while self.at("+", "-"):
            op = self.advance().text
            right = self.multiplicative()
            left = BinOp(op, self._need_expr(left, start), self._need_expr(right, start),
                         span=self.span_from(start))
        return left

    def multiplicative(self):
        start = self.tok.span
        left = self.negation()
        while self.at("*", "mod"):
            op = self.advance().text
            right = self.negation()
            left = BinOp(op, self._need_expr(left, start), self._need_expr(right, start),
                         span=self.span_from(start))
        return left

    def negation(self):
        start = self.tok.span
        if self.at("-"):
            self.advance()
            if self.tok.kind == "int":
                t = self.advance()
                return self.postfix(IntLit(-int(t.text), span=start.merge(t.span)), start)
            x = self.negation()
            return UnOp("-", self._need_expr(x, start), span=self.span_from(start))
        return self.postfix(self.primary(), start)

    def postfix(self, x, start: SourceSpan):
        while self.at("["):
            self.advance()
            idx = self.expr()
            self.expect("]")
            x = Index(self._need_expr(x, start), idx, span=self.span_from(start))
        return x

    def portref(self) -> PortRef:
        t = self.ident("name")
        if self.at("."):
            self.advance()
            p = self.tok
            if not (p.kind == "ident" or (p.kind == "kw" and p.text in KEYWORDS)):
                raise _Error("expected port name after '.'", p.span)
            self.advance()
            return PortRef(t.text, p.text, span=t.span.merge(p.span))
        return PortRef(None, t.text, span=t.span)

    def primary(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text), span=t.span)
        call = self.peek().text == "("
        if t.kind == "ident" or (t.text in SOFT_KEYWORDS and t.kind == "kw" and not call):
            return self.portref()
        if self.at("true", "TRUE", "false", "FALSE"):
            self.advance()
            return BoolLit(t.text.lower() == "true", span=t.span)
        if self.at("("):
            self.advance()
            x = self.formula()
            self.expect(")")
            return x
        if self.at("["):
            self.advance()
            items = [self.expr()]
            while self.at(","):
                self.advance()
                items.append(self.expr())
            self.expect("]")
            return ArrayLit(tuple(items), span=self.span_from(t.span))
        if self.at("{"):
            self.advance()
            values = [self.expr()]
            while self.at(","):
                self.advance()
                values.append(self.expr())
            self.expect("}")
            return SetChoice(tuple(values), span=self.span_from(t.span))
        if self.at("case"):
            self.advance()
            branches = []
            while not self.at("esac"):
                if self.tok.kind == "eof":
                    raise _Error("unterminated case (missing 'esac')", t.span)
                c = self.expr()
                self.expect(":")
                v = self.expr()
                self.expect(";")
                branches.append((c, v))
            self.expect("esac")
            return Case(tuple(branches), span=self.span_from(t.span))
        if self.at("active"):
            self.advance()
            self.expect("(")
            name = self.ident("component name").text
            self.expect(")")
            return Active(name, span=self.span_from(t.span))
        if self.at("conn"):
            self.advance()
            self.expect("(")
            a = self.portref()
            self.expect(",")
            b = self.portref()
            self.expect(")")
            return Connected(a, b, span=self.span_from(t.span))
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise _Error(f"expected an expression, found {found}", t.span)


# ---------------------------------------------------------------- name resolution

def _resolve_expr(e: Expr, is_label) -> Expr:
    match e:
        case PortRef(None, name) if is_label(name):
            return EnumLit(name, span=e.span)
        case ArrayLit(items):
            return replace(e, items=tuple(_resolve_expr(x, is_label) for x in items))
        case SetChoice(values):
            return replace(e, values=tuple(_resolve_expr(x, is_label) for x in values))
        case Index(base, idx):
            return replace(e, base=_resolve_expr(base, is_label),
                           index=_resolve_expr(idx, is_label))
        case UnOp(_, x):
            return replace(e, operand=_resolve_expr(x, is_label))
        case BinOp(_, a, b):
            return replace(e, left=_resolve_expr(a, is_label), right=_resolve_expr(b, is_label))
        case Case(branches):
            return replace(e, branches=tuple((_resolve_expr(c, is_label),
                                              _resolve_expr(v, is_label))
                                             for c, v in branches))
    return e


def _resolve_ltl(f: LtlFormula, is_label) -> LtlFormula:
    match f:
        case Atom(e):
            return replace(f, expr=_resolve_expr(e, is_label))
        case LNot(x) | Globally(x) | Finally(x) | Next(x):
            return replace(f, operand=_resolve_ltl(x, is_label))
        case LAnd(a, b) | LOr(a, b) | LImplies(a, b) | Until(a, b):
            return replace(f, left=_resolve_ltl(a, is_label), right=_resolve_ltl(b, is_label))
    return f


def _enum_labels(sort: SortType) -> set[str]:
    return set(sort.labels) if isinstance(sort, EnumSort) else set()


def resolve_names(spec: PatternSpec) -> PatternSpec:
    """Turn bare names that denote enumeration labels into `EnumLit` nodes."""
    all_labels: set[str] = set()
    for b in spec.behaviors:
        all_labels |= set(b.control_states)
    for i in spec.interfaces:
        for p in i.ports:
            all_labels |= _enum_labels(p.sort)
    for v in spec.architecture.env_vars:
        all_labels |= _enum_labels(v.sort)

    behaviors = []
    for b in spec.behaviors:
        iface = spec.interface(b.interface)
        ports = {p.name for p in iface.ports} if iface else set()
        labels = set(b.control_states)
        if iface:
            for p in iface.ports:
                labels |= _enum_labels(p.sort)

        def is_label(n, ports=ports, labels=labels):
            return n not in ports and n != CONTROL and n in labels

        def fix(a: Assign, is_label=is_label) -> Assign:
            return replace(a, expr=_resolve_expr(a.expr, is_label))
        behaviors.append(replace(
            b,
            local_init=tuple(map(fix, b.local_init)),
            transitions=tuple(replace(t, guard=_resolve_expr(t.guard, is_label))
                              for t in b.transitions),
            output_defs=tuple(map(fix, b.output_defs)),
            local_updates=tuple(map(fix, b.local_updates)),
        ))

    arch = spec.architecture
    arch_names = {v.name for v in arch.env_vars} | {d.target for d in arch.shared_defs}

    def arch_label(n):
        return n not in arch_names and n in all_labels

    def afix(a: Assign) -> Assign:
        return replace(a, expr=_resolve_expr(a.expr, arch_label))
    arch = replace(
        arch,
        instances=tuple(replace(i, bindings=tuple(map(afix, i.bindings)))
                        for i in arch.instances),
        env_vars=tuple(replace(v, init=_resolve_expr(v.init, arch_label),
                               next=_resolve_expr(v.next, arch_label))
                       for v in arch.env_vars),
        shared_defs=tuple(map(afix, arch.shared_defs)),
    )
    props = tuple(replace(p, formula=_resolve_ltl(p.formula, arch_label))
                  for p in spec.properties)
    return replace(spec, behaviors=tuple(behaviors), architecture=arch, properties=props)


def parse_pattern(text: str, file: str = "<input>") -> ParseResult:
    """Parse DSL text; never raises on malformed input."""
    tokens, diags = tokenize(text, file)
    p = _Parser(tokens, file)
    try:
        spec = p.spec()
    except RecursionError:
        p.diags.append(Diagnostic("error", "expression nested too deeply",
                                  tokens[0].span, "syntax"))
        spec = None
    diags = diags + p.diags
    if any(d.is_error for d in diags):
        spec = None
    return ParseResult(spec, diags)


def parse_ltl(text: str, file: str = "<formula>") -> tuple[LtlFormula | None, list[Diagnostic]]:
    """Parse a standalone formula (used when reloading counterexample files)."""
    tokens, diags = tokenize(text, file)
    p = _Parser(tokens, file)
    try:
        f = _as_ltl(p.formula())
        if p.tok.kind != "eof":
            raise _Error(f"unexpected {p.tok.text!r} after formula", p.tok.span)
    except _Error as err:
        return None, diags + [err.diag]
    return f, diags


# ---------------------------------------------------------------- printing

PREC = {"->": 1, "|": 2, "&": 3, "U": 4, "unary": 5, "cmp": 6, "+": 7, "-": 7,
        "*": 8, "mod": 8, "neg": 9, "postfix": 10, "atom": 11}
_RIGHT_ASSOC = {"->", "U"}


def _binop_prec(op: str) -> int:
    return PREC["cmp"] if op in _COMPARE else PREC[op]


def expr_prec(e: Expr) -> int:
    match e:
        case BinOp(op, _, _):
            return _binop_prec(op)
        case UnOp("!", _):
            return PREC["unary"]
        case UnOp("-", _):
            return PREC["neg"]
        case Index():
            return PREC["postfix"]
        case IntLit(v) if v < 0:
            return PREC["neg"]
    return PREC["atom"]


def ltl_prec(f: LtlFormula) -> int:
    match f:
        case Atom(e):
            return expr_prec(e)
        case LImplies():
            return PREC["->"]
        case LOr():
            return PREC["|"]
        case LAnd():
            return PREC["&"]
        case Until():
            return PREC["U"]
        case LNot() | Globally() | Finally() | Next():
            return PREC["unary"]
    return PREC["atom"]


class Printer:
    """Minimal-parenthesis renderer shared by the DSL and SMV back ends."""

    true_kw = "true"
    false_kw = "false"

    def ref(self, r: PortRef) -> str:
        return str(r)

    def wrap(self, s: str, prec: int, need: int) -> str:
        return f"({s})" if prec < need else s

    def operand(self, x: Expr, need: int) -> str:
        # case expressions are atoms to the grammar but read better delimited
        if isinstance(x, Case):
            return f"({self.expr(x)})"
        return self.wrap(self.expr(x), expr_prec(x), need)

    def expr(self, e: Expr) -> str:
        match e:
            case BoolLit(v):
                return self.true_kw if v else self.false_kw
            case IntLit(v):
                return str(v)
            case EnumLit(label):
                return label
            case ArrayLit(items):
                return "[" + ", ".join(self.expr(x) for x in items) + "]"
            case SetChoice(values):
                return "{" + ", ".join(self.expr(x) for x in values) + "}"
            case PortRef():
                return self.ref(e)
            case Index(base, idx):
                b = self.wrap(self.expr(base), expr_prec(base), PREC["postfix"])
                return f"{b}[{self.expr(idx)}]"
            case UnOp("!", x):
                return "!" + self.wrap(self.expr(x), expr_prec(x), PREC["unary"])
            case UnOp("-", x):
                inner = self.expr(x)
                if isinstance(x, IntLit) or expr_prec(x) < PREC["atom"]:
                    inner = f"({inner})"
                return "-" + inner
            case BinOp(op, a, b):
                p = _binop_prec(op)
                if op in _COMPARE:
                    lneed, rneed = p + 1, p + 1
                elif op in _RIGHT_ASSOC:
                    lneed, rneed = p + 1, p
                else:
                    lneed, rneed = p, p + 1
                return f"{self.operand(a, lneed)} {op} {self.operand(b, rneed)}"
            case Case(branches):
                inner = " ".join(f"{self.expr(c)} : {self.expr(v)};" for c, v in branches)
                return f"case {inner} esac"
        raise TypeError(f"cannot print {e!r}")

    def ltl(self, f: LtlFormula) -> str:
        match f:
            case Atom(e):
                return self.expr(e)
            case Active(inst):
                return f"active({inst})"
            case Connected(a, b):
                return f"conn({self.ref(a)}, {self.ref(b)})"
            case LNot(x):
                return "!" + self.wrap(self.ltl(x), ltl_prec(x), PREC["unary"])
            case Globally(x) | Finally(x) | Next(x):
                op = {Globally: "G", Finally: "F", Next: "X"}[type(f)]
                return f"{op} " + self.wrap(self.ltl(x), ltl_prec(x), PREC["unary"])
            case LAnd(a, b) | LOr(a, b) | LImplies(a, b) | Until(a, b):
                op = {LAnd: "&", LOr: "|", LImplies: "->", Until: "U"}[type(f)]
                p = PREC[op]
                lneed, rneed = (p + 1, p) if op in _RIGHT_ASSOC else (p, p + 1)
                la = self.wrap(self.ltl(a), ltl_prec(a), lneed)
                rb = self.wrap(self.ltl(b), ltl_prec(b), rneed)
                return f"{la} {op} {rb}"
        raise TypeError(f"cannot print {f!r}")


def sort_text(s: SortType) -> str:
    match s:
        case BoolSort():
            return "bool"
        case IntRange(lo, hi):
            return f"{lo}..{hi}"
        case ArraySort(lo, hi, el):
            return f"array {lo}..{hi} of {sort_text(el)}"
        case EnumSort(labels):
            return "{" + ", ".join(labels) + "}"
    raise TypeError(f"not a sort: {s!r}")


_KIND_KW = {"local": "local", "input": "in", "output": "out"}


def pretty_print(spec: PatternSpec) -> str:
    """Canonical DSL text; `parse_pattern` of the result equals `spec`."""
    pr = Printer()
    out = [f"pattern {spec.name}"]
    for iface in spec.interfaces:
        out.append("")
        out.append(f"interface {iface.name}")
        for p in iface.ports:
            out.append(f"  {_KIND_KW[p.kind]} {p.name} : {sort_text(p.sort)}")
    for b in spec.behaviors:
        out.append("")
        out.append(f"behavior {b.interface}")
        out.append(f"  states {', '.join(b.control_states)}")
        out.append(f"  init {b.initial_control}")
        for a in b.local_init:
            out.append(f"  init {a.target} := {pr.expr(a.expr)}")
        for t in b.transitions:
            out.append(f"  trans {t.source} -> {t.target} when {pr.expr(t.guard)}")
        for a in b.local_updates:
            out.append(f"  next {a.target} := {pr.expr(a.expr)}")
        for a in b.output_defs:
            out.append(f"  define {a.target} := {pr.expr(a.expr)}")
    arch = spec.architecture
    if arch.instances or arch.env_vars or arch.shared_defs:
        out.append("")
        out.append("architecture")
        for inst in arch.instances:
            binds = ", ".join(f"{a.target} := {pr.expr(a.expr)}" for a in inst.bindings)
            out.append(f"  component {inst.name} : {inst.interface}({binds})")
        for v in arch.env_vars:
            out.append(f"  env {v.name} : {sort_text(v.sort)} init {pr.expr(v.init)} "
                       f"next {pr.expr(v.next)}")
        for d in arch.shared_defs:
            out.append(f"  define {d.target} := {pr.expr(d.expr)}")
    if spec.properties:
        out.append("")
        for p in spec.properties:
            out.append(f"property {p.name} : {pr.ltl(p.formula)}")
    return "\n".join(out) + "\n"
