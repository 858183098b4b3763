"""The toy imperative language: AST, parser and control-flow graphs.

A program is a header followed by statements::

    vars x, y;
    domain const2 {a,b};      # or: domain directed; domain directed-disj;
    order int;                # orders for the directed domains
    x := {a};
    if (x in {a}) { y := x; } else { y := {b}; }
    while (!(x <= 10)) { skip; }

The full grammar is in ``docs/grammar.md``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from weakrel.constants import BULLET
from weakrel.core import DomainError
from weakrel.disjunctive import (
    ConstRhs,
    InterRhs,
    PrefixConcat,
    Side,
    SubstringConcat,
    UnionRhs,
    Unknown,
    VarRhs,
    check_rhs,
    rhs_vars,
)
from weakrel.posets import Poset, parse_order
from weakrel.syntax import Cursor, ParseError

DOMAINS = ("const2", "directed", "directed-disj")


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class ChoiceRhs:
    """``x := A | y1 | ... | yk`` over the constants domain."""

    values: frozenset
    ys: tuple = ()


@dataclass(frozen=True)
class InCond:
    x: str
    values: frozenset
    negated: bool = False

    def negate(self) -> "InCond":
        return InCond(self.x, self.values, not self.negated)


@dataclass(frozen=True)
class LeCond:
    s1: Side
    s2: Side
    negated: bool = False

    def negate(self) -> "LeCond":
        return LeCond(self.s1, self.s2, not self.negated)


@dataclass(frozen=True)
class Assign:
    x: str
    rhs: object
    line: int


@dataclass(frozen=True)
class If:
    cond: object
    then: tuple
    orelse: tuple
    line: int


@dataclass(frozen=True)
class While:
    cond: object
    body: tuple
    line: int


@dataclass(frozen=True)
class Skip:
    line: int


@dataclass(frozen=True)
class Program:
    variables: tuple
    domain: str | None
    universe: tuple | None
    order: Poset | None
    body: tuple


# --------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str, domain: str | None, order: Poset | None,
                 universe: tuple | None):
        self.cur = Cursor(text)
        self.domain = domain
        self.order = order
        self.universe = universe
        self.variables: list[str] = []

    def parse(self) -> Program:
        cur = self.cur
        header_domain = header_order = header_universe = None
        while True:
            if cur.at("vars", "ident"):
                cur.next()
                self.variables.append(cur.ident())
                while cur.accept(","):
                    self.variables.append(cur.ident())
                cur.expect(";")
            elif cur.at("domain", "ident"):
                cur.next()
                t = cur.tok
                name = cur.ident()
                if name not in DOMAINS:
                    raise ParseError(f"unknown domain {name!r}", t.line, t.col)
                header_domain = name
                if cur.at("{"):
                    header_universe = self._ident_set()
                cur.expect(";")
            elif cur.at("order", "ident"):
                cur.next()
                t = cur.tok
                parts = []
                while not cur.at(";") and not cur.done():
                    parts.append(cur.next().text)
                cur.expect(";")
                try:
                    header_order = parse_order("".join(parts))
                except ValueError as e:
                    raise ParseError(str(e), t.line, t.col) from None
            else:
                break
        self.domain = self.domain or header_domain or "const2"
        self.order = self.order or header_order
        if self.universe is None:
            self.universe = tuple(sorted(header_universe)) if header_universe else None
        if len(set(self.variables)) != len(self.variables):
            cur.error("variable declared twice")
        if self.domain == "const2":
            # without a universe only the catch-all bullet value remains
            self.universe = self.universe or ()
            if BULLET in self.universe:
                cur.error(f"{BULLET} is reserved")
        elif self.order is None:
            cur.error(f"domain {self.domain} needs an order (order int; or --order)")
        body = self._block_body(top=True)
        return Program(tuple(self.variables), self.domain, self.universe, self.order, body)

    # helpers ---------------------------------------------------------------

    def _ident_set(self) -> frozenset:
        cur = self.cur
        cur.expect("{")
        vals = []
        if not cur.at("}"):
            vals.append(self._atom_value())
            while cur.accept(","):
                vals.append(self._atom_value())
        cur.expect("}")
        return frozenset(vals)

    def _atom_value(self) -> str:
        t = self.cur.next()
        if t.kind not in ("ident", "int"):
            raise ParseError(f"expected value, found {t.text!r}", t.line, t.col)
        return t.text

    def _var(self) -> str:
        t = self.cur.tok
        name = self.cur.ident()
        if name not in self.variables:
            raise ParseError(f"undeclared variable {name!r}", t.line, t.col)
        return name

    def _block_body(self, top: bool = False) -> tuple:
        cur = self.cur
        stmts = []
        while not (cur.done() if top else cur.at("}")):
            if cur.done():
                cur.error("unexpected end of input, expected '}'")
            stmts.append(self._stmt())
        return tuple(stmts)

    def _block(self) -> tuple:
        self.cur.expect("{")
        body = self._block_body()
        self.cur.expect("}")
        return body

    def _stmt(self):
        cur = self.cur
        t = cur.tok
        if cur.accept("skip"):
            cur.expect(";")
            return Skip(t.line)
        if cur.accept("if"):
            cond = self._paren_cond()
            then = self._block()
            orelse = self._block() if cur.accept("else") else ()
            return If(cond, then, orelse, t.line)
        if cur.accept("while"):
            cond = self._paren_cond()
            return While(cond, self._block(), t.line)
        x = self._var()
        cur.expect(":=")
        rhs = self._rhs(x, t)
        cur.expect(";")
        return Assign(x, rhs, t.line)

    # conditions ----------------------------------------------------------------

    def _paren_cond(self):
        self.cur.expect("(")
        c = self._cond()
        self.cur.expect(")")
        return c

    def _cond(self):
        cur = self.cur
        t = cur.tok
        if cur.accept("!"):
            cur.expect("(")
            c = self._cond()
            cur.expect(")")
            return c.negate()
        if self.domain == "const2":
            x = self._var()
            if cur.accept("in"):
                return self._check_in(InCond(x, self._ident_set()), t)
            if cur.accept("notin"):
                return self._check_in(InCond(x, self._ident_set(), True), t)
            cur.error("expected 'in' or 'notin' (const2 conditions)")
        s1 = self._side()
        if cur.at("in") or cur.at("notin"):
            raise ParseError("condition not supported by domain", t.line, t.col)
        cur.expect("<=")
        s2 = self._side()
        return LeCond(s1, s2)

    def _check_in(self, c: InCond, t) -> InCond:
        bad = c.values - set(self.universe)
        if bad:
            raise ParseError(f"values outside universe: {sorted(bad)}", t.line, t.col)
        return c

    def _side(self) -> Side:
        cur = self.cur
        t = cur.tok
        if t.kind == "ident" and t.text in self.variables:
            cur.next()
            return Side.of_var(t.text)
        if t.kind == "ident" and not cur.at("{"):
            raise ParseError(f"undeclared variable {t.text!r}", t.line, t.col)
        return Side.of_const(self.order.parse_value(cur))

    # right-hand sides ---------------------------------------------------------------

    def _rhs(self, x: str, t):
        rhs = self._const_rhs() if self.domain == "const2" else self._directed_rhs()
        if self.domain != "const2":
            try:
                check_rhs(rhs, self.order)
            except (DomainError, ValueError) as e:
                raise ParseError(str(e), t.line, t.col) from None
        return rhs

    def _const_rhs(self):
        cur = self.cur
        if cur.accept("?"):
            return Unknown()
        values: frozenset = frozenset()
        ys: list[str] = []
        first = True
        while first or cur.accept("|"):
            first = False
            t = cur.tok
            if cur.at("{"):
                vals = self._ident_set()
                bad = vals - set(self.universe)
                if bad:
                    raise ParseError(f"values outside universe: {sorted(bad)}", t.line, t.col)
                values |= vals
            elif t.kind == "ident" and t.text in self.variables:
                cur.next()
                ys.append(t.text)
            elif t.kind in ("ident", "int") and t.text in self.universe:
                cur.next()
                values |= {t.text}
            elif t.kind == "ident" and t.text in ("union", "inter"):
                raise ParseError("rhs not supported by domain", t.line, t.col)
            else:
                raise ParseError(f"bad right-hand side {t.text!r}", t.line, t.col)
        return ChoiceRhs(values, tuple(dict.fromkeys(ys)))

    def _directed_rhs(self):
        cur = self.cur
        t = cur.tok
        if cur.accept("?"):
            if cur.at(";"):
                return Unknown()
            parts = []
            while not cur.at(";"):
                parts.append(self._side())
                cur.expect("?")
            return SubstringConcat(tuple(parts))
        if t.kind == "ident" and t.text in ("union", "inter") and cur.peek().text == "(":
            cur.next()
            cur.expect("(")
            y1 = self._var()
            cur.expect(",")
            y2 = self._var()
            cur.expect(")")
            return UnionRhs(y1, y2) if t.text == "union" else InterRhs(y1, y2)
        s = self._side()
        if cur.accept("."):
            cur.expect("?")
            return PrefixConcat(s)
        return VarRhs(s.var) if s.is_var else ConstRhs(s.const)


def parse_program(text: str, *, domain: str | None = None, order: Poset | None = None,
                  universe: tuple | None = None) -> Program:
    """Parse a program; keyword arguments override the header."""
    if domain is not None and domain not in DOMAINS:
        raise ParseError(f"unknown domain {domain!r}")
    return _Parser(text, domain, order, universe).parse()


# --------------------------------------------------------------------------
# control-flow graphs


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: str  # assign, guard, skip
    payload: object = None


@dataclass
class CFG:
    lines: list[int] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    loop_heads: dict[int, int] = field(default_factory=dict)
    entry: int = 0
    exit: int = 0

    def node(self, line: int, label: str) -> int:
        self.lines.append(line)
        self.labels.append(label)
        return len(self.lines) - 1

    def add(self, src: int, dst: int, kind: str, payload=None) -> None:
        self.edges.append(Edge(src, dst, kind, payload))

    def out_edges(self, n: int) -> list[Edge]:
        return [e for e in self.edges if e.src == n]

    @property
    def size(self) -> int:
        return len(self.lines)


def build_cfg(p: Program) -> CFG:
    g = CFG()
    first_line = _first_line(p.body)
    g.entry = g.node(first_line, "entry")
    g.exit = _build_block(g, p.body, g.entry)
    g.labels[g.exit] = "exit" if g.exit != g.entry else "entry/exit"
    return g


def _first_line(body) -> int:
    return body[0].line if body else 1


def _build_block(g: CFG, body, cur: int) -> int:
    for s in body:
        cur = _build_stmt(g, s, cur)
    return cur


def _build_stmt(g: CFG, s, cur: int) -> int:
    if isinstance(s, Assign):
        n = g.node(s.line, f"after {s.x} :=")
        g.add(cur, n, "assign", s)
        return n
    if isinstance(s, Skip):
        n = g.node(s.line, "after skip")
        g.add(cur, n, "skip")
        return n
    if isinstance(s, If):
        t = g.node(s.line, "then")
        e = g.node(s.line, "else")
        g.add(cur, t, "guard", s.cond)
        g.add(cur, e, "guard", s.cond.negate())
        t_end = _build_block(g, s.then, t)
        e_end = _build_block(g, s.orelse, e)
        j = g.node(s.line, "join")
        g.add(t_end, j, "skip")
        g.add(e_end, j, "skip")
        return j
    if isinstance(s, While):
        head = g.node(s.line, "loop head")
        g.loop_heads[head] = s.line
        g.add(cur, head, "skip")
        body = g.node(s.line, "loop body")
        g.add(head, body, "guard", s.cond)
        b_end = _build_block(g, s.body, body)
        g.add(b_end, head, "skip")
        out = g.node(s.line, "loop exit")
        g.add(head, out, "guard", s.cond.negate())
        return out
    raise TypeError(f"unknown statement {s!r}")


def assigned_vars(rhs) -> set[str]:
    if isinstance(rhs, ChoiceRhs):
        return set(rhs.ys)
    return rhs_vars(rhs)
