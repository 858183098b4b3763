"""Disjunctive constants.

Formulas are monotone combinations of multi-valued propositions ``x in A``
over a finite value universe U.  As a relational domain, a formula is
represented by its canonical relation (:class:`ConstRel`): the set of
admissible value tuples over the variables it actually constrains.  On a
cluster of at most two variables this is exactly the pair normal form
``OR_{(a,b) in L} x = a and y = b``.

The reserved atom ``@other`` (the bullet) stands for every concrete value
outside U, which makes negative guards expressible.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from weakrel import kernels
from weakrel.core import (
    DecomposedValue,
    DomainError,
    RelationalDomain,
    TwoDecomposed,
    cluster,
    clusters,
)
from weakrel.normalization import BudgetExceeded, IterationBudget, NormalizeStats, StableDomain
from weakrel.syntax import Cursor, ParseError

BULLET = "@other"


@dataclass(frozen=True)
class ValueUniverse:
    """Finite set of constants, optionally extended by the bullet atom."""

    values: tuple[str, ...]
    bullet: bool = True

    def __post_init__(self):
        if not self.values and not self.bullet:
            raise DomainError("value universe must be nonempty")
        if BULLET in self.values:
            raise DomainError(f"{BULLET} is reserved")
        if len(set(self.values)) != len(self.values):
            raise DomainError("duplicate values in universe")

    @classmethod
    def of(cls, values: Iterable[str], bullet: bool = True) -> "ValueUniverse":
        return cls(tuple(values), bullet)

    @property
    def atoms(self) -> tuple[str, ...]:
        return self.values + ((BULLET,) if self.bullet else ())

    def index(self, a: str) -> int:
        try:
            return self.atoms.index(a)
        except ValueError:
            raise DomainError(f"unknown value {a!r}") from None

    def complement(self, values: Iterable[str]) -> frozenset[str]:
        return frozenset(self.atoms) - frozenset(values)


# --------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Prop:
    var: str
    values: frozenset

    def __init__(self, var: str, values: Iterable[str]):
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "values", frozenset(values))


@dataclass(frozen=True)
class And:
    parts: tuple = ()


@dataclass(frozen=True)
class Or:
    parts: tuple = ()


TOP = And(())
BOT = Or(())

ConstFormula = Prop | And | Or


def conj(*parts) -> And:
    return And(tuple(parts))


def disj(*parts) -> Or:
    return Or(tuple(parts))


def formula_vars(f: ConstFormula) -> frozenset[str]:
    if isinstance(f, Prop):
        return frozenset([f.var])
    return frozenset().union(*(formula_vars(p) for p in f.parts))


def evaluate(f: ConstFormula, sigma: Mapping[str, str]) -> bool:
    if isinstance(f, Prop):
        if f.var not in sigma:
            raise DomainError(f"unbound variable {f.var!r}")
        return sigma[f.var] in f.values
    if isinstance(f, And):
        return all(evaluate(p, sigma) for p in f.parts)
    return any(evaluate(p, sigma) for p in f.parts)


def to_dnf(f: ConstFormula) -> list[dict[str, frozenset]]:
    """DNF with at most one proposition per variable in each conjunction."""
    if isinstance(f, Prop):
        return [{f.var: f.values}]
    if isinstance(f, Or):
        return [c for p in f.parts for c in to_dnf(p)]
    out: list[dict[str, frozenset]] = [{}]
    for p in f.parts:
        nxt = []
        for left in out:
            for right in to_dnf(p):
                merged = dict(left)
                for v, a in right.items():
                    merged[v] = merged[v] & a if v in merged else a
                nxt.append(merged)
        out = nxt
    return out


def dnf_to_formula(dnf: Iterable[Mapping[str, frozenset]]) -> ConstFormula:
    clauses = []
    for c in dnf:
        props = tuple(Prop(v, c[v]) for v in sorted(c))
        clauses.append(props[0] if len(props) == 1 else And(props))
    if len(clauses) == 1:
        return clauses[0]
    return Or(tuple(clauses))


def restrict_formula(f: ConstFormula, ys: Iterable[str]) -> ConstFormula:
    """Project a formula onto ``ys`` through its DNF.

    Conjunctions holding an empty proposition are dropped first; then every
    proposition on a variable outside ``ys`` is deleted.
    """
    keep = set(ys)
    out = []
    for c in to_dnf(f):
        if any(not a for a in c.values()):
            continue
        out.append({v: a for v, a in c.items() if v in keep})
    return dnf_to_formula(out)


def render_formula(f: ConstFormula) -> str:
    if isinstance(f, Prop):
        return f"{f.var} in {_render_set(f.values)}"
    if isinstance(f, And):
        if not f.parts:
            return "top"
        return " and ".join(_paren(p) for p in f.parts)
    if not f.parts:
        return "bot"
    return " or ".join(_paren(p) if isinstance(p, Or) else render_formula(p) for p in f.parts)


def _paren(f: ConstFormula) -> str:
    s = render_formula(f)
    return f"({s})" if isinstance(f, Or) and len(f.parts) > 1 else s


def _render_set(values: Iterable[str], order: Sequence[str] | None = None) -> str:
    vals = list(values)
    key = (lambda a: (order.index(a) if a in order else len(order), a)) if order else (
        lambda a: (a == BULLET, a))
    return "{" + ",".join(sorted(vals, key=key)) + "}"


def parse_formula(text: str | Cursor) -> ConstFormula:
    """Parse ``x in {a,b}``, ``x = a``, ``and``, ``or``, ``top``, ``bot``."""
    cur = Cursor(text) if isinstance(text, str) else text
    f = _parse_disj(cur)
    if isinstance(text, str) and not cur.done():
        cur.error(f"unexpected {cur.tok.text!r}")
    return f


def _parse_disj(cur: Cursor) -> ConstFormula:
    parts = [_parse_conj(cur)]
    while cur.accept("or"):
        parts.append(_parse_conj(cur))
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def _parse_conj(cur: Cursor) -> ConstFormula:
    parts = [_parse_atom(cur)]
    while cur.accept("and"):
        parts.append(_parse_atom(cur))
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _parse_atom(cur: Cursor) -> ConstFormula:
    if cur.accept("("):
        f = _parse_disj(cur)
        cur.expect(")")
        return f
    if cur.accept("top"):
        return TOP
    if cur.accept("bot"):
        return BOT
    var = cur.ident()
    if cur.accept("="):
        return Prop(var, [parse_atom_value(cur)])
    cur.expect("in")
    return Prop(var, parse_value_set(cur))


def parse_atom_value(cur: Cursor) -> str:
    t = cur.next()
    if t.kind not in ("ident", "int"):
        raise ParseError(f"expected value, found {t.text!r}", t.line, t.col)
    return t.text


def parse_value_set(cur: Cursor) -> frozenset[str]:
    cur.expect("{")
    vals = []
    if not cur.at("}"):
        vals.append(parse_atom_value(cur))
        while cur.accept(","):
            vals.append(parse_atom_value(cur))
    cur.expect("}")
    return frozenset(vals)


@dataclass(frozen=True)
class TwoClauseCNF:
    """Conjunction of clauses with at most two propositions each.

    An empty clause is false, so a CNF containing one denotes bottom.
    """

    clauses: tuple

    def __post_init__(self):
        for c in self.clauses:
            if len(c) > 2:
                raise DomainError("clause with more than two propositions")
            if len({p.var for p in c}) != len(c):
                raise DomainError("clause repeats a variable")

    @property
    def vars(self) -> frozenset[str]:
        return frozenset(p.var for c in self.clauses for p in c)

    def to_formula(self) -> ConstFormula:
        return And(tuple(Or(tuple(c)) if len(c) != 1 else c[0] for c in self.clauses))


SAT_GUARD = 2_000_000


def sat_exact(f: TwoClauseCNF | ConstFormula, universe: ValueUniverse,
              variables: Iterable[str] | None = None) -> bool:
    """Decide satisfiability by enumerating all assignments."""
    formula = f.to_formula() if isinstance(f, TwoClauseCNF) else f
    vs = sorted(set(variables) if variables is not None else formula_vars(formula))
    atoms = universe.atoms
    if len(atoms) ** len(vs) > SAT_GUARD:
        raise DomainError("instance too large for exhaustive satisfiability")
    for combo in itertools.product(atoms, repeat=len(vs)):
        if evaluate(formula, dict(zip(vs, combo))):
            return True
    return False


def dnf_satisfiable(f: TwoClauseCNF) -> bool:
    """Independent check: expand the CNF into a DNF and look for a live term."""
    for choice in itertools.product(*f.clauses):
        sets: dict[str, frozenset] = {}
        for p in choice:
            sets[p.var] = sets[p.var] & p.values if p.var in sets else p.values
        if all(sets.values()):
            return True
    return False


# --------------------------------------------------------------------------
# the relational domain C[U]


@dataclass(frozen=True, order=True)
class ConstRel:
    """Admissible value tuples (atom indices) over ``vars``.

    Canonical: ``vars`` is sorted and holds only constrained variables;
    bottom is the empty relation over no variables.
    """

    vars: tuple = ()
    rows: frozenset = field(default_factory=lambda: frozenset({()}))


REL_TOP = ConstRel((), frozenset({()}))
REL_BOT = ConstRel((), frozenset())


class ConstDomain(RelationalDomain):
    """Relational domain C[U] of disjunctive-constant formulas."""

    def __init__(self, universe: ValueUniverse):
        self.universe = universe
        self.atoms = universe.atoms
        self.K = len(self.atoms)

    def __repr__(self):
        return f"ConstDomain({list(self.universe.values)}, bullet={self.universe.bullet})"

    # construction -------------------------------------------------------

    def make(self, vars: Sequence[str], rows: Iterable[tuple]) -> ConstRel:
        vs = tuple(vars)
        rows = set(rows)
        if not rows:
            return REL_BOT
        order = sorted(range(len(vs)), key=lambda i: vs[i])
        if order != list(range(len(vs))):
            vs = tuple(vs[i] for i in order)
            rows = {tuple(r[i] for i in order) for r in rows}
        i = 0
        while i < len(vs):
            rest = {r[:i] + r[i + 1:] for r in rows}
            if len(rows) == len(rest) * self.K:
                vs = vs[:i] + vs[i + 1:]
                rows = rest
            else:
                i += 1
        return ConstRel(vs, frozenset(rows))

    def prop(self, var: str, values: Iterable[str]) -> ConstRel:
        return self.make((var,), {(self.universe.index(a),) for a in values})

    def from_formula(self, f: ConstFormula) -> ConstRel:
        vs = sorted(formula_vars(f))
        rows = []
        for combo in itertools.product(range(self.K), repeat=len(vs)):
            if evaluate(f, {v: self.atoms[a] for v, a in zip(vs, combo)}):
                rows.append(combo)
        return self.make(vs, rows)

    def from_assignments(self, vars: Sequence[str], states: Iterable[Sequence[str]]) -> ConstRel:
        return self.make(vars, {tuple(self.universe.index(a) for a in s) for s in states})

    def expand(self, r: ConstRel, vars: Sequence[str]) -> set[tuple]:
        """Rows of ``r`` over ``vars`` (a superset of ``r.vars``)."""
        vars = tuple(vars)
        pos = [vars.index(v) for v in r.vars]
        free = [i for i in range(len(vars)) if i not in pos]
        out = set()
        for row in r.rows:
            for fill in itertools.product(range(self.K), repeat=len(free)):
                t = [0] * len(vars)
                for i, a in zip(pos, row):
                    t[i] = a
                for i, a in zip(free, fill):
                    t[i] = a
                out.add(tuple(t))
        return out

    def rename(self, r: ConstRel, mapping: Mapping[str, str]) -> ConstRel:
        return self.make(tuple(mapping.get(v, v) for v in r.vars), r.rows)

    # lattice ------------------------------------------------------------

    def top(self):
        return REL_TOP

    def bottom(self):
        return REL_BOT

    def is_bottom(self, r) -> bool:
        return not r.rows

    def leq(self, r1, r2) -> bool:
        if not r1.rows:
            return True
        vs = sorted(set(r1.vars) | set(r2.vars))
        return self.expand(r1, vs) <= self.expand(r2, vs)

    def join(self, r1, r2):
        if not r1.rows:
            return r2
        if not r2.rows:
            return r1
        vs = sorted(set(r1.vars) | set(r2.vars))
        return self.make(vs, self.expand(r1, vs) | self.expand(r2, vs))

    def meet(self, r1, r2):
        if not r1.rows or not r2.rows:
            return REL_BOT
        return _natural_join(self, r1, r2)

    def restrict(self, r, ys):
        if not r.rows:
            return REL_BOT
        keep = set(ys)
        pos = [i for i, v in enumerate(r.vars) if v in keep]
        if len(pos) == len(r.vars):
            return r
        return self.make(tuple(r.vars[i] for i in pos), {tuple(row[i] for i in pos) for row in r.rows})

    def condition(self, cond):
        if isinstance(cond, ConstRel):
            return cond
        return self.from_formula(cond)

    # pair normal form ----------------------------------------------------

    def pairs(self, r: ConstRel, p: Sequence[str]) -> frozenset[tuple[str, ...]]:
        """The pair normal form of ``r`` on cluster ``p`` as value tuples."""
        return frozenset(tuple(self.atoms[a] for a in t) for t in self.expand(r, tuple(p)))

    def matrix(self, r: ConstRel, p: Sequence[str]) -> np.ndarray:
        """K x K 0/1 matrix of ``r`` over the ordered pair ``p`` (or diagonal)."""
        m = np.zeros((self.K, self.K), dtype=np.uint8)
        if len(p) == 1 or p[0] == p[-1]:
            for (a,) in self.expand(r, (p[0],)):
                m[a, a] = 1
        else:
            for a, b in self.expand(r, tuple(p)):
                m[a, b] = 1
        return m

    def from_matrix(self, m: np.ndarray, p: Sequence[str]) -> ConstRel:
        if len(p) == 1:
            return self.make(p, {(a,) for a in range(self.K) if m[a, a]})
        a_idx, b_idx = np.nonzero(m)
        return self.make(p, set(zip(a_idx.tolist(), b_idx.tolist())))

    def close_collection(self, c: DecomposedValue, budget: IterationBudget):
        """Compiled closure of a collection (path consistency on pairs)."""
        u = c.universe
        n = len(u)
        t = np.zeros((n, n, self.K, self.K), dtype=np.uint8)
        for p, v in c.items():
            if len(p) == 1:
                i = u.index(p[0])
                t[i, i] = self.matrix(v, p)
            else:
                i, j = u.index(p[0]), u.index(p[1])
                m = self.matrix(v, p)
                t[i, j] = m
                t[j, i] = m.T
        rounds, updates, status = kernels.close_relations(
            t, budget.max_rounds, budget.max_component_updates)
        if status:
            raise BudgetExceeded("iteration budget exceeded")
        parts = []
        for p in clusters(u):
            i, j = u.index(p[0]), u.index(p[-1])
            parts.append(self.from_matrix(t[i, j], p))
        return DecomposedValue(u, tuple(parts)), NormalizeStats(rounds, updates)

    # rendering -----------------------------------------------------------

    def _set(self, idx: Iterable[int]) -> str:
        return _render_set((self.atoms[a] for a in idx), self.atoms)

    def render(self, r: ConstRel) -> str:
        if not r.rows:
            return "bot"
        if not r.vars:
            return "top"
        if len(r.vars) == 1:
            vals = sorted(a for (a,) in r.rows)
            if len(vals) == 1:
                return f"{r.vars[0]} = {self.atoms[vals[0]]}"
            return f"{r.vars[0]} in {self._set(vals)}"
        cols = [sorted({row[i] for row in r.rows}) for i in range(len(r.vars))]
        if len(r.rows) == int(np.prod([len(c) for c in cols])):
            return " and ".join(
                self.render(self.make((v,), {(a,) for a in c})) for v, c in zip(r.vars, cols))
        head, rest = r.vars[0], r.vars[1:]
        out = []
        for a in cols[0]:
            sub = self.make(rest, {row[1:] for row in r.rows if row[0] == a})
            first = f"{head} = {self.atoms[a]}"
            out.append(first if not sub.vars else f"({first} and {self.render(sub)})")
        return " or ".join(out)

    def parse(self, text: str | Cursor) -> ConstRel:
        f = parse_formula(text)
        for v in _formula_values(f):
            self.universe.index(v)
        return self.from_formula(f)


def _formula_values(f: ConstFormula):
    if isinstance(f, Prop):
        yield from f.values
    else:
        for p in f.parts:
            yield from _formula_values(p)


def _natural_join(dom: ConstDomain, r1: ConstRel, r2: ConstRel) -> ConstRel:
    shared = [v for v in r1.vars if v in r2.vars]
    if not shared:
        vs = r1.vars + r2.vars
        return dom.make(vs, {a + b for a in r1.rows for b in r2.rows})
    i1 = [r1.vars.index(v) for v in shared]
    i2 = [r2.vars.index(v) for v in shared]
    extra = [i for i, v in enumerate(r2.vars) if v not in shared]
    index: dict[tuple, list[tuple]] = {}
    for b in r2.rows:
        index.setdefault(tuple(b[i] for i in i2), []).append(tuple(b[i] for i in extra))
    vs = r1.vars + tuple(r2.vars[i] for i in extra)
    rows = set()
    for a in r1.rows:
        for tail in index.get(tuple(a[i] for i in i1), ()):
            rows.add(a + tail)
    return dom.make(vs, rows)


# --------------------------------------------------------------------------
# 2-decomposed variants and transfer functions


def exact_domain(universe: ValueUniverse, variables: Sequence[str]) -> TwoDecomposed:
    """C2[U]: exact 2-decomposition (normalization is exponential)."""
    return TwoDecomposed(ConstDomain(universe), variables)


def abstract_domain(universe: ValueUniverse, variables: Sequence[str],
                    budget: IterationBudget | None = None) -> StableDomain:
    """C2#[U]: stable collections, polynomial operations."""
    if budget is None:
        budget = IterationBudget.for_instance(len(variables), len(universe.atoms))
    return StableDomain(ConstDomain(universe), variables, budget)


def lift_formula(D, f: ConstFormula | str) -> DecomposedValue:
    if isinstance(f, str):
        f = parse_formula(f)
    return D.lift(D.base.from_formula(f))


def assign_unknown(D, x: str, r: DecomposedValue) -> DecomposedValue:
    """x := ?"""
    return D.restrict(r, [v for v in D.universe if v != x])


def assign_copy(D, x: str, y: str, r: DecomposedValue) -> DecomposedValue:
    """x := y, built from the restriction to the other variables and renaming."""
    if x == y:
        return r
    base: ConstDomain = D.base
    rest = assign_unknown(D, x, r)
    if D.is_bottom(rest):
        return D.bottom()
    ys = rest[(y,)]
    values = {row[0] for row in base.expand(ys, (y,))}
    ren = {y: x}
    updates = {
        (x,): base.rename(ys, ren),
        cluster(x, y): base.make((x, y), {(a, a) for a in values}),
    }
    for z in D.universe:
        if z not in (x, y):
            updates[cluster(x, z)] = base.rename(rest[cluster(y, z)], ren)
    return D.normalize(rest.replace(updates))


def assign_choice(D, x: str, values: Iterable[str], ys: Sequence[str],
                  r: DecomposedValue) -> DecomposedValue:
    """x := A | y1 | ... | yk"""
    values = frozenset(values)
    if x in ys:
        raise DomainError("left-hand side occurs on the right; split through a temporary")
    for a in values:
        if a not in D.base.universe.values:
            raise DomainError(f"value {a!r} not in universe")
    out = D.meet(assign_unknown(D, x, r), D.lift(D.base.prop(x, values)))
    for y in ys:
        out = D.join(out, assign_copy(D, x, y, r))
    return out


def guard_pos(D, x: str, values: Iterable[str], r: DecomposedValue) -> DecomposedValue:
    """?(x in A)"""
    return D.meet(r, D.lift(D.base.prop(x, values)))


def guard_neg(D, x: str, values: Iterable[str], r: DecomposedValue) -> DecomposedValue:
    """?(x notin A); values outside U are represented by the bullet."""
    uni = D.base.universe
    values = frozenset(values)
    if not values <= set(uni.values):
        raise DomainError("negative guard set must lie inside the universe")
    return guard_pos(D, x, uni.complement(values), r)


GAMMA_GUARD = 2_000_000


def gamma_enumerate(D, r: DecomposedValue) -> set[tuple[str, ...]]:
    """All assignments (in universe order) satisfying every component."""
    base: ConstDomain = D.base
    if base.K ** len(D.universe) > GAMMA_GUARD:
        raise DomainError("instance too large for enumeration")
    full = functools.reduce(base.meet, r.parts, base.top())
    return {tuple(base.atoms[a] for a in t) for t in base.expand(full, D.universe)}
