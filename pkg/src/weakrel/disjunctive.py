"""Disjunctive completion of directed domains and its transfer functions.

A :class:`DisjValue` is a finite set of normal-form conjunctions ordered by
the Hoare order: ``v1 <= v2`` iff every disjunct of ``v1`` implies some
disjunct of ``v2``.  Values are kept pruned (no disjunct implied by another)
so that equality is syntactic.  Wrapped in
:class:`~weakrel.normalization.StableDomain` this gives the weakly
relational domains over D[P] (lattices) and D[P]0 (other orders).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from weakrel.core import DecomposedValue, DomainError, RelationalDomain, cluster, from_parts
from weakrel.directed import (
    BOT as CONJ_BOT,
    TOP as CONJ_TOP,
    Conj,
    DirectedDomain,
    Lower,
    Upper,
    VarLe,
    parse_conj,
    project,
    render as render_conj,
)
from weakrel.normalization import IterationBudget, StableDomain, kleene_normalize
from weakrel.posets import MultisetOrder, Poset, PrefixOrder, ScatteredOrder, SubsetOrder, SubstringOrder
from weakrel.syntax import Cursor

DEFAULT_CAP = 32


@dataclass(frozen=True)
class DisjValue:
    """A pruned set of non-bottom normal-form conjunctions; empty is bottom."""

    disjuncts: frozenset = frozenset()

    @property
    def is_bottom(self) -> bool:
        return not self.disjuncts

    def __iter__(self):
        return iter(self.disjuncts)

    def __len__(self):
        return len(self.disjuncts)


DISJ_BOT = DisjValue()
DISJ_TOP = DisjValue(frozenset({CONJ_TOP}))


class DisjunctiveDomain(RelationalDomain):
    """Disjunctive completion of D[P] or D[P]0 with a disjunct cap.

    When a value would hold more than ``cap`` disjuncts, the two last ones
    in canonical order are replaced by their join until it fits.
    """

    def __init__(self, P: Poset, cap: int = DEFAULT_CAP):
        if cap < 1:
            raise ValueError("disjunct cap must be positive")
        self.P = P
        self.cap = cap
        self.dir = DirectedDomain(P)
        self._keys: dict[Conj, str] = {}

    def __repr__(self):
        return f"DisjunctiveDomain({self.P!r}, cap={self.cap})"

    def key(self, c: Conj) -> str:
        k = self._keys.get(c)
        if k is None:
            k = self._keys[c] = render_conj(c, self.P)
        return k

    def ordered(self, v: DisjValue) -> list[Conj]:
        return sorted(v.disjuncts, key=self.key)

    # construction -----------------------------------------------------------

    def prune(self, ds: Iterable[Conj]) -> frozenset:
        items = sorted({d for d in ds if not d.bottom}, key=self.key)
        keep = []
        for i, e in enumerate(items):
            dominated = False
            for j, f in enumerate(items):
                if i == j or not self.dir.leq(e, f):
                    continue
                # equivalent pairs keep the canonically first one
                if not self.dir.leq(f, e) or j < i:
                    dominated = True
                    break
            if not dominated:
                keep.append(e)
        return frozenset(keep)

    def make(self, ds: Iterable[Conj]) -> DisjValue:
        ds = self.prune(self.dir.normalize(d) for d in ds)
        while len(ds) > self.cap:
            items = sorted(ds, key=self.key)
            merged = self.dir.join(items[-2], items[-1])
            ds = self.prune(items[:-2] + [merged])
        return DisjValue(ds)

    def of(self, *conjs: Conj) -> DisjValue:
        return self.make(conjs)

    def hull(self, v: DisjValue) -> DisjValue:
        """Join of all disjuncts (a single conjunction)."""
        if v.is_bottom:
            return v
        items = self.ordered(v)
        out = items[0]
        for c in items[1:]:
            out = self.dir.join(out, c)
        return self.make([out])

    # lattice ----------------------------------------------------------------

    def top(self):
        return DISJ_TOP

    def bottom(self):
        return DISJ_BOT

    def is_bottom(self, r) -> bool:
        return r.is_bottom

    def leq(self, v1, v2) -> bool:
        return all(any(self.dir.leq(e, f) for f in v2.disjuncts) for e in v1.disjuncts)

    def join(self, v1, v2):
        if v1.is_bottom:
            return v2
        if v2.is_bottom:
            return v1
        return self.make(v1.disjuncts | v2.disjuncts)

    def meet(self, v1, v2):
        if v1 == DISJ_TOP:
            return v2
        if v2 == DISJ_TOP:
            return v1
        return self.make(self.dir.meet(a, b) for a in v1.disjuncts for b in v2.disjuncts)

    def restrict(self, v, ys):
        ys = list(ys)
        return self.make(project(e, ys) for e in v.disjuncts)

    def condition(self, cond):
        if isinstance(cond, DisjValue):
            return self.make(cond.disjuncts)
        if isinstance(cond, Conj):
            return self.make([cond])
        return self.make([Conj(frozenset(cond))])

    # rendering ----------------------------------------------------------------

    def render(self, v: DisjValue) -> str:
        if v.is_bottom:
            return "bot"
        return " | ".join(self.key(c) for c in self.ordered(v))

    def parse(self, text: str | Cursor) -> DisjValue:
        cur = Cursor(text) if isinstance(text, str) else text
        ds = [parse_conj(cur, self.P)]
        while cur.accept("|"):
            ds.append(parse_conj(cur, self.P))
        if isinstance(text, str) and not cur.done():
            cur.error(f"unexpected {cur.tok.text!r}")
        return self.make(ds)


# short aliases
def d_join(dom: DisjunctiveDomain, v1, v2):
    return dom.join(v1, v2)


def d_meet(dom: DisjunctiveDomain, v1, v2):
    return dom.meet(v1, v2)


def d_restrict(dom: DisjunctiveDomain, v, ys):
    return dom.restrict(v, ys)


def d_leq(dom: DisjunctiveDomain, v1, v2) -> bool:
    return dom.leq(v1, v2)


def disjunctive_domain(P: Poset, variables: Sequence[str], cap: int = DEFAULT_CAP,
                       budget: IterationBudget | None = None) -> StableDomain:
    """The stable-collection domain over the disjunctive completion."""
    return StableDomain(DisjunctiveDomain(P, cap), variables, budget)


def normalize_disj_collection(D: StableDomain, c: DecomposedValue,
                              budget: IterationBudget | None = None) -> DecomposedValue:
    return kleene_normalize(D.base, c, budget or D.budget)


# --------------------------------------------------------------------------
# right-hand sides


@dataclass(frozen=True)
class Side:
    """A variable or a constant operand."""

    var: str | None = None
    const: object = None

    @classmethod
    def of_var(cls, name: str) -> "Side":
        return cls(var=name)

    @classmethod
    def of_const(cls, d) -> "Side":
        return cls(const=d)

    @property
    def is_var(self) -> bool:
        return self.var is not None


@dataclass(frozen=True)
class Unknown:
    pass


@dataclass(frozen=True)
class ConstRhs:
    d: object


@dataclass(frozen=True)
class VarRhs:
    y: str


@dataclass(frozen=True)
class UnionRhs:
    y1: str
    y2: str


@dataclass(frozen=True)
class InterRhs:
    y1: str
    y2: str


@dataclass(frozen=True)
class PrefixConcat:
    """``s ?``: s followed by an unknown suffix."""

    s: Side


@dataclass(frozen=True)
class SubstringConcat:
    """``? s1 ? ... ? sk ?``"""

    parts: tuple


Rhs = Unknown | ConstRhs | VarRhs | UnionRhs | InterRhs | PrefixConcat | SubstringConcat


def rhs_vars(rhs) -> set[str]:
    if isinstance(rhs, VarRhs):
        return {rhs.y}
    if isinstance(rhs, (UnionRhs, InterRhs)):
        return {rhs.y1, rhs.y2}
    if isinstance(rhs, PrefixConcat):
        return {rhs.s.var} if rhs.s.is_var else set()
    if isinstance(rhs, SubstringConcat):
        return {s.var for s in rhs.parts if s.is_var}
    return set()


def check_rhs(rhs, P: Poset) -> None:
    """Reject right-hand sides the order does not support."""
    if isinstance(rhs, (UnionRhs, InterRhs)) and not isinstance(P, (SubsetOrder, MultisetOrder)):
        raise DomainError("rhs not supported by order")
    if isinstance(rhs, PrefixConcat) and not isinstance(P, PrefixOrder):
        raise DomainError("rhs not supported by order")
    if isinstance(rhs, SubstringConcat) and not isinstance(P, (SubstringOrder, ScatteredOrder)):
        raise DomainError("rhs not supported by order")
    if isinstance(rhs, ConstRhs):
        P.validate(rhs.d)
    for s in getattr(rhs, "parts", ()) + ((rhs.s,) if isinstance(rhs, PrefixConcat) else ()):
        if not s.is_var:
            P.validate(s.const)


def side_atom(s1: Side, s2: Side):
    if s1.is_var and s2.is_var:
        return VarLe(s1.var, s2.var)
    if s1.is_var:
        return Upper(s1.var, s2.const)
    if s2.is_var:
        return Lower(s1.const, s2.var)
    return None


def rhs_atoms(x: str, rhs) -> list:
    """Atoms conjoined after forgetting x (x must not occur in rhs)."""
    X = Side.of_var(x)
    if isinstance(rhs, Unknown):
        return []
    if isinstance(rhs, ConstRhs):
        return [Lower(rhs.d, x), Upper(x, rhs.d)]
    if isinstance(rhs, VarRhs):
        return [VarLe(x, rhs.y), VarLe(rhs.y, x)]
    if isinstance(rhs, InterRhs):
        return [VarLe(x, rhs.y1), VarLe(x, rhs.y2)]
    if isinstance(rhs, UnionRhs):
        return [VarLe(rhs.y1, x), VarLe(rhs.y2, x)]
    if isinstance(rhs, PrefixConcat):
        return [side_atom(rhs.s, X)]
    if isinstance(rhs, SubstringConcat):
        return [side_atom(s, X) for s in rhs.parts]
    raise DomainError(f"unknown right-hand side {rhs!r}")


def _fresh(universe: Iterable[str], stem: str = "tmp") -> str:
    taken = set(universe)
    name = stem
    while name in taken:
        name += "'"
    return name


# --------------------------------------------------------------------------
# transfers on stable collections over the disjunctive completion


def _extend(D: StableDomain, r: DecomposedValue, t: str) -> tuple[StableDomain, DecomposedValue]:
    D2 = StableDomain(D.base, D.universe + (t,), D.budget)
    top = D.base.top()

    def part(p):
        rest = [v for v in p if v != t]
        if not rest:
            return top
        return r[tuple(rest)] if len(rest) == len(p) else r[(rest[0],)]

    if D.is_bottom(r):
        return D2, D2.bottom()
    return D2, from_parts(D2.universe, part)


def _shrink(D: StableDomain, r2: DecomposedValue) -> DecomposedValue:
    return from_parts(D.universe, lambda p: r2[p])


def assign(D: StableDomain, x: str, rhs, r: DecomposedValue) -> DecomposedValue:
    """Abstract assignment ``x := rhs`` on a stable collection."""
    P = D.base.P
    check_rhs(rhs, P)
    if x not in D.universe:
        raise DomainError(f"unknown variable {x!r}")
    unknown = rhs_vars(rhs) - set(D.universe)
    if unknown:
        raise DomainError(f"unknown variables {sorted(unknown)}")
    if x in rhs_vars(rhs):
        if isinstance(rhs, VarRhs):
            return r
        t = _fresh(D.universe)
        D2, r2 = _extend(D, r, t)
        r2 = assign(D2, t, rhs, r2)
        r2 = assign(D2, x, VarRhs(t), r2)
        r2 = D2.restrict(r2, [v for v in D2.universe if v != t])
        return _shrink(D, r2)
    out = D.restrict(r, [v for v in D.universe if v != x])
    atoms = rhs_atoms(x, rhs)
    if not atoms or D.is_bottom(out):
        return out
    return D.meet(out, D.lift(D.base.of(Conj(frozenset(atoms)))))


def guard_ineq(D: StableDomain, s1: Side, s2: Side, r: DecomposedValue) -> DecomposedValue:
    """?(s1 <= s2)"""
    a = side_atom(s1, s2)
    if a is None:
        return r if D.base.P.leq(s1.const, s2.const) else D.bottom()
    return D.meet(r, D.lift(D.base.of(Conj.of(a))))


def guard_neg_ineq(D: StableDomain, s1: Side, s2: Side, r: DecomposedValue) -> DecomposedValue:
    """?!(s1 <= s2): drop the disjuncts of the condition's cluster that imply
    s1 <= s2, then meet."""
    a = side_atom(s1, s2)
    if a is None:
        return D.bottom() if D.base.P.leq(s1.const, s2.const) else r
    if isinstance(a, VarLe) and a.x == a.y:
        return D.bottom()
    if D.is_bottom(r):
        return r
    p = cluster(*a.vars)
    base: DisjunctiveDomain = D.base
    cond = Conj.of(a)
    kept = [e for e in r[p].disjuncts if not base.dir.leq(e, cond)]
    return D.meet(r, D.lift(base.make(kept)))


def disjuncts_of(D: StableDomain, r: DecomposedValue) -> int:
    return sum(len(v) for v in r.parts)


# --------------------------------------------------------------------------
# the same transfers on plain conjunctions (D[P] / D[P]0 without clusters)


def conj_assign(dom: DirectedDomain, x: str, rhs, c: Conj) -> Conj:
    check_rhs(rhs, dom.P)
    if x in rhs_vars(rhs):
        if isinstance(rhs, VarRhs):
            return c
        t = _fresh(c.vars | rhs_vars(rhs) | {x})
        c = conj_assign(dom, t, rhs, c)
        c = conj_assign(dom, x, VarRhs(t), c)
        return dom.normalize(project(c, c.vars - {t}))
    out = project(c, c.vars - {x})
    return dom.meet(out, Conj(frozenset(rhs_atoms(x, rhs))))


def conj_guard(dom: DirectedDomain, s1: Side, s2: Side, c: Conj) -> Conj:
    a = side_atom(s1, s2)
    if a is None:
        return c if dom.P.leq(s1.const, s2.const) else CONJ_BOT
    return dom.meet(c, Conj.of(a))


def conj_guard_neg(dom: DirectedDomain, s1: Side, s2: Side, c: Conj) -> Conj:
    """Negated inequality on a single conjunction: bottom when the
    conjunction implies the inequality, identity otherwise (sound)."""
    a = side_atom(s1, s2)
    if a is None:
        return CONJ_BOT if dom.P.leq(s1.const, s2.const) else c
    if c.bottom or dom.leq(c, Conj.of(a)):
        return CONJ_BOT
    return c
