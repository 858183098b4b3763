"""Brute-force ground truth for the decision procedures.

Model enumeration over finite universes (integer windows, bounded strings,
subset and multiset lattices, explicit posets), implication checks,
3-colorability and the two coloring reductions used as instance
generators.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from weakrel.constants import (
    ConstDomain,
    ConstRel,
    Prop,
    TwoClauseCNF,
    ValueUniverse,
    evaluate,
    formula_vars,
)
from weakrel.core import DomainError
from weakrel.directed import Conj, Lower, Upper, VarLe
from weakrel.disjunctive import (
    ConstRhs,
    DisjValue,
    InterRhs,
    PrefixConcat,
    SubstringConcat,
    UnionRhs,
    Unknown,
    VarRhs,
)
from weakrel.posets import (
    ExplicitOrder,
    IntOrder,
    MultisetOrder,
    Poset,
    PrefixOrder,
    ScatteredOrder,
    SubsetOrder,
    SubstringOrder,
    is_subsequence,
)

ENUM_GUARD = 5_000_000


class OracleTooLarge(DomainError):
    pass


@dataclass(frozen=True)
class FiniteUniverse:
    """A finite set of values of a poset; enumeration ranges over it."""

    P: Poset
    elements: tuple

    def __post_init__(self):
        if not self.elements:
            raise ValueError("empty universe")


def int_window(lo: int, hi: int) -> FiniteUniverse:
    if lo > hi:
        raise ValueError("window needs lo <= hi")
    return FiniteUniverse(IntOrder(), tuple(range(lo, hi + 1)))


def window_for(constants: Iterable[int], default: tuple[int, int] = (0, 0)) -> FiniteUniverse:
    """Integer window one step beyond the occurring constants.

    Every model over the integers can be clamped into this window without
    changing the truth of any atom that compares against these constants.
    """
    cs = list(constants)
    lo, hi = (min(cs), max(cs)) if cs else default
    return int_window(lo - 1, hi + 1)


def strings(alphabet: str, max_len: int, P: Poset | None = None) -> FiniteUniverse:
    P = P or PrefixOrder()
    out = [""]
    for n in range(1, max_len + 1):
        out.extend("".join(t) for t in itertools.product(alphabet, repeat=n))
    return FiniteUniverse(P, tuple(out))


def default_string_length(constants: Iterable[str]) -> int:
    return max((len(c) for c in constants), default=0) + 2


def subsets(P: SubsetOrder) -> FiniteUniverse:
    return FiniteUniverse(P, tuple(P.elements()))


def multisets(P: MultisetOrder, max_count: int) -> FiniteUniverse:
    els = itertools.product(range(max_count + 1), repeat=len(P.universe))
    return FiniteUniverse(P, tuple(sorted(els, key=P.sort_key)))


def explicit(P: ExplicitOrder) -> FiniteUniverse:
    return FiniteUniverse(P, P.elements)


# --------------------------------------------------------------------------
# model enumeration


def _directed_search(c: Conj, vars: Sequence[str], u: FiniteUniverse, guard: bool) -> Iterator[tuple]:
    """Backtracking over per-variable candidates; binary atoms are checked
    as soon as both sides are assigned."""
    if c.bottom:
        return
    P = u.P
    vars = list(vars)
    missing = c.vars - set(vars)
    if missing:
        raise DomainError(f"variables missing from enumeration: {sorted(missing)}")
    cands = []
    for x in vars:
        lows = [a.d for a in c.atoms if isinstance(a, Lower) and a.x == x]
        ups = [a.d for a in c.atoms if isinstance(a, Upper) and a.x == x]
        cands.append([e for e in u.elements
                      if all(P.leq(d, e) for d in lows) and all(P.leq(e, d) for d in ups)])
    if guard and math.prod(max(1, len(cs)) for cs in cands) > ENUM_GUARD:
        raise OracleTooLarge("enumeration guard exceeded")
    pos = {x: i for i, x in enumerate(vars)}
    checks: list[list[tuple[int, int]]] = [[] for _ in vars]
    for a in c.atoms:
        if isinstance(a, VarLe):
            i, j = pos[a.x], pos[a.y]
            checks[max(i, j)].append((i, j))
    cur: list = [None] * len(vars)

    def go(k: int) -> Iterator[tuple]:
        if k == len(vars):
            yield tuple(cur)
            return
        for e in cands[k]:
            cur[k] = e
            if all(P.leq(cur[i], cur[j]) for i, j in checks[k]):
                yield from go(k + 1)

    yield from go(0)


def _directed_models(c: Conj, vars: Sequence[str], u: FiniteUniverse) -> set[tuple]:
    return set(_directed_search(c, vars, u, guard=True))


def _const_models(f, vars: Sequence[str], u: ValueUniverse) -> set[tuple]:
    vars = list(vars)
    if len(u.atoms) ** len(vars) > ENUM_GUARD:
        raise OracleTooLarge("enumeration guard exceeded")
    if isinstance(f, ConstRel):
        dom = ConstDomain(u)
        rows = dom.expand(f, vars) if f.rows else set()
        return {tuple(u.atoms[a] for a in r) for r in rows}
    if isinstance(f, TwoClauseCNF):
        f = f.to_formula()
    missing = formula_vars(f) - set(vars)
    if missing:
        raise DomainError(f"variables missing from enumeration: {sorted(missing)}")
    return {t for t in itertools.product(u.atoms, repeat=len(vars))
            if evaluate(f, dict(zip(vars, t)))}


def enumerate_models(obj, vars: Sequence[str], u) -> set[tuple]:
    """All satisfying assignments, as tuples in ``vars`` order."""
    if isinstance(u, ValueUniverse):
        return _const_models(obj, vars, u)
    if isinstance(obj, DisjValue):
        out: set[tuple] = set()
        for c in obj.disjuncts:
            out |= _directed_models(c, vars, u)
        return out
    return _directed_models(obj, vars, u)


def sorted_models(obj, vars: Sequence[str], u) -> list[tuple]:
    return sorted(enumerate_models(obj, vars, u), key=repr)


def _all_vars(*objs) -> list[str]:
    vs: set[str] = set()
    for o in objs:
        if isinstance(o, Conj):
            vs |= o.vars
        elif isinstance(o, DisjValue):
            for c in o.disjuncts:
                vs |= c.vars
        elif isinstance(o, ConstRel):
            vs |= set(o.vars)
        elif isinstance(o, TwoClauseCNF):
            vs |= o.vars
        else:
            vs |= formula_vars(o)
    return sorted(vs)


def check_implies(lhs, rhs, vars: Sequence[str] | None, u) -> bool:
    vars = list(vars) if vars is not None else _all_vars(lhs, rhs)
    return enumerate_models(lhs, vars, u) <= enumerate_models(rhs, vars, u)


def check_equiv(lhs, rhs, vars: Sequence[str] | None, u) -> bool:
    vars = list(vars) if vars is not None else _all_vars(lhs, rhs)
    return enumerate_models(lhs, vars, u) == enumerate_models(rhs, vars, u)


def satisfiable(obj, vars: Sequence[str] | None, u) -> bool:
    vars = list(vars) if vars is not None else _all_vars(obj)
    if isinstance(obj, Conj) and isinstance(u, FiniteUniverse):
        # stops at the first model, so no enumeration guard applies
        return next(_directed_search(obj, vars, u, guard=False), None) is not None
    return bool(enumerate_models(obj, vars, u))


def project_models(models: Iterable[tuple], vars: Sequence[str], ys: Sequence[str]) -> set[tuple]:
    idx = [list(vars).index(y) for y in ys]
    return {tuple(m[i] for i in idx) for m in models}


# --------------------------------------------------------------------------
# graphs and the coloring reductions


@dataclass(frozen=True)
class Graph:
    vertices: tuple
    edges: frozenset

    def __post_init__(self):
        for e in self.edges:
            if len(e) != 2:
                raise ValueError("self-loops are not allowed")
            if not set(e) <= set(self.vertices):
                raise ValueError("edge endpoint outside the vertex set")

    @classmethod
    def of(cls, vertices: Sequence, edges: Iterable[tuple]) -> "Graph":
        return cls(tuple(vertices), frozenset(frozenset(e) for e in edges))

    def ordered_edges(self) -> list[tuple]:
        """Edges as (u, v) with u before v in vertex order, sorted."""
        idx = {v: i for i, v in enumerate(self.vertices)}
        out = [tuple(sorted(e, key=idx.__getitem__)) for e in self.edges]
        return sorted(out, key=lambda e: (idx[e[0]], idx[e[1]]))


def complete_graph(n: int, prefix: str = "x") -> Graph:
    vs = [f"{prefix}{i}" for i in range(1, n + 1)]
    return Graph.of(vs, itertools.combinations(vs, 2))


def random_graph(rng: random.Random, max_vertices: int = 5, p: float = 0.5) -> Graph:
    n = rng.randint(1, max_vertices)
    vs = [f"x{i}" for i in range(1, n + 1)]
    return Graph.of(vs, [e for e in itertools.combinations(vs, 2) if rng.random() < p])


# K4 without the edge {x2,x4}
EXAMPLE_EDGES_5 = (("x1", "x2"), ("x1", "x4"), ("x2", "x3"), ("x3", "x4"), ("x1", "x3"))
K4 = complete_graph(4)
K4_MINUS_EDGE = Graph.of(K4.vertices, EXAMPLE_EDGES_5)
TRIANGLE = complete_graph(3)


def three_colorable(g: Graph) -> bool:
    edges = g.ordered_edges()
    idx = {v: i for i, v in enumerate(g.vertices)}
    for cols in itertools.product(range(3), repeat=len(g.vertices)):
        if all(cols[idx[a]] != cols[idx[b]] for a, b in edges):
            return True
    return False


COLORS = ("a", "b", "c")


def coloring_universe() -> ValueUniverse:
    return ValueUniverse(COLORS, bullet=False)


def edge_clauses(xi: str, xj: str) -> list[tuple[Prop, Prop]]:
    out = []
    for c in COLORS:
        rest = frozenset(COLORS) - {c}
        out.append((Prop(xi, rest), Prop(xj, rest)))
    return out


def coloring_to_const(g: Graph) -> TwoClauseCNF:
    """Three two-literal clauses per edge over U = {a,b,c}."""
    clauses = []
    for a, b in g.ordered_edges():
        clauses.extend(edge_clauses(a, b))
    return TwoClauseCNF(tuple(clauses))


def vertex_chain_reduction(g: Graph) -> tuple[ExplicitOrder, Conj]:
    """Vertex-color elements ordered along each edge, with per-vertex guard
    elements, and one conjunction over the vertex variables.

    Kept for reference only. Closing the edge rules under transitivity
    relates color elements of non-adjacent vertices through chains, so the
    conjunction can be satisfiable for graphs that are not 3-colorable
    (K4 is one).
    """
    vs = list(g.vertices)
    idx = {v: i for i, v in enumerate(vs)}
    edges = g.ordered_edges()
    elements: list = []
    for v in vs:
        elements.extend((v, c) for c in (1, 2, 3))
    elements.extend(("lo", v) for v in vs)
    elements.extend(("hi", v) for v in vs)
    rel = []
    for a, b in edges:
        for c in (1, 2, 3):
            for c2 in (1, 2, 3):
                if c != c2:
                    rel.append(((a, c), (b, c2)))
    for v in vs:
        if any(a == v for a, _ in edges):
            rel.extend(((v, c), ("hi", v)) for c in (1, 2, 3))
        if any(b == v for _, b in edges):
            rel.extend((("lo", v), (v, c)) for c in (1, 2, 3))
    P = ExplicitOrder.from_relation(elements, rel)
    atoms = set()
    for a, b in edges:
        xa, xb = _cvar(idx[a]), _cvar(idx[b])
        atoms.add(Upper(xa, ("hi", a)))
        atoms.add(VarLe(xa, xb))
        atoms.add(Lower(("lo", b), xb))
    return P, Conj(frozenset(atoms))


def coloring_to_directed(g: Graph) -> tuple[ExplicitOrder, Conj]:
    """Explicit poset of height two and a conjunction satisfiable iff ``g``
    is 3-colorable.

    Vertex ``v`` gets color elements ``(v, c)`` under a cap ``("hi", v)``,
    and edge ``{u, v}`` gets six elements ``(u, v, c, c2)`` for ``c != c2``,
    each above ``(u, c)``, ``(v, c2)`` and a floor ``("lo", u, v)``.
    Vertex variable ``x_i`` sits below its cap; edge variable ``y_i_j`` sits
    above its floor and above both endpoint variables. No element is both
    above and below another, so the closure adds nothing.
    """
    vs = list(g.vertices)
    idx = {v: i for i, v in enumerate(vs)}
    edges = g.ordered_edges()
    elements: list = []
    rel = []
    for v in vs:
        elements.extend((v, c) for c in (1, 2, 3))
        elements.append(("hi", v))
        rel.extend(((v, c), ("hi", v)) for c in (1, 2, 3))
    atoms = set()
    for a, b in edges:
        elements.append(("lo", a, b))
        for c in (1, 2, 3):
            for c2 in (1, 2, 3):
                if c != c2:
                    e = (a, b, c, c2)
                    elements.append(e)
                    rel.extend((((a, c), e), ((b, c2), e), (("lo", a, b), e)))
        xa, xb = _cvar(idx[a]), _cvar(idx[b])
        y = f"y{idx[a] + 1}_{idx[b] + 1}"
        atoms.update((Upper(xa, ("hi", a)), Upper(xb, ("hi", b)), Lower(("lo", a, b), y),
                      VarLe(xa, y), VarLe(xb, y)))
    P = ExplicitOrder.from_relation(elements, rel)
    return P, Conj(frozenset(atoms))


def _cvar(i: int) -> str:
    return f"x{i + 1}"


def directed_instance_satisfiable(g: Graph, reduction=coloring_to_directed) -> bool:
    P, c = reduction(g)
    if not c.atoms:
        return True
    # vertex variables first so edge variables are pruned by both endpoints
    order = sorted(c.vars, key=lambda x: (x[0] != "x", x))
    return satisfiable(c, order, explicit(P))


# --------------------------------------------------------------------------
# concrete semantics of directed assignments over a finite universe


def _prefix_fill(s: str, u: FiniteUniverse) -> list:
    return [e for e in u.elements if e.startswith(s)]


def _matches_in_order(w: str, parts: Sequence[str]) -> bool:
    pos = 0
    for p in parts:
        k = w.find(p, pos)
        if k < 0:
            return False
        pos = k + len(p)
    return True


def _subsequence_in_order(w: str, parts: Sequence[str]) -> bool:
    return is_subsequence("".join(parts), w)


def concrete_assign(x: str, rhs, state: dict, u: FiniteUniverse) -> list[dict]:
    """Successor states of ``x := rhs``; values leaving the universe are dropped."""
    P = u.P

    def val(s):
        return state[s.var] if s.is_var else s.const

    if isinstance(rhs, Unknown):
        vals = list(u.elements)
    elif isinstance(rhs, ConstRhs):
        vals = [rhs.d]
    elif isinstance(rhs, VarRhs):
        vals = [state[rhs.y]]
    elif isinstance(rhs, UnionRhs):
        vals = [P.join(state[rhs.y1], state[rhs.y2])]
    elif isinstance(rhs, InterRhs):
        vals = [P.meet(state[rhs.y1], state[rhs.y2])]
    elif isinstance(rhs, PrefixConcat):
        vals = _prefix_fill(val(rhs.s), u)
    elif isinstance(rhs, SubstringConcat):
        parts = [val(s) for s in rhs.parts]
        test = _subsequence_in_order if isinstance(P, ScatteredOrder) else _matches_in_order
        if not isinstance(P, (SubstringOrder, ScatteredOrder)):
            raise DomainError("rhs not supported by order")
        vals = [e for e in u.elements if test(e, parts)]
    else:
        raise DomainError(f"unknown right-hand side {rhs!r}")
    keep = set(u.elements)
    return [{**state, x: v} for v in vals if v in keep]


def concrete_const_assign(x: str, values: Iterable[str], ys: Sequence[str], state: dict,
                          u: ValueUniverse) -> list[dict]:
    """``x := A | y1 | ... | yk``; ``A`` may be the full atom set for ``?``."""
    out = [{**state, x: a} for a in values]
    out.extend({**state, x: state[y]} for y in ys)
    return out


def window_for_conj(*cs: Conj) -> FiniteUniverse:
    consts = [d for c in cs for d in c.constants]
    return window_for(consts)
