"""Directed relational domains: conjunctions of ``d <= x``, ``x <= d`` and
``x <= y`` over a partial order of values.

``nf0`` (transitive closure plus redundancy removal and bound checks) works
for every order and yields the sound-but-incomplete domain D[P]0.  On
lattices ``nf1`` additionally merges bounds and is canonical: two
conjunctions are equivalent iff their 1-normal forms coincide.

The canonical 1-normal form used here is computed in three steps: the
vacuous bounds ``bot_P <= x`` and ``x <= top_P`` are added for every
variable, 0-normalization and bound merging are alternated until nothing
changes (a merged upper bound of ``x`` below the merged lower bound of ``y``
produces ``x <= y`` on the next closure), and finally the atoms that follow
from bounds alone are dropped again.  The last step makes the form stable
under projection.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from weakrel import kernels
from weakrel.core import DomainError, RelationalDomain
from weakrel.posets import BOUNDED_COMPLETE, LATTICE, Poset
from weakrel.syntax import Cursor

# --------------------------------------------------------------------------
# atoms and conjunctions


@dataclass(frozen=True)
class Lower:
    """d <= x"""

    d: object
    x: str

    @property
    def vars(self):
        return (self.x,)


@dataclass(frozen=True)
class Upper:
    """x <= d"""

    x: str
    d: object

    @property
    def vars(self):
        return (self.x,)


@dataclass(frozen=True)
class VarLe:
    """x <= y"""

    x: str
    y: str

    @property
    def vars(self):
        return (self.x, self.y)


Atom = Lower | Upper | VarLe


@dataclass(frozen=True)
class Conj:
    """A conjunction as a set of atoms, or bottom."""

    atoms: frozenset = frozenset()
    bottom: bool = False

    @classmethod
    def of(cls, *atoms: Atom) -> "Conj":
        return cls(frozenset(atoms))

    @property
    def vars(self) -> frozenset[str]:
        return frozenset(v for a in self.atoms for v in a.vars)

    @property
    def constants(self) -> frozenset:
        return frozenset(a.d for a in self.atoms if not isinstance(a, VarLe))

    def __and__(self, other: "Conj") -> "Conj":
        if self.bottom or other.bottom:
            return BOT
        return Conj(self.atoms | other.atoms)

    def lowers(self, x: str) -> list:
        return [a.d for a in self.atoms if isinstance(a, Lower) and a.x == x]

    def uppers(self, x: str) -> list:
        return [a.d for a in self.atoms if isinstance(a, Upper) and a.x == x]


TOP = Conj()
BOT = Conj(frozenset(), True)


def lb(d, x: str) -> Lower:
    return Lower(d, x)


def ub(x: str, d) -> Upper:
    return Upper(x, d)


def v(x: str, y: str) -> VarLe:
    return VarLe(x, y)


# --------------------------------------------------------------------------
# 0-normal form


def _is_vacuous(a: Atom, P: Poset) -> bool:
    if isinstance(a, Lower):
        return P.bottom is not None and a.d == P.bottom
    if isinstance(a, Upper):
        return P.top is not None and a.d == P.top
    return a.x == a.y


def nf0(c: Conj, P: Poset) -> Conj:
    """0-normal form: closure over variables and occurring constants,
    constant consistency, redundancy removal and common-bound checks.

    Atoms that hold vacuously (``x <= x`` and bounds equal to the least or
    greatest element of P) are removed as well.
    """
    if c.bottom:
        return BOT
    return _nf0(c.atoms, P)


@functools.lru_cache(maxsize=1 << 16)
def _nf0(atoms: frozenset, P: Poset) -> Conj:
    atoms = frozenset(a for a in atoms if not (isinstance(a, VarLe) and a.x == a.y))
    if not atoms:
        return TOP
    variables = sorted({x for a in atoms for x in a.vars})
    consts = sorted({a.d for a in atoms if not isinstance(a, VarLe)}, key=P.sort_key)
    nv = len(variables)
    nodes = len(variables) + len(consts)
    vi = {x: i for i, x in enumerate(variables)}
    ci = {d: nv + i for i, d in enumerate(consts)}
    m = np.zeros((nodes, nodes), dtype=np.uint8)
    for a in atoms:
        if isinstance(a, VarLe):
            m[vi[a.x], vi[a.y]] = 1
        elif isinstance(a, Lower):
            m[ci[a.d], vi[a.x]] = 1
        else:
            m[vi[a.x], ci[a.d]] = 1
    for i, d in enumerate(consts):
        for j, e in enumerate(consts):
            if i != j and P.leq(d, e):
                m[nv + i, nv + j] = 1
    kernels.transitive_closure(m)
    # constant pairs forced through variables must hold in P
    for i, d in enumerate(consts):
        row = m[nv + i]
        for j, e in enumerate(consts):
            if i != j and row[nv + j] and not P.leq(d, e):
                return BOT
    out = set()
    lows: dict[str, list] = {x: [] for x in variables}
    ups: dict[str, list] = {x: [] for x in variables}
    for x in variables:
        i = vi[x]
        for y in variables:
            if x != y and m[i, vi[y]]:
                out.add(VarLe(x, y))
        for k, d in enumerate(consts):
            if m[nv + k, i]:
                lows[x].append(d)
            if m[i, nv + k]:
                ups[x].append(d)
    for x in variables:
        lo = [d for d in lows[x] if not any(e != d and P.leq(d, e) for e in lows[x])]
        hi = [d for d in ups[x] if not any(e != d and P.leq(e, d) for e in ups[x])]
        if len(lo) > 1 and not P.has_common_upper_bound(lo):
            return BOT
        if len(hi) > 1 and not P.has_common_lower_bound(hi):
            return BOT
        out.update(Lower(d, x) for d in lo if not _is_vacuous(Lower(d, x), P))
        out.update(Upper(x, d) for d in hi if not _is_vacuous(Upper(x, d), P))
    return Conj(frozenset(out))


# --------------------------------------------------------------------------
# 1-normal form (lattices, bounded conjunctions over bounded-complete orders)


class NormalFormError(DomainError):
    pass


def supports_nf1(P: Poset) -> bool:
    return P.kind in (LATTICE, BOUNDED_COMPLETE)


def is_bounded(c: Conj, P: Poset) -> bool:
    """Every variable carries an upper bound after closure."""
    if c.bottom or P.top is not None:
        return True
    n = nf0(c, P)
    if n.bottom:
        return True
    return all(n.uppers(x) for x in c.vars)


def _check_nf1(c: Conj, P: Poset) -> None:
    if P.kind == LATTICE:
        return
    if P.kind == BOUNDED_COMPLETE and is_bounded(c, P):
        return
    raise NormalFormError("nf1 requires lattice or bounded-complete+bounded input")


def _merge(c: Conj, P: Poset) -> Conj:
    out = {a for a in c.atoms if isinstance(a, VarLe)}
    for x in sorted(c.vars):
        lo = c.lowers(x)
        hi = c.uppers(x)
        if lo:
            out.add(Lower(P.join_all(sorted(lo, key=P.sort_key)), x))
        if hi:
            out.add(Upper(x, P.meet_all(sorted(hi, key=P.sort_key))))
    return Conj(frozenset(out))


def nf1_full(c: Conj, P: Poset, universe: Iterable[str] = ()) -> Conj:
    """1-normal form with vacuous bounds materialized for ``universe``
    (plus the variables of ``c``) and all derived atoms present."""
    if c.bottom:
        return BOT
    _check_nf1(c, P)
    return _nf1_full(c.atoms, P, frozenset(universe) | c.vars)


_NF1_ROUNDS = 1000


@functools.lru_cache(maxsize=1 << 16)
def _nf1_full(atoms: frozenset, P: Poset, universe: frozenset) -> Conj:
    extra = set()
    if P.bottom is not None:
        extra.update(Lower(P.bottom, x) for x in universe)
    if P.top is not None:
        extra.update(Upper(x, P.top) for x in universe)
    cur = Conj(atoms | frozenset(extra))
    for _ in range(_NF1_ROUNDS):
        n = _nf0(cur.atoms, P)
        if n.bottom:
            return BOT
        # vacuous bounds are stripped by nf0; add them back before merging
        merged = _merge(Conj(n.atoms | frozenset(extra)), P)
        if merged == cur:
            return merged
        cur = merged
    raise NormalFormError("1-normalization did not stabilize")


def _strip(full: Conj, P: Poset) -> Conj:
    """Drop vacuous bounds and variable atoms that follow from bounds."""
    if full.bottom:
        return BOT
    lo: dict[str, object] = {}
    hi: dict[str, object] = {}
    for a in full.atoms:
        if isinstance(a, Lower):
            lo[a.x] = a.d
        elif isinstance(a, Upper):
            hi[a.x] = a.d
    out = set()
    for a in full.atoms:
        if _is_vacuous(a, P):
            continue
        if isinstance(a, VarLe) and a.x in hi and a.y in lo and P.leq(hi[a.x], lo[a.y]):
            continue
        out.add(a)
    return Conj(frozenset(out))


def nf1(c: Conj, P: Poset) -> Conj:
    """Canonical 1-normal form (see the module docstring)."""
    if c.bottom:
        return BOT
    _check_nf1(c, P)
    return _strip(_nf1_full(c.atoms, P, c.vars), P)


def sat(c: Conj, P: Poset) -> bool:
    if not supports_nf1(P):
        raise NormalFormError("sat is decided only for lattices; use leq0 for general orders")
    return not nf1(c, P).bottom


def implies(c1: Conj, c2: Conj, P: Poset) -> bool:
    """Exact implication on lattices (and bounded conjunctions)."""
    if not supports_nf1(P):
        raise NormalFormError("implies is decided only for lattices; use leq0 for general orders")
    if c1.bottom:
        return True
    return nf1(c1, P) == nf1(c1 & c2, P)


def equivalent(c1: Conj, c2: Conj, P: Poset) -> bool:
    return nf1(c1, P) == nf1(c2, P)


def leq0(c1: Conj, c2: Conj, P: Poset) -> bool:
    """Abstract ordering of D[P]0; sound but incomplete for implication."""
    return nf0(c1, P) == nf0(c1 & c2, P)


def project(c: Conj, ys: Iterable[str]) -> Conj:
    if c.bottom:
        return BOT
    keep = set(ys)
    return Conj(frozenset(a for a in c.atoms if all(x in keep for x in a.vars)))


def normalize(c: Conj, P: Poset) -> Conj:
    """1-normal form where it exists, 0-normal form otherwise."""
    if c.bottom:
        return BOT
    if P.kind == LATTICE or (P.kind == BOUNDED_COMPLETE and is_bounded(c, P)):
        return nf1(c, P)
    return nf0(c, P)


def join_lattice(c1: Conj, c2: Conj, P: Poset) -> Conj:
    """Least upper bound of two conjunctions over a lattice.

    Variable atoms common to both sides are kept, lower bounds are met and
    upper bounds joined; an upper bound without a least upper bound (prefix
    order) is dropped.
    """
    if c1.bottom:
        return normalize(c2, P)
    if c2.bottom:
        return normalize(c1, P)
    universe = c1.vars | c2.vars
    f1 = nf1_full(c1, P, universe)
    f2 = nf1_full(c2, P, universe)
    if f1.bottom:
        return normalize(c2, P)
    if f2.bottom:
        return normalize(c1, P)
    out = {a for a in f1.atoms if isinstance(a, VarLe) and a in f2.atoms}
    for x in sorted(universe):
        l1, l2 = f1.lowers(x), f2.lowers(x)
        if l1 and l2:
            m = P.try_meet(l1[0], l2[0])
            if m is not None:
                out.add(Lower(m, x))
        u1, u2 = f1.uppers(x), f2.uppers(x)
        if u1 and u2:
            j = P.try_join(u1[0], u2[0])
            if j is not None:
                out.add(Upper(x, j))
    return normalize(Conj(frozenset(out)), P)


def join_general(c1: Conj, c2: Conj, P: Poset) -> Conj:
    """Abstract join of D[P]0: common variable atoms, and bounds that are
    more liberal than a bound of the other side.

    The keep-rules look at the atoms of the arguments as given; domain code
    passes 0-normal forms.  The result is 0-normalized.
    """
    if c1.bottom or nf0(c1, P).bottom:
        return nf0(c2, P)
    if c2.bottom or nf0(c2, P).bottom:
        return nf0(c1, P)
    out = {a for a in c1.atoms if isinstance(a, VarLe) and a in c2.atoms}
    for x in sorted(c1.vars | c2.vars):
        for mine, other in ((c1, c2), (c2, c1)):
            lo_other = other.lowers(x)
            out.update(Lower(d, x) for d in mine.lowers(x)
                       if any(P.leq(d, e) for e in lo_other))
            up_other = other.uppers(x)
            out.update(Upper(x, d) for d in mine.uppers(x)
                       if any(P.leq(e, d) for e in up_other))
    return nf0(Conj(frozenset(out)), P)


def meet_directed(c1: Conj, c2: Conj, P: Poset) -> Conj:
    return normalize(c1 & c2, P)


def holds(c: Conj, sigma: dict, P: Poset) -> bool:
    """Model relation."""
    if c.bottom:
        return False
    for a in c.atoms:
        if isinstance(a, VarLe):
            ok = P.leq(sigma[a.x], sigma[a.y])
        elif isinstance(a, Lower):
            ok = P.leq(a.d, sigma[a.x])
        else:
            ok = P.leq(sigma[a.x], a.d)
        if not ok:
            return False
    return True


# --------------------------------------------------------------------------
# rendering and parsing


def _atom_key(a: Atom, P: Poset):
    if isinstance(a, Lower):
        return (a.x, 0, "", P.sort_key(a.d))
    if isinstance(a, Upper):
        return (a.x, 1, "", P.sort_key(a.d))
    return (a.x, 2, a.y, ())


def sorted_atoms(c: Conj, P: Poset) -> list:
    return sorted(c.atoms, key=lambda a: _atom_key(a, P))


def render_atom(a: Atom, P: Poset) -> str:
    if isinstance(a, Lower):
        return f"{P.format(a.d)} <= {a.x}"
    if isinstance(a, Upper):
        return f"{a.x} <= {P.format(a.d)}"
    return f"{a.x} <= {a.y}"


def render(c: Conj, P: Poset) -> str:
    if c.bottom:
        return "bot"
    if not c.atoms:
        return "top"
    return " & ".join(render_atom(a, P) for a in sorted_atoms(c, P))


def parse_side(cur: Cursor, P: Poset):
    """A variable name (``str`` wrapped as ``('var', name)``) or a constant."""
    t = cur.tok
    if t.kind == "ident" and t.text not in ("top", "bot"):
        cur.next()
        return ("var", t.text)
    return ("const", P.parse_value(cur))


def make_atom(s1, s2):
    """Atom from two parsed sides; constant-only comparisons return None."""
    k1, a = s1
    k2, b = s2
    if k1 == "var" and k2 == "var":
        return VarLe(a, b)
    if k1 == "var":
        return Upper(a, b)
    if k2 == "var":
        return Lower(a, b)
    return None


def parse_conj(text: str | Cursor, P: Poset) -> Conj:
    cur = Cursor(text) if isinstance(text, str) else text
    if cur.accept("bot"):
        c = BOT
    elif cur.accept("top"):
        c = TOP
    else:
        atoms = []
        while True:
            s1 = parse_side(cur, P)
            cur.expect("<=")
            s2 = parse_side(cur, P)
            a = make_atom(s1, s2)
            if a is None:
                if not P.leq(s1[1], s2[1]):
                    atoms = None
            elif atoms is not None:
                atoms.append(a)
            if not cur.accept("&"):
                break
        c = BOT if atoms is None else Conj(frozenset(atoms))
    if isinstance(text, str) and not cur.done():
        cur.error(f"unexpected {cur.tok.text!r}")
    return c


# --------------------------------------------------------------------------
# the relational domain


class DirectedDomain(RelationalDomain):
    """D[P] for lattices (1-normal forms, exact order) and D[P]0 otherwise."""

    def __init__(self, P: Poset, variables: Sequence[str] = ()):
        self.P = P
        self.variables = tuple(variables)
        self.exact = P.kind == LATTICE

    def __repr__(self):
        return f"DirectedDomain({self.P!r})"

    def normalize(self, c: Conj) -> Conj:
        return nf1(c, self.P) if self.exact else nf0(c, self.P)

    def top(self):
        return TOP

    def bottom(self):
        return BOT

    def is_bottom(self, r) -> bool:
        return r.bottom

    def leq(self, r1, r2) -> bool:
        if r1.bottom:
            return True
        if r2.bottom:
            return False
        if self.exact:
            return nf1(r1 & r2, self.P) == nf1(r1, self.P)
        return leq0(r1, r2, self.P)

    def implies(self, r1, r2) -> bool:
        return self.leq(r1, r2)

    def join(self, r1, r2):
        if self.exact:
            return join_lattice(r1, r2, self.P)
        return join_general(r1, r2, self.P)

    def meet(self, r1, r2):
        return self.normalize(r1 & r2)

    def restrict(self, r, ys):
        return project(r, ys)

    def condition(self, cond):
        if isinstance(cond, Conj):
            return self.normalize(cond)
        if isinstance(cond, (Lower, Upper, VarLe)):
            return self.normalize(Conj.of(cond))
        return self.normalize(Conj(frozenset(cond)))

    def render(self, r) -> str:
        return render(r, self.P)

    def parse(self, text) -> Conj:
        return self.normalize(parse_conj(text, self.P))
