"""Random instance generators shared by the test modules."""
from __future__ import annotations

import itertools
import random

from weakrel.constants import ConstDomain, Prop, TwoClauseCNF, ValueUniverse
from weakrel.core import DecomposedValue, clusters
from weakrel.directed import Conj, Lower, Upper, VarLe
from weakrel.posets import IntOrder, SubsetOrder

SUBSETS = SubsetOrder(("a", "b", "c"))
INTS = IntOrder()


def rand_prop(rng: random.Random, var: str, u: ValueUniverse) -> Prop:
    k = rng.randint(1, len(u.atoms) - 1) if len(u.atoms) > 1 else 1
    return Prop(var, rng.sample(u.atoms, k))


def rand_cnf(rng: random.Random, variables, u: ValueUniverse, max_clauses: int = 5) -> TwoClauseCNF:
    clauses = []
    for _ in range(rng.randint(0, max_clauses)):
        vs = rng.sample(list(variables), rng.randint(1, min(2, len(variables))))
        clauses.append(tuple(rand_prop(rng, v, u) for v in vs))
    return TwoClauseCNF(tuple(clauses))


def rand_rel(rng: random.Random, dom: ConstDomain, vs, density: float = 0.6):
    rows = [t for t in itertools.product(range(dom.K), repeat=len(vs)) if rng.random() < density]
    return dom.make(vs, rows)


def rand_collection(rng: random.Random, dom: ConstDomain, universe, density: float = 0.75,
                    p_top: float = 0.3) -> DecomposedValue:
    """Independent random components; usually not stable."""
    parts = []
    for p in clusters(universe):
        parts.append(dom.top() if rng.random() < p_top else rand_rel(rng, dom, p, density))
    return DecomposedValue(tuple(universe), tuple(parts))


def rand_const(rng: random.Random, P):
    if isinstance(P, SubsetOrder):
        return frozenset(a for a in P.universe if rng.random() < 0.5)
    if isinstance(P, IntOrder):
        return rng.randint(-3, 3)
    return "".join(rng.choice("ab") for _ in range(rng.randint(0, 2)))


def rand_atom(rng: random.Random, variables, P):
    kind = rng.random()
    x = rng.choice(variables)
    if kind < 0.35 and len(variables) > 1:
        y = rng.choice([v for v in variables if v != x])
        return VarLe(x, y)
    if kind < 0.7:
        return Lower(rand_const(rng, P), x)
    return Upper(x, rand_const(rng, P))


def rand_conj(rng: random.Random, variables, P, max_atoms: int = 4) -> Conj:
    return Conj(frozenset(rand_atom(rng, list(variables), P) for _ in range(rng.randint(0, max_atoms))))
