"""Approximate normalization by greatest fixpoints.

A collection assigns to every cluster p a component s_p mentioning only the
variables of p.  Its approximate normal form is the greatest solution of

    r_{x,y} ⊑ s_{x,y}
    r_{x,y} ⊑ restrict(r_{x,z} ⊓ r_{z,y}, {x,y})      for all x, y, z

where x, y, z range over all variables, so that r_{x,x} is the singleton
component of x.  Letting the indices coincide is what keeps singleton and
pair components consistent with each other.  Collections solving the system
with themselves as start values are *stable*; they form the abstract
domain implemented by :class:`StableDomain`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from weakrel.core import (
    DecomposedValue,
    DomainError,
    RelationalDomain,
    bottom2,
    cluster,
    decompose,
    is_bottom2,
    join2,
    leq2,
    meet2,
    meet_of_parts,
    restrict2,
    top2,
)


class BudgetExceeded(RuntimeError):
    """Kleene iteration did not stabilize within its budget."""


@dataclass(frozen=True)
class IterationBudget:
    max_rounds: int = 100_000
    max_component_updates: int = 10_000_000

    def __post_init__(self):
        if self.max_rounds <= 0 or self.max_component_updates <= 0:
            raise ValueError("iteration budget must be positive")

    @classmethod
    def for_instance(cls, n_vars: int, n_constants: int) -> "IterationBudget":
        """Cap derived from the height argument for finite instances."""
        nclusters = n_vars * (n_vars + 1) // 2
        return cls(
            max_rounds=max(1, nclusters * (n_constants ** 2 + 2)),
            max_component_updates=max(1, nclusters * (n_constants ** 2 + 1)),
        )


@dataclass(frozen=True)
class NormalizeStats:
    rounds: int
    updates: int


def _triangle(dom: RelationalDomain, c: DecomposedValue, p: tuple, z: str):
    x, y = p[0], p[-1]
    q1 = cluster(x, z)
    q2 = cluster(z, y)
    return dom.restrict(dom.meet(c[q1], c[q2]), p)


def is_stable(dom: RelationalDomain, c: DecomposedValue) -> bool:
    """True iff ``c`` solves the constraint system with s_p = c_p."""
    for p, v in c.items():
        for z in c.universe:
            if len(p) == 1 and z == p[0]:
                continue
            if not dom.leq(v, _triangle(dom, c, p, z)):
                return False
    return True


def _generic_iterate(dom, c: DecomposedValue, budget: IterationBudget):
    universe = c.universe
    cl = c.clusters
    parts = list(c.parts)
    index = {p: t for t, p in enumerate(cl)}
    touching = {
        v: [index[cluster(v, w)] for w in universe] for v in universe
    }

    def get(p):
        return parts[index[p]]

    cur = [True] * len(cl)
    rounds = updates = 0
    while any(cur):
        rounds += 1
        if rounds > budget.max_rounds:
            raise BudgetExceeded("iteration budget exceeded (rounds)")
        nxt = [False] * len(cl)
        for t, p in enumerate(cl):
            if not cur[t]:
                continue
            x, y = p[0], p[-1]
            for z in universe:
                if x == y == z:
                    continue
                old = parts[t]
                rhs = dom.restrict(dom.meet(get(cluster(x, z)), get(cluster(z, y))), p)
                new = dom.meet(old, rhs)
                if new == old or not dom.leq(new, old):
                    continue
                updates += 1
                if updates > budget.max_component_updates:
                    raise BudgetExceeded("iteration budget exceeded (updates)")
                if dom.is_bottom(new):
                    bot = dom.bottom()
                    updates += sum(
                        1 for s, v in enumerate(parts) if s != t and not dom.is_bottom(v)
                    )
                    return DecomposedValue(universe, tuple(bot for _ in cl)), NormalizeStats(
                        rounds, updates
                    )
                parts[t] = new
                for s in touching[x]:
                    nxt[s] = True
                for s in touching[y]:
                    nxt[s] = True
        cur = nxt
    return DecomposedValue(universe, tuple(parts)), NormalizeStats(rounds, updates)


def kleene_iterate(dom: RelationalDomain, c: DecomposedValue,
                   budget: IterationBudget | None = None, *,
                   use_kernel: bool = True) -> tuple[DecomposedValue, NormalizeStats]:
    """Greatest solution below ``c`` together with iteration statistics.

    Domains exposing ``close_collection`` (a specialized closure) use it
    unless ``use_kernel`` is false.
    """
    budget = budget or IterationBudget()
    kernel = getattr(dom, "close_collection", None)
    if use_kernel and kernel is not None:
        return kernel(c, budget)
    return _generic_iterate(dom, c, budget)


def kleene_normalize(dom: RelationalDomain, c: DecomposedValue,
                     budget: IterationBudget | None = None, *,
                     use_kernel: bool = True) -> DecomposedValue:
    return kleene_iterate(dom, c, budget, use_kernel=use_kernel)[0]


def abstract_join(dom: RelationalDomain, r1: DecomposedValue, r2: DecomposedValue) -> DecomposedValue:
    """Componentwise join; stable inputs give a stable result."""
    return join2(dom, r1, r2)


def abstract_restrict(dom: RelationalDomain, r: DecomposedValue, ys: Iterable[str]) -> DecomposedValue:
    return restrict2(dom, r, ys)


def abstract_meet(dom: RelationalDomain, r1: DecomposedValue, r2: DecomposedValue,
                  budget: IterationBudget | None = None) -> DecomposedValue:
    return kleene_normalize(dom, meet2(dom, r1, r2), budget)


class StableDomain(RelationalDomain):
    """The abstract weakly relational domain of stable collections.

    Join and restriction are componentwise; meet renormalizes.  The number of
    normalization rounds spent so far is accumulated in ``rounds``.
    """

    def __init__(self, base: RelationalDomain, universe: Sequence[str],
                 budget: IterationBudget | None = None):
        self.base = base
        self.universe = tuple(universe)
        if not self.universe:
            raise DomainError("empty variable universe")
        self.budget = budget or IterationBudget()
        self.rounds = 0

    def normalize(self, c: DecomposedValue) -> DecomposedValue:
        out, stats = kleene_iterate(self.base, c, self.budget)
        self.rounds += stats.rounds
        return out

    def lift(self, rel) -> DecomposedValue:
        """Exact restrictions of a base relation; always stable."""
        return decompose(self.base, rel, self.universe)

    def top(self):
        return top2(self.base, self.universe)

    def bottom(self):
        return bottom2(self.base, self.universe)

    def is_bottom(self, r) -> bool:
        return is_bottom2(self.base, r)

    def leq(self, r1, r2) -> bool:
        return leq2(self.base, r1, r2)

    def join(self, r1, r2):
        return abstract_join(self.base, r1, r2)

    def meet(self, r1, r2):
        return self.normalize(meet2(self.base, r1, r2))

    def restrict(self, r, ys):
        return abstract_restrict(self.base, r, ys)

    def condition(self, cond):
        return self.lift(self.base.condition(cond))

    def concretize(self, r):
        return meet_of_parts(self.base, r)
