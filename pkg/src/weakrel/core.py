"""Relational-domain contract and the generic 2-cluster construction.

A relational domain is a bounded lattice of abstract relations over a set
of program variables that additionally supports restriction (forgetting
variables).  From any such domain whose joins distribute over 2-clusters we
obtain a 2-decomposable domain whose values are dense families of
per-cluster components, see :class:`DecomposedValue`.
"""
from __future__ import annotations

import functools
import itertools
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Sequence

Cluster = tuple  # sorted tuple of one or two variable names


class DomainError(ValueError):
    """Raised on malformed inputs to a domain operation."""


class UniverseMismatch(DomainError):
    pass


def make_universe(names: Iterable[str]) -> tuple[str, ...]:
    """Deterministic (lexicographic) variable universe."""
    out = tuple(sorted(set(names)))
    for v in out:
        if not v:
            raise DomainError("empty variable name")
    return out


def cluster(*names: str) -> Cluster:
    c = tuple(sorted(set(names)))
    if not 1 <= len(c) <= 2:
        raise DomainError(f"cluster must have 1 or 2 members, got {names!r}")
    return c


def clusters(universe: Sequence[str]) -> list[Cluster]:
    """All singletons followed by all unordered pairs; n(n+1)/2 clusters."""
    if not universe:
        raise DomainError("empty variable universe")
    vs = sorted(universe)
    return [(v,) for v in vs] + list(itertools.combinations(vs, 2))


class RelationalDomain(ABC):
    """Lattice of abstract relations with restriction.

    Values must be hashable and canonical: ``a == b`` iff the two values
    denote the same abstract relation.
    """

    @abstractmethod
    def top(self) -> Any: ...

    @abstractmethod
    def bottom(self) -> Any: ...

    def is_bottom(self, r) -> bool:
        return r == self.bottom()

    def is_top(self, r) -> bool:
        return r == self.top()

    @abstractmethod
    def leq(self, r1, r2) -> bool: ...

    @abstractmethod
    def join(self, r1, r2): ...

    @abstractmethod
    def meet(self, r1, r2): ...

    @abstractmethod
    def restrict(self, r, ys: Iterable[str]): ...

    def condition(self, cond):
        """The abstract relation describing all states satisfying ``cond``."""
        raise NotImplementedError

    def guard(self, r, cond):
        return self.meet(r, self.condition(cond))


@dataclass(frozen=True)
class DecomposedValue:
    """One component per cluster of ``universe``, in :func:`clusters` order."""

    universe: tuple[str, ...]
    parts: tuple

    def __post_init__(self):
        if len(self.parts) != len(self.universe) * (len(self.universe) + 1) // 2:
            raise DomainError("decomposed value must cover every cluster")

    @property
    def clusters(self) -> list[Cluster]:
        return clusters(self.universe)

    def index(self, p: Iterable[str]) -> int:
        c = cluster(*p)
        return _cluster_index(self.universe)[c]

    def __getitem__(self, p) -> Any:
        if isinstance(p, str):
            p = (p,)
        return self.parts[self.index(p)]

    def items(self) -> Iterator[tuple[Cluster, Any]]:
        return zip(self.clusters, self.parts)

    def replace(self, updates: dict) -> "DecomposedValue":
        parts = list(self.parts)
        for p, v in updates.items():
            parts[self.index(p)] = v
        return DecomposedValue(self.universe, tuple(parts))


@functools.lru_cache(maxsize=256)
def _cluster_index(universe: tuple[str, ...]) -> dict[Cluster, int]:
    return {c: i for i, c in enumerate(clusters(universe))}


def _check_same(r1: DecomposedValue, r2: DecomposedValue) -> None:
    if r1.universe != r2.universe:
        raise UniverseMismatch(f"universe mismatch: {r1.universe} vs {r2.universe}")


def from_parts(universe: Sequence[str], fn: Callable[[Cluster], Any]) -> DecomposedValue:
    u = tuple(universe)
    return DecomposedValue(u, tuple(fn(p) for p in clusters(u)))


def decompose(dom: RelationalDomain, r, universe: Sequence[str]) -> DecomposedValue:
    """parts[p] = restrict(r, p) for every cluster p."""
    return from_parts(universe, lambda p: dom.restrict(r, p))


def top2(dom: RelationalDomain, universe: Sequence[str]) -> DecomposedValue:
    t = dom.top()
    return from_parts(universe, lambda p: t)


def bottom2(dom: RelationalDomain, universe: Sequence[str]) -> DecomposedValue:
    b = dom.bottom()
    return from_parts(universe, lambda p: b)


def join2(dom: RelationalDomain, r1: DecomposedValue, r2: DecomposedValue) -> DecomposedValue:
    _check_same(r1, r2)
    return DecomposedValue(
        r1.universe, tuple(dom.join(a, b) for a, b in zip(r1.parts, r2.parts))
    )


def meet2(dom: RelationalDomain, r1: DecomposedValue, r2: DecomposedValue) -> DecomposedValue:
    """Componentwise meet.  The result need not be normal."""
    _check_same(r1, r2)
    return DecomposedValue(
        r1.universe, tuple(dom.meet(a, b) for a, b in zip(r1.parts, r2.parts))
    )


def restrict2(dom: RelationalDomain, r: DecomposedValue, ys: Iterable[str]) -> DecomposedValue:
    keep = set(ys)
    unknown = keep - set(r.universe)
    if unknown:
        raise DomainError(f"variables not in universe: {sorted(unknown)}")
    return DecomposedValue(
        r.universe,
        tuple(dom.restrict(v, [x for x in p if x in keep]) for p, v in r.items()),
    )


def leq2(dom: RelationalDomain, r1: DecomposedValue, r2: DecomposedValue) -> bool:
    """Componentwise order."""
    _check_same(r1, r2)
    return all(dom.leq(a, b) for a, b in zip(r1.parts, r2.parts))


def meet_of_parts(dom: RelationalDomain, r: DecomposedValue):
    out = dom.top()
    for v in r.parts:
        out = dom.meet(out, v)
    return out


def is_bottom2(dom: RelationalDomain, r: DecomposedValue) -> bool:
    return any(dom.is_bottom(v) for v in r.parts)


class TwoDecomposed(RelationalDomain):
    """The exact 2-decomposable domain R2 built from a base domain.

    Values are kept normal: every component is the exact restriction of the
    meet of all components.  Normalizing goes through the base domain's full
    meet, which is exponential for hard instances.
    """

    def __init__(self, base: RelationalDomain, universe: Sequence[str]):
        self.base = base
        self.universe = tuple(universe)
        self.clusters = clusters(self.universe)

    def normalize(self, r: DecomposedValue) -> DecomposedValue:
        return decompose(self.base, meet_of_parts(self.base, r), self.universe)

    def lift(self, rel) -> DecomposedValue:
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
        # clusterwise join is the lub; renormalize so components stay exact
        return self.normalize(join2(self.base, r1, r2))

    def meet(self, r1, r2):
        return self.normalize(meet2(self.base, r1, r2))

    def restrict(self, r, ys):
        return restrict2(self.base, r, ys)

    def condition(self, cond):
        return self.lift(self.base.condition(cond))

    def concretize(self, r):
        return meet_of_parts(self.base, r)


def check_restriction_axioms(dom: RelationalDomain, r, universe: Sequence[str],
                             rng: random.Random | None = None) -> list[str]:
    """Check the four restriction identities on ``r``; returns violations.

    ``Y1``/``Y2`` are drawn at random from the powerset of ``universe``.
    """
    rng = rng or random.Random(0)
    u = list(universe)
    bad = []
    if dom.restrict(r, u) != r:
        bad.append("restrict(r, X) != r")
    expect = dom.bottom() if dom.is_bottom(r) else dom.top()
    if dom.restrict(r, []) != expect:
        bad.append("restrict(r, {}) wrong")
    y2 = [v for v in u if rng.random() < 0.6]
    y1 = [v for v in y2 if rng.random() < 0.6]
    if not dom.leq(dom.restrict(r, y2), dom.restrict(r, y1)):
        bad.append(f"antitone fails for {y1} ⊆ {y2}")
    y3 = [v for v in u if rng.random() < 0.5]
    lhs = dom.restrict(dom.restrict(r, y2), y3)
    if lhs != dom.restrict(r, [v for v in y2 if v in y3]):
        bad.append(f"composition fails for {y2}, {y3}")
    return bad


def check_clusterwise_join(dom: RelationalDomain, r1, r2, universe: Sequence[str]) -> bool:
    """Test one instance of restrict(r1 ⊔ r2, p) = restrict(r1, p) ⊔ restrict(r2, p)."""
    j = dom.join(r1, r2)
    return all(
        dom.restrict(j, p) == dom.join(dom.restrict(r1, p), dom.restrict(r2, p))
        for p in clusters(universe)
    )


def render_collection(D, r: DecomposedValue) -> str:
    """Canonical text: non-top components as ``[x,y]: ...`` joined by ``; ``."""
    base = D.base
    if D.is_bottom(r):
        return "bot"
    items = [f"[{','.join(p)}]: {base.render(v)}" for p, v in r.items() if v != base.top()]
    return "; ".join(items) if items else "top"


def parse_collection(D, text: str) -> DecomposedValue:
    """Inverse of :func:`render_collection`; omitted components are top."""
    from weakrel.syntax import Cursor

    cur = Cursor(text)
    if cur.accept("bot"):
        return D.bottom()
    r = D.top()
    if cur.accept("top"):
        return r
    updates = {}
    while True:
        cur.expect("[")
        names = [cur.ident()]
        while cur.accept(","):
            names.append(cur.ident())
        cur.expect("]")
        cur.expect(":")
        try:
            p = cluster(*names)
            r.index(p)
        except (DomainError, KeyError):
            cur.error(f"bad cluster {names}")
        updates[p] = D.base.parse(cur)
        if not cur.accept(";"):
            break
    if not cur.done():
        cur.error(f"unexpected {cur.tok.text!r}")
    return r.replace(updates)
