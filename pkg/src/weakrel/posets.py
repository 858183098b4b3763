"""Partial orders of values for directed domains.

Every order exposes ``leq``, a ``kind`` (``lattice``, ``bounded_complete``
or ``general``), optional least/greatest elements, existence checks for
common bounds and, where they exist, binary meets and joins.
"""
from __future__ import annotations

import functools
import json
import re
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Sequence

from weakrel.syntax import Cursor, ParseError

LATTICE = "lattice"
BOUNDED_COMPLETE = "bounded_complete"
GENERAL = "general"


class UnsupportedOperation(ValueError):
    def __init__(self, what: str = "operation"):
        super().__init__(f"{what}: operation unsupported for this order")


class Poset:
    """Base class; subclasses are frozen dataclasses and therefore hashable."""

    kind: str = GENERAL
    name: str = "poset"

    # order ---------------------------------------------------------------

    def leq(self, a, b) -> bool:
        raise NotImplementedError

    def lt(self, a, b) -> bool:
        return a != b and self.leq(a, b)

    @property
    def bottom(self):
        """Least element, or None."""
        return None

    @property
    def top(self):
        """Greatest element, or None."""
        return None

    # bounds --------------------------------------------------------------

    def meet(self, a, b):
        raise UnsupportedOperation("meet")

    def join(self, a, b):
        raise UnsupportedOperation("join")

    def meet_all(self, values: Iterable):
        return functools.reduce(self.meet, values)

    def join_all(self, values: Iterable):
        return functools.reduce(self.join, values)

    def try_join(self, a, b):
        """Least upper bound of ``a`` and ``b`` or None when it does not exist."""
        try:
            return self.join(a, b)
        except UnsupportedOperation:
            return None

    def try_meet(self, a, b):
        try:
            return self.meet(a, b)
        except UnsupportedOperation:
            return None

    def has_common_upper_bound(self, values: Iterable) -> bool:
        raise NotImplementedError

    def has_common_lower_bound(self, values: Iterable) -> bool:
        raise NotImplementedError

    # values --------------------------------------------------------------

    def validate(self, v) -> Any:
        return v

    def sort_key(self, v):
        return v

    def format(self, v) -> str:
        raise NotImplementedError

    def parse_value(self, cur: Cursor):
        raise NotImplementedError

    def parse(self, text: str):
        cur = Cursor(text)
        v = self.parse_value(cur)
        if not cur.done():
            cur.error(f"unexpected {cur.tok.text!r}")
        return v


# --------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class SubsetOrder(Poset):
    """Subsets of a finite universe, ordered by inclusion."""

    universe: tuple[str, ...]
    kind = LATTICE
    name = "subset"

    def __post_init__(self):
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("duplicate atoms in subset universe")

    def validate(self, v):
        v = frozenset(v)
        if not v <= set(self.universe):
            raise ValueError(f"atoms outside universe: {sorted(v - set(self.universe))}")
        return v

    def leq(self, a, b):
        return a <= b

    @property
    def bottom(self):
        return frozenset()

    @property
    def top(self):
        return frozenset(self.universe)

    def meet(self, a, b):
        return a & b

    def join(self, a, b):
        return a | b

    def has_common_upper_bound(self, values):
        return True

    def has_common_lower_bound(self, values):
        return True

    def sort_key(self, v):
        return (len(v), sorted(self.universe.index(a) for a in v))

    def format(self, v):
        return "{" + ",".join(sorted(v, key=self.universe.index)) + "}"

    def parse_value(self, cur):
        cur.expect("{")
        vals = []
        if not cur.at("}"):
            vals.append(cur.ident())
            while cur.accept(","):
                vals.append(cur.ident())
        cur.expect("}")
        try:
            return self.validate(vals)
        except ValueError as e:
            cur.error(str(e))

    def elements(self):
        from itertools import combinations
        u = self.universe
        return [frozenset(c) for k in range(len(u) + 1) for c in combinations(u, k)]


@dataclass(frozen=True)
class IntOrder(Poset):
    """The integers; a lattice without least or greatest element."""

    kind = LATTICE
    name = "int"

    def validate(self, v):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValueError(f"not an integer: {v!r}")
        return v

    def leq(self, a, b):
        return a <= b

    def meet(self, a, b):
        return min(a, b)

    def join(self, a, b):
        return max(a, b)

    def meet_all(self, values):
        return min(values)

    def join_all(self, values):
        return max(values)

    def has_common_upper_bound(self, values):
        return True

    def has_common_lower_bound(self, values):
        return True

    def format(self, v):
        return str(v)

    def parse_value(self, cur):
        t = cur.next()
        if t.kind != "int":
            raise ParseError(f"expected integer, found {t.text!r}", t.line, t.col)
        return int(t.text)


@dataclass(frozen=True)
class MultisetOrder(Poset):
    """Multisets over declared atoms as count vectors; least element only."""

    universe: tuple[str, ...]
    kind = LATTICE
    name = "multiset"

    def __post_init__(self):
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("duplicate atoms in multiset universe")

    def make(self, counts: dict[str, int] | None = None) -> tuple[int, ...]:
        counts = counts or {}
        bad = set(counts) - set(self.universe)
        if bad:
            raise ValueError(f"atoms outside universe: {sorted(bad)}")
        return self.validate(tuple(counts.get(a, 0) for a in self.universe))

    def validate(self, v):
        v = tuple(v)
        if len(v) != len(self.universe) or any(not isinstance(c, int) or c < 0 for c in v):
            raise ValueError(f"bad multiset {v!r}")
        return v

    def leq(self, a, b):
        return all(x <= y for x, y in zip(a, b))

    @property
    def bottom(self):
        return (0,) * len(self.universe)

    def meet(self, a, b):
        return tuple(map(min, a, b))

    def join(self, a, b):
        return tuple(map(max, a, b))

    def has_common_upper_bound(self, values):
        return True

    def has_common_lower_bound(self, values):
        return True

    def sort_key(self, v):
        return (sum(v), v)

    def format(self, v):
        inner = ",".join(f"{a}:{c}" for a, c in zip(self.universe, v) if c)
        return "{{" + inner + "}}"

    def parse_value(self, cur):
        cur.expect("{")
        cur.expect("{")
        counts: dict[str, int] = {}
        if not cur.at("}"):
            while True:
                a = cur.ident()
                cur.expect(":")
                t = cur.next()
                if t.kind != "int" or int(t.text) < 0:
                    raise ParseError("expected multiplicity", t.line, t.col)
                counts[a] = counts.get(a, 0) + int(t.text)
                if not cur.accept(","):
                    break
        cur.expect("}")
        cur.expect("}")
        try:
            return self.make(counts)
        except ValueError as e:
            cur.error(str(e))


# --------------------------------------------------------------------------
# strings


def is_subsequence(a: str, b: str) -> bool:
    it = iter(b)
    return all(ch in it for ch in a)


def common_prefix(a: str, b: str) -> str:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return a[:n]


class _StringOrder(Poset):
    def validate(self, v):
        if not isinstance(v, str):
            raise ValueError(f"not a string: {v!r}")
        return v

    @property
    def bottom(self):
        return ""

    def has_common_lower_bound(self, values):
        return True

    def sort_key(self, v):
        return (len(v), v)

    def format(self, v):
        return json.dumps(v)

    def parse_value(self, cur):
        t = cur.next()
        if t.kind != "string":
            raise ParseError(f"expected string constant, found {t.text!r}", t.line, t.col)
        return t.text


@dataclass(frozen=True)
class PrefixOrder(_StringOrder):
    """Strings under the prefix order: bounded-complete, meets exist."""

    kind = BOUNDED_COMPLETE
    name = "prefix"

    def leq(self, a, b):
        return b.startswith(a)

    def meet(self, a, b):
        return common_prefix(a, b)

    def meet_all(self, values):
        return functools.reduce(common_prefix, values)

    def join(self, a, b):
        if b.startswith(a):
            return b
        if a.startswith(b):
            return a
        raise UnsupportedOperation("join")

    def join_all(self, values):
        vals = list(values)
        longest = max(vals, key=len)
        if not all(longest.startswith(v) for v in vals):
            raise UnsupportedOperation("join")
        return longest

    def has_common_upper_bound(self, values):
        vals = list(values)
        longest = max(vals, key=len)
        return all(longest.startswith(v) for v in vals)


@dataclass(frozen=True)
class SubstringOrder(_StringOrder):
    """Strings under the (contiguous) substring order."""

    kind = GENERAL
    name = "substring"

    def leq(self, a, b):
        return a in b

    def has_common_upper_bound(self, values):
        return True  # the concatenation contains every member


@dataclass(frozen=True)
class ScatteredOrder(_StringOrder):
    """Strings under the scattered substring (subsequence) order."""

    kind = GENERAL
    name = "scattered"

    def leq(self, a, b):
        return is_subsequence(a, b)

    def has_common_upper_bound(self, values):
        return True


# --------------------------------------------------------------------------
# explicit finite orders


@dataclass(frozen=True)
class ExplicitOrder(Poset):
    """A finite poset given by its elements and the full order relation.

    ``pairs`` must contain every (a, b) with a <= b, reflexive pairs included;
    use :meth:`from_relation` to close an arbitrary generating relation.
    """

    elements: tuple[Hashable, ...]
    pairs: frozenset = field(repr=False)
    name = "explicit"

    @classmethod
    def from_relation(cls, elements: Sequence[Hashable], rel: Iterable[tuple]) -> "ExplicitOrder":
        import numpy as np
        from weakrel.kernels import transitive_closure

        els = tuple(elements)
        idx = {e: i for i, e in enumerate(els)}
        m = np.eye(len(els), dtype=np.uint8)
        for a, b in rel:
            m[idx[a], idx[b]] = 1
        transitive_closure(m)
        pairs = frozenset((els[i], els[j]) for i, j in zip(*np.nonzero(m)))
        return cls(els, pairs)

    @property
    def kind(self):
        return GENERAL

    def check(self) -> list[str]:
        """Violations of reflexivity, antisymmetry and transitivity."""
        bad = []
        els = self.elements
        for a in els:
            if (a, a) not in self.pairs:
                bad.append(f"not reflexive at {a!r}")
        for a, b in self.pairs:
            if a != b and (b, a) in self.pairs:
                bad.append(f"not antisymmetric at {a!r}, {b!r}")
            for c in els:
                if (b, c) in self.pairs and (a, c) not in self.pairs:
                    bad.append(f"not transitive at {a!r}, {b!r}, {c!r}")
        return bad

    def validate(self, v):
        if v not in self.elements:
            raise ValueError(f"unknown element {v!r}")
        return v

    def leq(self, a, b):
        return (a, b) in self.pairs

    @functools.cached_property
    def _least_greatest(self):
        least = [a for a in self.elements if all(self.leq(a, b) for b in self.elements)]
        greatest = [a for a in self.elements if all(self.leq(b, a) for b in self.elements)]
        return (least[0] if least else None, greatest[0] if greatest else None)

    @property
    def bottom(self):
        return self._least_greatest[0]

    @property
    def top(self):
        return self._least_greatest[1]

    def has_common_upper_bound(self, values):
        vals = list(values)
        return any(all(self.leq(v, e) for v in vals) for e in self.elements)

    def has_common_lower_bound(self, values):
        vals = list(values)
        return any(all(self.leq(e, v) for v in vals) for e in self.elements)

    def sort_key(self, v):
        return self.elements.index(v)

    def format(self, v):
        return str(v)

    def parse_value(self, cur):
        t = cur.next()
        for e in self.elements:
            if str(e) == t.text:
                return e
        raise ParseError(f"unknown element {t.text!r}", t.line, t.col)


# --------------------------------------------------------------------------

_ORDER_RE = re.compile(r"^\s*(\w+)\s*(?:\((.*)\)|:(.*))?\s*$")


def parse_order(text: str) -> Poset:
    """Order by name: ``subset(a,b)``/``subset:a,b``, ``int``, ``multiset(a,b)``,
    ``prefix``, ``substring``, ``scattered``."""
    m = _ORDER_RE.match(text)
    if not m:
        raise ValueError(f"unknown order {text!r}")
    name = m.group(1)
    args_text = m.group(2) if m.group(2) is not None else m.group(3)
    args = tuple(a.strip() for a in args_text.split(",") if a.strip()) if args_text else ()
    if name in ("subset", "multiset"):
        if not args:
            raise ValueError(f"order {name} needs a universe, e.g. {name}:a,b,c")
        return SubsetOrder(args) if name == "subset" else MultisetOrder(args)
    simple = {"int": IntOrder, "prefix": PrefixOrder, "substring": SubstringOrder,
              "scattered": ScatteredOrder}
    if name not in simple or args:
        raise ValueError(f"unknown order {text!r}")
    return simple[name]()


def order_spec(p: Poset) -> str:
    """Inverse of :func:`parse_order`."""
    if isinstance(p, (SubsetOrder, MultisetOrder)):
        return f"{p.name}:{','.join(p.universe)}"
    return p.name
