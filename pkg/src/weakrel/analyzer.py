"""Worklist fixpoint engine over the toy-language CFG.

Three domain instances are supported: ``const2`` (stable collections of
disjunctive constants), ``directed`` (single normal-form conjunctions over
an order) and ``directed-disj`` (stable collections over the disjunctive
completion).  There is no widening: finite instances terminate on their
own and the budget turns anything else into a diagnostic.
"""
from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable

from weakrel.constants import (
    ConstDomain,
    ValueUniverse,
    abstract_domain,
    assign_choice,
    assign_unknown,
    guard_neg,
    guard_pos,
)
from weakrel.core import DecomposedValue, parse_collection, render_collection
from weakrel.directed import DirectedDomain, holds, parse_conj
from weakrel.directed import TOP as CONJ_TOP
from weakrel.directed import render as render_conj
from weakrel.disjunctive import (
    DEFAULT_CAP,
    DisjunctiveDomain,
    Side,
    Unknown,
    assign,
    conj_assign,
    conj_guard,
    conj_guard_neg,
    disjunctive_domain,
    guard_ineq,
    guard_neg_ineq,
)
from weakrel.lang import CFG, Assign, ChoiceRhs, InCond, LeCond, Program, build_cfg
from weakrel.normalization import IterationBudget
from weakrel.oracle import FiniteUniverse, concrete_assign
from weakrel.posets import IntOrder, order_spec

PLACEHOLDER = "_"


class AnalysisBudgetExceeded(RuntimeError):
    pass


# --------------------------------------------------------------------------
# domain adapters


class Adapter:
    """Abstract values plus edge transfers for one domain instance."""

    name = ""

    def top(self): ...

    def bottom(self): ...

    def is_bottom(self, v) -> bool: ...

    def join(self, a, b): ...

    def leq(self, a, b) -> bool: ...

    def assign(self, stmt: Assign, v): ...

    def guard(self, cond, v): ...

    def render(self, v) -> str: ...

    def parse(self, text: str): ...

    def stats(self) -> dict:
        return {}

    # concrete side, for collecting semantics
    def initial_states(self) -> list[dict]: ...

    def concrete_assign(self, stmt: Assign, state: dict) -> list[dict]: ...

    def concrete_guard(self, cond, state: dict) -> bool: ...

    def contains(self, v, state: dict) -> bool: ...


def _universe(variables) -> tuple:
    return tuple(variables) or (PLACEHOLDER,)


class ConstAdapter(Adapter):
    name = "const2"

    def __init__(self, variables, values, budget: IterationBudget | None = None):
        self.variables = tuple(variables)
        self.U = ValueUniverse(tuple(values), bullet=True)
        self.D = abstract_domain(self.U, _universe(self.variables), budget)

    @property
    def base(self) -> ConstDomain:
        return self.D.base

    def top(self):
        return self.D.top()

    def bottom(self):
        return self.D.bottom()

    def is_bottom(self, v):
        return self.D.is_bottom(v)

    def join(self, a, b):
        return self.D.join(a, b)

    def leq(self, a, b):
        return self.D.leq(a, b)

    def assign(self, stmt: Assign, v):
        x, rhs = stmt.x, stmt.rhs
        if isinstance(rhs, Unknown):
            return assign_unknown(self.D, x, v)
        assert isinstance(rhs, ChoiceRhs)
        ys = [y for y in rhs.ys if y != x]
        out = assign_choice(self.D, x, rhs.values, ys, v)
        if x in rhs.ys:
            # x := x | ... keeps the current state as one branch
            out = self.D.join(out, v)
        return out

    def guard(self, cond: InCond, v):
        if cond.negated:
            return guard_neg(self.D, cond.x, cond.values, v)
        return guard_pos(self.D, cond.x, cond.values, v)

    def render(self, v):
        return render_collection(self.D, v)

    def parse(self, text):
        return parse_collection(self.D, text)

    def stats(self):
        return {"normalization_rounds": self.D.rounds}

    def initial_states(self):
        vs = self.variables
        return [dict(zip(vs, t)) for t in itertools.product(self.U.atoms, repeat=len(vs))]

    def concrete_assign(self, stmt, state):
        rhs = stmt.rhs
        if isinstance(rhs, Unknown):
            vals = list(self.U.atoms)
        else:
            vals = sorted(rhs.values) + [state[y] for y in rhs.ys]
        return [{**state, stmt.x: a} for a in vals]

    def concrete_guard(self, cond, state):
        return (state[cond.x] in cond.values) != cond.negated

    def contains(self, v, state):
        if self.D.is_bottom(v):
            return False
        for p, r in v.items():
            if all(x in state for x in p):
                rows = self.base.expand(r, p) if r.rows else set()
                if tuple(self.U.index(state[x]) for x in p) not in rows:
                    return False
        return True


def int_complement(cond: LeCond) -> LeCond | None:
    """A positive condition implied by ``!(s1 <= s2)`` on the integers:
    ``s2 + 1 <= s1`` when a side is constant, ``s2 <= s1`` otherwise."""
    s1, s2 = cond.s1, cond.s2
    if not s1.is_var and not s2.is_var:
        return None
    if not s2.is_var:
        return LeCond(Side.of_const(s2.const + 1), s1)
    if not s1.is_var:
        return LeCond(s2, Side.of_const(s1.const - 1))
    return LeCond(s2, s1)


class DirectedAdapter(Adapter):
    name = "directed"

    def __init__(self, variables, order, finite: FiniteUniverse | None = None):
        self.variables = tuple(variables)
        self.P = order
        self.dom = DirectedDomain(order, self.variables)
        self.finite = finite

    def top(self):
        return CONJ_TOP

    def bottom(self):
        return self.dom.bottom()

    def is_bottom(self, v):
        return v.bottom

    def join(self, a, b):
        return self.dom.join(a, b)

    def leq(self, a, b):
        return self.dom.leq(a, b)

    def assign(self, stmt, v):
        if v.bottom:
            return v
        return conj_assign(self.dom, stmt.x, stmt.rhs, v)

    def _strengthen(self, cond: LeCond) -> LeCond | None:
        return int_complement(cond) if cond.negated and isinstance(self.P, IntOrder) else None

    def guard(self, cond: LeCond, v):
        if not cond.negated:
            return conj_guard(self.dom, cond.s1, cond.s2, v)
        out = conj_guard_neg(self.dom, cond.s1, cond.s2, v)
        pos = self._strengthen(cond)
        return out if pos is None else conj_guard(self.dom, pos.s1, pos.s2, out)

    def render(self, v):
        return render_conj(v, self.P)

    def parse(self, text):
        return self.dom.normalize(parse_conj(text, self.P))

    def initial_states(self):
        vs = self.variables
        return [dict(zip(vs, t)) for t in itertools.product(self.finite.elements, repeat=len(vs))]

    def concrete_assign(self, stmt, state):
        return concrete_assign(stmt.x, stmt.rhs, state, self.finite)

    def concrete_guard(self, cond, state):
        a = state[cond.s1.var] if cond.s1.is_var else cond.s1.const
        b = state[cond.s2.var] if cond.s2.is_var else cond.s2.const
        return self.P.leq(a, b) != cond.negated

    def contains(self, v, state):
        return holds(v, state, self.P)


class DisjAdapter(DirectedAdapter):
    name = "directed-disj"

    def __init__(self, variables, order, cap: int = DEFAULT_CAP, disjunctive_merge: bool = False,
                 budget: IterationBudget | None = None, finite: FiniteUniverse | None = None):
        super().__init__(variables, order, finite)
        self.D = disjunctive_domain(order, _universe(self.variables), cap, budget)
        self.disjunctive_merge = disjunctive_merge

    @property
    def base(self) -> DisjunctiveDomain:
        return self.D.base

    def top(self):
        return self.D.top()

    def bottom(self):
        return self.D.bottom()

    def is_bottom(self, v):
        return self.D.is_bottom(v)

    def join(self, a, b):
        j = self.D.join(a, b)
        if self.disjunctive_merge or self.D.is_bottom(j):
            return j
        # collapse every cluster to a single conjunction, then re-stabilize
        return self.D.normalize(DecomposedValue(j.universe, tuple(self.base.hull(p) for p in j.parts)))

    def leq(self, a, b):
        return self.D.leq(a, b)

    def assign(self, stmt, v):
        return assign(self.D, stmt.x, stmt.rhs, v)

    def guard(self, cond, v):
        if not cond.negated:
            return guard_ineq(self.D, cond.s1, cond.s2, v)
        out = guard_neg_ineq(self.D, cond.s1, cond.s2, v)
        pos = self._strengthen(cond)
        return out if pos is None else guard_ineq(self.D, pos.s1, pos.s2, out)

    def render(self, v):
        return render_collection(self.D, v)

    def parse(self, text):
        return parse_collection(self.D, text)

    def stats(self):
        return {"normalization_rounds": self.D.rounds}

    def disjunct_count(self, v) -> int:
        return max((len(p) for p in v.parts), default=0)

    def contains(self, v, state):
        if self.D.is_bottom(v):
            return False
        for p, r in v.items():
            if all(x in state for x in p):
                if not any(holds(c, state, self.P) for c in r.disjuncts):
                    return False
        return True


def make_adapter(p: Program, *, cap: int = DEFAULT_CAP, disjunctive_merge: bool = False,
                 budget: IterationBudget | None = None,
                 finite: FiniteUniverse | None = None) -> Adapter:
    if p.domain == "const2":
        return ConstAdapter(p.variables, p.universe, budget)
    if p.domain == "directed":
        return DirectedAdapter(p.variables, p.order, finite)
    return DisjAdapter(p.variables, p.order, cap, disjunctive_merge, budget, finite)


# --------------------------------------------------------------------------
# fixpoint


@dataclass
class AnalysisResult:
    program: Program
    cfg: CFG
    adapter: Adapter
    values: list
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def exit_value(self):
        return self.values[self.cfg.exit]

    def stats(self) -> dict:
        out = {"iterations": self.iterations, "nodes": self.cfg.size}
        out.update(self.adapter.stats())
        out.update(self.extra)
        return out


DEFAULT_MAX_STEPS = 100_000


def transfer(adapter: Adapter, edge, v):
    if adapter.is_bottom(v):
        return v
    if edge.kind == "assign":
        return adapter.assign(edge.payload, v)
    if edge.kind == "guard":
        return adapter.guard(edge.payload, v)
    return v


def analyze(p: Program, adapter: Adapter | None = None, *, max_steps: int = DEFAULT_MAX_STEPS,
            observer=None, **adapter_args) -> AnalysisResult:
    """Worklist iteration from top at the entry, joining at merge points.

    ``observer(node, old, new)`` is called on every value change; ``old`` is
    None the first time a node is reached.
    """
    adapter = adapter or make_adapter(p, **adapter_args)
    g = build_cfg(p)
    out_edges = [[] for _ in range(g.size)]
    for e in g.edges:
        out_edges[e.src].append(e)
    values: list = [None] * g.size
    values[g.entry] = adapter.top()
    work = [g.entry]
    queued = {g.entry}
    steps = 0
    visits = [0] * g.size
    max_disj = 0
    while work:
        n = heapq.heappop(work)
        queued.discard(n)
        steps += 1
        visits[n] += 1
        if steps > max_steps:
            heads = [h for h in g.loop_heads if visits[h]] or [n]
            h = max(heads, key=lambda k: visits[k])
            where = f"loop head at line {g.lines[h]}" if h in g.loop_heads else f"node {h}"
            raise AnalysisBudgetExceeded(f"iteration budget exceeded at {where}")
        for e in out_edges[n]:
            new = transfer(adapter, e, values[n])
            old = values[e.dst]
            if old is None:
                merged = new
            else:
                merged = adapter.join(old, new)
            if merged != old:
                if observer is not None:
                    observer(e.dst, old, merged)
                values[e.dst] = merged
                if isinstance(adapter, DisjAdapter):
                    max_disj = max(max_disj, adapter.disjunct_count(merged))
                if e.dst not in queued:
                    heapq.heappush(work, e.dst)
                    queued.add(e.dst)
    values = [adapter.bottom() if v is None else v for v in values]
    extra = {"max_disjuncts": max_disj} if isinstance(adapter, DisjAdapter) else {}
    return AnalysisResult(p, g, adapter, values, steps, extra)


# --------------------------------------------------------------------------
# collecting semantics (test oracle)


def _freeze(state: dict) -> tuple:
    return tuple(sorted(state.items()))


def collecting_semantics(p: Program, adapter: Adapter, max_states: int = 200_000) -> list[set]:
    """Reachable concrete states per CFG node over the adapter's finite universe."""
    g = build_cfg(p)
    states: list[set] = [set() for _ in range(g.size)]
    init = adapter.initial_states()
    states[g.entry] = {_freeze(s) for s in init}
    work = [g.entry]
    while work:
        n = work.pop()
        for e in g.out_edges(n):
            new = set()
            for fs in states[n]:
                s = dict(fs)
                if e.kind == "assign":
                    new.update(_freeze(t) for t in adapter.concrete_assign(e.payload, s))
                elif e.kind == "guard":
                    if adapter.concrete_guard(e.payload, s):
                        new.add(fs)
                else:
                    new.add(fs)
            if not new <= states[e.dst]:
                states[e.dst] |= new
                if sum(len(s) for s in states) > max_states:
                    raise AnalysisBudgetExceeded("too many concrete states")
                work.append(e.dst)
    return states


def soundness_violations(result: AnalysisResult, concrete: list[set]) -> list[tuple[int, tuple]]:
    bad = []
    for n, ss in enumerate(concrete):
        for fs in sorted(ss, key=repr):
            if not result.adapter.contains(result.values[n], dict(fs)):
                bad.append((n, fs))
    return bad


# --------------------------------------------------------------------------
# reports


def report(r: AnalysisResult, fmt: str = "text") -> str:
    g = r.cfg
    rendered = [r.adapter.render(v) for v in r.values]
    if fmt == "json":
        doc = {
            "points": [{"id": n, "line": g.lines[n], "value": rendered[n]} for n in range(g.size)],
            "stats": r.stats(),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    p = r.program
    head = f"domain {p.domain}"
    if p.domain == "const2":
        head += " {" + ",".join(p.universe) + "}"
    else:
        head += f" order {order_spec(p.order)}"
    lines = [head]
    for n in range(g.size):
        lines.append(f"point {n} (line {g.lines[n]}, {g.labels[n]}): {rendered[n]}")
    stats = r.stats()
    lines.append("stats: " + ", ".join(f"{k}={stats[k]}" for k in sorted(stats)))
    return "\n".join(lines) + "\n"


def exit_report(r: AnalysisResult) -> str:
    return r.adapter.render(r.exit_value)


def points(r: AnalysisResult) -> Iterable[tuple[int, int, str]]:
    for n in range(r.cfg.size):
        yield n, r.cfg.lines[n], r.adapter.render(r.values[n])
