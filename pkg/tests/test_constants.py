from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakrel.constants import (
    BOT,
    BULLET,
    TOP,
    ConstDomain,
    Prop,
    TwoClauseCNF,
    ValueUniverse,
    abstract_domain,
    assign_choice,
    assign_copy,
    assign_unknown,
    conj,
    disj,
    dnf_satisfiable,
    evaluate,
    exact_domain,
    gamma_enumerate,
    guard_neg,
    guard_pos,
    lift_formula,
    parse_formula,
    render_formula,
    restrict_formula,
    sat_exact,
)
from weakrel.core import DomainError
from weakrel.oracle import K4, TRIANGLE, coloring_to_const, coloring_universe, enumerate_models

from gen import rand_cnf

U_AB = ValueUniverse(("a", "b"))
U_ABC = ValueUniverse(("a", "b", "c"))
XYZ = ("x", "y", "z")


class TestUniverse:
    def test_bullet_is_last_atom(self):
        assert U_AB.atoms == ("a", "b", BULLET)
        assert ValueUniverse(("a",), bullet=False).atoms == ("a",)

    def test_complement_includes_bullet(self):
        assert U_AB.complement({"a"}) == {"b", BULLET}

    @pytest.mark.parametrize("values", [("a", "a"), (BULLET,)])
    def test_rejects(self, values):
        with pytest.raises(DomainError):
            ValueUniverse(values)

    def test_bullet_only(self):
        assert ValueUniverse(()).atoms == (BULLET,)
        with pytest.raises(DomainError):
            ValueUniverse((), bullet=False)


class TestFormulas:
    def test_evaluate(self):
        f = conj(Prop("x", "a"), disj(Prop("y", "b"), Prop("z", "c")))
        assert evaluate(f, {"x": "a", "y": "d", "z": "c"})
        assert not evaluate(f, {"x": "b", "y": "b", "z": "c"})
        with pytest.raises(DomainError):
            evaluate(f, {"x": "a"})

    def test_restrict_drops_empty_conjunctions(self):
        f = disj(conj(Prop("x", "a"), Prop("y", [])), Prop("x", "b"))
        assert restrict_formula(f, ["x"]) == Prop("x", "b")

    def test_restrict_drops_foreign_props(self):
        f = conj(Prop("x", "a"), Prop("y", "b"))
        assert restrict_formula(f, ["y"]) == Prop("y", "b")

    @pytest.mark.parametrize("text", [
        "x in {a,b}", "x in {a} and y in {b}", "x in {a} or y in {b,c}",
        "(x in {a} or y in {b}) and z in {c}", "top", "bot",
    ])
    def test_render_parse_round_trip(self, text):
        assert render_formula(parse_formula(text)) == text

    def test_parse_equals_shorthand(self):
        assert parse_formula("x = a") == Prop("x", ["a"])
        assert parse_formula("top") == TOP and parse_formula("bot") == BOT

    def test_models(self):
        u = ValueUniverse(("a", "b"), bullet=False)
        f = parse_formula("x in {a,b} and y in {a}")
        assert enumerate_models(f, ["x", "y"], u) == {("a", "a"), ("b", "a")}
        f = parse_formula("x in {a} or y in {b}")
        assert enumerate_models(f, ["x", "y"], u) == {("a", "a"), ("a", "b"), ("b", "b")}


class TestSat:
    def test_coloring(self):
        u = coloring_universe()
        assert sat_exact(coloring_to_const(TRIANGLE), u)
        assert not sat_exact(coloring_to_const(K4), u)

    def test_clause_limits(self):
        with pytest.raises(DomainError):
            TwoClauseCNF(((Prop("x", "a"), Prop("y", "a"), Prop("z", "a")),))
        with pytest.raises(DomainError):
            TwoClauseCNF(((Prop("x", "a"), Prop("x", "b")),))

    def test_empty_clause_is_false(self):
        f = TwoClauseCNF(((),))
        assert not sat_exact(f, U_AB) and not dnf_satisfiable(f)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10**9))
    def test_agrees_with_dnf(self, seed):
        rng = random.Random(seed)
        u = ValueUniverse(("a", "b", "c")[: rng.randint(1, 3)], bullet=False)
        vs = ("w", "x", "y", "z")[: rng.randint(1, 4)]
        f = rand_cnf(rng, vs, u, max_clauses=6)
        assert sat_exact(f, u, vs) == dnf_satisfiable(f)


class TestConstDomain:
    dom = ConstDomain(U_AB)

    def test_canonical_support(self):
        r = self.dom.from_formula(parse_formula("x in {a,b,@other} and y = a"))
        assert r.vars == ("y",)

    def test_lattice(self):
        a = self.dom.prop("x", ["a"])
        b = self.dom.prop("x", ["b"])
        assert self.dom.is_bottom(self.dom.meet(a, b))
        assert self.dom.leq(a, self.dom.join(a, b))
        assert not self.dom.leq(self.dom.join(a, b), a)

    @pytest.mark.parametrize("text", [
        "x = a", "x in {a,b}", "x = a and y in {b,@other}",
        "(x = a and y = b) or (x = b and y = a)", "top", "bot",
    ])
    def test_render_parse(self, text):
        r = self.dom.parse(text)
        assert self.dom.render(r) == text
        assert self.dom.parse(self.dom.render(r)) == r

    def test_parse_rejects_unknown_value(self):
        with pytest.raises(DomainError):
            self.dom.parse("x = q")


def gamma(D, r):
    return gamma_enumerate(D, r)


def states(f, u, vs=XYZ):
    return {tuple(s) for s in itertools.product(u.atoms, repeat=len(vs))
            if evaluate(f, dict(zip(vs, s)))}


class TestTransfers:
    def test_assign_unknown(self):
        D = exact_domain(U_AB, XYZ)
        r = assign_unknown(D, "x", lift_formula(D, "x = a and y = b"))
        assert r[("y",)] == D.base.prop("y", ["b"])
        assert r[("x",)] == D.base.top()

    def test_copy_on_top(self):
        u = ValueUniverse(("a", "b"), bullet=False)
        D = exact_domain(u, XYZ)
        r = assign_copy(D, "x", "y", D.top())
        assert D.base.render(r[("x", "y")]) == "(x = a and y = a) or (x = b and y = b)"

    def test_copy_keeps_relations(self):
        D = exact_domain(U_ABC, XYZ)
        psi = lift_formula(D, "y in {a,b} and (y = a or z = c)")
        r = assign_copy(D, "x", "y", psi)
        dom = D.base
        assert dom.leq(r[("x",)], dom.parse("x in {a,b}"))
        assert dom.pairs(r[("x", "y")], ("x", "y")) == {("a", "a"), ("b", "b")}
        assert r[("x", "z")] == dom.parse("x in {a,b} and (x = a or z = c)")

    def test_choice(self):
        D = exact_domain(U_AB, XYZ)
        r = assign_choice(D, "x", ["a"], ["y"], lift_formula(D, "y = b"))
        assert r[("x",)] == D.base.parse("x in {a,b}")
        assert r[("x", "y")] == D.base.parse("(x = a and y = b) or (x = b and y = b)")

    def test_choice_rejects_self_copy(self):
        D = exact_domain(U_AB, XYZ)
        with pytest.raises(DomainError):
            assign_choice(D, "x", ["a"], ["x"], D.top())

    def test_guard_pos(self):
        D = abstract_domain(U_ABC, XYZ)
        assert D.is_bottom(guard_pos(D, "x", ["a"], lift_formula(D, "x = b")))
        r = guard_pos(D, "x", ["a", "b"], lift_formula(D, "x in {b,c}"))
        assert r[("x",)] == D.base.parse("x = b")

    def test_guard_neg(self):
        D = abstract_domain(U_AB, XYZ)
        r = guard_neg(D, "x", ["a"], D.top())
        assert D.base.render(r[("x",)]) == "x in {b,@other}"
        assert D.is_bottom(guard_neg(D, "x", ["a", "b"], lift_formula(D, "x = a")))
        with pytest.raises(DomainError):
            guard_neg(D, "x", ["q"], D.top())

    def test_gamma(self):
        D = exact_domain(U_AB, XYZ)
        g = gamma(D, lift_formula(D, "x = a and y = b"))
        assert g == {("a", "b", z) for z in U_AB.atoms}

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**9))
    def test_copy_is_exact(self, seed):
        rng = random.Random(seed)
        D = exact_domain(U_AB, XYZ)
        f = rand_cnf(rng, XYZ, U_AB).to_formula()
        out = gamma(D, assign_copy(D, "x", "y", lift_formula(D, f)))
        assert out == {(s[1], s[1], s[2]) for s in states(f, U_AB)}
