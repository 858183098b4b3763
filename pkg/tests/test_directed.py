from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakrel.directed import (
    BOT,
    TOP,
    Conj,
    DirectedDomain,
    NormalFormError,
    equivalent,
    holds,
    implies,
    join_general,
    join_lattice,
    lb,
    leq0,
    meet_directed,
    nf0,
    nf1,
    normalize,
    parse_conj,
    project,
    render,
    sat,
    ub,
    v,
)
from weakrel.oracle import check_equiv, check_implies, int_window, project_models, satisfiable, strings, subsets
from weakrel.oracle import enumerate_models
from weakrel.posets import IntOrder, PrefixOrder, ScatteredOrder, SubsetOrder, SubstringOrder

from gen import INTS, SUBSETS, rand_conj

Z = IntOrder()
PRE = PrefixOrder()
SUBSTR = SubstringOrder()
S = SubsetOrder(("a", "b", "c"))
A, AB = frozenset("a"), frozenset("ab")
WINDOW = int_window(-4, 4)


def C(*atoms):
    return Conj.of(*atoms)


class TestNormalForms:
    def test_prefix_incompatible_lower_bounds(self):
        assert nf0(C(lb("abc", "x"), lb("abd", "x")), PRE) == BOT

    def test_dominated_subset_bound(self):
        assert nf0(C(lb(A, "x"), lb(AB, "x")), S) == C(lb(AB, "x"))

    def test_int_bounds_merge(self):
        assert nf1(C(lb(1, "x"), lb(3, "x")), Z) == C(lb(3, "x"))

    def test_closure_contradiction(self):
        assert nf1(C(lb(3, "x"), v("x", "y"), ub("y", 2)), Z) == BOT
        assert nf0(C(lb(3, "x"), v("x", "y"), ub("y", 2)), Z) == BOT

    def test_closure_derives_bounds(self):
        c = nf1(C(lb(2, "x"), v("x", "y"), ub("y", 9)), Z)
        assert c == C(lb(2, "x"), ub("x", 9), lb(2, "y"), ub("y", 9), v("x", "y"))

    def test_nf1_strips_implied_variable_atom(self):
        c = nf1(C(lb(3, "x"), ub("x", 5), lb(7, "y"), v("x", "y")), Z)
        assert v("x", "y") not in c.atoms

    def test_nf1_needs_bounded_input_on_prefix(self):
        with pytest.raises(NormalFormError):
            nf1(C(lb("a", "x")), PRE)
        assert nf1(C(lb("a", "x"), ub("x", "abc")), PRE) == C(lb("a", "x"), ub("x", "abc"))

    def test_vacuous_atoms_vanish(self):
        assert nf0(C(lb("", "x")), PRE) == TOP
        assert nf0(C(v("x", "x")), Z) == TOP
        assert nf1(C(ub("x", frozenset("abc"))), S) == TOP

    def test_example_prefix_pair(self):
        c1 = C(lb("ab", "x"), ub("x", "abc"), lb("abd", "y"), v("x", "y"))
        c2 = C(lb("ab", "x"), ub("x", "ab"), lb("abd", "y"), v("x", "y"))
        assert nf0(c1, PRE) != nf0(c2, PRE)
        assert leq0(c2, c1, PRE) and not leq0(c1, c2, PRE)
        assert check_equiv(c1, c2, ["x", "y"], strings("abcd", 5))


class TestDecisions:
    def test_implies_subset(self):
        assert implies(C(lb(A, "x"), v("x", "y")), C(lb(A, "y")), S)

    def test_implies_ints(self):
        assert implies(C(ub("x", 5)), C(ub("x", 7)), Z)
        assert not implies(C(ub("x", 7)), C(ub("x", 5)), Z)

    def test_sat_needs_lattice(self):
        with pytest.raises(NormalFormError):
            sat(C(lb("a", "x")), SUBSTR)

    def test_equivalent(self):
        assert equivalent(C(lb(1, "x"), lb(3, "x")), C(lb(3, "x")), Z)

    def test_holds(self):
        c = C(lb(1, "x"), v("x", "y"))
        assert holds(c, {"x": 1, "y": 2}, Z)
        assert not holds(c, {"x": 2, "y": 1}, Z)
        assert not holds(BOT, {}, Z)


class TestOperations:
    def test_project(self):
        c = nf1(C(lb(2, "x"), v("x", "y"), ub("y", 9)), Z)
        assert project(c, ["x"]) == C(lb(2, "x"), ub("x", 9))

    def test_lattice_join(self):
        c1 = C(lb(2, "x"), ub("x", 5), v("x", "y"))
        c2 = C(lb(0, "x"), ub("x", 7), v("x", "y"))
        assert join_lattice(c1, c2, Z) == nf1(C(lb(0, "x"), ub("x", 7), v("x", "y")), Z)

    def test_prefix_upper_bounds_are_lost(self):
        assert join_lattice(C(ub("x", "abc")), C(ub("x", "abd")), PRE) == TOP

    def test_substring_join(self):
        c1 = C(lb("ab", "x"), ub("y", "ab"), v("y", "z"))
        c2 = C(lb("abc", "x"), ub("y", "abc"))
        assert join_general(c1, c2, SUBSTR) == C(lb("ab", "x"), ub("y", "abc"))

    def test_substring_join_on_closed_inputs_keeps_derived_atom(self):
        c1 = C(lb("ab", "x"), ub("y", "ab"), v("y", "z"))
        c2 = C(lb("abc", "x"), ub("y", "abc"))
        out = join_general(nf0(c1, SUBSTR), nf0(c2, SUBSTR), SUBSTR)
        assert out == C(lb("ab", "x"), ub("y", "abc"), v("y", "x"))

    def test_incomparable_bounds_dropped(self):
        assert join_general(C(lb("ab", "x")), C(lb("cd", "x")), SUBSTR) == TOP

    def test_meets(self):
        assert meet_directed(C(lb(5, "x")), C(ub("x", 4)), Z) == BOT
        assert meet_directed(C(lb("abc", "x")), C(lb("abd", "x")), PRE) == BOT

    def test_join_with_bottom(self):
        assert join_lattice(BOT, C(lb(1, "x")), Z) == C(lb(1, "x"))
        assert join_general(C(lb("a", "x")), BOT, SUBSTR) == C(lb("a", "x"))


class TestText:
    @pytest.mark.parametrize("P,text", [
        (Z, "-2 <= x & x <= 9 & x <= y"),
        (S, "{a} <= x & y <= {a,b}"),
        (PRE, '"ab" <= x & x <= "abc"'),
        (Z, "top"), (Z, "bot"),
    ])
    def test_round_trip(self, P, text):
        c = parse_conj(text, P)
        assert render(c, P) == text

    def test_constant_comparisons(self):
        assert parse_conj("1 <= 2 & 1 <= x", Z) == C(lb(1, "x"))
        assert parse_conj("3 <= 2", Z) == BOT


class TestDomain:
    def test_exactness(self):
        assert DirectedDomain(Z).exact and not DirectedDomain(PRE).exact

    def test_leq(self):
        D = DirectedDomain(Z)
        assert D.leq(C(ub("x", 5)), C(ub("x", 7)))
        assert D.leq(BOT, TOP) and not D.leq(TOP, BOT)

    def test_parse_normalizes(self):
        D = DirectedDomain(Z)
        assert D.parse("1 <= x & 3 <= x") == C(lb(3, "x"))


def _ground(P):
    return WINDOW if P is INTS else subsets(SUBSETS)


class TestAgainstOracle:
    @settings(max_examples=120, deadline=None)
    @given(st.integers(0, 10**9), st.sampled_from(["int", "subset"]))
    def test_sat_and_implies(self, seed, which):
        rng = random.Random(seed)
        P = INTS if which == "int" else SUBSETS
        u = _ground(P)
        vs = ("x", "y", "z")[: rng.randint(1, 3)]
        c1, c2 = rand_conj(rng, vs, P), rand_conj(rng, vs, P)
        assert sat(c1, P) == satisfiable(c1, vs, u)
        assert implies(c1, c2, P) == check_implies(c1, c2, vs, u)
        assert check_equiv(nf1(c1, P), c1, vs, u)

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 10**9), st.sampled_from(["int", "subset"]))
    def test_project_is_exact(self, seed, which):
        rng = random.Random(seed)
        P = INTS if which == "int" else SUBSETS
        u = _ground(P)
        vs = ["x", "y", "z"]
        c = nf1(rand_conj(rng, vs, P, 5), P)
        ys = [x for x in vs if rng.random() < 0.5]
        want = project_models(enumerate_models(c, vs, u), vs, ys)
        got = enumerate_models(project(c, ys), ys, u)
        assert got == want

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 10**9), st.sampled_from([PRE, SUBSTR, ScatteredOrder()]))
    def test_nf0_preserves_models(self, seed, P):
        rng = random.Random(seed)
        vs = ["x", "y"]
        c = rand_conj(rng, vs, P)
        assert check_equiv(nf0(c, P), c, vs, strings("ab", 3, P))
        assert normalize(c, P) == nf0(c, P) or P is PRE
