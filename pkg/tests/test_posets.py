from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakrel.posets import (
    BOUNDED_COMPLETE,
    GENERAL,
    LATTICE,
    ExplicitOrder,
    IntOrder,
    MultisetOrder,
    PrefixOrder,
    ScatteredOrder,
    SubsetOrder,
    SubstringOrder,
    UnsupportedOperation,
    common_prefix,
    is_subsequence,
    order_spec,
    parse_order,
)

SUB = SubsetOrder(("a", "b", "c"))
MS = MultisetOrder(("a", "b"))

strings = st.text(alphabet="abc", max_size=4)
subsets = st.frozensets(st.sampled_from("abc"))
multisets = st.tuples(st.integers(0, 3), st.integers(0, 3))
ints = st.integers(-20, 20)

ORDERS = [
    (SUB, subsets), (IntOrder(), ints), (MS, multisets),
    (PrefixOrder(), strings), (SubstringOrder(), strings), (ScatteredOrder(), strings),
]


class TestWorkedExamples:
    def test_string_orders(self):
        assert PrefixOrder().leq("ab", "abcd")
        assert SubstringOrder().leq("bc", "abcde")
        assert ScatteredOrder().leq("bd", "abcde")
        assert not SubstringOrder().leq("bd", "abcde")

    def test_prefix_bounds(self):
        P = PrefixOrder()
        assert P.meet("abc", "abd") == "ab"
        assert not P.has_common_upper_bound(["abc", "abd"])
        assert P.try_join("abc", "abd") is None
        assert P.join("ab", "abc") == "abc"
        with pytest.raises(UnsupportedOperation, match="unsupported for this order"):
            P.join("abc", "abd")

    @pytest.mark.parametrize("P", [SubstringOrder(), ScatteredOrder()])
    def test_substring_upper_bounds_exist(self, P):
        vals = ["ab", "cd", "ba"]
        assert P.has_common_upper_bound(vals)
        assert all(P.leq(v, "".join(vals)) for v in vals)

    def test_kinds(self):
        assert SUB.kind == IntOrder().kind == MS.kind == LATTICE
        assert PrefixOrder().kind == BOUNDED_COMPLETE
        assert SubstringOrder().kind == ScatteredOrder().kind == GENERAL

    def test_subset_lattice(self):
        assert SUB.bottom == frozenset() and SUB.top == frozenset("abc")
        assert SUB.join(frozenset("a"), frozenset("b")) == frozenset("ab")
        assert len(SUB.elements()) == 8
        with pytest.raises(ValueError):
            SUB.validate(["q"])

    def test_ints_unbounded(self):
        Z = IntOrder()
        assert Z.bottom is None and Z.top is None
        assert Z.meet(3, 5) == 3 and Z.join(3, 5) == 5

    def test_multiset(self):
        assert MS.make({"a": 2}) == (2, 0)
        assert MS.format((2, 1)) == "{{a:2,b:1}}"
        assert MS.parse("{{a:2,b:1}}") == (2, 1)
        assert MS.parse("{{}}") == MS.bottom


class TestHelpers:
    def test_common_prefix(self):
        assert common_prefix("abc", "abd") == "ab"
        assert common_prefix("", "x") == ""

    def test_subsequence(self):
        assert is_subsequence("ace", "abcde")
        assert not is_subsequence("ea", "abcde")


class TestParseOrder:
    @pytest.mark.parametrize("text", ["subset:a,b,c", "int", "multiset:a,b", "prefix", "substring",
                                      "scattered"])
    def test_round_trip(self, text):
        assert order_spec(parse_order(text)) == text

    def test_paren_form(self):
        assert parse_order("subset(a,b)") == SubsetOrder(("a", "b"))

    @pytest.mark.parametrize("text", ["subset", "reals", "int:3", ""])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            parse_order(text)

    @pytest.mark.parametrize("P,v", [(SUB, frozenset("ab")), (IntOrder(), -3), (MS, (0, 2)),
                                     (PrefixOrder(), 'a"b')])
    def test_value_round_trip(self, P, v):
        assert P.parse(P.format(v)) == v


class TestExplicit:
    def test_closure_and_bounds(self):
        P = ExplicitOrder.from_relation("abcd", [("a", "b"), ("b", "c"), ("a", "d")])
        assert P.check() == []
        assert P.leq("a", "c")
        assert not P.leq("c", "d")
        assert P.bottom == "a" and P.top is None
        assert not P.has_common_upper_bound(["c", "d"])
        assert P.has_common_lower_bound(["c", "d"])

    def test_check_reports_cycles(self):
        P = ExplicitOrder(("a", "b"), frozenset({("a", "a"), ("b", "b"), ("a", "b"), ("b", "a")}))
        assert any("antisymmetric" in m for m in P.check())


@pytest.mark.parametrize("P,gen", ORDERS, ids=lambda o: getattr(o, "name", ""))
class TestLaws:
    @settings(max_examples=50, deadline=None)
    @given(data=st.data())
    def test_partial_order(self, P, gen, data):
        a, b, c = data.draw(gen), data.draw(gen), data.draw(gen)
        assert P.leq(a, a)
        if P.leq(a, b) and P.leq(b, a):
            assert a == b
        if P.leq(a, b) and P.leq(b, c):
            assert P.leq(a, c)

    @settings(max_examples=50, deadline=None)
    @given(data=st.data())
    def test_bounds_are_tight(self, P, gen, data):
        a, b, c = data.draw(gen), data.draw(gen), data.draw(gen)
        m = P.try_meet(a, b)
        if m is not None:
            assert P.leq(m, a) and P.leq(m, b)
            if P.leq(c, a) and P.leq(c, b):
                assert P.leq(c, m)
        j = P.try_join(a, b)
        if j is not None:
            assert P.leq(a, j) and P.leq(b, j)
            if P.leq(a, c) and P.leq(b, c):
                assert P.leq(j, c)
        if P.leq(a, c) and P.leq(b, c):
            assert P.has_common_upper_bound([a, b])
