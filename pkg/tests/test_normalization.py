from __future__ import annotations

import os
import random
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakrel import kernels
from weakrel.constants import ConstDomain, TwoClauseCNF, ValueUniverse, abstract_domain, parse_formula
from weakrel.core import DecomposedValue, decompose, from_parts, meet_of_parts
from weakrel.normalization import (
    BudgetExceeded,
    IterationBudget,
    StableDomain,
    abstract_join,
    abstract_meet,
    abstract_restrict,
    is_stable,
    kleene_iterate,
    kleene_normalize,
)
from weakrel.oracle import K4, coloring_universe, edge_clauses

from gen import rand_collection

U_AB = ValueUniverse(("a", "b"))
XYZ = ("x", "y", "z")


def rel(dom, text):
    return dom.from_formula(parse_formula(text))


def collection(dom, universe, **parts):
    """Components by name, e.g. ``x_z="x = a"``; the rest are top."""
    given_parts = {tuple(k.split("_")): rel(dom, v) for k, v in parts.items()}
    return from_parts(universe, lambda p: given_parts.get(p, dom.top()))


class TestStability:
    dom = ConstDomain(U_AB)

    def test_unpropagated_triangle_is_not_stable(self):
        c = collection(self.dom, XYZ, x_z="x = a and z = a", y_z="z = a and y = a")
        assert not is_stable(self.dom, c)

    @pytest.mark.parametrize("text", ["x = a and y = b", "x = y or z = a", "top", "x in {a,b}"])
    def test_decompositions_are_stable(self, text):
        f = parse_formula(text.replace("x = y", "(x = a and y = a)"))
        assert is_stable(self.dom, decompose(self.dom, self.dom.from_formula(f), XYZ))

    def test_copy_chain(self):
        eq = "(x = a and z = a) or (x = b and z = b)"
        c = collection(self.dom, XYZ, x_z=eq, y_z=eq.replace("x", "y"))
        r = kleene_normalize(self.dom, c)
        assert is_stable(self.dom, r)
        assert self.dom.pairs(r[("x", "y")], ("x", "y")) == {("a", "a"), ("b", "b")}

    def test_abstract_join_of_stable_values(self):
        d1 = decompose(self.dom, rel(self.dom, "x = a and y = a"), XYZ)
        d2 = decompose(self.dom, rel(self.dom, "x = b and y = b"), XYZ)
        j = abstract_join(self.dom, d1, d2)
        assert j[("x", "y")] == rel(self.dom, "(x = a and y = a) or (x = b and y = b)")
        assert j[("x",)] == rel(self.dom, "x in {a,b}")
        assert is_stable(self.dom, j)

    def test_restrict_copy_chain(self):
        eq = "(x = a and z = a) or (x = b and z = b)"
        r = kleene_normalize(self.dom, collection(self.dom, XYZ, x_z=eq, y_z=eq.replace("x", "y")))
        s = abstract_restrict(self.dom, r, ["x", "y"])
        assert s[("x", "y")] == r[("x", "y")]
        assert s[("x", "z")] == self.dom.restrict(r[("x", "z")], ["x"])
        assert s[("z",)] == self.dom.top()

    def test_meet_propagates_bottom(self):
        d1 = decompose(self.dom, rel(self.dom, "x = a"), XYZ)
        d2 = decompose(self.dom, rel(self.dom, "x = b"), XYZ)
        m = abstract_meet(self.dom, d1, d2)
        assert all(self.dom.is_bottom(v) for v in m.parts)

    def test_meet_retightens_chain(self):
        D = StableDomain(self.dom, XYZ)
        xy = D.lift(rel(self.dom, "(x = a and y = a) or (x = b and y = b)"))
        yz = D.lift(rel(self.dom, "(y = a and z = a) or (y = b and z = b)"))
        m = D.meet(xy, yz)
        assert self.dom.pairs(m[("x", "z")], ("x", "z")) == {("a", "a"), ("b", "b")}


class TestK4:
    def test_per_edge_disjunction(self):
        u = coloring_universe()
        D = abstract_domain(u, K4.vertices)
        dom = D.base
        parts = {(a, b): dom.from_formula(TwoClauseCNF(tuple(edge_clauses(a, b))).to_formula())
                 for a, b in K4.ordered_edges()}
        c = from_parts(K4.vertices, lambda p: parts.get(p, dom.top()))
        r = D.normalize(c)
        assert not D.is_bottom(r)
        for a, b in K4.ordered_edges():
            assert dom.render(r[(a, b)]) == (
                f"({a} = a and {b} in {{b,c}}) or ({a} = b and {b} in {{a,c}}) "
                f"or ({a} = c and {b} in {{a,b}})")


class TestBudget:
    def test_for_instance(self):
        b = IterationBudget.for_instance(3, 3)
        assert b.max_component_updates == 6 * 10

    def test_invalid(self):
        with pytest.raises(ValueError):
            IterationBudget(0, 1)

    @pytest.mark.parametrize("use_kernel", [True, False])
    def test_exhaustion_raises(self, use_kernel):
        dom = ConstDomain(U_AB)
        eq = "(x = a and z = a) or (x = b and z = b)"
        c = collection(dom, XYZ, x_z=eq, y_z=eq.replace("x", "y"), x_y="x = a")
        with pytest.raises(BudgetExceeded):
            kleene_iterate(dom, c, IterationBudget(1, 1), use_kernel=use_kernel)


class TestKernelAgreement:
    @pytest.mark.parametrize("seed", range(40))
    def test_kernel_matches_generic(self, seed):
        rng = random.Random(seed)
        dom = ConstDomain(ValueUniverse(("a", "b", "c")[: rng.randint(1, 3)], bullet=rng.random() < 0.5))
        u = ("w", "x", "y", "z")[: rng.randint(1, 4)]
        c = rand_collection(rng, dom, u)
        fast, s1 = kleene_iterate(dom, c, use_kernel=True)
        slow, s2 = kleene_iterate(dom, c, use_kernel=False)
        assert fast == slow
        assert (s1.rounds, s1.updates) == (s2.rounds, s2.updates)

    def test_backend_is_reported(self):
        assert kernels.BACKEND in ("cython", "python")

    def test_pure_python_backend_runs(self):
        code = (
            "from weakrel import kernels; assert kernels.BACKEND == 'python';"
            "import test_normalization as t;"
            "[t.TestKernelAgreement().test_kernel_matches_generic(s) for s in range(10)];"
            "t.TestK4().test_per_edge_disjunction(); print('ok')"
        )
        env = dict(os.environ, WEAKREL_PURE_PYTHON="1")
        env["PYTHONPATH"] = os.pathsep.join([os.path.dirname(__file__), env.get("PYTHONPATH", "")])
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == "ok"


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_normalize_is_sound_and_stable(self, seed):
        rng = random.Random(seed)
        dom = ConstDomain(U_AB)
        c = rand_collection(rng, dom, XYZ)
        r = kleene_normalize(dom, c)
        assert is_stable(dom, r)
        assert all(dom.leq(a, b) for a, b in zip(r.parts, c.parts))
        exact = meet_of_parts(dom, c)
        for p, v in r.items():
            assert dom.leq(dom.restrict(exact, p), v)
        # idempotent
        assert kleene_normalize(dom, r) == r

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_join_stays_stable(self, seed):
        rng = random.Random(seed)
        dom = ConstDomain(U_AB)
        r1 = kleene_normalize(dom, rand_collection(rng, dom, XYZ))
        r2 = kleene_normalize(dom, rand_collection(rng, dom, XYZ))
        j = abstract_join(dom, r1, r2)
        assert is_stable(dom, j)
        assert isinstance(j, DecomposedValue)
