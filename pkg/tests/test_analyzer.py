from __future__ import annotations

import json
from pathlib import Path

import pytest

from weakrel.analyzer import (
    AnalysisBudgetExceeded,
    analyze,
    collecting_semantics,
    exit_report,
    make_adapter,
    report,
    soundness_violations,
)
from weakrel.lang import parse_program
from weakrel.oracle import int_window, strings, subsets
from weakrel.posets import PrefixOrder, SubsetOrder, SubstringOrder

GOLDEN = Path(__file__).parent / "golden"
EXAMPLES = ["straight", "branch", "loop"]


def run(text, **kw):
    return analyze(parse_program(text), **kw)


class TestGolden:
    @pytest.mark.parametrize("name", EXAMPLES)
    @pytest.mark.parametrize("fmt,ext", [("text", "txt"), ("json", "json")])
    def test_matches(self, name, fmt, ext):
        r = analyze(parse_program((GOLDEN / f"{name}.wr").read_text()))
        assert report(r, fmt) == (GOLDEN / f"{name}.{ext}").read_text()

    @pytest.mark.parametrize("name", EXAMPLES)
    def test_json_values_parse_back(self, name):
        p = parse_program((GOLDEN / f"{name}.wr").read_text())
        r = analyze(p)
        doc = json.loads(report(r, "json"))
        for pt, v in zip(doc["points"], r.values):
            assert r.adapter.parse(pt["value"]) == v

    @pytest.mark.parametrize("name", EXAMPLES)
    def test_deterministic(self, name):
        text = (GOLDEN / f"{name}.wr").read_text()
        assert report(run(text)) == report(run(text))


class TestExamples:
    def test_straight_line_entails(self):
        r = run((GOLDEN / "straight.wr").read_text())
        D = r.adapter
        assert D.leq(r.exit_value, D.parse("[x]: x = a; [y]: y = a; [x,y]: x = a and y = a"))

    def test_loop_exit_entails_bounds(self):
        r = run((GOLDEN / "loop.wr").read_text())
        assert r.adapter.leq(r.exit_value, r.adapter.parse("0 <= x & x <= 10"))

    def test_empty_program(self):
        r = run("")
        assert [pt for pt in report(r).splitlines() if pt.startswith("point")] == [
            "point 0 (line 1, entry/exit): top"]

    def test_unreachable_branch_is_bottom(self):
        r = run("vars x; domain directed; order int; x := 1; if (x <= 0) { x := 5; }")
        assert r.adapter.is_bottom(r.values[r.cfg.labels.index("then")])
        assert exit_report(r) == "1 <= x & x <= 1"

    def test_loop_converges_on_occurring_constants(self):
        r = run("vars x; domain directed; order int; x := 0;\n"
                "while (x <= 9) { x := ?; if (x <= 0) { x := 0; } else { skip; } }")
        assert r.adapter.leq(r.exit_value, r.adapter.parse("10 <= x"))

    def test_budget_names_loop_head(self):
        text = "vars x, y; domain directed; order int;\nx := 0;\nwhile (x <= 100) { y := x; x := y; }\n"
        with pytest.raises(AnalysisBudgetExceeded, match="loop head at line 3"):
            run(text, max_steps=2)

    def test_disjunctive_merge_keeps_cases(self):
        text = ("vars x; domain directed-disj; order int;\n"
                "if (x <= 0) { x := 0; } else { x := 10; }\n")
        hull = run(text)
        keep = run(text, disjunctive_merge=True)
        assert exit_report(hull) == "[x]: 0 <= x & x <= 10"
        assert exit_report(keep) == "[x]: 0 <= x & x <= 0 | 10 <= x & x <= 10"
        assert keep.stats()["max_disjuncts"] == 2

    def test_stats_keys(self):
        r = run("vars x; domain directed-disj; order int; x := 1;")
        assert set(r.stats()) == {"iterations", "nodes", "normalization_rounds", "max_disjuncts"}


class TestMonotone:
    @pytest.mark.parametrize("name", EXAMPLES)
    def test_values_only_grow(self, name):
        p = parse_program((GOLDEN / f"{name}.wr").read_text())
        seen = []
        r = analyze(p, observer=lambda n, old, new: seen.append((old, new)))
        assert seen
        assert all(old is None or r.adapter.leq(old, new) for old, new in seen)

    def test_loop_with_growth(self):
        p = parse_program("vars x, y; domain directed-disj; order int; x := 0; y := 3;\n"
                          "while (x <= 2) { x := y; }\n")
        seen = []
        r = analyze(p, observer=lambda n, old, new: seen.append((old, new)))
        assert all(old is None or r.adapter.leq(old, new) for old, new in seen)


# programs over finite instances: (source, finite universe or None for const2)
FINITE = [
    ("vars x, y, z; domain const2 {a,b};\n"
     "x := {a} | y; if (x in {a}) { z := x; } else { z := {b} | y; }\n"
     "while (z notin {b}) { z := {b}; y := ?; }\n", None),
    ("vars x, y; domain const2 {a,b,c};\n"
     "y := x; if (y notin {a,b}) { x := {a}; } x := {b,c} | y;\n", None),
    ("vars x, y; domain directed; order subset:a,b;\n"
     "x := {a}; y := union(x, y); if (y <= {a}) { x := y; } else { x := inter(x, y); }\n",
     subsets(SubsetOrder(("a", "b")))),
    ("vars x, y; domain directed-disj; order subset:a,b;\n"
     "while (!(x <= y)) { y := union(x, y); } x := ?;\n",
     subsets(SubsetOrder(("a", "b")))),
    ("vars x, y; domain directed-disj; order int;\n"
     "x := 0; while (x <= 2) { y := x; x := ?; if (y <= x) { skip; } else { x := 3; } }\n",
     int_window(-2, 4)),
    ("vars x, y; domain directed; order int;\n"
     "if (x <= y) { x := y; } else { y := x; } if (!(y <= 2)) { x := 2; }\n",
     int_window(-2, 3)),
    ('vars x, y; domain directed-disj; order prefix;\n'
     'x := "a" . ?; if (x <= "ab") { y := x; } else { y := ?; }\n',
     strings("ab", 3, PrefixOrder())),
    ('vars x, y; domain directed; order substring;\n'
     'y := "b"; x := ? "a" ? y ?; if ("ab" <= x) { skip; } else { x := y; }\n',
     strings("ab", 3, SubstringOrder())),
]


class TestSoundness:
    @pytest.mark.parametrize("src,u", FINITE, ids=[f"p{i}" for i in range(len(FINITE))])
    @pytest.mark.parametrize("merge", [False, True])
    def test_collecting_states_are_covered(self, src, u, merge):
        p = parse_program(src)
        adapter = make_adapter(p, finite=u, disjunctive_merge=merge)
        r = analyze(p, adapter)
        concrete = collecting_semantics(p, adapter)
        assert any(concrete[r.cfg.exit])
        assert soundness_violations(r, concrete) == []
