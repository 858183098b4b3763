"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 4,8,16] [--values 3] [--repeat 5]

Both backends are imported directly, so the environment switch
``WEAKREL_PURE_PYTHON`` does not matter here.  Every run also checks that
the two backends return identical tensors and counters.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from weakrel import _kernels_py

try:
    from weakrel import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BIG = 10**9


def random_relations(rng: np.random.Generator, n: int, k: int, density: float) -> np.ndarray:
    rel = np.zeros((n, n, k, k), dtype=np.uint8)
    for i in range(n):
        rel[i, i] = np.diag(np.ones(k, dtype=np.uint8))
        for j in range(i + 1, n):
            m = (rng.random((k, k)) < density).astype(np.uint8)
            rel[i, j] = m
            rel[j, i] = m.T
    return rel


def random_digraph(rng: np.random.Generator, n: int, density: float) -> np.ndarray:
    return (rng.random((n, n)) < density).astype(np.uint8)


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_close(n: int, k: int, repeat: int, seed: int) -> tuple[float, float | None]:
    rng = np.random.default_rng(seed)
    base = random_relations(rng, n, k, 0.7)
    a = base.copy()
    ra = _kernels_py.close_relations(a, BIG, BIG)
    t_py = _time(lambda: _kernels_py.close_relations(base.copy(), BIG, BIG), repeat)
    if _kernels_c is None:
        return t_py, None
    b = base.copy()
    rb = _kernels_c.close_relations(b, BIG, BIG)
    assert tuple(ra) == tuple(rb) and np.array_equal(a, b), "backends disagree"
    t_c = _time(lambda: _kernels_c.close_relations(base.copy(), BIG, BIG), repeat)
    return t_py, t_c


def bench_closure(n: int, repeat: int, seed: int) -> tuple[float, float | None]:
    rng = np.random.default_rng(seed)
    base = random_digraph(rng, n, 2.0 / n)
    a = _kernels_py.transitive_closure(base.copy())
    t_py = _time(lambda: _kernels_py.transitive_closure(base.copy()), repeat)
    if _kernels_c is None:
        return t_py, None
    b = _kernels_c.transitive_closure(base.copy())
    assert np.array_equal(a, b), "backends disagree"
    t_c = _time(lambda: _kernels_c.transitive_closure(base.copy()), repeat)
    return t_py, t_c


def _row(name: str, t_py: float, t_c: float | None) -> str:
    if t_c is None:
        return f"{name:<28} {t_py * 1e3:>10.3f} {'n/a':>10} {'n/a':>8}"
    return f"{name:<28} {t_py * 1e3:>10.3f} {t_c * 1e3:>10.3f} {t_py / t_c:>7.1f}x"


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="4,8,16", help="variable counts")
    ap.add_argument("--values", type=int, default=3, help="values per variable")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]
    if _kernels_c is None:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'kernel':<28} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for n in sizes:
        print(_row(f"close_relations n={n} K={args.values}",
                   *bench_close(n, args.values, args.repeat, args.seed)))
    for n in (32, 128, 512):
        print(_row(f"transitive_closure n={n}", *bench_closure(n, args.repeat, args.seed)))


if __name__ == "__main__":
    main()
