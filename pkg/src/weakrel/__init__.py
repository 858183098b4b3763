"""Weakly relational abstract domains over non-numerical values.

Modules:

* ``core``: 2-decomposed values and the relational-domain interface
* ``normalization``: stable collections and Kleene normalization
* ``constants``: disjunctive constants over a finite universe
* ``posets``: the value orders used by the directed domains
* ``directed``: conjunctions of order constraints and their normal forms
* ``disjunctive``: disjunctive completion and transfer functions
* ``oracle``: brute-force model enumeration used by the tests
* ``lang`` / ``analyzer`` / ``cli``: the toy abstract interpreter
"""
from __future__ import annotations

from weakrel.kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
