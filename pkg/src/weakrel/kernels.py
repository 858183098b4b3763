"""Backend selection for the hot kernels.

The compiled Cython module is used when it was built; otherwise the numpy
fallback is imported.  Setting ``WEAKREL_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import os

if os.environ.get("WEAKREL_PURE_PYTHON"):
    from weakrel._kernels_py import close_relations, transitive_closure

    BACKEND = "python"
else:
    try:
        from weakrel._kernels import close_relations, transitive_closure

        BACKEND = "cython"
    except ImportError:  # extension not built
        from weakrel._kernels_py import close_relations, transitive_closure

        BACKEND = "python"

__all__ = ["BACKEND", "close_relations", "transitive_closure"]
