"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``LSFIX_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernel_py

BACKEND = "python"
_compiled = None

if not os.environ.get("LSFIX_PURE_PYTHON"):
    try:
        from . import _kernel as _compiled  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _compiled = None

INT64_MAX = 2**63 - 1


def min_cost_assignments(costs, nogoods, max_nodes, max_solutions):
    if _compiled is not None:
        worst = sum(row[-1] for row in costs if row)
        if worst < INT64_MAX:
            return _compiled.min_cost_assignments(costs, nogoods, max_nodes, max_solutions)
    return _kernel_py.min_cost_assignments(costs, nogoods, max_nodes, max_solutions)


def optimal_covers(masks, weights, max_nodes):
    if _compiled is not None:
        full = 0
        for mk in masks:
            full |= mk
        if full.bit_length() <= 64 and sum(weights) < INT64_MAX:
            return _compiled.optimal_covers(masks, weights, max_nodes)
    return _kernel_py.optimal_covers(masks, weights, max_nodes)
