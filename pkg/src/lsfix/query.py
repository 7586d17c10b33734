"""Evaluation of conjunctive and aggregate queries, and join-graph analysis."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .engine import FactIndex, match
from .errors import SchemaError
from .model import Fact, Instance, Schema
from .syntax import AggregateComparisonQuery, Atom, ConjunctiveQuery, Const, Var

log = logging.getLogger(__name__)

# rows for open queries, a truth value for boolean ones
Answers = Union[frozenset, bool]


def _index(D: Instance | Iterable[Fact], q: ConjunctiveQuery) -> FactIndex:
    if isinstance(D, Instance):
        for a in q.atoms:
            if a.relation not in D.schema:
                raise SchemaError(f"unknown relation {a.relation}")
    return FactIndex(D)


def eval_conjunctive(q: ConjunctiveQuery, D: Instance | Iterable[Fact]) -> Answers:
    if q.aggregate is not None:
        raise ValueError("aggregate query: use eval_aggregate")
    idx = _index(D, q)
    if q.is_boolean:
        return next(iter(match(q.atoms, q.comparisons, idx)), None) is not None
    names = [v.name for v in q.head_vars]
    return frozenset(tuple(env[n] for n in names) for env, _ in match(q.atoms, q.comparisons, idx))


def _witnesses(q: ConjunctiveQuery, D) -> dict[tuple, set[tuple]]:
    """Head group -> distinct full assignments of the body variables."""
    idx = _index(D, q)
    body = sorted(q.body_variables())
    head = [v.name for v in q.head_vars]
    groups: dict[tuple, set[tuple]] = {}
    for env, _ in match(q.atoms, q.comparisons, idx):
        groups.setdefault(tuple(env[n] for n in head), set()).add(tuple((n, env[n]) for n in body))
    return groups


def _fold(function: str, var: str, witnesses: set[tuple]):
    values = [dict(w)[var] for w in witnesses]
    if function == "sum":
        return sum(values)
    if function == "count":
        return len(values)
    if function == "countd":
        return len(set(values))
    if function == "avg":
        return Fraction(sum(values), len(values)) if values else None
    raise ValueError(f"unknown aggregate {function}")


def eval_aggregate(q: ConjunctiveQuery, D: Instance | Iterable[Fact]) -> frozenset:
    """Rows ``head + (aggregate,)``, aggregating over distinct witnesses per group.

    A scalar sum or count over no witnesses is 0; avg over none gives no row.
    """
    agg = q.aggregate
    if agg is None:
        raise ValueError("not an aggregate query")
    groups = _witnesses(q, D)
    if not q.head_vars and not groups and agg.function != "avg":
        return frozenset({(0,)})
    rows = set()
    for key, ws in groups.items():
        v = _fold(agg.function, agg.var.name, ws)
        if v is not None:
            rows.add(key + (v,))
    return frozenset(rows)


def scalar_value(q: ConjunctiveQuery, D) -> int | Fraction | None:
    """Value of a group-free aggregate; ``None`` for avg over nothing."""
    if not q.is_scalar_aggregate:
        raise ValueError("query has grouping variables or no aggregate")
    rows = eval_aggregate(q, D)
    return next(iter(rows))[0] if rows else None


_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
}


def eval_aggregate_comparison(q: AggregateComparisonQuery, D) -> bool:
    v = scalar_value(q.query, D)
    if v is None:
        log.warning("avg over an empty set; comparison %s treated as false", q)
        return False
    return _CMP[q.op](v, q.k)


def evaluate(q, D):
    """Dispatch on the query form."""
    if isinstance(q, AggregateComparisonQuery):
        return eval_aggregate_comparison(q, D)
    if q.aggregate is not None:
        return eval_aggregate(q, D)
    return eval_conjunctive(q, D)


# -- join graph ---------------------------------------------------------------------


@dataclass(frozen=True)
class JoinGraph:
    vertices: tuple[Atom, ...]
    arcs: frozenset[tuple[int, int]]
    self_loops: frozenset[int]

    def to_dict(self) -> dict:
        return {
            "vertices": [str(a) for a in self.vertices],
            "arcs": [[str(self.vertices[i]), str(self.vertices[j])] for i, j in sorted(self.arcs)],
            "self_loops": [str(self.vertices[i]) for i in sorted(self.self_loops)],
        }


def _nonkey_vars(atom: Atom, schema: Schema | None) -> list[str]:
    rel = schema[atom.relation] if schema is not None else None
    out = []
    for pos, t in enumerate(atom.args):
        if isinstance(t, Var) and (rel is None or not rel.is_key(pos)):
            out.append(t.name)
    return out


def join_graph(q: ConjunctiveQuery, schema: Schema) -> JoinGraph:
    atoms = q.atoms
    arcs = set()
    loops = set()
    for i, a in enumerate(atoms):
        nk = _nonkey_vars(a, schema)
        names = a.variables()
        for v in nk:
            if names.count(v) > 1:
                loops.add(i)
            for j, b in enumerate(atoms):
                if j != i and v in b.variables():
                    arcs.add((i, j))
    return JoinGraph(tuple(atoms), frozenset(arcs), frozenset(loops))


def _is_forest(n: int, arcs: frozenset[tuple[int, int]]) -> bool:
    indeg = [0] * n
    for _, j in arcs:
        indeg[j] += 1
    if any(d > 1 for d in indeg):
        return False
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in arcs:
        ri, rj = find(i), find(j)
        if ri == rj:
            return False
        parent[ri] = rj
    return True


def in_ctree(q: ConjunctiveQuery, schema: Schema) -> tuple[bool, str]:
    """Whether the query (or its non-aggregate matrix) lies in the tree class."""
    rels = [a.relation for a in q.atoms]
    if len(set(rels)) != len(rels):
        return False, "repeated relation symbol"
    g = join_graph(q, schema)
    if g.self_loops:
        return False, f"self-loop at {g.vertices[min(g.self_loops)]}"
    if not _is_forest(len(q.atoms), g.arcs):
        return False, "join graph is not a forest"
    for i, j in sorted(g.arcs):
        src, dst = q.atoms[i], q.atoms[j]
        nk = set(_nonkey_vars(src, schema))
        rel = schema[dst.relation]
        key_args = [t for pos, t in enumerate(dst.args) if rel.is_key(pos)]
        touches_key = any(isinstance(t, Var) and t.name in nk for t in key_args)
        if not touches_key:
            continue
        full = all(isinstance(t, Const) or t.name in nk for t in key_args)
        if not full:
            return False, f"join from {src} into the key of {dst} is not full"
    return True, "forest join graph with full non-key to key joins"
