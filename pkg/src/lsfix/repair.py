"""Constraint checking, violation sets, conflict hypergraphs and local fixes."""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .engine import FactIndex, explicit_form, match
from .errors import CapExceeded, UnsupportedConstraint
from .model import Fact, Instance, Schema, fact_distance
from .syntax import (
    OPS,
    AggregationConstraint,
    AggSide,
    Const,
    Constraint,
    DenialConstraint,
    Var,
)

log = logging.getLogger(__name__)

DEFAULT_ASSIGNMENT_LIMIT = 10**6


# -- satisfaction -------------------------------------------------------------


def _side_value(side: AggSide, facts: Iterable[Fact], schema: Schema):
    rel = schema[side.relation]
    names = [a.name for a in rel.attributes]
    total = 0
    count = 0
    for f in facts:
        if f.relation != side.relation:
            continue
        row = dict(zip(names, f.values))
        if not all(c.holds(row) for c in side.filters):
            continue
        count += 1
        if side.argument is not None:
            total += side.argument.eval(row)
    if side.function == "count":
        return count
    if side.function == "sum":
        return total
    return Fraction(total, count) if count else None


def satisfies(D: Instance | Iterable[Fact], ic: Constraint, schema: Schema | None = None) -> bool:
    """``D |= ic``. An average over an empty selection makes an AC fail."""
    if isinstance(ic, AggregationConstraint):
        schema = schema or D.schema
        facts = list(D)
        left = _side_value(ic.left, facts, schema)
        right = ic.right if isinstance(ic.right, int) else _side_value(ic.right, facts, schema)
        if left is None or right is None:
            return False
        return OPS[ic.op](left, right)
    for _ in match(ic.atoms, ic.comparisons, D if isinstance(D, FactIndex) else FactIndex(D)):
        return False
    return True


def satisfies_all(D, ics: Sequence[Constraint], schema: Schema | None = None) -> bool:
    index = FactIndex(D)
    for ic in ics:
        if isinstance(ic, AggregationConstraint):
            if not satisfies(D, ic, schema):
                return False
        elif not satisfies(index, ic):
            return False
    return True


def require_denials(ics: Sequence[Constraint]) -> list[DenialConstraint]:
    for ic in ics:
        if isinstance(ic, AggregationConstraint):
            raise UnsupportedConstraint(
                f"{ic.label}: repair search under aggregation constraints is undecidable"
            )
    return list(ics)


# -- violation sets and the conflict hypergraph ------------------------------


@dataclass(frozen=True)
class ViolationSet:
    constraint: str
    tuples: frozenset[Fact]

    def __str__(self):
        inner = ", ".join(sorted(str(f) for f in self.tuples))
        return f"{self.constraint}:{{{inner}}}"


def _minimal(sets: set[frozenset]) -> list[frozenset]:
    ordered = sorted(sets, key=len)
    out: list[frozenset] = []
    for s in ordered:
        if not any(m < s for m in out):
            out.append(s)
    return out


def violation_sets(
    D: Instance, ic: DenialConstraint, limit: int = DEFAULT_ASSIGNMENT_LIMIT
) -> list[ViolationSet]:
    """Inclusion-minimal sets of tuples that jointly falsify ``ic``."""
    if isinstance(ic, AggregationConstraint):
        raise UnsupportedConstraint(f"{ic.label}: violation sets are defined for denials only")
    witnesses: set[frozenset] = set()
    for n, (_, used) in enumerate(match(ic.atoms, ic.comparisons, FactIndex(D)), 1):
        if n > limit:
            raise CapExceeded(f"{ic.label}: more than {limit} violating assignments")
        witnesses.add(frozenset(used))
    order = {f: i for i, f in enumerate(D)}
    mins = _minimal(witnesses)
    mins.sort(key=lambda s: sorted(order[f] for f in s))
    return [ViolationSet(ic.label, s) for s in mins]


@dataclass(frozen=True)
class ConflictHypergraph:
    vertices: tuple[Fact, ...]
    edges: tuple[ViolationSet, ...]

    def edges_of(self, t: Fact) -> list[ViolationSet]:
        return [e for e in self.edges if t in e.tuples]

    def inconsistent_tuples(self) -> list[Fact]:
        touched = {f for e in self.edges for f in e.tuples}
        return [t for t in self.vertices if t in touched]


def conflict_hypergraph(
    D: Instance, ics: Sequence[Constraint], limit: int = DEFAULT_ASSIGNMENT_LIMIT
) -> ConflictHypergraph:
    edges: list[ViolationSet] = []
    for ic in require_denials(ics):
        edges.extend(violation_sets(D, ic, limit))
    return ConflictHypergraph(tuple(D), tuple(edges))


# -- locality -----------------------------------------------------------------


def _sides(op: str) -> set[str]:
    # x<=c is x<c+1, x>=c is x>c-1; = and != pin the value from both sides.
    if op in ("<", "<="):
        return {"<"}
    if op in (">", ">="):
        return {">"}
    return {"<", ">"}


def _resolve(ic: DenialConstraint):
    atoms, comps, origin = explicit_form(ic.atoms, ic.comparisons)
    where = {v: (atoms[i].relation, j) for v, (i, j) in origin.items()}
    return atoms, comps, where, origin


def is_local(ics: Sequence[Constraint], schema: Schema) -> tuple[bool, list[str]]:
    """Check the three locality clauses; diagnostics name each failure."""
    problems: list[str] = []
    forms: dict[tuple[str, int], set[str]] = {}
    for ic in ics:
        if isinstance(ic, AggregationConstraint):
            problems.append(f"{ic.label}: aggregation constraints are never local")
            continue
        atoms, comps, where, _ = _resolve(ic)
        has_fixable_builtin = False
        for c in comps:
            c = c.oriented()
            if c.var_var:
                if c.op != "=":
                    problems.append(f"{ic.label}: {c} compares two attributes, so it is not a linear denial")
                for t in (c.lhs, c.rhs):
                    rel, pos = where[t.name]
                    if schema[rel].is_fixable(pos):
                        attr = schema[rel].attributes[pos].name
                        problems.append(
                            f"{ic.label}: (a) fixable attribute {rel}.{attr} "
                            f"takes part in a join or attribute comparison"
                        )
                continue
            if not isinstance(c.lhs, Var):
                continue
            rel, pos = where[c.lhs.name]
            if schema[rel].is_fixable(pos):
                has_fixable_builtin = True
                forms.setdefault((rel, pos), set()).update(_sides(c.op))
        if not has_fixable_builtin:
            problems.append(f"{ic.label}: (b) no built-in atom on a fixable attribute")
        # A tuple can fill several atoms of one relation, so a minimal violation
        # set may hide a larger one that a local fix leaves violated.
        repeated = sorted(r for r, n in Counter(a.relation for a in atoms).items() if n > 1)
        if repeated:
            problems.append(f"{ic.label}: relation {', '.join(repeated)} occurs in more than one atom")
    for (rel, pos), f in forms.items():
        if f == {"<", ">"}:
            attr = schema[rel].attributes[pos].name
            problems.append(f"(c) attribute {rel}.{attr} is bounded both from below and above")
    problems = list(dict.fromkeys(problems))
    return (not problems), problems


def is_1ad(ics: Sequence[Constraint]) -> bool:
    return all(isinstance(ic, DenialConstraint) and len(ic.atoms) == 1 for ic in ics)


# -- border candidate grid ------------------------------------------------------


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


class CandidateGrid:
    """Per-cell repair candidates for every fixable attribute.

    Constant comparisons contribute ``c-1, c, c+1``. Fixable attributes that
    are compared with other attributes (joins, ``x < y``, ``x != y``) get the
    whole integer range from ``radius`` below the smallest to ``radius`` above
    the largest constant or column value of their linked attributes. With the
    default radius (number of linked cells plus one) an optimum never lies
    outside: any values beyond an empty slot there can move one step inwards
    without changing a comparison, which lowers the distance.
    """

    def __init__(
        self,
        D: Instance,
        ics: Sequence[Constraint],
        radius: int | None = None,
    ):
        self.schema = D.schema
        denials = require_denials(ics)
        borders: dict[tuple[str, int], set[int]] = {}
        consts: dict[tuple[str, int], set[int]] = {}
        uf = _UnionFind()
        for ic in denials:
            _, comps, where, _ = _resolve(ic)
            for c in comps:
                c = c.oriented()
                if c.var_var:
                    a, b = where[c.lhs.name], where[c.rhs.name]
                    uf.union(a, b)
                elif isinstance(c.lhs, Var) and isinstance(c.rhs, Const):
                    cell = where[c.lhs.name]
                    if isinstance(c.rhs.value, int):
                        v = c.rhs.value
                        borders.setdefault(cell, set()).update((v - 1, v, v + 1))
                        consts.setdefault(cell, set()).add(v)
        classes: dict = {}
        for cell in list(uf.parent):
            classes.setdefault(uf.find(cell), []).append(cell)
        self.windowed: dict[tuple[str, int], range] = {}
        for members in classes.values():
            if not any(self.schema[r].is_fixable(p) for r, p in members):
                continue
            points: set[int] = set()
            cells = 0
            for r, p in members:
                points.update(consts.get((r, p), ()))
                for f in D.relation(r):
                    v = f.values[p]
                    if isinstance(v, int):
                        points.add(v)
                        cells += self.schema[r].is_fixable(p)
            if not points:
                continue
            reach = cells + 1 if radius is None else radius
            span = range(min(points) - reach, max(points) + reach + 1)
            for r, p in members:
                if self.schema[r].is_fixable(p):
                    self.windowed[(r, p)] = span
        self.borders = {k: frozenset(v) for k, v in borders.items()}

    def cell_values(self, fact: Fact, pos: int) -> list[int]:
        cell = (fact.relation, pos)
        vals = {fact.values[pos]}
        vals |= self.borders.get(cell, frozenset())
        vals.update(self.windowed.get(cell, ()))
        return sorted(vals)

    def is_border_value(self, original: Fact, pos: int, value: int) -> bool:
        return value in self.cell_values(original, pos)

    def size(self, fact: Fact) -> int:
        n = 1
        for pos in self.schema[fact.relation].fixable_positions:
            n *= len(self.cell_values(fact, pos))
        return n

    def tuple_candidates(self, fact: Fact) -> list[tuple[Fraction, Fact]]:
        """All grid points for ``fact`` as ``(cost, fact')``, cheapest first."""
        positions = self.schema[fact.relation].fixable_positions
        axes = [self.cell_values(fact, p) for p in positions]
        out = []
        for combo in itertools.product(*axes):
            g = fact.with_values(dict(zip(positions, combo)))
            out.append((fact_distance(self.schema, fact, g), g))
        out.sort(key=lambda cg: (cg[0], cg[1].sort_key()))
        return out


# -- local fixes ----------------------------------------------------------------


@dataclass(frozen=True)
class LocalFix:
    original: Fact
    fixed: Fact
    resolved: frozenset[ViolationSet]
    cost: Fraction

    def __str__(self):
        return f"{self.original} -> {self.fixed} (cost {self.cost}, resolves {len(self.resolved)})"


def resolved_by(
    t: Fact, t2: Fact, edges: Iterable[ViolationSet], by_label: dict[str, DenialConstraint]
) -> frozenset[ViolationSet]:
    """``S(t, t2)``: violation sets containing ``t`` that the swap repairs."""
    out = []
    for e in edges:
        if t not in e.tuples:
            continue
        ic = by_label[e.constraint]
        facts = [f for f in e.tuples if f != t] + [t2]
        if satisfies(facts, ic):
            out.append(e)
    return frozenset(out)


def _setup(D, ics, hypergraph, grid):
    denials = require_denials(ics)
    hg = hypergraph if hypergraph is not None else conflict_hypergraph(D, denials)
    grid = grid if grid is not None else CandidateGrid(D, denials)
    by_label = {ic.label: ic for ic in denials}
    return denials, hg, grid, by_label


def local_fixes(
    t: Fact,
    D: Instance,
    ics: Sequence[Constraint],
    hypergraph: ConflictHypergraph | None = None,
    grid: CandidateGrid | None = None,
) -> list[LocalFix]:
    """Cheapest replacement per achievable nonempty resolved set.

    Several equally cheap tuples for one resolved set are all returned.
    Ordered by cost, then by value vector.
    """
    _, hg, grid, by_label = _setup(D, ics, hypergraph, grid)
    edges = hg.edges_of(t)
    if not edges:
        return []
    best: dict[frozenset, tuple[Fraction, list[Fact]]] = {}
    for cost, cand in grid.tuple_candidates(t):
        if cand == t:
            continue
        s = resolved_by(t, cand, edges, by_label)
        if not s:
            continue
        cur = best.get(s)
        if cur is None or cost < cur[0]:
            best[s] = (cost, [cand])
        elif cost == cur[0]:
            cur[1].append(cand)
    fixes = [LocalFix(t, c, s, cost) for s, (cost, cands) in best.items() for c in cands]
    fixes.sort(key=lambda lf: (lf.cost, lf.fixed.sort_key()))
    return fixes


def combine_local_fixes(
    t: Fact,
    fixes: Sequence[LocalFix],
    D: Instance,
    ics: Sequence[Constraint],
    hypergraph: ConflictHypergraph | None = None,
    grid: CandidateGrid | None = None,
) -> LocalFix:
    """Cheapest replacement of ``t`` resolving at least everything ``fixes`` resolve."""
    if not fixes:
        raise ValueError("need at least one local fix to combine")
    if len(fixes) == 1:
        return fixes[0]
    union = frozenset().union(*(f.resolved for f in fixes))
    _, hg, grid, by_label = _setup(D, ics, hypergraph, grid)
    edges = hg.edges_of(t)
    for cost, cand in grid.tuple_candidates(t):
        s = resolved_by(t, cand, edges, by_label)
        if s >= union:
            return LocalFix(t, cand, s, cost)
    raise UnsupportedConstraint(
        f"no replacement of {t} resolves the union of the given local fixes; "
        "the constraints are probably not local"
    )
