"""Repair of local denials as minimum weighted set cover.

Elements are the hyperedges of the conflict hypergraph; each local fix of
an inconsistent tuple is a set holding the hyperedges it resolves, weighted
by its cost.  A cover with one set per tuple turns back into a fix by
swapping every owner tuple for its chosen replacement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from . import kernels
from .errors import CapExceeded, InfeasibleCover, NonLocalConstraints
from .model import Fact, Instance
from .repair import (
    CandidateGrid,
    LocalFix,
    ViolationSet,
    combine_local_fixes,
    conflict_hypergraph,
    is_local,
    local_fixes,
    require_denials,
)
from .syntax import Constraint


@dataclass(frozen=True)
class CoverSet:
    id: int
    owner: Fact
    fix: LocalFix
    members: frozenset[int]

    @property
    def name(self) -> str:
        return f"S{self.id}"


@dataclass(frozen=True)
class CoverInstance:
    elements: tuple[int, ...]
    hyperedges: tuple[ViolationSet, ...]
    sets: tuple[CoverSet, ...]
    weights: dict[int, Fraction] = field(hash=False)

    def __post_init__(self):
        universe = set(self.elements)
        for s in self.sets:
            if not s.members <= universe:
                raise ValueError(f"{s.name} has members outside the universe")
            if s.id not in self.weights:
                raise ValueError(f"{s.name} has no weight")

    def set_by_id(self, sid: int) -> CoverSet:
        for s in self.sets:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def is_feasible(self) -> bool:
        covered = set().union(*(s.members for s in self.sets)) if self.sets else set()
        return covered == set(self.elements)

    def frequency(self) -> int:
        """Largest number of sets sharing one element."""
        return max((sum(e in s.members for s in self.sets) for e in self.elements), default=0)

    def with_set(self, owner: Fact, fix: LocalFix, members: frozenset[int]) -> tuple["CoverInstance", int]:
        """Extend with one more set; returns the new instance and the set's id."""
        sid = max((s.id for s in self.sets), default=0) + 1
        extra = CoverSet(sid, owner, fix, members)
        weights = dict(self.weights)
        weights[sid] = fix.cost
        return replace(self, sets=self.sets + (extra,), weights=weights), sid


@dataclass(frozen=True)
class Cover:
    chosen: frozenset[int]
    weight: Fraction
    trace: tuple[dict, ...] = ()
    # set when star-normalization had to add a set to the instance
    instance: CoverInstance | None = None

    def names(self) -> list[str]:
        return [f"S{i}" for i in sorted(self.chosen)]


def build_mwscp(D: Instance, ics: Sequence[Constraint]) -> CoverInstance:
    denials = require_denials(ics)
    ok, why = is_local(denials, D.schema)
    if not ok:
        raise NonLocalConstraints("; ".join(why))
    hg = conflict_hypergraph(D, denials)
    grid = CandidateGrid(D, denials)
    edge_id = {e: i for i, e in enumerate(hg.edges)}
    sets: list[CoverSet] = []
    weights: dict[int, Fraction] = {}
    for t in hg.inconsistent_tuples():
        for lf in local_fixes(t, D, denials, hg, grid):
            sid = len(sets) + 1
            sets.append(CoverSet(sid, t, lf, frozenset(edge_id[e] for e in lf.resolved)))
            weights[sid] = lf.cost
    ci = CoverInstance(tuple(range(len(hg.edges))), hg.edges, tuple(sets), weights)
    if not ci.is_feasible():
        raise InfeasibleCover("some violation set has no local fix resolving it")
    return ci


def _require_feasible(ci: CoverInstance) -> None:
    if not ci.is_feasible():
        raise InfeasibleCover("the sets do not cover every element")


def greedy_cover(ci: CoverInstance) -> Cover:
    """Repeatedly take the set with the most uncovered elements per unit weight."""
    _require_feasible(ci)
    uncovered = set(ci.elements)
    chosen: list[int] = []
    trace = []
    while uncovered:
        best = None
        for s in ci.sets:
            gain = len(s.members & uncovered)
            if not gain or s.id in chosen:
                continue
            ratio = Fraction(gain) / ci.weights[s.id]
            # strict comparison keeps the smallest id on ties
            if best is None or ratio > best[0]:
                best = (ratio, s)
        ratio, s = best
        chosen.append(s.id)
        uncovered -= s.members
        trace.append({"step": len(trace) + 1, "chosen": s.name, "ratio": ratio})
    return Cover(frozenset(chosen), sum((ci.weights[i] for i in chosen), Fraction(0)), tuple(trace))


def primal_dual_cover(ci: CoverInstance) -> Cover:
    """Raise the dual of each uncovered element until some set containing it is tight.

    Every tight set enters the cover, so the weight is at most the largest
    element frequency times the optimum.
    """
    _require_feasible(ci)
    slack = dict(ci.weights)
    chosen: list[int] = []
    covered: set[int] = set()
    trace = []
    for e in ci.elements:
        if e in covered:
            continue
        holders = [s for s in ci.sets if e in s.members]
        delta = min(slack[s.id] for s in holders)
        for s in holders:
            slack[s.id] -= delta
        for s in holders:
            if slack[s.id] == 0 and s.id not in chosen:
                chosen.append(s.id)
                covered |= s.members
                trace.append({"step": len(trace) + 1, "chosen": s.name, "dual": delta, "element": e})
    return Cover(frozenset(chosen), sum((ci.weights[i] for i in chosen), Fraction(0)), tuple(trace))


def _scaled(ci: CoverInstance) -> tuple[list[int], list[int], int]:
    scale = 1
    for w in ci.weights.values():
        scale = math.lcm(scale, w.denominator)
    masks = []
    for s in ci.sets:
        m = 0
        for e in s.members:
            m |= 1 << e
        masks.append(m)
    return masks, [int(ci.weights[s.id] * scale) for s in ci.sets], scale


def optimal_covers(ci: CoverInstance, max_sets: int = 20, max_nodes: int = 10**7) -> list[Cover]:
    """Every minimum-weight cover, ordered by their sorted id lists."""
    _require_feasible(ci)
    if len(ci.sets) > max_sets:
        raise CapExceeded(f"{len(ci.sets)} sets exceed the exact-cover cap of {max_sets}")
    if not ci.elements:
        return [Cover(frozenset(), Fraction(0))]
    masks, weights, scale = _scaled(ci)
    best, covers, explored = kernels.optimal_covers(masks, weights, max_nodes)
    if explored == -1:
        raise CapExceeded(f"exact cover search exceeded {max_nodes} nodes")
    ids = [s.id for s in ci.sets]
    out = [Cover(frozenset(ids[i] for i in c), Fraction(best, scale)) for c in covers]
    out.sort(key=lambda c: sorted(c.chosen))
    return out


def exact_cover(ci: CoverInstance, max_sets: int = 20, max_nodes: int = 10**7) -> Cover:
    """A minimum-weight cover; the lexicographically smallest id set among the optima."""
    return optimal_covers(ci, max_sets, max_nodes)[0]


def _owners(c: Cover, ci: CoverInstance) -> dict[Fact, list[CoverSet]]:
    out: dict[Fact, list[CoverSet]] = {}
    for sid in sorted(c.chosen):
        s = ci.set_by_id(sid)
        out.setdefault(s.owner, []).append(s)
    return out


def star_normalize(
    c: Cover, ci: CoverInstance, D: Instance, ics: Sequence[Constraint]
) -> Cover:
    """Merge the chosen sets of every tuple into one set covering their union."""
    ci = c.instance or ci
    extended = c.instance
    groups = _owners(c, ci)
    if all(len(g) == 1 for g in groups.values()):
        return c
    denials = require_denials(ics)
    hg = conflict_hypergraph(D, denials)
    grid = CandidateGrid(D, denials)
    edge_id = {e: i for i, e in enumerate(ci.hyperedges)}
    chosen: set[int] = set()
    for owner, group in groups.items():
        if len(group) == 1:
            chosen.add(group[0].id)
            continue
        union = frozenset().union(*(s.members for s in group))
        same = [s for s in ci.sets if s.owner == owner and s.members == union]
        if same:
            chosen.add(min(same, key=lambda s: (ci.weights[s.id], s.id)).id)
            continue
        lf = combine_local_fixes(owner, [s.fix for s in group], D, denials, hg, grid)
        members = frozenset(edge_id[e] for e in lf.resolved)
        match = [s for s in ci.sets if s.owner == owner and s.fix.fixed == lf.fixed]
        if match:
            chosen.add(match[0].id)
        else:
            ci, sid = ci.with_set(owner, lf, members)
            extended = ci
            chosen.add(sid)
    weight = sum((ci.weights[i] for i in chosen), Fraction(0))
    return Cover(frozenset(chosen), weight, c.trace, extended)


def apply_cover(D: Instance, c: Cover, ci: CoverInstance) -> Instance:
    ci = c.instance or ci
    mapping: dict[Fact, Fact] = {}
    for owner, group in _owners(c, ci).items():
        if len(group) > 1:
            raise ValueError(f"cover is not star-normalized: {len(group)} sets for {owner}")
        mapping[owner] = group[0].fix.fixed
    return D.replace(mapping)
