"""Approximating the largest value of a sum query across fixes.

Under single-atom denials every fix picks, for each tuple, one of its
cheapest consistent replacements.  Each tuple becomes a *bag* of one-hot
choices; each way of satisfying the query body becomes a weighted equation
that holds when all the choices it needs are made.  The best total weight
of satisfied equations equals the largest query value over all fixes, and
picking choices greedily by conditional expectation is guaranteed to reach
at least ``k**-m`` of it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .cqa import reduce_1ad
from .engine import FactIndex, match
from .errors import NoFixExists, UnsupportedConstraint
from .model import Fact, Instance, Schema, key_of
from .syntax import ConjunctiveQuery, Constraint


@dataclass(frozen=True)
class Bag:
    owner_key: tuple
    candidates: tuple[Fact, ...]

    def __post_init__(self):
        if not self.candidates:
            raise ValueError(f"empty bag for {self.owner_key}")


@dataclass(frozen=True)
class GF2Equation:
    requirements: tuple[tuple[int, int], ...]  # sorted (bag id, candidate index)
    weight: int

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("equation weights are nonnegative")
        if not self.requirements:
            raise ValueError("an equation needs at least one requirement")

    def holds(self, selection: Mapping[int, int]) -> bool:
        return all(selection.get(b) == c for b, c in self.requirements)


@dataclass(frozen=True)
class GF2System:
    bags: tuple[Bag, ...]
    equations: tuple[GF2Equation, ...]
    m: int
    schema: Schema

    @property
    def k(self) -> int:
        return max((len(b.candidates) for b in self.bags), default=1)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "bags": [
                {"owner": list(b.owner_key[1]), "relation": b.owner_key[0],
                 "candidates": [list(f.values) for f in b.candidates]}
                for b in self.bags
            ],
            "equations": [
                {"requires": {str(b): c for b, c in e.requirements}, "weight": e.weight}
                for e in self.equations
            ],
        }


def build_rwae2(q: ConjunctiveQuery, D: Instance, ics: Sequence[Constraint]) -> GF2System:
    if q.aggregate is None or q.aggregate.function != "sum" or q.head_vars:
        raise UnsupportedConstraint("expected a group-free sum query")
    kr = reduce_1ad(D, ics)
    bags = []
    where: dict[Fact, tuple[int, int]] = {}
    for original, options in kr.choices:
        if not options:
            raise NoFixExists(f"{original} has no consistent replacement")
        bid = len(bags)
        bags.append(Bag((original.relation, key_of(D.schema, original)), options))
        for i, f in enumerate(options):
            where[f] = (bid, i)

    z = q.aggregate.var.name
    merged: dict[tuple, int] = {}
    for env, used in match(q.atoms, q.comparisons, FactIndex(kr.base)):
        need: dict[int, int] = {}
        clash = False
        for f in used:
            b, c = where[f]
            if need.setdefault(b, c) != c:
                clash = True
                break
        if clash:
            continue
        w = env[z]
        if not isinstance(w, int) or w < 0:
            raise UnsupportedConstraint(f"sum attribute must be a nonnegative integer, got {w!r}")
        key = tuple(sorted(need.items()))
        merged[key] = merged.get(key, 0) + w
    equations = tuple(GF2Equation(k, w) for k, w in sorted(merged.items()))
    return GF2System(tuple(bags), equations, len(q.atoms), D.schema)


def expected_weight(system: GF2System, partial: Mapping[int, int]) -> Fraction:
    """Expected satisfied weight when undecided bags pick uniformly at random."""
    total = Fraction(0)
    for e in system.equations:
        p = Fraction(1)
        for b, c in e.requirements:
            if b in partial:
                if partial[b] != c:
                    p = Fraction(0)
                    break
            else:
                p /= len(system.bags[b].candidates)
        total += e.weight * p
    return total


def satisfied_weight(system: GF2System, selection: Mapping[int, int]) -> int:
    return sum(e.weight for e in system.equations if e.holds(selection))


def derandomize(system: GF2System, trace: list | None = None) -> tuple[dict[int, int], int]:
    """Fix bags in order, each to the choice with the highest conditional expectation."""
    selection: dict[int, int] = {}
    if trace is not None:
        trace.append(expected_weight(system, selection))
    for b, bag in enumerate(system.bags):
        best, best_val = 0, None
        for c in range(len(bag.candidates)):
            selection[b] = c
            val = expected_weight(system, selection)
            if best_val is None or val > best_val:
                best, best_val = c, val
        selection[b] = best
        if trace is not None:
            trace.append(best_val)
    return selection, satisfied_weight(system, selection)


def exhaustive_optimum(system: GF2System) -> tuple[dict[int, int], int]:
    """Best one-hot assignment by full enumeration; for small systems only."""
    best_sel, best = {}, None
    ranges = [range(len(b.candidates)) for b in system.bags]
    for pick in itertools.product(*ranges):
        sel = dict(enumerate(pick))
        w = satisfied_weight(system, sel)
        if best is None or w > best:
            best_sel, best = sel, w
    return best_sel, best or 0


def assignment_to_fix(selection: Mapping[int, int], bags: Sequence[Bag], schema: Schema) -> Instance:
    if set(selection) != set(range(len(bags))):
        raise ValueError("every bag needs exactly one selected candidate")
    return Instance(schema, (bags[b].candidates[c] for b, c in sorted(selection.items())))


def guarantee_factor(k: int, m: int) -> Fraction:
    return Fraction(1, k**m)


def guarantee(system: GF2System) -> Fraction:
    return guarantee_factor(system.k, system.m)
