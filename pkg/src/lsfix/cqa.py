"""Consistent query answering over the least-squares fixes of an instance."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import CapExceeded, NoFixExists, UnsupportedConstraint
from .exact import FixSearchConfig, ls_fixes
from .model import Fact, Instance, key_of, value_sort_key
from .query import evaluate, scalar_value
from .repair import CandidateGrid, is_1ad, require_denials, satisfies
from .syntax import AggregateComparisonQuery, ConjunctiveQuery, Constraint

SEMANTICS = ("skeptical", "brave", "majority", "range")


@dataclass(frozen=True)
class KeyRepairInstance:
    """Consistent tuples plus every cheapest consistent replacement of the others.

    ``choices`` lists, per original tuple in canonical order, the tuples that
    may stand for it in a fix.
    """

    base: tuple[Fact, ...]
    provenance: dict[Fact, tuple]
    choices: tuple[tuple[Fact, tuple[Fact, ...]], ...]


def canonical_tuples(D: Instance) -> list[Fact]:
    """Relation order, then key order."""
    out = []
    for rel in D.schema.relations:
        facts = D.relation(rel.name)
        out.extend(sorted(facts, key=lambda f: [value_sort_key(v) for v in key_of(D.schema, f)]))
    return out


def reduce_1ad(D: Instance, ics: Sequence[Constraint]) -> KeyRepairInstance:
    denials = require_denials(ics)
    if not is_1ad(denials):
        raise UnsupportedConstraint("every constraint must have a single database atom")
    grid = CandidateGrid(D, denials)
    base, prov, choices = [], {}, []
    for t in canonical_tuples(D):
        if all(satisfies([t], ic) for ic in denials):
            options = (t,)
        else:
            best = None
            kept: list[Fact] = []
            for cost, g in grid.tuple_candidates(t):
                if best is not None and cost > best:
                    break
                if all(satisfies([g], ic) for ic in denials):
                    best = cost
                    kept.append(g)
            options = tuple(kept)
        for f in options:
            base.append(f)
            prov[f] = (t.relation, key_of(D.schema, t))
        choices.append((t, options))
    return KeyRepairInstance(tuple(base), prov, tuple(choices))


def enumerate_fixes_1ad(
    D: Instance, ics: Sequence[Constraint], max_fixes: int = 100_000
) -> list[Instance]:
    kr = reduce_1ad(D, ics)
    options = [opts for _, opts in kr.choices]
    if any(not o for o in options):
        return []
    count = math.prod(len(o) for o in options)
    if count > max_fixes:
        raise CapExceeded(f"{count} fixes exceed max_fixes={max_fixes}")
    fixes = [Instance(D.schema, pick) for pick in itertools.product(*options)]
    fixes.sort(key=lambda inst: inst.canonical())
    return fixes


def fixes_for(
    D: Instance, ics: Sequence[Constraint], cfg: FixSearchConfig | None = None
) -> list[Instance]:
    """All LS-fixes, through the single-atom shortcut when it applies."""
    denials = require_denials(ics)
    if is_1ad(denials):
        cfg = cfg or FixSearchConfig()
        return enumerate_fixes_1ad(D, denials, cfg.max_fixes)
    return ls_fixes(D, denials, cfg).fixes


@dataclass(frozen=True)
class CQAResult:
    semantics: str
    answers: Union[frozenset, bool, tuple]
    fix_count: int

    @property
    def vacuous(self) -> bool:
        return self.fix_count == 0


def _combine(semantics: str, per_fix: list):
    n = len(per_fix)
    if isinstance(per_fix[0], bool):
        yes = sum(per_fix)
        if semantics == "skeptical":
            return yes == n
        if semantics == "brave":
            return yes > 0
        return 2 * yes > n
    if semantics == "skeptical":
        return frozenset.intersection(*per_fix)
    if semantics == "brave":
        return frozenset.union(*per_fix)
    counts: dict = {}
    for rows in per_fix:
        for r in rows:
            counts[r] = counts.get(r, 0) + 1
    return frozenset(r for r, c in counts.items() if 2 * c > n)


def _is_yes_no(q) -> bool:
    return isinstance(q, AggregateComparisonQuery) or (q.aggregate is None and q.is_boolean)


def cqa(
    q,
    D: Instance,
    ics: Sequence[Constraint],
    semantics: str = "skeptical",
    cfg: FixSearchConfig | None = None,
    fixes: list[Instance] | None = None,
) -> CQAResult:
    if semantics not in SEMANTICS:
        raise ValueError(f"unknown semantics {semantics!r}")
    if fixes is None:
        fixes = fixes_for(D, ics, cfg)
    if semantics == "range":
        return CQAResult("range", cqa_range(q, D, ics, cfg, fixes), len(fixes))
    per_fix = [evaluate(q, f) for f in fixes]
    if not fixes:
        # no fix: skeptical holds vacuously for yes/no questions, nothing else does
        answers = (semantics == "skeptical") if _is_yes_no(q) else frozenset()
        return CQAResult(semantics, answers, 0)
    return CQAResult(semantics, _combine(semantics, per_fix), len(fixes))


def _range_query(q) -> ConjunctiveQuery:
    if isinstance(q, AggregateComparisonQuery):
        q = q.query
    if not isinstance(q, ConjunctiveQuery) or not q.is_scalar_aggregate:
        raise UnsupportedConstraint("range semantics needs a scalar aggregate query")
    return q


def cqa_range(
    q,
    D: Instance,
    ics: Sequence[Constraint],
    cfg: FixSearchConfig | None = None,
    fixes: list[Instance] | None = None,
) -> tuple[Fraction, Fraction]:
    """Smallest and largest value of a scalar aggregate across all LS-fixes."""
    q = _range_query(q)
    if fixes is None:
        fixes = fixes_for(D, ics, cfg)
    if not fixes:
        raise NoFixExists("range answers need at least one fix")
    values = [v for v in (scalar_value(q, f) for f in fixes) if v is not None]
    if not values:
        raise NoFixExists("the aggregate is undefined in every fix")
    return Fraction(min(values)), Fraction(max(values))


def min_max_answer(q, D, ics, k1, cfg: FixSearchConfig | None = None) -> bool:
    """Whether the aggregate is at most ``k1`` in every fix."""
    return cqa_range(q, D, ics, cfg)[1] <= Fraction(k1)


def max_min_answer(q, D, ics, k2, cfg: FixSearchConfig | None = None) -> bool:
    """Whether the aggregate is at least ``k2`` in every fix."""
    return cqa_range(q, D, ics, cfg)[0] >= Fraction(k2)
