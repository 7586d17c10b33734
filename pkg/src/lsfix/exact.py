"""Exhaustive LS-fix search over the border-candidate grid.

The search is exact for (extended) linear denials: every least-squares fix
takes, in each fixable cell, either the original value or a grid value.
Tuples are the search variables and their grid points the domains;
denials become *nogoods* (forbidden combinations of candidates), and a
branch-and-bound kernel enumerates every minimum-cost assignment.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from . import kernels
from .engine import FactIndex, explicit_form, match
from .errors import CapExceeded
from .model import Fact, Instance, distance, same_key_space
from .repair import CandidateGrid, _UnionFind, require_denials, satisfies, satisfies_all
from .syntax import Atom, Comparison, Const, Constraint, DenialConstraint, Var


@dataclass(frozen=True)
class FixSearchConfig:
    max_grid_points: int = 10**7
    window_radius_override: int | None = None
    max_fixes: int = 100_000

    def __post_init__(self):
        if self.max_grid_points <= 0 or self.max_fixes <= 0:
            raise ValueError("caps must be positive")
        if self.window_radius_override is not None and self.window_radius_override < 0:
            raise ValueError("window radius must be nonnegative")


@dataclass
class FixResult:
    fixes: list[Instance]
    min_distance: Fraction | None
    explored: int


class FixCheck(NamedTuple):
    is_fix: bool
    is_ls_fix: bool


# -- nogood construction ----------------------------------------------------------


def _skeleton(ic: DenialConstraint, D: Instance):
    """Split a denial into a rigid matching part and comparisons on fixable cells.

    Returns ``(atoms, rigid_comps, flex_comps, cell_of)`` where every fixable
    position of ``atoms`` holds a private variable and ``cell_of`` maps those
    variables to ``(atom index, position)``.
    """
    schema = D.schema
    atoms, comps, origin = explicit_form(ic.atoms, ic.comparisons)
    fixable = {v for v, (i, j) in origin.items() if schema[atoms[i].relation].is_fixable(j)}
    uf = _UnionFind()
    bound: dict[str, Const] = {}
    rest: list[Comparison] = []
    for c in comps:
        c = c.oriented()
        names = c.variables()
        if any(n in fixable for n in names) or c.op != "=":
            rest.append(c)
        elif c.var_var:
            uf.union(c.lhs.name, c.rhs.name)
        else:
            bound[c.lhs.name] = c.rhs
    const_of: dict[str, Const] = {}
    for v, k in bound.items():
        root = uf.find(v)
        if root in const_of and const_of[root] != k:
            return None  # contradictory rigid equalities: never violated
        const_of[root] = k

    def sub(name: str):
        if name in fixable:
            return Var(name)
        root = uf.find(name)
        return const_of.get(root, Var(root))

    new_atoms = [Atom(a.relation, tuple(sub(t.name) for t in a.args)) for a in atoms]

    def sub_term(t):
        return sub(t.name) if isinstance(t, Var) else t

    rigid, flex = [], []
    for c in rest:
        c2 = Comparison(sub_term(c.lhs), c.op, sub_term(c.rhs))
        (flex if any(n in fixable for n in c.variables()) else rigid).append(c2)
    # rigid comparisons may reduce to constant-vs-constant after substitution
    final_rigid = []
    for c in rigid:
        if isinstance(c.lhs, Const) and isinstance(c.rhs, Const):
            if not c.holds({}):
                return None
        else:
            final_rigid.append(c)
    cell_of = {v: origin[v] for v in fixable}
    return new_atoms, final_rigid, flex, cell_of


class _Budget:
    def __init__(self, cap: int):
        self.cap = cap
        self.used = 0

    def spend(self, n: int):
        self.used += n
        if self.used > self.cap:
            raise CapExceeded(f"search exceeded max_grid_points={self.cap}")


def _nogoods(D, denials, index_of, cands, budget):
    """Forbidden candidate combinations spanning at least two tuples."""
    found: dict = {}
    fidx = FactIndex(D)
    for ic in denials:
        if len(ic.atoms) < 2:
            continue
        sk = _skeleton(ic, D)
        if sk is None:
            continue
        atoms, rigid, flex, cell_of = sk
        for env, used in match(atoms, rigid, fidx):
            distinct = sorted({index_of[f] for f in used})
            if len(distinct) < 2:
                continue
            budget.spend(1)
            # which tuple each flexible comparison reads
            reads = []
            for c in flex:
                owners = {index_of[used[cell_of[n][0]]] for n in c.variables() if n in cell_of}
                reads.append(owners)

            def value_env(choice: dict[int, int]):
                e = dict(env)
                for n, (ai, pos) in cell_of.items():
                    u = index_of[used[ai]]
                    if u in choice:
                        e[n] = cands[u][choice[u]][1].values[pos]
                return e

            allowed: dict[int, list[int]] = {}
            for u in distinct:
                local = [c for c, r in zip(flex, reads) if r == {u}]
                ok = []
                for ci in range(len(cands[u])):
                    e = value_env({u: ci})
                    if all(c.holds(e) for c in local):
                        ok.append(ci)
                budget.spend(len(cands[u]))
                if not ok:
                    break
                allowed[u] = ok
            else:
                cross = [c for c, r in zip(flex, reads) if len(r) > 1]
                if not cross:
                    key = tuple((u, tuple(allowed[u])) for u in distinct)
                    found[key] = None
                    continue
                xs = sorted({u for c, r in zip(flex, reads) if len(r) > 1 for u in r})
                budget.spend(math.prod(len(allowed[u]) for u in xs))
                for combo in itertools.product(*(allowed[u] for u in xs)):
                    e = value_env(dict(zip(xs, combo)))
                    if all(c.holds(e) for c in cross):
                        key = tuple(
                            (u, (combo[xs.index(u)],) if u in xs else tuple(allowed[u]))
                            for u in distinct
                        )
                        found[key] = None
    return list(found)


def _tighten(nogoods, cands):
    """Drop entries that allow every candidate; they never lift a nogood."""
    out: dict = {}
    for g in nogoods:
        out[tuple((u, allowed) for u, allowed in g if len(allowed) < len(cands[u]))] = None
    return list(out)


# -- the search ---------------------------------------------------------------------


def _components(n: int, nogoods) -> list[list[int]]:
    uf = _UnionFind()
    for u in range(n):
        uf.find(u)
    for g in nogoods:
        first = g[0][0]
        for u, _ in g[1:]:
            uf.union(first, u)
    groups: dict[int, list[int]] = {}
    for u in range(n):
        groups.setdefault(uf.find(u), []).append(u)
    return sorted(groups.values())


def ls_fixes(
    D: Instance, ics: Sequence[Constraint], cfg: FixSearchConfig | None = None
) -> FixResult:
    """All least-squares fixes of ``D`` and their common distance."""
    cfg = cfg or FixSearchConfig()
    denials = require_denials(ics)
    budget = _Budget(cfg.max_grid_points)
    facts = list(D)
    if not facts or satisfies_all(D, denials):
        return FixResult([D], Fraction(0), 0)
    grid = CandidateGrid(D, denials, cfg.window_radius_override)

    # per-tuple domains, minus candidates that violate a denial on their own
    cands: list[list[tuple[Fraction, Fact]]] = []
    for f in facts:
        budget.spend(grid.size(f))
        own = [(c, g) for c, g in grid.tuple_candidates(f) if all(satisfies([g], ic) for ic in denials)]
        if not own:
            return FixResult([], None, budget.used)
        cands.append(own)

    index_of = {f: i for i, f in enumerate(facts)}
    nogoods = _tighten(_nogoods(D, denials, index_of, cands, budget), cands)
    if () in nogoods:
        return FixResult([], None, budget.used)

    scale = 1
    for row in cands:
        for c, _ in row:
            scale = math.lcm(scale, c.denominator)

    per_component = []
    total_best = 0
    remaining = cfg.max_grid_points - budget.used
    for comp in _components(len(facts), nogoods):
        local = {u: k for k, u in enumerate(comp)}
        costs = [[int(c * scale) for c, _ in cands[u]] for u in comp]
        goods = [[(local[u], allowed) for u, allowed in g] for g in nogoods if g[0][0] in local]
        best, sols, explored = kernels.min_cost_assignments(
            costs, goods, max(remaining, 0), cfg.max_fixes
        )
        if explored == -1:
            raise CapExceeded(f"search exceeded max_grid_points={cfg.max_grid_points}")
        if explored == -2:
            raise CapExceeded(f"more than max_fixes={cfg.max_fixes} least-squares fixes")
        budget.spend(explored)
        remaining = cfg.max_grid_points - budget.used
        if best is None:
            return FixResult([], None, budget.used)
        total_best += best
        per_component.append([[cands[u][c][1] for u, c in zip(comp, sol)] for sol in sols])

    count = math.prod(len(p) for p in per_component)
    if count > cfg.max_fixes:
        raise CapExceeded(f"{count} least-squares fixes exceed max_fixes={cfg.max_fixes}")
    fixes = []
    for pick in itertools.product(*per_component):
        fixes.append(Instance(D.schema, (f for part in pick for f in part)))
    fixes.sort(key=lambda inst: inst.canonical())
    return FixResult(fixes, Fraction(total_best, scale), budget.used)


def ne(D: Instance, ics: Sequence[Constraint], cfg: FixSearchConfig | None = None) -> bool:
    return bool(ls_fixes(D, ics, cfg).fixes)


def dfop(D: Instance, ics: Sequence[Constraint], cfg: FixSearchConfig | None = None):
    return ls_fixes(D, ics, cfg).min_distance


def dfp(D: Instance, ics: Sequence[Constraint], k, cfg: FixSearchConfig | None = None) -> bool:
    k = Fraction(k)
    if k < 0:
        raise ValueError("distance bound must be nonnegative")
    best = dfop(D, ics, cfg)
    return best is not None and best <= k


def verify_fix(
    D: Instance, D2: Instance, ics: Sequence[Constraint], cfg: FixSearchConfig | None = None
) -> FixCheck:
    """Whether ``D2`` is a fix of ``D`` and whether it is a least-squares one."""
    require_denials(ics)
    if D.schema != D2.schema or not same_key_space(D, D2):
        return FixCheck(False, False)
    if not satisfies_all(D2, ics):
        return FixCheck(False, False)
    best = dfop(D, ics, cfg)
    return FixCheck(True, best is not None and distance(D, D2) == best)
