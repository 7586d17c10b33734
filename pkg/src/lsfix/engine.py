"""Nested-loop matching of conjunctive bodies against a set of facts."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Iterator, Mapping, Sequence

from .model import Fact, Value
from .syntax import Atom, Comparison, Const, Var


class FactIndex:
    """Facts grouped by relation, with lazily built per-position hash indexes."""

    def __init__(self, facts: Iterable[Fact]):
        self.by_rel: dict[str, list[Fact]] = defaultdict(list)
        for f in facts:
            self.by_rel[f.relation].append(f)
        self._idx: dict[tuple[str, int], dict[Value, list[Fact]]] = {}

    def lookup(self, relation: str, pos: int, value: Value) -> list[Fact]:
        key = (relation, pos)
        idx = self._idx.get(key)
        if idx is None:
            idx = defaultdict(list)
            for f in self.by_rel.get(relation, ()):
                idx[f.values[pos]].append(f)
            self._idx[key] = idx
        return idx.get(value, [])

    def all(self, relation: str) -> list[Fact]:
        return self.by_rel.get(relation, [])


def _schedule(atoms: Sequence[Atom], comparisons: Sequence[Comparison]):
    """Comparisons attached to the first atom index after which they are ground."""
    seen: set[str] = set()
    attach: list[list[Comparison]] = [[] for _ in atoms]
    pending = list(comparisons)
    for i, a in enumerate(atoms):
        seen.update(a.variables())
        rest = []
        for c in pending:
            (attach[i] if all(v in seen for v in c.variables()) else rest).append(c)
        pending = rest
    if pending:
        raise ValueError(f"comparison {pending[0]} uses a variable bound by no atom")
    return attach


def match(
    atoms: Sequence[Atom],
    comparisons: Sequence[Comparison],
    facts: FactIndex | Iterable[Fact],
    env: Mapping[str, Value] | None = None,
) -> Iterator[tuple[dict[str, Value], tuple[Fact, ...]]]:
    """Yield every ``(assignment, facts-per-atom)`` satisfying the body."""
    index = facts if isinstance(facts, FactIndex) else FactIndex(facts)
    attach = _schedule(atoms, comparisons)
    start = dict(env or {})
    chosen: list[Fact] = []

    def rec(i: int, env: dict[str, Value]):
        if i == len(atoms):
            yield dict(env), tuple(chosen)
            return
        atom = atoms[i]
        cands = None
        for pos, arg in enumerate(atom.args):
            if isinstance(arg, Const):
                cands = index.lookup(atom.relation, pos, arg.value)
                break
            if arg.name in env:
                cands = index.lookup(atom.relation, pos, env[arg.name])
                break
        if cands is None:
            cands = index.all(atom.relation)
        for f in cands:
            if len(f.values) != len(atom.args):
                continue
            new = dict(env)
            ok = True
            for arg, v in zip(atom.args, f.values):
                if isinstance(arg, Const):
                    if arg.value != v:
                        ok = False
                        break
                else:
                    cur = new.get(arg.name, _MISSING)
                    if cur is _MISSING:
                        new[arg.name] = v
                    elif cur != v or type(cur) is not type(v):
                        ok = False
                        break
            if not ok:
                continue
            if all(c.holds(new) for c in attach[i]):
                chosen.append(f)
                yield from rec(i + 1, new)
                chosen.pop()

    yield from rec(0, start)


_MISSING = object()


def exists(atoms, comparisons, facts) -> bool:
    return next(iter(match(atoms, comparisons, facts)), None) is not None


def explicit_form(atoms: Sequence[Atom], comparisons: Sequence[Comparison]):
    """Rewrite implicit joins and in-atom constants as explicit comparisons.

    Each atom position gets a fresh variable ``_pI_J``; repeated variables
    become equalities with their first occurrence, constants become ``=``.
    Returns ``(atoms, comparisons, origin)`` where ``origin`` maps each fresh
    variable to its ``(atom index, position)``.
    """
    first: dict[str, str] = {}
    origin: dict[str, tuple[int, int]] = {}
    new_atoms = []
    new_comps: list[Comparison] = []
    for i, a in enumerate(atoms):
        args = []
        for j, arg in enumerate(a.args):
            fresh = f"_p{i}_{j}"
            origin[fresh] = (i, j)
            args.append(Var(fresh))
            if isinstance(arg, Const):
                new_comps.append(Comparison(Var(fresh), "=", arg))
            elif arg.name in first:
                new_comps.append(Comparison(Var(first[arg.name]), "=", Var(fresh)))
            else:
                first[arg.name] = fresh
        new_atoms.append(Atom(a.relation, tuple(args)))

    def sub(t):
        return Var(first[t.name]) if isinstance(t, Var) else t

    for c in comparisons:
        new_comps.append(Comparison(sub(c.lhs), c.op, sub(c.rhs)))
    return new_atoms, new_comps, origin
