"""Relational schema, instances and the weighted square distance."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import SchemaError

Rational = Fraction
Value = Union[int, str]

KEY, RIGID, FIXABLE = "key", "rigid", "fixable"
INT, SYM = "int", "sym"


def to_rational(x) -> Fraction:
    """Exact conversion; decimal strings such as ``"0.00001"`` stay exact."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(x)


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def value_sort_key(v: Value):
    return (0, v, "") if isinstance(v, int) else (1, 0, v)


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    kind: str = RIGID
    datatype: str = INT
    weight: Fraction | None = None

    def __post_init__(self):
        if self.kind not in (KEY, RIGID, FIXABLE):
            raise SchemaError(f"unknown attribute kind {self.kind!r}")
        if self.datatype not in (INT, SYM):
            raise SchemaError(f"unknown datatype {self.datatype!r}")
        if self.kind == FIXABLE:
            if self.datatype != INT:
                raise SchemaError(f"fixable attribute {self.name!r} must be int")
            w = Fraction(1) if self.weight is None else to_rational(self.weight)
            if w <= 0:
                raise SchemaError(f"weight of {self.name!r} must be positive")
            object.__setattr__(self, "weight", w)
        elif self.weight is not None:
            raise SchemaError(f"only fixable attributes carry a weight ({self.name!r})")

    @property
    def fixable(self) -> bool:
        return self.kind == FIXABLE


@dataclass(frozen=True)
class RelationSchema:
    name: str
    attributes: tuple[AttributeSpec, ...]
    key: tuple[int, ...] = ()

    def __post_init__(self):
        attrs = tuple(self.attributes)
        object.__setattr__(self, "attributes", attrs)
        names = [a.name for a in attrs]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate attribute names in {self.name}")
        key = tuple(self.key) or tuple(i for i, a in enumerate(attrs) if a.kind == KEY)
        if not key:
            raise SchemaError(f"relation {self.name} has no key")
        for i in key:
            if attrs[i].kind != KEY:
                raise SchemaError(
                    f"key attribute {attrs[i].name!r} of {self.name} is not declared key"
                )
        object.__setattr__(self, "key", tuple(sorted(key)))

    @property
    def arity(self) -> int:
        return len(self.attributes)

    def index(self, attr: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == attr:
                return i
        raise SchemaError(f"relation {self.name} has no attribute {attr!r}")

    @property
    def fixable_positions(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.attributes) if a.fixable)

    def is_fixable(self, pos: int) -> bool:
        return self.attributes[pos].fixable

    def is_key(self, pos: int) -> bool:
        return pos in self.key


@dataclass(frozen=True)
class Schema:
    relations: tuple[RelationSchema, ...] = ()
    _by_name: Mapping[str, RelationSchema] = field(
        init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self):
        rels = tuple(self.relations)
        object.__setattr__(self, "relations", rels)
        by_name = {r.name: r for r in rels}
        if len(by_name) != len(rels):
            raise SchemaError("duplicate relation names")
        object.__setattr__(self, "_by_name", by_name)

    def __getitem__(self, name: str) -> RelationSchema:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError(f"unknown relation {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def names(self) -> list[str]:
        return [r.name for r in self.relations]


@dataclass(frozen=True, order=False)
class Fact:
    """A database tuple ``R(c1, ..., cn)``."""

    relation: str
    values: tuple[Value, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    def sort_key(self):
        return (self.relation, tuple(value_sort_key(v) for v in self.values))

    def with_values(self, updates: Mapping[int, int]) -> "Fact":
        vals = list(self.values)
        for pos, v in updates.items():
            vals[pos] = v
        return Fact(self.relation, tuple(vals))

    def __str__(self):
        return f"{self.relation}({', '.join(map(str, self.values))})"


def check_fact(schema: Schema, fact: Fact) -> None:
    rel = schema[fact.relation]
    if len(fact.values) != rel.arity:
        raise SchemaError(f"{fact} has arity {len(fact.values)}, expected {rel.arity}")
    for a, v in zip(rel.attributes, fact.values):
        if a.datatype == INT and (not isinstance(v, int) or isinstance(v, bool)):
            raise SchemaError(f"{fact}: attribute {a.name} expects an integer")
        if a.datatype == SYM and not isinstance(v, str):
            raise SchemaError(f"{fact}: attribute {a.name} expects a symbol")


class Instance:
    """Finite, key-unique set of facts; keeps insertion order per relation."""

    __slots__ = ("schema", "_facts", "_keys", "_hash")

    def __init__(self, schema: Schema, facts: Iterable[Fact] = ()):
        self.schema = schema
        per_rel: dict[str, list[Fact]] = {name: [] for name in schema.names()}
        keys: dict[str, dict[tuple, Fact]] = {name: {} for name in schema.names()}
        for f in facts:
            check_fact(schema, f)
            k = key_of(schema, f)
            seen = keys[f.relation].get(k)
            if seen is not None:
                if seen == f:
                    continue
                raise SchemaError(f"key violation in {f.relation}: {seen} and {f}")
            keys[f.relation][k] = f
            per_rel[f.relation].append(f)
        self._facts = {r: tuple(fs) for r, fs in per_rel.items()}
        self._keys = keys
        self._hash = None

    def relation(self, name: str) -> tuple[Fact, ...]:
        if name not in self._facts:
            raise SchemaError(f"unknown relation {name!r}")
        return self._facts[name]

    def __iter__(self) -> Iterator[Fact]:
        for name in self.schema.names():
            yield from self._facts[name]

    def __len__(self) -> int:
        return sum(len(fs) for fs in self._facts.values())

    def __contains__(self, fact: Fact) -> bool:
        return self._keys.get(fact.relation, {}).get(key_of(self.schema, fact)) == fact

    def by_key(self, relation: str, key: Sequence[Value]) -> Fact | None:
        if relation not in self._keys:
            raise SchemaError(f"unknown relation {relation!r}")
        return self._keys[relation].get(tuple(key))

    def keys(self, relation: str) -> set[tuple]:
        return set(self._keys[relation])

    def replace(self, mapping: Mapping[Fact, Fact]) -> "Instance":
        return Instance(self.schema, (mapping.get(f, f) for f in self))

    def canonical(self) -> tuple:
        return tuple(sorted(f.sort_key() for f in self))

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self.schema == other.schema and all(
            set(self._facts[r]) == set(other._facts.get(r, ())) for r in self._facts
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self))
        return self._hash

    def __repr__(self):
        return "Instance({" + ", ".join(str(f) for f in self) + "})"


def key_of(schema: Schema, fact: Fact) -> tuple:
    return tuple(fact.values[i] for i in schema[fact.relation].key)


def tuple_by_key(D: Instance, relation: str, key: Sequence[Value]) -> Fact | None:
    rel = D.schema[relation]
    if len(key) != len(rel.key):
        raise SchemaError(f"key of {relation} has {len(rel.key)} attributes, got {len(key)}")
    return D.by_key(relation, key)


def same_key_space(D: Instance, D2: Instance) -> bool:
    """Same key projections and same rigid values per key, relation by relation."""
    if D.schema != D2.schema:
        raise SchemaError("instances are over different schemas")
    for rel in D.schema.relations:
        if D.keys(rel.name) != D2.keys(rel.name):
            return False
        rigid = [i for i, a in enumerate(rel.attributes) if not a.fixable]
        for f in D.relation(rel.name):
            g = D2.by_key(rel.name, key_of(D.schema, f))
            if any(f.values[i] != g.values[i] for i in rigid):
                return False
    return True


def fact_distance(schema: Schema, t: Fact, t2: Fact) -> Fraction:
    rel = schema[t.relation]
    total = Fraction(0)
    for i in rel.fixable_positions:
        d = t.values[i] - t2.values[i]
        if d:
            total += rel.attributes[i].weight * d * d
    return total


def distance(D: Instance, D2: Instance, schema: Schema | None = None) -> Fraction:
    schema = schema or D.schema
    if not same_key_space(D, D2):
        raise SchemaError("instances do not share key values and rigid attributes")
    total = Fraction(0)
    for f in D:
        g = D2.by_key(f.relation, key_of(schema, f))
        total += fact_distance(schema, f, g)
    return total
