"""AST for denials, aggregation constraints and (aggregate) conjunctive queries.

Every node prints back to the concrete syntax accepted by :mod:`lsfix.parser`,
so ``parse(str(node)) == node``.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Callable, Mapping, Union

from .model import Value

OPS: dict[str, Callable[[object, object], bool]] = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    ">": operator.gt,
    "<=": operator.le,
    ">=": operator.ge,
}
ORDER_OPS = frozenset({"<", ">", "<=", ">="})
FLIP = {"=": "=", "!=": "!=", "<": ">", ">": "<", "<=": ">=", ">=": "<="}
AGG_FUNCS = ("sum", "count", "countd", "avg")
AC_FUNCS = ("sum", "count", "avg")


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: Value

    def __str__(self):
        if isinstance(self.value, str):
            return "'" + self.value.replace("\\", "\\\\").replace("'", "\\'") + "'"
        return str(self.value)


Term = Union[Var, Const]


def term_value(t: Term, env: Mapping[str, Value]):
    return t.value if isinstance(t, Const) else env[t.name]


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def variables(self) -> list[str]:
        return [a.name for a in self.args if isinstance(a, Var)]

    def __str__(self):
        return f"{self.relation}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Comparison:
    lhs: Term
    op: str
    rhs: Term

    def variables(self) -> list[str]:
        return [t.name for t in (self.lhs, self.rhs) if isinstance(t, Var)]

    @property
    def var_var(self) -> bool:
        return isinstance(self.lhs, Var) and isinstance(self.rhs, Var)

    def oriented(self) -> "Comparison":
        """Variable on the left when exactly one side is a constant."""
        if isinstance(self.lhs, Const) and isinstance(self.rhs, Var):
            return Comparison(self.rhs, FLIP[self.op], self.lhs)
        return self

    def holds(self, env: Mapping[str, Value]) -> bool:
        a, b = term_value(self.lhs, env), term_value(self.rhs, env)
        if self.op in ORDER_OPS and (isinstance(a, str) or isinstance(b, str)):
            return False
        return OPS[self.op](a, b)

    def __str__(self):
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class DenialConstraint:
    """``label: forall x. not(atoms, comparisons)``."""

    label: str
    atoms: tuple[Atom, ...]
    comparisons: tuple[Comparison, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "comparisons", tuple(self.comparisons))

    def variables(self) -> set[str]:
        return {v for a in self.atoms for v in a.variables()}

    def __str__(self):
        body = [str(a) for a in self.atoms] + [str(c) for c in self.comparisons]
        return f"{self.label}: DENY {', '.join(body)}."


# -- aggregation constraints ------------------------------------------------


@dataclass(frozen=True)
class AttrRef:
    name: str

    def eval(self, row: Mapping[str, Value]):
        return row[self.name]

    def attrs(self) -> set[str]:
        return {self.name}

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Num:
    value: int

    def eval(self, row):
        return self.value

    def attrs(self) -> set[str]:
        return set()

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def eval(self, row):
        a, b = self.left.eval(row), self.right.eval(row)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        return a * b

    def attrs(self) -> set[str]:
        return self.left.attrs() | self.right.attrs()

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


Expr = Union[AttrRef, Num, BinOp]


@dataclass(frozen=True)
class AggSide:
    function: str
    relation: str
    argument: Expr | None  # None means ``*``
    filters: tuple[Comparison, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(self.filters))

    def attrs(self) -> set[str]:
        out = self.argument.attrs() if self.argument is not None else set()
        for c in self.filters:
            out.update(c.variables())
        return out

    def __str__(self):
        arg = "*" if self.argument is None else str(self.argument)
        if self.filters:
            arg += " : " + ", ".join(map(str, self.filters))
        return f"{self.function}({arg}) OF {self.relation}"


@dataclass(frozen=True)
class AggregationConstraint:
    label: str
    left: AggSide
    op: str
    right: Union[AggSide, int]

    @property
    def multi_relation(self) -> bool:
        return isinstance(self.right, AggSide) and self.right.relation != self.left.relation

    def __str__(self):
        return f"{self.label}: AGG {self.left} {self.op} {self.right}."


Constraint = Union[DenialConstraint, AggregationConstraint]


# -- queries ------------------------------------------------------------------


@dataclass(frozen=True)
class Aggregate:
    function: str
    var: Var

    def __str__(self):
        return f"{self.function}({self.var})"


@dataclass(frozen=True)
class ConjunctiveQuery:
    name: str
    head_vars: tuple[Var, ...]
    atoms: tuple[Atom, ...]
    comparisons: tuple[Comparison, ...] = ()
    aggregate: Aggregate | None = None

    def __post_init__(self):
        object.__setattr__(self, "head_vars", tuple(self.head_vars))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "comparisons", tuple(self.comparisons))

    @property
    def is_boolean(self) -> bool:
        return not self.head_vars and self.aggregate is None

    @property
    def is_scalar_aggregate(self) -> bool:
        return not self.head_vars and self.aggregate is not None

    def body_variables(self) -> set[str]:
        return {v for a in self.atoms for v in a.variables()}

    def nam(self) -> "ConjunctiveQuery":
        """Non-aggregate matrix: same body, aggregate dropped."""
        return ConjunctiveQuery(self.name, self.head_vars, self.atoms, self.comparisons)

    def head_str(self) -> str:
        parts = [str(v) for v in self.head_vars]
        if self.aggregate is not None:
            parts.append(str(self.aggregate))
        return f"{self.name}({', '.join(parts)})"

    def __str__(self):
        body = [str(a) for a in self.atoms] + [str(c) for c in self.comparisons]
        return f"{self.head_str()} <- {', '.join(body)}."


@dataclass(frozen=True)
class AggregateComparisonQuery:
    query: ConjunctiveQuery
    op: str
    k: int

    def __str__(self):
        return f"ASK {self.query.aggregate} {self.op} {self.k} FROM {self.query}"


Query = Union[ConjunctiveQuery, AggregateComparisonQuery]
