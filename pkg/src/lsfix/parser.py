"""Recursive-descent parser for the schema, constraint and query languages.

Lexical conventions shared by all three: ``#`` starts a line comment, bare
identifiers in atoms are variables, symbol constants are quoted (``'CD'``),
integers are decimal with an optional leading minus, ``_`` is an anonymous
variable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError
from .model import FIXABLE, INT, KEY, RIGID, SYM, AttributeSpec, RelationSchema, Schema
from .syntax import (
    AC_FUNCS,
    AGG_FUNCS,
    OPS,
    ORDER_OPS,
    AggregateComparisonQuery,
    Aggregate,
    AggregationConstraint,
    AggSide,
    Atom,
    AttrRef,
    BinOp,
    Comparison,
    ConjunctiveQuery,
    Const,
    Constraint,
    DenialConstraint,
    Num,
    Var,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<string>'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*")
  | (?P<number>\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><-|<=|>=|!=|<>|[=<>])
  | (?P<punct>[(),.:+\-*/])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            if kind == "op" and tok == "<>":
                tok = "!="
            out.append(Token(kind, tok, line, pos - line_start + 1))
        nl = tok.count("\n") if kind in ("ws", "string") else 0
        if nl:
            line += nl
            line_start = pos + tok.rfind("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self._anon = 0

    # -- token helpers --------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ParseError(f"{msg} (found {found!r})", tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "punct") and self.tok.text == text

    def at_kw(self, *words: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text.lower() in words

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def expect_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            raise self.error(f"expected keyword {word.upper()!r}")
        return self.advance()

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "ident":
            raise self.error("expected identifier")
        return self.advance().text

    def integer(self) -> int:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        t = self.tok
        if t.kind != "number" or not t.text.isdigit():
            raise self.error("expected integer")
        self.advance()
        return -int(t.text) if neg else int(t.text)

    def rational(self) -> Fraction:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        if self.tok.kind != "number":
            raise self.error("expected number")
        q = Fraction(self.advance().text)
        if self.at("/"):
            self.advance()
            if self.tok.kind != "number":
                raise self.error("expected denominator")
            den = Fraction(self.advance().text)
            if den == 0:
                raise self.error("zero denominator")
            q /= den
        return -q if neg else q

    def op(self) -> str:
        if self.tok.kind != "op" or self.tok.text not in OPS:
            raise self.error("expected comparison operator")
        return self.advance().text

    # -- terms, atoms, comparisons -------------------------------------------

    def term(self):
        t = self.tok
        if t.kind == "string":
            self.advance()
            return Const(_unquote(t.text))
        if t.kind == "number" or self.at("-"):
            return Const(self.integer())
        if t.kind == "ident":
            self.advance()
            if t.text == "_":
                self._anon += 1
                return Var(f"_{self._anon}")
            return Var(t.text)
        raise self.error("expected term")

    def atom(self) -> Atom:
        name = self.ident()
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.term())
            while self.at(","):
                self.advance()
                args.append(self.term())
        self.expect(")")
        return Atom(name, tuple(args))

    def body(self) -> tuple[list[Atom], list[Comparison]]:
        atoms: list[Atom] = []
        comps: list[Comparison] = []
        while True:
            if self.tok.kind == "ident" and self.peek().text == "(" and self.peek().kind == "punct":
                if comps:
                    raise self.error("atoms must precede comparisons")
                atoms.append(self.atom())
            else:
                lhs = self.term()
                op = self.op()
                rhs = self.term()
                comps.append(Comparison(lhs, op, rhs))
            if not self.at(","):
                break
            self.advance()
        if not atoms:
            raise self.error("body needs at least one database atom")
        return atoms, comps

    # -- schema ----------------------------------------------------------------

    def schema(self) -> Schema:
        rels = []
        while self.tok.kind != "eof":
            rels.append(self.relation())
        return Schema(tuple(rels))

    def relation(self) -> RelationSchema:
        start = self.expect_kw("relation")
        name = self.ident()
        self.expect("(")
        attrs = [self.attribute()]
        while self.at(","):
            self.advance()
            attrs.append(self.attribute())
        self.expect(")")
        if self.at(".") or self.at(";"):
            self.advance()
        if not any(a.kind == KEY for a in attrs):
            raise ParseError(f"relation {name} declares no key attribute", start.line, start.col)
        try:
            return RelationSchema(name, tuple(attrs))
        except Exception as exc:
            raise ParseError(str(exc), start.line, start.col) from None

    def attribute(self) -> AttributeSpec:
        start = self.tok
        name = self.ident()
        self.expect(":")
        if not self.at_kw("int", "sym"):
            raise self.error("expected type 'int' or 'sym'")
        dtype = INT if self.advance().text.lower() == "int" else SYM
        is_key = is_fix = False
        weight = None
        while self.at_kw("key", "fix", "weight"):
            word = self.advance().text.lower()
            if word == "key":
                is_key = True
            elif word == "fix":
                is_fix = True
            else:
                if not is_fix:
                    raise self.error("'weight' only applies to fixable attributes")
                weight = self.rational()
        if is_key and is_fix:
            raise ParseError(f"attribute {name!r} cannot be both key and fixable", start.line, start.col)
        if is_fix and dtype != INT:
            raise ParseError(f"fixable attribute {name!r} must be int", start.line, start.col)
        kind = KEY if is_key else FIXABLE if is_fix else RIGID
        try:
            return AttributeSpec(name, kind, dtype, weight)
        except Exception as exc:
            raise ParseError(str(exc), start.line, start.col) from None

    # -- constraints ------------------------------------------------------------

    def constraints(self) -> list[Constraint]:
        out: list[Constraint] = []
        while self.tok.kind != "eof":
            out.append(self.constraint())
        return out

    def constraint(self) -> Constraint:
        label_tok = self.tok
        label = self.ident()
        self.expect(":")
        if self.at_kw("deny"):
            self.advance()
            atoms, comps = self.body()
            self.expect(".")
            ic = DenialConstraint(label, tuple(atoms), tuple(comps))
            ic_pos = (label_tok.line, label_tok.col)
            _check_bound(ic.comparisons, ic.variables(), ic_pos)
            return ic
        if self.at_kw("agg"):
            self.advance()
            left = self.agg_side()
            op = self.op()
            right = self.agg_side() if self.at_kw(*AC_FUNCS) else self.integer()
            self.expect(".")
            return AggregationConstraint(label, left, op, right)
        raise self.error("expected DENY or AGG")

    def agg_side(self) -> AggSide:
        if not self.at_kw(*AC_FUNCS):
            raise self.error("expected sum, count or avg")
        fn = self.advance().text.lower()
        self.expect("(")
        if self.at("*"):
            self.advance()
            arg = None
        else:
            arg = self.expr()
        filters = []
        if self.at(":"):
            self.advance()
            filters.append(self.filter_cmp())
            while self.at(","):
                self.advance()
                filters.append(self.filter_cmp())
        self.expect(")")
        self.expect_kw("of")
        return AggSide(fn, self.ident(), arg, tuple(filters))

    def filter_cmp(self) -> Comparison:
        lhs = self.term()
        op = self.op()
        rhs = self.term()
        return Comparison(lhs, op, rhs)

    def expr(self):
        node = self.product()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            node = BinOp(op, node, self.product())
        return node

    def product(self):
        node = self.factor()
        while self.at("*"):
            self.advance()
            node = BinOp("*", node, self.factor())
        return node

    def factor(self):
        if self.at("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if self.at("-") or self.tok.kind == "number":
            return Num(self.integer())
        return AttrRef(self.ident())

    # -- queries ----------------------------------------------------------------

    def query(self):
        if self.at_kw("ask"):
            self.advance()
            fn, var = self.agg_call()
            op = self.op()
            k = self.integer()
            self.expect_kw("from")
            q = self.rule()
            if q.aggregate is None or q.head_vars:
                raise self.error("ASK requires a scalar aggregate query")
            if (q.aggregate.function, q.aggregate.var.name) != (fn, var):
                raise self.error(f"ASK aggregate {fn}({var}) does not match the query head")
            return AggregateComparisonQuery(q, op, k)
        return self.rule()

    def agg_call(self) -> tuple[str, str]:
        if not self.at_kw(*AGG_FUNCS):
            raise self.error("expected aggregate function")
        fn = self.advance().text.lower()
        self.expect("(")
        var = self.ident()
        self.expect(")")
        return fn, var

    def rule(self) -> ConjunctiveQuery:
        start = self.tok
        name = self.ident()
        self.expect("(")
        head: list[Var] = []
        agg = None
        while not self.at(")"):
            if agg is not None:
                raise self.error("aggregate must be the last head argument")
            if self.at_kw(*AGG_FUNCS) and self.peek().text == "(":
                fn, var = self.agg_call()
                agg = Aggregate(fn, Var(var))
            else:
                head.append(Var(self.ident()))
            if not self.at(","):
                break
            self.advance()
        self.expect(")")
        self.expect("<-")
        atoms, comps = self.body()
        self.expect(".")
        q = ConjunctiveQuery(name, tuple(head), tuple(atoms), tuple(comps), agg)
        body_vars = q.body_variables()
        where = (start.line, start.col)
        for v in head:
            if v.name not in body_vars:
                raise ParseError(f"head variable {v.name} does not occur in the body", *where)
        if agg is not None:
            if agg.var.name not in body_vars:
                raise ParseError(f"aggregation variable {agg.var.name} not in body", *where)
            if agg.var in head:
                raise ParseError("aggregation variable cannot be a head variable", *where)
        _check_bound(q.comparisons, body_vars, where)
        return q


def _check_bound(comps, bound: set[str], where) -> None:
    for c in comps:
        for v in c.variables():
            if v not in bound:
                raise ParseError(f"variable {v} in comparison is not bound by an atom", *where)


def _expect_eof(p: _Parser) -> None:
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input")


# -- schema-aware validation -----------------------------------------------------


def _var_types(atoms, schema: Schema, where) -> dict[str, str]:
    types: dict[str, str] = {}
    for a in atoms:
        if a.relation not in schema:
            raise ParseError(f"unknown relation {a.relation!r}", *where)
        rel = schema[a.relation]
        if len(a.args) != rel.arity:
            raise ParseError(
                f"atom {a} has {len(a.args)} arguments, {a.relation} has arity {rel.arity}", *where
            )
        for arg, attr in zip(a.args, rel.attributes):
            if isinstance(arg, Const):
                if (attr.datatype == INT) != isinstance(arg.value, int):
                    raise ParseError(f"constant {arg} does not fit {a.relation}.{attr.name}", *where)
            else:
                prev = types.setdefault(arg.name, attr.datatype)
                if prev != attr.datatype:
                    raise ParseError(f"variable {arg.name} used with both int and sym", *where)
    return types


def _check_comparisons(comps, types: dict[str, str], where) -> None:
    for c in comps:
        sides = []
        for t in (c.lhs, c.rhs):
            sides.append(types[t.name] if isinstance(t, Var) else (INT if isinstance(t.value, int) else SYM))
        if sides[0] != sides[1]:
            raise ParseError(f"comparison {c} mixes int and sym", *where)
        if c.op in ORDER_OPS and sides[0] == SYM:
            raise ParseError(f"order comparison {c} on symbols", *where)


def validate_denial(ic: DenialConstraint, schema: Schema) -> None:
    where = (0, 0)
    types = _var_types(ic.atoms, schema, where)
    _check_comparisons(ic.comparisons, types, where)


def validate_aggregation(ac: AggregationConstraint, schema: Schema) -> None:
    sides = [ac.left] + ([ac.right] if isinstance(ac.right, AggSide) else [])
    for side in sides:
        if side.relation not in schema:
            raise ParseError(f"unknown relation {side.relation!r}")
        rel = schema[side.relation]
        for name in side.attrs():
            pos = rel.index(name) if name in {a.name for a in rel.attributes} else None
            if pos is None:
                raise ParseError(f"{side.relation} has no attribute {name!r}")
        if side.argument is not None:
            for name in side.argument.attrs():
                if rel.attributes[rel.index(name)].datatype != INT:
                    raise ParseError(f"aggregated attribute {name!r} must be int")
        types = {a.name: a.datatype for a in rel.attributes}
        _check_comparisons(side.filters, types, (0, 0))


def validate_query(q: ConjunctiveQuery, schema: Schema) -> None:
    where = (0, 0)
    types = _var_types(q.atoms, schema, where)
    _check_comparisons(q.comparisons, types, where)
    if q.aggregate is not None and q.aggregate.function in ("sum", "avg"):
        if types[q.aggregate.var.name] != INT:
            raise ParseError(f"{q.aggregate} aggregates a symbol attribute")


# -- public entry points -----------------------------------------------------------


def parse_schema(text: str) -> Schema:
    p = _Parser(text)
    return p.schema()


def parse_constraints(text: str, schema: Schema) -> list[Constraint]:
    """Denials and aggregation constraints, validated against ``schema``."""
    p = _Parser(text)
    out = p.constraints()
    labels = set()
    for ic in out:
        if ic.label in labels:
            raise ParseError(f"duplicate constraint label {ic.label!r}")
        labels.add(ic.label)
        if isinstance(ic, DenialConstraint):
            validate_denial(ic, schema)
        else:
            validate_aggregation(ic, schema)
    return out


def parse_denials(text: str, schema: Schema) -> list[DenialConstraint]:
    out = parse_constraints(text, schema)
    for ic in out:
        if not isinstance(ic, DenialConstraint):
            raise ParseError(f"constraint {ic.label!r} is an aggregation constraint, not a denial")
    return out


def parse_query(text: str, schema: Schema | None = None):
    p = _Parser(text)
    q = p.query()
    _expect_eof(p)
    if schema is not None:
        validate_query(q.query if isinstance(q, AggregateComparisonQuery) else q, schema)
    return q


def parse_atom(text: str) -> Atom:
    p = _Parser(text)
    a = p.atom()
    _expect_eof(p)
    return a


def classify_denial(ic: Constraint, schema: Schema | None = None) -> str:
    """``linear``, ``extended`` (some var != var) or ``has-aggregation``."""
    if isinstance(ic, AggregationConstraint):
        return "has-aggregation"
    for c in ic.comparisons:
        if c.var_var and c.op == "!=":
            return "extended"
    return "linear"


def is_one_atom(ic: Constraint) -> bool:
    return isinstance(ic, DenialConstraint) and len(ic.atoms) == 1
