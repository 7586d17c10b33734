"""CSV instances (one ``<relation>.csv`` per relation) and JSON helpers."""

from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path

from .errors import SchemaError
from .model import INT, Fact, Instance, Schema, format_rational


def read_instance(schema: Schema, data_dir: str | Path) -> Instance:
    data_dir = Path(data_dir)
    facts = []
    for rel in schema.relations:
        path = data_dir / f"{rel.name}.csv"
        if not path.exists():
            continue
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                continue
            header = [h.strip() for h in header]
            expected = [a.name for a in rel.attributes]
            if sorted(header) != sorted(expected):
                raise SchemaError(f"{path}: header {header} does not match {expected}")
            order = [header.index(name) for name in expected]
            for lineno, row in enumerate(reader, 2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(header):
                    raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields")
                vals = []
                for attr, i in zip(rel.attributes, order):
                    cell = row[i].strip()
                    if attr.datatype == INT:
                        try:
                            vals.append(int(cell))
                        except ValueError:
                            raise SchemaError(
                                f"{path}:{lineno}: {attr.name} expects an integer, got {cell!r}"
                            ) from None
                    else:
                        vals.append(cell)
                facts.append(Fact(rel.name, tuple(vals)))
    return Instance(schema, facts)


def write_instance(D: Instance, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for rel in D.schema.relations:
        path = out_dir / f"{rel.name}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([a.name for a in rel.attributes])
            for f in D.relation(rel.name):
                w.writerow(f.values)
        paths.append(path)
    return paths


def jsonable(obj):
    """Recursively convert rationals to ``"num/den"`` and facts to lists."""
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, Fact):
        return {"relation": obj.relation, "values": list(obj.values)}
    if isinstance(obj, Instance):
        return {r.name: [list(f.values) for f in obj.relation(r.name)] for r in obj.schema.relations}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [jsonable(v) for v in obj]
        return sorted(items, key=repr) if isinstance(obj, (set, frozenset)) else items
    return obj


def parse_rational(text: str) -> Fraction:
    """``"a/b"``, integers and decimal literals, all converted exactly."""
    return Fraction(text.strip())
