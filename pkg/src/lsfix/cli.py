"""Command-line front end.

Exit codes: 0 ok/consistent, 1 inconsistent, 2 parse or I/O error,
3 unsupported method or constraint class, 4 cap exceeded, 5 no fix.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import gf2, setcover
from .cqa import SEMANTICS, cqa, enumerate_fixes_1ad, reduce_1ad
from .errors import (
    CapExceeded,
    InfeasibleCover,
    NoFixExists,
    ParseError,
    SchemaError,
    UnsupportedConstraint,
)
from .exact import FixSearchConfig, dfp, ls_fixes
from .io import jsonable, parse_rational, read_instance, write_instance
from .model import distance, format_rational, value_sort_key
from .parser import classify_denial, parse_constraints, parse_query, parse_schema
from .query import in_ctree, join_graph
from .repair import (
    conflict_hypergraph,
    is_1ad,
    is_local,
    require_denials,
    satisfies,
    violation_sets,
)
from .syntax import AggregateComparisonQuery, AggregationConstraint

log = logging.getLogger("lsfix")

OK, INCONSISTENT, BAD_INPUT, UNSUPPORTED, CAPPED, NO_FIX = range(6)


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- loading --------------------------------------------------------------------


def _read(path: str | None, what: str) -> str:
    if not path:
        raise _Exit(BAD_INPUT, f"--{what} is required for this command")
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _Exit(BAD_INPUT, f"cannot read {path}: {e.strerror}") from None


def _load(args, need_query=False):
    schema = parse_schema(_read(args.schema, "schema"))
    if not args.data or not Path(args.data).is_dir():
        raise _Exit(BAD_INPUT, f"data directory {args.data!r} not found")
    D = read_instance(schema, args.data)
    ics = parse_constraints(_read(args.ic, "ic"), schema) if args.ic else []
    q = parse_query(_read(args.query, "query"), schema) if (need_query or args.query) else None
    return schema, D, ics, q


def _config(args) -> FixSearchConfig:
    kw = {}
    if args.max_grid is not None:
        kw["max_grid_points"] = args.max_grid
    if args.window_radius is not None:
        kw["window_radius_override"] = args.window_radius
    if args.max_fixes is not None:
        kw["max_fixes"] = args.max_fixes
    return FixSearchConfig(**kw)


# -- output ---------------------------------------------------------------------


def _cell_key(v):
    return (0, v, "") if isinstance(v, Fraction) else value_sort_key(v)


def _rows(answers):
    if isinstance(answers, bool):
        return "yes" if answers else "no"
    return sorted((list(r) for r in answers), key=lambda r: [_cell_key(v) for v in r])


def _emit(args, report: dict, table_lines: list[str]) -> None:
    if args.output == "json":
        print(json.dumps(jsonable(report), indent=2))
    else:
        for line in table_lines:
            print(line)


def _fmt(v) -> str:
    return format_rational(v) if isinstance(v, Fraction) else str(v)


def _write_fixes(args, fixes) -> list[str]:
    if not args.out_dir:
        return []
    out = []
    for i, f in enumerate(fixes, 1):
        d = Path(args.out_dir) / f"fix_{i}"
        write_instance(f, d)
        out.append(str(d))
    return out


# -- commands -------------------------------------------------------------------


def cmd_check(args) -> int:
    _, D, ics, _ = _load(args)
    per = []
    for ic in ics:
        if isinstance(ic, AggregationConstraint):
            ok = satisfies(D, ic)
            per.append({"constraint": ic.label, "satisfied": ok, "violations": 0 if ok else 1})
        else:
            n = len(violation_sets(D, ic))
            per.append({"constraint": ic.label, "satisfied": n == 0, "violations": n})
    consistent = all(p["satisfied"] for p in per)
    total = sum(p["violations"] for p in per)
    lines = [f"{p['constraint']}: {'ok' if p['satisfied'] else 'violated'} ({p['violations']})" for p in per]
    lines.append(f"{'consistent' if consistent else 'inconsistent'}: {total} violation(s)")
    _emit(args, {"consistent": consistent, "violations": total, "constraints": per}, lines)
    return OK if consistent else INCONSISTENT


def cmd_violations(args) -> int:
    _, D, ics, _ = _load(args)
    hg = conflict_hypergraph(D, ics)
    edges = [{"constraint": e.constraint, "tuples": sorted(str(t) for t in e.tuples)} for e in hg.edges]
    lines = [str(e) for e in hg.edges] or ["no violation sets"]
    _emit(args, {"count": len(edges), "violation_sets": edges}, lines)
    return OK if not edges else INCONSISTENT


def _fix_exact(args, D, ics):
    cfg = _config(args)
    if args.method == "1ad":
        fixes = enumerate_fixes_1ad(D, ics, cfg.max_fixes)
    else:
        fixes = ls_fixes(D, ics, cfg).fixes
    dist = distance(D, fixes[0]) if fixes else None
    return fixes, dist, 1, []


def _fix_cover(args, D, ics):
    ci = setcover.build_mwscp(D, ics)
    if args.method == "greedy":
        cover = setcover.greedy_cover(ci)
        factor = 1 + math.log(max(len(ci.elements), 1))
    else:
        cover = setcover.primal_dual_cover(ci)
        factor = ci.frequency()
    star = setcover.star_normalize(cover, ci, D, ics)
    fixed = setcover.apply_cover(D, star, ci)
    return [fixed], distance(D, fixed), factor, list(cover.trace)


def cmd_fix(args) -> int:
    _, D, ics, _ = _load(args)
    require_denials(ics)
    if args.method in ("exact", "1ad"):
        fixes, dist, factor, trace = _fix_exact(args, D, ics)
    else:
        fixes, dist, factor, trace = _fix_cover(args, D, ics)
    if not fixes:
        _emit(args, {"method": args.method, "ne": False, "fix_count": 0}, ["no fix exists (NE = false)"])
        return NO_FIX
    report = {
        "method": args.method,
        "distance": dist,
        "bound_factor": factor,
        "fix_count": len(fixes),
        "fixes": fixes,
    }
    if trace:
        report["trace"] = trace
    if args.k is not None:
        report["within_k"] = dfp(D, ics, parse_rational(args.k), _config(args))
    written = _write_fixes(args, fixes)
    if written:
        report["written"] = written
    lines = [f"method {args.method}: {len(fixes)} fix(es), distance {_fmt(dist)}"]
    if trace:
        lines.append("trace: " + ", ".join(t["chosen"] for t in trace))
    for i, f in enumerate(fixes, 1):
        lines.append(f"fix {i}:")
        lines.extend(f"  {t}" for t in f)
    _emit(args, report, lines)
    return OK


def cmd_cqa(args) -> int:
    _, D, ics, q = _load(args, need_query=True)
    if args.method not in ("exact", "1ad", None):
        raise UnsupportedConstraint(f"method {args.method} does not enumerate fixes")
    cfg = _config(args)
    if args.method == "1ad" or (args.method is None and is_1ad(require_denials(ics))):
        fixes = enumerate_fixes_1ad(D, ics, cfg.max_fixes)
    else:
        fixes = ls_fixes(D, ics, cfg).fixes
    res = cqa(q, D, ics, args.semantics, cfg, fixes)
    report = {"semantics": res.semantics, "fix_count": res.fix_count}
    if args.semantics == "range":
        glb, lub = res.answers
        report.update(glb=glb, lub=lub)
        lines = [f"glb {_fmt(glb)}", f"lub {_fmt(lub)}"]
        if args.k is not None:
            k = parse_rational(args.k)
            report["min_max"] = lub <= k
            lines.append(f"at most {_fmt(k)} in every fix: {'yes' if lub <= k else 'no'}")
    else:
        rows = _rows(res.answers)
        report["answers"] = rows
        lines = [rows] if isinstance(rows, str) else [", ".join(_fmt(v) for v in r) for r in rows]
        if not lines:
            lines = ["(no answers)"]
    lines.append(f"fixes: {res.fix_count}")
    _emit(args, report, lines)
    return OK if res.fix_count else NO_FIX


def cmd_classify(args) -> int:
    schema, D, ics, q = _load(args)
    local, why = is_local(ics, schema)
    per = [
        {
            "constraint": ic.label,
            "class": classify_denial(ic, schema),
            "one_atom": is_1ad([ic]),
        }
        for ic in ics
    ]
    report = {"local": local, "locality_problems": why, "all_1ad": is_1ad(ics), "constraints": per}
    lines = [f"local: {str(local).lower()}"] + [f"  {w}" for w in why]
    lines += [f"{p['constraint']}: {p['class']}, 1AD {'yes' if p['one_atom'] else 'no'}" for p in per]
    if q is not None:
        cq = q.query if isinstance(q, AggregateComparisonQuery) else q
        nam = cq.nam()
        ok, reason = in_ctree(nam, schema)
        report["ctree"] = ok
        report["ctree_reason"] = reason
        report["join_graph"] = join_graph(nam, schema).to_dict()
        lines.append(f"C_Tree: {'yes' if ok else 'no'} ({reason})")
    _emit(args, report, lines)
    return OK


def cmd_approx_sum(args) -> int:
    _, D, ics, q = _load(args, need_query=True)
    if isinstance(q, AggregateComparisonQuery):
        q = q.query
    system = gf2.build_rwae2(q, D, ics)
    selection, value = gf2.derandomize(system)
    fix = gf2.assignment_to_fix(selection, system.bags, D.schema)
    factor = gf2.guarantee(system)
    report = {"approx_value": value, "guarantee_factor": factor, "k": system.k, "m": system.m, "chosen_fix": fix}
    if args.dump_system:
        report["system"] = system.to_dict()
    written = _write_fixes(args, [fix])
    if written:
        report["written"] = written
    lines = [f"approx value {value}", f"guarantee factor {_fmt(factor)} (k={system.k}, m={system.m})"]
    lines += [f"  {t}" for t in fix]
    _emit(args, report, lines)
    return OK


def cmd_reduce_1ad(args) -> int:
    _, D, ics, _ = _load(args)
    kr = reduce_1ad(D, ics)
    report = {
        "base": [{"relation": f.relation, "values": list(f.values), "origin": list(kr.provenance[f][1])} for f in kr.base],
        "choices": [{"tuple": str(t), "options": [str(o) for o in opts]} for t, opts in kr.choices],
    }
    lines = [f"{t} -> {', '.join(str(o) for o in opts) or '(none)'}" for t, opts in kr.choices]
    _emit(args, report, lines)
    return OK if all(opts for _, opts in kr.choices) else NO_FIX


COMMANDS = {
    "check": cmd_check,
    "violations": cmd_violations,
    "fix": cmd_fix,
    "cqa": cmd_cqa,
    "classify": cmd_classify,
    "approx-sum": cmd_approx_sum,
    "reduce-1ad": cmd_reduce_1ad,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lsfix", description="Least-squares repairs of numerical databases.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--schema", help="schema file")
    p.add_argument("--data", help="directory with one <relation>.csv per relation")
    p.add_argument("--ic", help="constraint file")
    p.add_argument("--query", help="query file")
    p.add_argument("--method", choices=["exact", "greedy", "primal-dual", "1ad"])
    p.add_argument("--semantics", choices=list(SEMANTICS), default="skeptical")
    p.add_argument("--k", help="distance bound for fix, value bound for range answers (a/b or decimal)")
    p.add_argument("--max-grid", type=int, dest="max_grid", help="cap on explored grid points")
    p.add_argument("--max-fixes", type=int, dest="max_fixes")
    p.add_argument("--window-radius", type=int, dest="window_radius")
    p.add_argument("--output", choices=["json", "table"], default="table")
    p.add_argument("--out-dir", dest="out_dir", help="write fixed instances here as CSV")
    p.add_argument("--dump-system", action="store_true", dest="dump_system")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "fix" and args.method is None:
        args.method = "exact"
    try:
        return COMMANDS[args.command](args)
    except _Exit as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (ParseError, SchemaError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return BAD_INPUT
    except (UnsupportedConstraint, InfeasibleCover) as e:
        print(f"unsupported: {e}", file=sys.stderr)
        return UNSUPPORTED
    except CapExceeded as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return CAPPED
    except NoFixExists as e:
        print(f"no fix: {e}", file=sys.stderr)
        return NO_FIX


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
