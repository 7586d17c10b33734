"""Least-squares repairs of numerical databases under denial constraints."""

from .cqa import CQAResult, KeyRepairInstance, cqa, cqa_range, enumerate_fixes_1ad, reduce_1ad
from .errors import (
    CapExceeded,
    InfeasibleCover,
    LSFixError,
    NoFixExists,
    NonLocalConstraints,
    ParseError,
    SchemaError,
    UnsupportedConstraint,
)
from .exact import FixResult, FixSearchConfig, dfop, dfp, ls_fixes, ne, verify_fix
from .gf2 import GF2System, assignment_to_fix, build_rwae2, derandomize, expected_weight, guarantee
from .io import read_instance, write_instance
from .kernels import BACKEND
from .model import AttributeSpec, Fact, Instance, RelationSchema, Schema, distance
from .parser import parse_constraints, parse_denials, parse_query, parse_schema
from .query import eval_aggregate, eval_aggregate_comparison, eval_conjunctive, in_ctree, join_graph
from .repair import (
    CandidateGrid,
    ConflictHypergraph,
    LocalFix,
    ViolationSet,
    combine_local_fixes,
    conflict_hypergraph,
    is_local,
    local_fixes,
    satisfies,
    violation_sets,
)
from .setcover import (
    Cover,
    CoverInstance,
    apply_cover,
    build_mwscp,
    exact_cover,
    greedy_cover,
    optimal_covers,
    primal_dual_cover,
    star_normalize,
)

__version__ = "0.1.0"

__all__ = [
    "apply_cover",
    "assignment_to_fix",
    "AttributeSpec",
    "BACKEND",
    "build_mwscp",
    "build_rwae2",
    "CandidateGrid",
    "CapExceeded",
    "combine_local_fixes",
    "conflict_hypergraph",
    "ConflictHypergraph",
    "Cover",
    "CoverInstance",
    "cqa",
    "cqa_range",
    "CQAResult",
    "derandomize",
    "dfop",
    "dfp",
    "distance",
    "enumerate_fixes_1ad",
    "eval_aggregate",
    "eval_aggregate_comparison",
    "eval_conjunctive",
    "exact_cover",
    "expected_weight",
    "Fact",
    "FixResult",
    "FixSearchConfig",
    "GF2System",
    "greedy_cover",
    "guarantee",
    "in_ctree",
    "InfeasibleCover",
    "Instance",
    "is_local",
    "join_graph",
    "KeyRepairInstance",
    "local_fixes",
    "LocalFix",
    "ls_fixes",
    "LSFixError",
    "ne",
    "NoFixExists",
    "NonLocalConstraints",
    "optimal_covers",
    "parse_constraints",
    "parse_denials",
    "parse_query",
    "parse_schema",
    "ParseError",
    "primal_dual_cover",
    "read_instance",
    "reduce_1ad",
    "RelationSchema",
    "satisfies",
    "Schema",
    "SchemaError",
    "star_normalize",
    "UnsupportedConstraint",
    "verify_fix",
    "violation_sets",
    "ViolationSet",
    "write_instance",
]
