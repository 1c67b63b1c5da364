"""Primal-dual approximation for quasi-bipartite directed Steiner tree
with exact rational arithmetic and verifiable dual certificates."""

from .instance import (
    Arc,
    Instance,
    InvalidInstanceError,
    ParseError,
    instance_hash,
    is_feasible,
    normalize_parallel,
    parse_instance,
    serialize_instance,
    validate,
)
from .moats import (
    ANTENNA,
    EXPANSION,
    KILLER,
    Moat,
    Scc,
    active_moats,
    classify_arc,
    enumerate_minimal_violated_brute,
    scc_decompose,
)
from .engine import (
    GrowthTrace,
    Solution,
    alive_report,
    compute_epsilon,
    grow_phase,
    read_trace,
    reverse_delete,
    solve,
    solve_standard_baseline,
    write_trace,
)
from .audit import (
    AuditReport,
    ratio_report,
    run_full,
    verify_cost_identity,
    verify_counting_lemmas,
    verify_dual_feasibility,
)
from .oracle import OptResult, exact_opt_brute, exact_opt_dp
from .gen import UndirectedGraph, brute_cvc, gen_bad_example, gen_grid, reduce_cvc

__all__ = [
    "Arc",
    "Instance",
    "InvalidInstanceError",
    "ParseError",
    "instance_hash",
    "is_feasible",
    "normalize_parallel",
    "parse_instance",
    "serialize_instance",
    "validate",
    "ANTENNA",
    "EXPANSION",
    "KILLER",
    "Moat",
    "Scc",
    "active_moats",
    "classify_arc",
    "enumerate_minimal_violated_brute",
    "scc_decompose",
    "GrowthTrace",
    "Solution",
    "alive_report",
    "compute_epsilon",
    "grow_phase",
    "read_trace",
    "reverse_delete",
    "solve",
    "solve_standard_baseline",
    "write_trace",
    "AuditReport",
    "ratio_report",
    "run_full",
    "verify_cost_identity",
    "verify_counting_lemmas",
    "verify_dual_feasibility",
    "OptResult",
    "exact_opt_brute",
    "exact_opt_dp",
    "UndirectedGraph",
    "brute_cvc",
    "gen_bad_example",
    "gen_grid",
    "reduce_cvc",
]
