"""Motion-primitive assignment for multi-robot multi-target tracking with
local (bounded-communication) and sequential greedy algorithms."""

from .graph import (
    Assignment,
    TripartiteGraph,
    coverage_count,
    objective_bottleneck,
    objective_wta,
    parse,
    random_instance,
    serialize,
)
from .greedy import greedy_assign, tracking_quality
from .local import LocalConfig, approximation_bound, local_solve, round_solution
from .oracle import brute_force_bottleneck, brute_force_wta, lp_opt, random_baseline

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "LocalConfig",
    "TripartiteGraph",
    "approximation_bound",
    "brute_force_bottleneck",
    "brute_force_wta",
    "coverage_count",
    "greedy_assign",
    "local_solve",
    "lp_opt",
    "objective_bottleneck",
    "objective_wta",
    "parse",
    "random_baseline",
    "random_instance",
    "round_solution",
    "serialize",
    "tracking_quality",
]
