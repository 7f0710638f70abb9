"""Online edge-coloring algorithms, adversarial instances, and diagnostics."""

from .core import (
    ColorRef,
    ColoringState,
    Edge,
    InvalidParams,
    Params,
    RngHandle,
    StreamViolation,
    derive_params,
    greedy_assign,
    validate_coloring,
)
from .adversaries import (
    Arrival,
    ArrivalStream,
    BiasTreeConfig,
    PublicHistory,
    gen_bias_tree,
    gen_gadget_farm,
    gen_list_lb_deterministic,
    gen_list_lb_randomized,
    gen_random_graph,
    gen_two_star_bridge,
    wrap_random_order,
)
from .algorithms import (
    RunResult,
    run_alg1,
    run_alg2,
    run_greedy,
    run_list_greedy,
    run_randomized_greedy,
)
from .diagnostics import (
    azuma_bound,
    bad_colors,
    classify_incident,
    compute_scaling_factors,
    compute_trajectory,
    enumerate_exact,
    matching_sum,
)
from .ptable import DenseOracle, PTable

__all__ = [
    "Arrival",
    "ArrivalStream",
    "BiasTreeConfig",
    "ColorRef",
    "ColoringState",
    "DenseOracle",
    "Edge",
    "InvalidParams",
    "PTable",
    "Params",
    "PublicHistory",
    "RngHandle",
    "RunResult",
    "StreamViolation",
    "azuma_bound",
    "bad_colors",
    "classify_incident",
    "compute_scaling_factors",
    "compute_trajectory",
    "derive_params",
    "enumerate_exact",
    "gen_bias_tree",
    "gen_gadget_farm",
    "gen_list_lb_deterministic",
    "gen_list_lb_randomized",
    "gen_random_graph",
    "gen_two_star_bridge",
    "greedy_assign",
    "matching_sum",
    "run_alg1",
    "run_alg2",
    "run_greedy",
    "run_list_greedy",
    "run_randomized_greedy",
    "validate_coloring",
    "wrap_random_order",
]
