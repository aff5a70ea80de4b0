"""Online all-or-nothing multi-commodity flow with high demands.

The online algorithm lives in :mod:`onmcf.engine`, the min-cost-flow oracles in
:mod:`onmcf.oracles`, and the brute-force offline yardstick in
:mod:`onmcf.offline`.
"""

from .engine import (
    Decision,
    EngineConfig,
    EngineState,
    Outcome,
    alpha,
    benefit,
    beta_bound,
    beta_bound_bpb,
    lp_value,
    process_request,
    run_sequence,
    verify_primal_feasibility,
)
from .flows import EdgeFlow, PathFlow, UnitFlow, cost, decompose, flow_value, weight
from .network import (
    Network,
    NetworkError,
    Request,
    is_feasible,
    max_flow_value,
    validate_network,
)
from .offline import OfflineSolution, concurrent_feasible, offline_optimal
from .oracles import (
    OracleCriteria,
    min_cost_unit_flow,
    single_path_oracle,
    tri_criteria_oracle,
)
from .scenario import (
    Scenario,
    generate_random,
    load_scenario,
    machine_scheduling_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "Decision",
    "EdgeFlow",
    "EngineConfig",
    "EngineState",
    "Network",
    "NetworkError",
    "OfflineSolution",
    "OracleCriteria",
    "Outcome",
    "PathFlow",
    "Request",
    "Scenario",
    "UnitFlow",
    "alpha",
    "benefit",
    "beta_bound",
    "beta_bound_bpb",
    "concurrent_feasible",
    "cost",
    "decompose",
    "flow_value",
    "generate_random",
    "is_feasible",
    "load_scenario",
    "lp_value",
    "machine_scheduling_scenario",
    "max_flow_value",
    "min_cost_unit_flow",
    "offline_optimal",
    "process_request",
    "run_sequence",
    "single_path_oracle",
    "tri_criteria_oracle",
    "validate_network",
    "verify_primal_feasibility",
    "weight",
]
