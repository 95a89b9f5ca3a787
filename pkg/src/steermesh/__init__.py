"""Transition planning for steerable-antenna wireless mesh backhauls.

Core flow: build a Scenario (two link snapshots over one topology plus
demands, orientations, and a slot horizon), compile it into a time-expanded
MILP, solve exactly, and decode the solution into a per-slot transition plan
whose total weighted packet loss is minimal. An independent validator and a
metrics layer sit beside the solver; a FastAPI service and a thin CLI front
the package.
"""

from .geometry import (
    alignment_matrix,
    bearing_deg,
    capacity_matrix,
    circ_step_distance,
    circular_diff_deg,
    connectivity_from_positions,
    full_rotation_seconds,
    link_rate_mbps,
    num_steps,
    path_loss_db,
    snap_angle,
)
from .milp import (
    LinearConstraint,
    MilpModel,
    Variable,
    lp_string,
    parse_lp,
    read_lp_file,
    read_solution_file,
    validate_model,
    write_lp_file,
    write_solution_file,
)
from .models import (
    NodePosition,
    PhyParams,
    PlanMetrics,
    Scenario,
    SlotMetrics,
    SlotState,
    SolveConfig,
    SolveReport,
    Topology,
    TransitionPlan,
    Violation,
    WeightSchedule,
)
from .planner import (
    apply_loss_thresholds,
    big_m_value,
    build_model,
    compute_metrics,
    extract_plan,
    plan_transition,
    threshold_profile,
    validate_plan,
    weight,
)
from .scenario import (
    gen_demands,
    gen_grid,
    gen_hexagon,
    gen_simple,
    init_orientations,
    make_scenario,
    min_horizon,
    static_snapshot,
)
from .solver import Solution, brute_force, check_assignment, solve_lp, solve_milp

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "alignment_matrix",
    "apply_loss_thresholds",
    "bearing_deg",
    "big_m_value",
    "brute_force",
    "build_model",
    "capacity_matrix",
    "check_assignment",
    "circ_step_distance",
    "circular_diff_deg",
    "compute_metrics",
    "connectivity_from_positions",
    "extract_plan",
    "full_rotation_seconds",
    "gen_demands",
    "gen_grid",
    "gen_hexagon",
    "gen_simple",
    "init_orientations",
    "LinearConstraint",
    "link_rate_mbps",
    "lp_string",
    "make_scenario",
    "MilpModel",
    "min_horizon",
    "NodePosition",
    "num_steps",
    "parse_lp",
    "path_loss_db",
    "PhyParams",
    "plan_transition",
    "PlanMetrics",
    "read_lp_file",
    "read_solution_file",
    "Scenario",
    "SlotMetrics",
    "SlotState",
    "snap_angle",
    "Solution",
    "solve_lp",
    "solve_milp",
    "SolveConfig",
    "SolveReport",
    "static_snapshot",
    "threshold_profile",
    "Topology",
    "TransitionPlan",
    "validate_model",
    "validate_plan",
    "Variable",
    "Violation",
    "weight",
    "WeightSchedule",
    "write_lp_file",
    "write_solution_file",
]
