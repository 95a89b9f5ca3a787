"""Topology generators, demand draws, snapshots, and scenario assembly.

Three topology families are built in: an 8-node dual-chain mesh with a spare
relay node, a jittered square grid, and a 19-node hexagonal layout. Demand
vectors attach users to uniformly random nodes with a 70/20/10 mix of
50/75/100 Mbps subscriptions. Snapshots come from single-slot placement
solves (static_snapshot); orientations for interfaces the initial snapshot
leaves unused are random grid multiples. Everything is deterministic under a
fixed seed.
"""

from __future__ import annotations

import math
import warnings
from typing import Optional, Sequence, Union

import numpy as np

from .geometry import (
    alignment_matrix,
    angle_step,
    capacity_matrix,
    circ_step_distance,
    connectivity_from_positions,
    min_horizon,
    num_steps,
)
from .models import (
    Link,
    NodePosition,
    PhyParams,
    Scenario,
    SolveConfig,
    Topology,
    WeightSchedule,
)
from .planner import build_model, threshold_profile
from .solver import solve_milp

Seed = Union[int, np.random.SeedSequence]

SIMPLE_MAX_RANGE_M = 125.0
GRID_SPACING_M = 180.0
GRID_SIGMA_FRACTION = 0.125
HEX_SPACING_M = 140.0
DEFAULT_MAX_RANGE_FACTOR = 1.5

USER_RATE_MIX = ((50.0, 0.7), (75.0, 0.2), (100.0, 0.1))

# Fixed snapshots for the dual-chain mesh: initially traffic flows down both
# chains and the spare relay idles; the final state reroutes the left chain
# through the spare, idling the left mid-node.
SIMPLE_INITIAL_LINKS: list[Link] = [
    (0, 0, 1, 0),
    (0, 1, 4, 0),
    (1, 1, 2, 0),
    (2, 1, 3, 0),
    (4, 1, 5, 0),
    (5, 1, 6, 0),
]
SIMPLE_FINAL_LINKS: list[Link] = [
    (0, 0, 1, 0),
    (0, 1, 4, 0),
    (1, 1, 7, 0),
    (4, 1, 5, 0),
    (5, 1, 6, 0),
    (7, 1, 3, 0),
]


def _build_topology(
    points: Sequence[tuple[float, float]],
    fiber_nodes: list[int],
    interfaces: int,
    max_range_m: float,
    theta_deg: float,
    phy: Optional[PhyParams],
) -> Topology:
    phy = phy or PhyParams()
    pts = [(float(x), float(y)) for x, y in points]
    delta = connectivity_from_positions(pts, max_range_m)
    return Topology(
        positions=[NodePosition(x=x, y=y) for x, y in pts],
        fiber_nodes=fiber_nodes,
        interfaces_per_node=interfaces,
        connectivity=delta,
        alignment_deg=alignment_matrix(pts, theta_deg),
        capacity_mbps=capacity_matrix(pts, delta, phy),
    )


def gen_simple(
    *,
    interfaces: int = 2,
    theta_deg: float = 10.0,
    phy: Optional[PhyParams] = None,
) -> Topology:
    """8-node mesh: fiber node feeding two 3-hop chains plus a spare relay.

    The fiber node sits at the top; the chains run down at x = +-60 m in
    100 m hops and the spare relay sits between them, reachable from all six
    chain nodes. Every hop is at most 125 m.
    """
    points = [
        (0.0, 300.0),
        (-60.0, 200.0),
        (-60.0, 100.0),
        (-60.0, 0.0),
        (60.0, 200.0),
        (60.0, 100.0),
        (60.0, 0.0),
        (0.0, 100.0),
    ]
    return _build_topology(
        points, [0], interfaces, SIMPLE_MAX_RANGE_M, theta_deg, phy
    )


def gen_grid(
    s: float = GRID_SPACING_M,
    sigma_fraction: float = GRID_SIGMA_FRACTION,
    seed: Seed = 0,
    *,
    rows: int = 4,
    cols: int = 4,
    interfaces: int = 3,
    fiber_node: int = 0,
    max_range_factor: float = DEFAULT_MAX_RANGE_FACTOR,
    theta_deg: float = 10.0,
    phy: Optional[PhyParams] = None,
) -> Topology:
    """rows x cols lattice with spacing s and Gaussian jitter sigma = s * sigma_fraction."""
    if s <= 0:
        raise ValueError("grid spacing must be positive")
    rng = np.random.default_rng(seed)
    points = []
    for j in range(rows):
        for i in range(cols):
            dx, dy = (rng.normal(0.0, s * sigma_fraction, 2) if sigma_fraction > 0 else (0.0, 0.0))
            points.append((i * s + dx, j * s + dy))
    return _build_topology(
        points, [fiber_node], interfaces, max_range_factor * s, theta_deg, phy
    )


def gen_hexagon(
    spacing: float = HEX_SPACING_M,
    *,
    interfaces: int = 3,
    fiber_node: Optional[int] = None,
    max_range_factor: float = DEFAULT_MAX_RANGE_FACTOR,
    theta_deg: float = 10.0,
    phy: Optional[PhyParams] = None,
) -> Topology:
    """19-node hexagonal layout, rows of 3-4-5-4-3 nodes.

    Rows step by the spacing on y; within a row nodes step by the spacing on
    x, with alternating rows offset by half a spacing so the layout is
    symmetric under 180 degree rotation about the center node.
    """
    if spacing <= 0:
        raise ValueError("hexagon spacing must be positive")
    counts = (3, 4, 5, 4, 3)
    points = []
    for r, count in enumerate(counts):
        offset = (max(counts) - count) / 2.0
        for i in range(count):
            points.append(((offset + i) * spacing, r * spacing))
    center = 3 + 4 + 2
    fiber = center if fiber_node is None else fiber_node
    return _build_topology(
        points, [fiber], interfaces, max_range_factor * spacing, theta_deg, phy
    )


def gen_demands(num_users: int, topology: Topology, seed: Seed = 0) -> list[float]:
    """Per-node demand vector from a 70/20/10 user mix over random nodes.

    Class counts are round(0.7u) at 50 Mbps and round(0.2u) at 75 Mbps
    (half-up), remainder at 100 Mbps; each user lands on a uniformly random
    node.
    """
    if num_users < 0:
        raise ValueError("user count must be non-negative")
    rng = np.random.default_rng(seed)
    n50 = int(math.floor(USER_RATE_MIX[0][1] * num_users + 0.5))
    n75 = int(math.floor(USER_RATE_MIX[1][1] * num_users + 0.5))
    if n50 + n75 > num_users:
        n75 = num_users - n50
    n100 = num_users - n50 - n75
    rates = [50.0] * n50 + [75.0] * n75 + [100.0] * n100
    demands = [0.0] * topology.num_nodes
    for rate in rates:
        demands[int(rng.integers(0, topology.num_nodes))] += rate
    return demands


def init_orientations(
    topology: Topology,
    x_init: Sequence[Link],
    theta_deg: float,
    seed: Seed = 0,
) -> list[list[float]]:
    """Initial orientation matrix A0 consistent with the initial snapshot.

    Interfaces the snapshot uses point at their peers; every other interface
    gets a uniformly random multiple of theta in [0, 360).
    """
    rng = np.random.default_rng(seed)
    used: dict[tuple[int, int], float] = {}
    for d, n, dp, np_ in x_init:
        if not (0 <= d < topology.num_nodes and 0 <= dp < topology.num_nodes):
            raise ValueError(f"link ({d},{n},{dp},{np_}) references unknown nodes")
        if not topology.connectivity[d][dp]:
            raise ValueError(f"link ({d},{n},{dp},{np_}) violates connectivity")
        used[(d, n)] = topology.alignment_deg[d][dp]
        used[(dp, np_)] = topology.alignment_deg[dp][d]
    steps = num_steps(theta_deg)
    a0 = []
    for d in range(topology.num_nodes):
        row = []
        for n in range(topology.interfaces_per_node):
            if (d, n) in used:
                row.append(used[(d, n)])
            else:
                row.append(theta_deg * int(rng.integers(0, steps)))
        a0.append(row)
    return a0


def static_snapshot(
    topology: Topology,
    rho: Sequence[float],
    *,
    theta_deg: float = 10.0,
    config: Optional[SolveConfig] = None,
    time_limit_s: Optional[float] = None,
) -> list[Link]:
    """Single-slot loss-minimizing link placement.

    Solves the one-slot model with free orientations and no boundary or
    movement constraints and returns its active link set. Hitting a solve
    limit degrades to the incumbent with a warning; a limit with no incumbent
    or an infeasible/unbounded status raises.
    """
    scen = Scenario(
        topology=topology,
        demands_mbps=list(rho),
        initial_links=[],
        final_links=[],
        initial_orientations_deg=[
            [0.0] * topology.interfaces_per_node for _ in range(topology.num_nodes)
        ],
        num_slots=1,
        slot_seconds=1.0,
        rotation_step_deg=theta_deg,
        weights=WeightSchedule(kind="constant"),
    )
    model = build_model(scen, fix_boundaries=False)
    cfg = config or SolveConfig()
    if time_limit_s is not None:
        cfg = cfg.model_copy(update={"time_limit_s": time_limit_s})
    solution = solve_milp(model, cfg)
    if solution.status in ("infeasible", "unbounded"):
        raise RuntimeError(
            f"internal error: static placement model reported {solution.status}; "
            "loss variables should make it feasible and bounded"
        )
    if solution.values is None:
        raise RuntimeError(
            "static placement hit the solve limit with no incumbent; "
            "raise the time or node limit"
        )
    if solution.status != "optimal":
        warnings.warn(
            "static placement returned the best incumbent at the solve limit, "
            "not a proven optimum",
            stacklevel=2,
        )
    links = []
    for var in model.variables:
        if var.name.startswith("x_") and solution.values[var.index] > 0.5:
            d, n, dp, np_ = map(int, var.name.split("_")[1:5])
            links.append((d, n, dp, np_))
    return sorted(links)


def make_scenario(
    kind: str,
    num_users: int,
    seed: int = 0,
    *,
    interfaces: Optional[int] = None,
    num_slots: Optional[int] = None,
    extra_slots: int = 0,
    slot_seconds: float = 0.2,
    rotation_step_deg: float = 10.0,
    weight_kind: str = "constant",
    loss_threshold: Optional[float] = None,
    threshold_window: str = "half",
    grid_spacing: float = GRID_SPACING_M,
    sigma_fraction: float = GRID_SIGMA_FRACTION,
    hex_spacing: float = HEX_SPACING_M,
    grid_rows: int = 4,
    grid_cols: int = 4,
    fiber_node: Optional[int] = None,
    max_range_factor: float = DEFAULT_MAX_RANGE_FACTOR,
    explicit_demands: Optional[Sequence[float]] = None,
    phy: Optional[PhyParams] = None,
    snapshot_time_limit_s: Optional[float] = None,
) -> Scenario:
    """Assemble a complete scenario for one of the built-in topology kinds.

    Two independent demand draws produce the initial and final snapshots via
    static placement (the dual-chain mesh instead uses its fixed snapshots);
    the final draw is the demand the transition serves. The horizon defaults
    to the minimum feasible plus extra_slots; an explicit num_slots below the
    minimum raises.
    """
    seq = np.random.SeedSequence(seed)
    s_topo, s_init, s_final, s_orient = seq.spawn(4)
    theta = rotation_step_deg

    if kind == "simple":
        topo = gen_simple(
            interfaces=interfaces if interfaces is not None else 2,
            theta_deg=theta,
            phy=phy,
        )
        x_init = list(SIMPLE_INITIAL_LINKS)
        x_end = list(SIMPLE_FINAL_LINKS)
        demands = (
            list(explicit_demands)
            if explicit_demands is not None
            else gen_demands(num_users, topo, s_final)
        )
    elif kind in ("grid", "hexagon"):
        if kind == "grid":
            topo = gen_grid(
                grid_spacing,
                sigma_fraction,
                s_topo,
                rows=grid_rows,
                cols=grid_cols,
                interfaces=interfaces if interfaces is not None else 3,
                fiber_node=fiber_node if fiber_node is not None else 0,
                max_range_factor=max_range_factor,
                theta_deg=theta,
                phy=phy,
            )
        else:
            topo = gen_hexagon(
                hex_spacing,
                interfaces=interfaces if interfaces is not None else 3,
                fiber_node=fiber_node,
                max_range_factor=max_range_factor,
                theta_deg=theta,
                phy=phy,
            )
        demands_init = gen_demands(num_users, topo, s_init)
        demands = (
            list(explicit_demands)
            if explicit_demands is not None
            else gen_demands(num_users, topo, s_final)
        )
        x_init = static_snapshot(
            topo, demands_init, theta_deg=theta, time_limit_s=snapshot_time_limit_s
        )
        x_end = static_snapshot(
            topo, demands, theta_deg=theta, time_limit_s=snapshot_time_limit_s
        )
    else:
        raise ValueError(f"unknown topology kind {kind!r}")

    a0 = init_orientations(topo, x_init, theta, s_orient)
    k_min = min_horizon(a0, x_end, topo.alignment_deg, theta)
    slots = num_slots if num_slots is not None else k_min + extra_slots
    if slots < k_min:
        raise ValueError(
            f"num_slots {slots} is below the minimum horizon {k_min} for this scenario"
        )
    thresholds = (
        threshold_profile(slots, loss_threshold, threshold_window)
        if loss_threshold is not None
        else None
    )
    return Scenario(
        topology=topo,
        demands_mbps=demands,
        initial_links=x_init,
        final_links=x_end,
        initial_orientations_deg=a0,
        num_slots=slots,
        slot_seconds=slot_seconds,
        rotation_step_deg=theta,
        weights=WeightSchedule(kind=weight_kind),
        loss_thresholds=thresholds,
        provenance={
            "kind": kind,
            "num_users": num_users,
            "seed": seed,
            "interfaces": topo.interfaces_per_node,
            "explicit_demands": explicit_demands is not None,
        },
    )
