"""Domain and wire models shared by the core package, the service, and the CLI.

Conventions used across the whole package:

* node and interface ids are 0-based,
* time slot indices k are 1-based (k = 1 .. K),
* rates are Mbps, distances are meters, angles are degrees clockwise from
  North, durations are seconds,
* a directed interface-level link is the 4-tuple (d, n, d_peer, n_peer).
"""

from __future__ import annotations

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Link = tuple[int, int, int, int]

ANGLE_TOL = 1e-6


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NodePosition(StrictModel):
    x: float
    y: float

    @model_validator(mode="after")
    def _finite(self) -> "NodePosition":
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("node coordinates must be finite")
        return self


class PhyParams(StrictModel):
    """Parametric link-budget model for 60 GHz mesh links.

    Path loss follows a log-distance law referenced at `ref_distance_m` plus a
    linear atmospheric-absorption term; the resulting Shannon rate is clamped
    to [min_rate_mbps, max_rate_mbps].
    """

    tx_power_dbm: float = 23.0
    tx_gain_dbi: float = 10.0
    rx_gain_dbi: float = 10.0
    bandwidth_mhz: float = 2160.0
    noise_figure_db: float = 6.0
    ref_loss_db: float = 68.0
    ref_distance_m: float = 1.0
    path_loss_exponent: float = 2.0
    atmospheric_db_per_m: float = 0.015
    min_rate_mbps: float = 1000.0
    max_rate_mbps: float = 4640.0

    @model_validator(mode="after")
    def _sane(self) -> "PhyParams":
        if self.bandwidth_mhz <= 0 or self.ref_distance_m <= 0:
            raise ValueError("bandwidth and reference distance must be positive")
        if not 0 < self.min_rate_mbps <= self.max_rate_mbps:
            raise ValueError("rate clamp must satisfy 0 < min <= max")
        return self


class Topology(StrictModel):
    positions: list[NodePosition]
    fiber_nodes: list[int]
    interfaces_per_node: int = Field(ge=1)
    connectivity: list[list[int]]
    alignment_deg: list[list[float]]
    capacity_mbps: list[list[float]]

    @property
    def num_nodes(self) -> int:
        return len(self.positions)

    def neighbors(self, d: int) -> list[int]:
        return [e for e, flag in enumerate(self.connectivity[d]) if flag]

    @model_validator(mode="after")
    def _consistent(self) -> "Topology":
        d = len(self.positions)
        if d == 0:
            raise ValueError("topology has no nodes")
        for name, mat in (
            ("connectivity", self.connectivity),
            ("alignment_deg", self.alignment_deg),
            ("capacity_mbps", self.capacity_mbps),
        ):
            if len(mat) != d or any(len(row) != d for row in mat):
                raise ValueError(f"{name} must be {d}x{d}")
        if not self.fiber_nodes:
            raise ValueError("at least one fiber-connected node is required")
        if any(not 0 <= f < d for f in self.fiber_nodes):
            raise ValueError("fiber node id out of range")
        if len(set(self.fiber_nodes)) != len(self.fiber_nodes):
            raise ValueError("duplicate fiber node ids")
        for i in range(d):
            if self.connectivity[i][i] != 0:
                raise ValueError("connectivity diagonal must be zero")
            for j in range(d):
                if self.connectivity[i][j] not in (0, 1):
                    raise ValueError("connectivity entries must be 0/1")
                if self.connectivity[i][j] != self.connectivity[j][i]:
                    raise ValueError("connectivity must be symmetric")
        return self


class WeightSchedule(StrictModel):
    """Per-slot loss weight m_k.

    constant: m_k = 1, linear: m_k = 2k, exponential: m_k = e^k. The aliases
    "const" and "exp" are accepted and canonicalized.
    """

    kind: Literal["constant", "linear", "exponential"] = "constant"

    @field_validator("kind", mode="before")
    @classmethod
    def _canonical(cls, value: object) -> object:
        if isinstance(value, str):
            return {"const": "constant", "exp": "exponential"}.get(value, value)
        return value

    def weight(self, k: int) -> float:
        if k < 1:
            raise ValueError("slot index is 1-based")
        if self.kind == "constant":
            return 1.0
        if self.kind == "linear":
            return 2.0 * k
        return math.exp(k)


def _check_link_config(
    name: str, links: list[Link], topology: Topology
) -> None:
    d_count = topology.num_nodes
    n_count = topology.interfaces_per_node
    used: set[tuple[int, int]] = set()
    for link in links:
        d, n, dp, np_ = link
        if not (0 <= d < d_count and 0 <= dp < d_count):
            raise ValueError(f"{name}: node id out of range in {link}")
        if not (0 <= n < n_count and 0 <= np_ < n_count):
            raise ValueError(f"{name}: interface id out of range in {link}")
        if topology.connectivity[d][dp] != 1:
            raise ValueError(f"{name}: link {link} joins unconnectable nodes")
        for end in ((d, n), (dp, np_)):
            if end in used:
                raise ValueError(
                    f"{name}: interface {end} participates in more than one link"
                )
            used.add(end)


class Scenario(StrictModel):
    """A complete, solvable transition problem between two link snapshots."""

    version: Literal[1] = 1
    topology: Topology
    demands_mbps: list[float]
    initial_links: list[Link]
    final_links: list[Link]
    initial_orientations_deg: list[list[float]]
    num_slots: int = Field(ge=1)
    slot_seconds: float
    rotation_step_deg: float
    weights: WeightSchedule = WeightSchedule()
    loss_thresholds: Optional[list[float]] = None
    phy: Optional[PhyParams] = None
    provenance: dict[str, int | float | str] = Field(default_factory=dict)

    @property
    def total_demand_mbps(self) -> float:
        return float(sum(self.demands_mbps))

    def threshold(self, k: int) -> float:
        if self.loss_thresholds is None:
            return 1.0
        return self.loss_thresholds[k - 1]

    @model_validator(mode="after")
    def _consistent(self) -> "Scenario":
        topo = self.topology
        d_count = topo.num_nodes
        n_count = topo.interfaces_per_node
        if len(self.demands_mbps) != d_count:
            raise ValueError("demand vector length must equal the node count")
        if any(rho < 0 for rho in self.demands_mbps):
            raise ValueError("demands must be non-negative")
        if self.slot_seconds <= 0:
            raise ValueError("slot duration must be positive")
        theta = self.rotation_step_deg
        if theta <= 0 or abs(360.0 / theta - round(360.0 / theta)) > ANGLE_TOL:
            raise ValueError("rotation step must divide 360")
        _check_link_config("initial_links", self.initial_links, topo)
        _check_link_config("final_links", self.final_links, topo)
        a0 = self.initial_orientations_deg
        if len(a0) != d_count or any(len(row) != n_count for row in a0):
            raise ValueError("initial orientations must be D x N")
        for row in a0:
            for angle in row:
                if not 0 <= angle < 360:
                    raise ValueError("initial orientations must lie in [0, 360)")
                steps = angle / theta
                if abs(steps - round(steps)) > ANGLE_TOL:
                    raise ValueError(
                        "initial orientations must be multiples of the rotation step"
                    )
        for d, n, dp, np_ in self.initial_links:
            want = topo.alignment_deg[d][dp]
            have = a0[d][n]
            if abs((have - want + 180.0) % 360.0 - 180.0) > ANGLE_TOL:
                raise ValueError(
                    f"interface ({d},{n}) starts at {have} deg but its initial link "
                    f"requires {want} deg"
                )
            want_back = topo.alignment_deg[dp][d]
            have_back = a0[dp][np_]
            if abs((have_back - want_back + 180.0) % 360.0 - 180.0) > ANGLE_TOL:
                raise ValueError(
                    f"interface ({dp},{np_}) starts at {have_back} deg but its "
                    f"initial link requires {want_back} deg"
                )
        if self.loss_thresholds is not None:
            if len(self.loss_thresholds) != self.num_slots:
                raise ValueError("loss threshold profile must have one entry per slot")
            if any(not 0 <= v <= 1 for v in self.loss_thresholds):
                raise ValueError("loss thresholds must lie in [0, 1]")
        return self


class SlotState(StrictModel):
    """Decoded network state during one time slot.

    Links are directed: (d, n, d_peer, n_peer) carries traffic from d to
    d_peer, and flows_mbps is parallel to links. orientations_deg is the
    display form reduced into [0, 360); orientations_raw_deg keeps the
    unwrapped values the rotation dynamics are checked against.
    """

    k: int = Field(ge=1)
    orientations_deg: list[list[float]]
    orientations_raw_deg: list[list[float]]
    rotating_cw: list[list[bool]]
    rotating_ccw: list[list[bool]]
    links: list[Link]
    flows_mbps: list[float]
    loss_mbps: list[float]
    ingress_mbps: dict[int, float]

    @model_validator(mode="after")
    def _consistent(self) -> "SlotState":
        if len(self.flows_mbps) != len(self.links):
            raise ValueError("flows must be parallel to links")
        return self


class TransitionPlan(StrictModel):
    version: Literal[1] = 1
    scenario: Scenario
    objective: float
    slots: list[SlotState]

    @model_validator(mode="after")
    def _sized(self) -> "TransitionPlan":
        if len(self.slots) != self.scenario.num_slots:
            raise ValueError("plan must contain one state per slot")
        for idx, slot in enumerate(self.slots, start=1):
            if slot.k != idx:
                raise ValueError("slot states must be ordered k = 1..K")
        return self


class SlotMetrics(StrictModel):
    k: int
    loss_mbps: float
    loss_fraction: float
    active_links: int


class PlanMetrics(StrictModel):
    per_slot: list[SlotMetrics]
    total_loss_gb: float
    slots_to_lossless: Optional[int]
    weighted_objective: float


class Violation(StrictModel):
    """One independent-validator finding; an empty list means feasible."""

    code: str
    message: str
    slot: Optional[int] = None
    subject: Optional[list[int]] = None
    amount: Optional[float] = None


class SolveConfig(StrictModel):
    """Knobs for the exact solver."""

    time_limit_s: Optional[float] = None
    node_limit: Optional[int] = None
    abs_gap: float = Field(default=1e-9, ge=0)
    rel_gap: float = Field(default=1e-9, ge=0)
    integrality_tol: float = Field(default=1e-6, ge=0)
    branching: Literal["most-fractional", "first-index"] = "most-fractional"
    deterministic: bool = False
    lp_engine: Literal["auto", "internal", "scipy"] = "auto"
    brute_force_max_integers: int = 24

    def effective_branching(self) -> str:
        return "first-index" if self.deterministic else self.branching


class SolveReport(StrictModel):
    status: str
    objective: Optional[float]
    bound: Optional[float]
    nodes: int
    lp_iterations: int
    wall_time_s: float
    engine: str
