"""Request and response bodies of the planning service."""

from __future__ import annotations

from typing import Optional

from .experiments import SweepRow
from .models import (
    PlanMetrics,
    Scenario,
    SolveConfig,
    SolveReport,
    StrictModel,
    TransitionPlan,
    Violation,
)


class HealthResponse(StrictModel):
    status: str
    version: str


class GenerateRequest(StrictModel):
    kind: str
    num_users: int = 0
    seed: int = 0
    interfaces: Optional[int] = None
    num_slots: Optional[int] = None
    extra_slots: int = 0
    slot_seconds: float = 0.2
    rotation_step_deg: float = 10.0
    weight_kind: str = "constant"
    loss_threshold: Optional[float] = None
    threshold_window: str = "half"
    grid_spacing: float = 180.0
    sigma_fraction: float = 0.125
    hex_spacing: float = 140.0
    grid_rows: int = 4
    grid_cols: int = 4
    fiber_node: Optional[int] = None
    max_range_factor: float = 1.5
    explicit_demands: Optional[list[float]] = None
    snapshot_time_limit_s: Optional[float] = None


class GenerateResponse(StrictModel):
    scenario: Scenario
    min_slots: int


class SolveRequest(StrictModel):
    scenario: Scenario
    config: SolveConfig = SolveConfig()
    prune_unreachable: bool = True


class SolveResponse(StrictModel):
    plan: Optional[TransitionPlan] = None
    report: SolveReport
    violations: list[Violation] = []


class ValidateRequest(StrictModel):
    plan: TransitionPlan
    scenario: Optional[Scenario] = None


class ValidateResponse(StrictModel):
    ok: bool
    violations: list[Violation]


class MetricsRequest(StrictModel):
    plan: TransitionPlan


class MetricsResponse(StrictModel):
    metrics: PlanMetrics
    summary: dict
    csv: str


class LpExportRequest(StrictModel):
    scenario: Scenario
    prune_unreachable: bool = True
    keep_rate_vars: bool = False
    fix_boundaries: bool = True


class LpExportResponse(StrictModel):
    lp: str
    model_name: str
    num_variables: int
    num_constraints: int


class SweepRequest(StrictModel):
    kind: str
    num_users: int
    seeds: list[int] = [0]
    interfaces: list[int] = [2, 3]
    slots: list[int] = [0, 1, 2]
    slots_mode: str = "relative"
    weight_kinds: list[str] = ["constant"]
    loss_threshold: Optional[float] = None
    threshold_window: str = "half"
    time_limit_s: Optional[float] = None
    snapshot_time_limit_s: Optional[float] = None
    deterministic: bool = True
    scenario_kwargs: dict = {}


class SweepResponse(StrictModel):
    rows: list[SweepRow]
    csv: str
