"""HTTP planning service.

Wraps scenario generation, transition solving, validation, metrics, LP
export, and sweeps behind JSON endpoints so a controller can query plans
without linking the package. Solves run synchronously in the request; callers
set SolveConfig time limits to bound latency.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .experiments import metrics_csv, metrics_summary, run_sweep, sweep_csv
from .milp import lp_string
from .planner import (
    build_model,
    compute_metrics,
    extract_plan,
    validate_plan,
)
from .scenario import make_scenario, min_horizon
from .schemas import (
    GenerateRequest,
    GenerateResponse,
    HealthResponse,
    LpExportRequest,
    LpExportResponse,
    MetricsRequest,
    MetricsResponse,
    SolveRequest,
    SolveResponse,
    SweepRequest,
    SweepResponse,
    ValidateRequest,
    ValidateResponse,
)
from .solver import solve_milp

app = FastAPI(title="steermesh", version=__version__)


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/scenario/generate", response_model=GenerateResponse)
def generate(req: GenerateRequest) -> GenerateResponse:
    try:
        scenario = make_scenario(
            req.kind,
            req.num_users,
            req.seed,
            interfaces=req.interfaces,
            num_slots=req.num_slots,
            extra_slots=req.extra_slots,
            slot_seconds=req.slot_seconds,
            rotation_step_deg=req.rotation_step_deg,
            weight_kind=req.weight_kind,
            loss_threshold=req.loss_threshold,
            threshold_window=req.threshold_window,
            grid_spacing=req.grid_spacing,
            sigma_fraction=req.sigma_fraction,
            hex_spacing=req.hex_spacing,
            grid_rows=req.grid_rows,
            grid_cols=req.grid_cols,
            fiber_node=req.fiber_node,
            max_range_factor=req.max_range_factor,
            explicit_demands=req.explicit_demands,
            snapshot_time_limit_s=req.snapshot_time_limit_s,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except RuntimeError as exc:
        raise HTTPException(status_code=500, detail=str(exc))
    k_min = min_horizon(
        scenario.initial_orientations_deg,
        scenario.final_links,
        scenario.topology.alignment_deg,
        scenario.rotation_step_deg,
    )
    return GenerateResponse(scenario=scenario, min_slots=k_min)


@app.post("/plan/solve", response_model=SolveResponse)
def solve(req: SolveRequest) -> SolveResponse:
    try:
        model = build_model(req.scenario, prune_unreachable=req.prune_unreachable)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    solution = solve_milp(model, req.config)
    if solution.values is None:
        return SolveResponse(plan=None, report=solution.report(), violations=[])
    plan = extract_plan(req.scenario, solution, model)
    return SolveResponse(
        plan=plan,
        report=solution.report(),
        violations=validate_plan(req.scenario, plan),
    )


@app.post("/plan/validate", response_model=ValidateResponse)
def validate(req: ValidateRequest) -> ValidateResponse:
    scenario = req.scenario if req.scenario is not None else req.plan.scenario
    violations = validate_plan(scenario, req.plan)
    return ValidateResponse(ok=not violations, violations=violations)


@app.post("/plan/metrics", response_model=MetricsResponse)
def metrics(req: MetricsRequest) -> MetricsResponse:
    result = compute_metrics(req.plan.scenario, req.plan)
    return MetricsResponse(
        metrics=result,
        summary=metrics_summary(result),
        csv=metrics_csv(result),
    )


@app.post("/model/lp", response_model=LpExportResponse)
def export_lp(req: LpExportRequest) -> LpExportResponse:
    try:
        model = build_model(
            req.scenario,
            prune_unreachable=req.prune_unreachable,
            keep_rate_vars=req.keep_rate_vars,
            fix_boundaries=req.fix_boundaries,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return LpExportResponse(
        lp=lp_string(model),
        model_name=model.name,
        num_variables=model.num_variables,
        num_constraints=len(model.constraints),
    )


@app.post("/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest) -> SweepResponse:
    try:
        rows = run_sweep(
            req.kind,
            req.num_users,
            seeds=req.seeds,
            interfaces=req.interfaces,
            slots=req.slots,
            slots_mode=req.slots_mode,
            weight_kinds=req.weight_kinds,
            loss_threshold=req.loss_threshold,
            threshold_window=req.threshold_window,
            time_limit_s=req.time_limit_s,
            snapshot_time_limit_s=req.snapshot_time_limit_s,
            deterministic=req.deterministic,
            scenario_kwargs=req.scenario_kwargs,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return SweepResponse(rows=rows, csv=sweep_csv(rows))
