"""Parameter sweeps over interfaces, horizons, weights, and seeds.

A sweep regenerates snapshots per (seed, interface count), then solves one
transition per (slot count, weight kind) cell on top of them. Cell failures
(unreachable horizons, solve limits) are recorded in their rows and the sweep
continues. Rows aggregate into the CSV shape the plotting scripts expect:
one row per cell keyed by (seed, interfaces, slots, weight).
"""

from __future__ import annotations

import csv
import io
from typing import Optional, Sequence

from .models import PlanMetrics, Scenario, SolveConfig, StrictModel
from .planner import compute_metrics, plan_transition, threshold_profile
from .scenario import make_scenario

SWEEP_COLUMNS = [
    "kind",
    "seed",
    "num_users",
    "interfaces",
    "slots_axis",
    "num_slots",
    "weight",
    "status",
    "objective",
    "total_loss_gb",
    "slots_to_lossless",
    "wall_time_s",
    "error",
]

METRICS_COLUMNS = ["k", "loss_Mbps", "loss_fraction", "active_links"]


class SweepRow(StrictModel):
    kind: str
    seed: int
    num_users: int
    interfaces: int
    slots_axis: int
    num_slots: Optional[int] = None
    weight: str
    status: str
    objective: Optional[float] = None
    total_loss_gb: Optional[float] = None
    slots_to_lossless: Optional[int] = None
    wall_time_s: float = 0.0
    error: Optional[str] = None


def _rebuild_with(
    base: Scenario,
    num_slots: int,
    weight_kind: str,
    loss_threshold: Optional[float],
    threshold_window: str,
) -> Scenario:
    data = base.model_dump()
    data["num_slots"] = num_slots
    data["weights"] = {"kind": weight_kind}
    data["loss_thresholds"] = (
        threshold_profile(num_slots, loss_threshold, threshold_window)
        if loss_threshold is not None
        else None
    )
    return Scenario(**data)


def run_sweep(
    kind: str,
    num_users: int,
    *,
    seeds: Sequence[int] = (0,),
    interfaces: Sequence[int] = (2, 3),
    slots: Sequence[int] = (0, 1, 2),
    slots_mode: str = "relative",
    weight_kinds: Sequence[str] = ("constant",),
    loss_threshold: Optional[float] = None,
    threshold_window: str = "half",
    time_limit_s: Optional[float] = None,
    snapshot_time_limit_s: Optional[float] = None,
    deterministic: bool = True,
    scenario_kwargs: Optional[dict] = None,
) -> list[SweepRow]:
    """Solve every (seed, N, K, weight) cell; never raises on cell failures.

    slots_mode "relative" reads each slots entry as an offset on top of the
    cell's minimum horizon; "absolute" uses the entry as the slot count
    directly (cells below the minimum become error rows).
    """
    if slots_mode not in ("relative", "absolute"):
        raise ValueError(f"unknown slots_mode {slots_mode!r}")
    extra = dict(scenario_kwargs or {})
    rows: list[SweepRow] = []
    for seed in seeds:
        for n in interfaces:
            try:
                base = make_scenario(
                    kind,
                    num_users,
                    seed,
                    interfaces=n,
                    snapshot_time_limit_s=snapshot_time_limit_s,
                    **extra,
                )
            except (ValueError, RuntimeError) as exc:
                for k in slots:
                    for w in weight_kinds:
                        rows.append(
                            SweepRow(
                                kind=kind,
                                seed=seed,
                                num_users=num_users,
                                interfaces=n,
                                slots_axis=k,
                                weight=w,
                                status="error",
                                error=str(exc),
                            )
                        )
                continue
            k_min = base.num_slots
            for k in slots:
                target = k_min + k if slots_mode == "relative" else k
                for w in weight_kinds:
                    row = SweepRow(
                        kind=kind,
                        seed=seed,
                        num_users=num_users,
                        interfaces=n,
                        slots_axis=k,
                        weight=w,
                        status="error",
                    )
                    if target < k_min:
                        row.error = (
                            f"num_slots {target} is below the minimum horizon {k_min}"
                        )
                        rows.append(row)
                        continue
                    try:
                        cell = _rebuild_with(
                            base, target, w, loss_threshold, threshold_window
                        )
                        plan, report = plan_transition(
                            cell,
                            SolveConfig(
                                time_limit_s=time_limit_s,
                                deterministic=deterministic,
                            ),
                        )
                    except (ValueError, RuntimeError) as exc:
                        row.error = str(exc)
                        rows.append(row)
                        continue
                    row.num_slots = target
                    row.status = report.status
                    row.wall_time_s = report.wall_time_s
                    row.objective = report.objective
                    if plan is None:
                        row.error = f"no plan: solver status {report.status}"
                    else:
                        metrics = compute_metrics(cell, plan)
                        row.total_loss_gb = metrics.total_loss_gb
                        row.slots_to_lossless = metrics.slots_to_lossless
                    rows.append(row)
    return rows


def _cell_str(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        data = row.model_dump()
        writer.writerow([_cell_str(data[col]) for col in SWEEP_COLUMNS])
    return out.getvalue()


def metrics_csv(metrics: PlanMetrics) -> str:
    """One row per slot: k, loss_Mbps, loss_fraction, active_links."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(METRICS_COLUMNS)
    for slot in metrics.per_slot:
        writer.writerow(
            [
                slot.k,
                _cell_str(slot.loss_mbps),
                _cell_str(slot.loss_fraction),
                slot.active_links,
            ]
        )
    return out.getvalue()


def metrics_summary(metrics: PlanMetrics) -> dict:
    """Totals for the JSON summary next to the per-slot CSV."""
    return {
        "num_slots": len(metrics.per_slot),
        "total_loss_gb": metrics.total_loss_gb,
        "weighted_objective": metrics.weighted_objective,
        "slots_to_lossless": metrics.slots_to_lossless,
        "max_loss_fraction": max(
            (slot.loss_fraction for slot in metrics.per_slot), default=0.0
        ),
    }
