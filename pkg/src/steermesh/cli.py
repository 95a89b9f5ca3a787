"""Command-line front end.

Every command is a thin client of the HTTP service: by default requests run
against an in-process ASGI transport (no server needed); --server points them
at a remote instance instead. Exit codes: 0 success, 2 bad input or request,
3 proven infeasible, 4 solve limit hit without an incumbent, 5 validation
violations.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click
import httpx

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_LIMIT = 4
EXIT_INVALID = 5

_WEIGHT_CHOICES = click.Choice(["constant", "linear", "exp", "exponential"])


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        # the in-process transport shim warns about its own httpx pairing
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        click.echo(f"error: {detail}", err=True)
        sys.exit(EXIT_INPUT)
    return response.json()


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_INPUT)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    click.echo(f"wrote {path}")


def _dump(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


@click.group()
@click.option("--server", default=None, metavar="URL", help="Remote service URL; default runs in process.")
@click.pass_context
def main(ctx: click.Context, server: Optional[str]) -> None:
    """Transition planning for steerable-antenna mesh backhauls."""
    ctx.obj = {"server": server}


@main.command()
@click.argument("kind", type=click.Choice(["simple", "grid", "hexagon"]))
@click.option("--users", default=0, show_default=True, help="User count for demand draws.")
@click.option("--seed", default=0, show_default=True)
@click.option("--interfaces", default=None, type=int, help="Interfaces per node (default per kind).")
@click.option("--slots", default=21, show_default=True, help="Horizon K; must cover the minimum.")
@click.option("--tau", default=0.2, show_default=True, help="Seconds per slot.")
@click.option("--theta", default=10.0, show_default=True, help="Rotation step in degrees.")
@click.option("--weight", default="constant", type=_WEIGHT_CHOICES, show_default=True)
@click.option("--loss-threshold", default=None, type=float, help="Per-slot loss cap fraction.")
@click.option("--threshold-window", default="half", type=click.Choice(["half", "all"]), show_default=True)
@click.option("--grid-rows", default=4, show_default=True)
@click.option("--grid-cols", default=4, show_default=True)
@click.option("--grid-spacing", default=180.0, show_default=True)
@click.option("--sigma-fraction", default=0.125, show_default=True, help="Grid jitter sigma as a fraction of spacing.")
@click.option("--hex-spacing", default=140.0, show_default=True)
@click.option("--fiber-node", default=None, type=int)
@click.option("--max-range-factor", default=1.5, show_default=True)
@click.option("--demands", default=None, help="Comma-separated explicit per-node demands in Mbps.")
@click.option("--time-limit", default=None, type=float, help="Time limit per snapshot solve, seconds.")
@click.option("--out", default=".", show_default=True, metavar="DIR")
@click.pass_context
def gen(ctx, kind, users, seed, interfaces, slots, tau, theta, weight, loss_threshold,
        threshold_window, grid_rows, grid_cols, grid_spacing, sigma_fraction, hex_spacing,
        fiber_node, max_range_factor, demands, time_limit, out):
    """Generate a scenario JSON file."""
    explicit = None
    if demands is not None:
        try:
            explicit = [float(tok) for tok in demands.split(",")]
        except ValueError:
            click.echo("error: --demands must be comma-separated numbers", err=True)
            sys.exit(EXIT_INPUT)
    payload = {
        "kind": kind,
        "num_users": users,
        "seed": seed,
        "interfaces": interfaces,
        "num_slots": slots,
        "slot_seconds": tau,
        "rotation_step_deg": theta,
        "weight_kind": weight,
        "loss_threshold": loss_threshold,
        "threshold_window": threshold_window,
        "grid_rows": grid_rows,
        "grid_cols": grid_cols,
        "grid_spacing": grid_spacing,
        "sigma_fraction": sigma_fraction,
        "hex_spacing": hex_spacing,
        "fiber_node": fiber_node,
        "max_range_factor": max_range_factor,
        "explicit_demands": explicit,
        "snapshot_time_limit_s": time_limit,
    }
    with _client(ctx.obj["server"]) as client:
        body = _post(client, "/scenario/generate", payload)
    path = Path(out) / f"{kind}_u{users}_s{seed}.json"
    _write(path, _dump(body["scenario"]))
    click.echo(f"minimum horizon: {body['min_slots']} slots")


def _solve_payload(scenario: dict, time_limit, node_limit, deterministic, engine) -> dict:
    return {
        "scenario": scenario,
        "config": {
            "time_limit_s": time_limit,
            "node_limit": node_limit,
            "deterministic": deterministic,
            "lp_engine": engine,
        },
    }


@main.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--time-limit", default=None, type=float)
@click.option("--node-limit", default=None, type=int)
@click.option("--deterministic/--no-deterministic", default=True, show_default=True)
@click.option("--lp-engine", default="auto", type=click.Choice(["auto", "internal", "scipy"]), show_default=True)
@click.option("--export-lp", is_flag=True, help="Write the LP file only; skip solving.")
@click.option("--out", default=".", show_default=True, metavar="DIR")
@click.pass_context
def plan(ctx, scenario_file, time_limit, node_limit, deterministic, lp_engine, export_lp, out):
    """Solve a scenario into a transition plan (and solve report)."""
    scenario = _load_json(scenario_file)
    stem = Path(scenario_file).stem
    with _client(ctx.obj["server"]) as client:
        if export_lp:
            body = _post(client, "/model/lp", {"scenario": scenario})
            _write(Path(out) / f"{stem}.lp", body["lp"])
            click.echo(
                f"model {body['model_name']}: {body['num_variables']} variables, "
                f"{body['num_constraints']} constraints"
            )
            return
        body = _post(
            client,
            "/plan/solve",
            _solve_payload(scenario, time_limit, node_limit, deterministic, lp_engine),
        )
    report = body["report"]
    click.echo(
        f"status {report['status']}, objective {report['objective']}, "
        f"{report['nodes']} nodes, {report['wall_time_s']:.2f}s"
    )
    _write(Path(out) / f"{stem}_report.json", _dump(report))
    if body["plan"] is None:
        if report["status"] == "infeasible":
            sys.exit(EXIT_INFEASIBLE)
        sys.exit(EXIT_LIMIT)
    _write(Path(out) / f"{stem}_plan.json", _dump(body["plan"]))
    if body["violations"]:
        click.echo("internal error: solver output failed validation:", err=True)
        for violation in body["violations"]:
            click.echo(f"  [{violation['code']}] {violation['message']}", err=True)
        sys.exit(EXIT_INVALID)


@main.command()
@click.argument("plan_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def validate(ctx, plan_file):
    """Re-check a plan against every constraint family."""
    plan_doc = _load_json(plan_file)
    with _client(ctx.obj["server"]) as client:
        body = _post(client, "/plan/validate", {"plan": plan_doc})
    if body["ok"]:
        click.echo("plan valid: 0 violations")
        return
    for violation in body["violations"]:
        slot = f" slot {violation['slot']}" if violation["slot"] is not None else ""
        click.echo(f"[{violation['code']}]{slot} {violation['message']}")
    sys.exit(EXIT_INVALID)


@main.command()
@click.argument("plan_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=".", show_default=True, metavar="DIR")
@click.pass_context
def metrics(ctx, plan_file, out):
    """Emit per-slot loss CSV and a JSON summary for a valid plan."""
    plan_doc = _load_json(plan_file)
    stem = Path(plan_file).stem
    with _client(ctx.obj["server"]) as client:
        check = _post(client, "/plan/validate", {"plan": plan_doc})
        if not check["ok"]:
            for violation in check["violations"]:
                click.echo(f"[{violation['code']}] {violation['message']}", err=True)
            sys.exit(EXIT_INVALID)
        body = _post(client, "/plan/metrics", {"plan": plan_doc})
    _write(Path(out) / f"{stem}_metrics.csv", body["csv"])
    _write(Path(out) / f"{stem}_summary.json", _dump(body["summary"]))
    click.echo(_dump(body["summary"]).rstrip())


@main.command()
@click.argument("kind", type=click.Choice(["simple", "grid", "hexagon"]))
@click.option("--users", default=0, show_default=True)
@click.option("--seeds", default="0", show_default=True, help="Comma-separated seed list.")
@click.option("--interfaces", default="2,3", show_default=True, help="Comma-separated N list.")
@click.option("--slots", default="0,1,2", show_default=True, help="Comma-separated K list (see --slots-mode).")
@click.option("--slots-mode", default="relative", type=click.Choice(["relative", "absolute"]), show_default=True,
              help="relative: offsets over each cell's minimum horizon; absolute: literal K.")
@click.option("--weight", "weights", default="constant", show_default=True, help="Comma-separated weight kinds.")
@click.option("--loss-threshold", default=None, type=float)
@click.option("--threshold-window", default="half", type=click.Choice(["half", "all"]), show_default=True)
@click.option("--time-limit", default=None, type=float, help="Per-cell solve time limit, seconds.")
@click.option("--snapshot-time-limit", default=None, type=float)
@click.option("--grid-rows", default=4, show_default=True)
@click.option("--grid-cols", default=4, show_default=True)
@click.option("--grid-spacing", default=180.0, show_default=True)
@click.option("--sigma-fraction", default=0.125, show_default=True)
@click.option("--hex-spacing", default=140.0, show_default=True)
@click.option("--max-range-factor", default=1.5, show_default=True)
@click.option("--theta", default=10.0, show_default=True)
@click.option("--tau", default=0.2, show_default=True)
@click.option("--out", default=".", show_default=True, metavar="DIR")
@click.pass_context
def sweep(ctx, kind, users, seeds, interfaces, slots, slots_mode, weights, loss_threshold,
          threshold_window, time_limit, snapshot_time_limit, grid_rows, grid_cols,
          grid_spacing, sigma_fraction, hex_spacing, max_range_factor, theta, tau, out):
    """Sweep (seed, N, K, weight) cells and aggregate total loss into a CSV."""

    def ints(text: str) -> list[int]:
        try:
            return [int(tok) for tok in text.split(",") if tok.strip() != ""]
        except ValueError:
            click.echo(f"error: expected comma-separated integers, got {text!r}", err=True)
            sys.exit(EXIT_INPUT)

    payload = {
        "kind": kind,
        "num_users": users,
        "seeds": ints(seeds),
        "interfaces": ints(interfaces),
        "slots": ints(slots),
        "slots_mode": slots_mode,
        "weight_kinds": [tok.strip() for tok in weights.split(",") if tok.strip()],
        "loss_threshold": loss_threshold,
        "threshold_window": threshold_window,
        "time_limit_s": time_limit,
        "snapshot_time_limit_s": snapshot_time_limit,
        "scenario_kwargs": {
            "grid_rows": grid_rows,
            "grid_cols": grid_cols,
            "grid_spacing": grid_spacing,
            "sigma_fraction": sigma_fraction,
            "hex_spacing": hex_spacing,
            "max_range_factor": max_range_factor,
            "rotation_step_deg": theta,
            "slot_seconds": tau,
        },
    }
    with _client(ctx.obj["server"]) as client:
        body = _post(client, "/sweep", payload)
    _write(Path(out) / f"sweep_{kind}.csv", body["csv"])
    failures = [row for row in body["rows"] if row["error"]]
    click.echo(f"{len(body['rows'])} cells, {len(failures)} failed")
    for row in failures:
        click.echo(
            f"  N={row['interfaces']} slots_axis={row['slots_axis']} seed={row['seed']}: {row['error']}",
            err=True,
        )


@main.command("export-lp")
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--keep-rate-vars", is_flag=True, help="Keep explicit per-link rate variables.")
@click.option("--no-prune", is_flag=True, help="Skip reachability pruning.")
@click.option("--free-boundaries", is_flag=True, help="Drop snapshot pinning and movement coupling.")
@click.option("--out", default=".", show_default=True, metavar="DIR")
@click.pass_context
def export_lp(ctx, scenario_file, keep_rate_vars, no_prune, free_boundaries, out):
    """Write the scenario's MILP in LP text format without solving."""
    scenario = _load_json(scenario_file)
    payload = {
        "scenario": scenario,
        "keep_rate_vars": keep_rate_vars,
        "prune_unreachable": not no_prune,
        "fix_boundaries": not free_boundaries,
    }
    with _client(ctx.obj["server"]) as client:
        body = _post(client, "/model/lp", payload)
    _write(Path(out) / f"{Path(scenario_file).stem}.lp", body["lp"])
    click.echo(
        f"model {body['model_name']}: {body['num_variables']} variables, "
        f"{body['num_constraints']} constraints"
    )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the planning service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
