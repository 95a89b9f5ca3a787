"""Time-expanded MILP for transition planning, plan decoding, and checking.

The model spans K slots. Per slot it carries directed link binaries x (one per
ordered interface pair the connectivity matrix allows), directed flows z,
per-interface orientations a with clockwise/counter-clockwise step binaries
psi/omega between consecutive slots, alignment indicators p with wrap-count
integers beta, per-node loss l, and fiber ingress. Slot 1 is pinned to the
initial snapshot and orientations, slot K to the final snapshot, and the
objective is the weighted sum of per-slot losses.

Exactness-preserving reductions applied here (both covered by equivalence
tests): link/alignment variables whose bearing is unreachable inside the
rotation budget are dropped (`prune_unreachable`), and the redundant per-link
rate variable is projected out, leaving flows bounded by capacity times x
(`keep_rate_vars=True` rebuilds the literal four-row linearization).
"""

from __future__ import annotations

import math
from typing import Optional

from .geometry import angle_step, circ_step_distance, circular_diff_deg, min_horizon, num_steps
from .milp import MilpModel
from .models import (
    PlanMetrics,
    Scenario,
    SlotMetrics,
    SlotState,
    SolveConfig,
    SolveReport,
    TransitionPlan,
    Violation,
    WeightSchedule,
)
from .solver import Solution, solve_milp

BIG_M_DEG = 360.0


def x_name(d: int, n: int, dp: int, np_: int, k: int) -> str:
    return f"x_{d}_{n}_{dp}_{np_}_k{k}"


def z_name(d: int, n: int, dp: int, np_: int, k: int) -> str:
    return f"z_{d}_{n}_{dp}_{np_}_k{k}"


def rate_name(d: int, n: int, dp: int, np_: int, k: int) -> str:
    return f"r_{d}_{n}_{dp}_{np_}_k{k}"


def a_name(d: int, n: int, k: int) -> str:
    return f"a_{d}_{n}_k{k}"


def psi_name(d: int, n: int, k: int) -> str:
    return f"psi_{d}_{n}_k{k}"


def omega_name(d: int, n: int, k: int) -> str:
    return f"omega_{d}_{n}_k{k}"


def p_name(d: int, n: int, dp: int, k: int) -> str:
    return f"p_{d}_{n}_{dp}_k{k}"


def beta_name(d: int, n: int, k: int) -> str:
    return f"beta_{d}_{n}_k{k}"


def loss_name(d: int, k: int) -> str:
    return f"l_{d}_k{k}"


def input_name(d: int, k: int) -> str:
    return f"input_{d}_k{k}"


def weight(kind: str, k: int) -> float:
    """Per-slot loss weight m_k for a schedule kind."""
    return WeightSchedule(kind=kind).weight(k)


def big_m_value(scenario: Scenario) -> float:
    """Valid big-M for the alignment rows of any scenario.

    Wrap-count bounds always include the wrap nearest the current orientation,
    so the residual a - V - 360*beta can be kept inside (-360, 360) whichever
    value the orientation takes; when an aligned neighbor pins beta, a second
    neighbor's residual is the difference of two distinct bearings in
    [0, 360), at most 360 minus the rotation step. 360 therefore suffices for
    every scenario and is approached as the rotation step shrinks, so it is
    the smallest scenario-independent constant.
    """
    del scenario
    return BIG_M_DEG


def threshold_profile(num_slots: int, v: float, window: str = "half") -> list[float]:
    """Per-slot loss-threshold profile.

    "half" caps the second half of the horizon (slots ceil(K/2)..K) at v and
    leaves the rest uncapped; "all" caps every slot.
    """
    if not 0 <= v <= 1:
        raise ValueError("threshold must lie in [0, 1]")
    if window == "all":
        return [v] * num_slots
    if window == "half":
        first = math.ceil(num_slots / 2)
        return [v if k >= first else 1.0 for k in range(1, num_slots + 1)]
    raise ValueError(f"unknown threshold window {window!r}")


def apply_loss_thresholds(scenario: Scenario, v_profile: list[float]) -> Scenario:
    """Copy of the scenario with the per-slot loss thresholds replaced."""
    data = scenario.model_dump()
    data["loss_thresholds"] = list(v_profile)
    return Scenario(**data)


def build_model(
    scenario: Scenario,
    *,
    prune_unreachable: bool = True,
    keep_rate_vars: bool = False,
    force_threshold_rows: bool = False,
    big_m_deg: Optional[float] = None,
    fix_boundaries: bool = True,
) -> MilpModel:
    """Assemble the transition MILP for a scenario.

    With fix_boundaries=False the boundary and orientation-dynamics pinning is
    omitted (orientations range over the full circle), which is the one-slot
    static placement model the snapshot generators solve.
    """
    topo = scenario.topology
    d_count = topo.num_nodes
    n_count = topo.interfaces_per_node
    num_slots = scenario.num_slots
    theta = scenario.rotation_step_deg
    total_steps = num_steps(theta)
    v = topo.alignment_deg
    delta = topo.connectivity
    cap = topo.capacity_mbps
    rho = scenario.demands_mbps
    total_rho = float(sum(rho))
    fiber = sorted(topo.fiber_nodes)
    big_m = big_m_value(scenario) if big_m_deg is None else float(big_m_deg)

    for d in range(d_count):
        for e in range(d_count):
            if delta[d][e] and abs(cap[d][e] - cap[e][d]) > 1e-9:
                raise ValueError("capacity matrix must be symmetric")

    if fix_boundaries:
        horizon = min_horizon(
            scenario.initial_orientations_deg,
            scenario.final_links,
            topo.alignment_deg,
            theta,
        )
        if num_slots < horizon:
            raise ValueError(
                f"horizon too short: K={num_slots} is below the {horizon} slots "
                "needed to rotate every interface to its final bearing"
            )

    def step_of(angle: float) -> Optional[int]:
        try:
            return angle_step(angle, theta)
        except ValueError:
            return None

    a0 = scenario.initial_orientations_deg
    a0_step = [[step_of(angle) for angle in row] for row in a0]
    targets: dict[tuple[int, int], int] = {}
    if fix_boundaries:
        for d, n, dp, np_ in scenario.final_links:
            targets[(d, n)] = step_of(v[d][dp])
            targets[(dp, np_)] = step_of(v[dp][d])

    def reachable(d: int, n: int, bearing_step: Optional[int], k: int) -> bool:
        if not (prune_unreachable and fix_boundaries):
            return True
        if bearing_step is None or a0_step[d][n] is None:
            return False
        if circ_step_distance(a0_step[d][n], bearing_step, total_steps) > k - 1:
            return False
        goal = targets.get((d, n))
        if goal is not None:
            if circ_step_distance(bearing_step, goal, total_steps) > num_slots - k:
                return False
        return True

    ordered_pairs = [
        (d, n, dp, np_)
        for d in range(d_count)
        for n in range(n_count)
        for dp in range(d_count)
        if delta[d][dp]
        for np_ in range(n_count)
    ]

    model = MilpModel(name="transition" if fix_boundaries else "snapshot")
    init_pairs = set(scenario.initial_links)
    final_pairs = set(scenario.final_links)
    conflicts: list[int] = []

    # link binaries; boundary slots pinned through bounds
    x_vars: dict[tuple[int, int, int, int, int], int] = {}
    for k in range(1, num_slots + 1):
        for d, n, dp, np_ in ordered_pairs:
            if not (
                reachable(d, n, step_of(v[d][dp]), k)
                and reachable(dp, np_, step_of(v[dp][d]), k)
            ):
                continue
            lb, ub = 0.0, 1.0
            if fix_boundaries:
                if k == 1:
                    lb = ub = 1.0 if (d, n, dp, np_) in init_pairs else 0.0
                if k == num_slots:
                    forced = 1.0 if (d, n, dp, np_) in final_pairs else 0.0
                    lb, ub = max(lb, forced), min(ub, forced)
            name = x_name(d, n, dp, np_, k)
            if lb > ub:
                # K=1 with clashing snapshots: keep the model solvable in
                # structure and let the solver report infeasibility
                idx = model.add_variable(name, 0.0, 1.0, integer=True)
                conflicts.append(idx)
            else:
                idx = model.add_variable(name, lb, ub, integer=True)
            x_vars[(d, n, dp, np_, k)] = idx
    if fix_boundaries:
        for pair in init_pairs:
            if (*pair, 1) not in x_vars:
                raise ValueError(f"initial link {pair} cannot exist at slot 1")
        for pair in final_pairs:
            if (*pair, num_slots) not in x_vars:
                raise ValueError(f"final link {pair} cannot exist at slot K")

    z_vars: dict[tuple[int, int, int, int, int], int] = {}
    for key in x_vars:
        d, n, dp, np_, k = key
        z_vars[key] = model.add_variable(z_name(*key), 0.0, cap[d][dp])
    r_vars: dict[tuple[int, int, int, int, int], int] = {}
    if keep_rate_vars:
        for key in x_vars:
            d, n, dp, np_, k = key
            r_vars[key] = model.add_variable(rate_name(*key), 0.0, cap[d][dp])

    a_vars: dict[tuple[int, int, int], int] = {}
    for k in range(1, num_slots + 1):
        for d in range(d_count):
            for n in range(n_count):
                if fix_boundaries:
                    reach = (k - 1) * theta
                    lb = a0[d][n] if k == 1 else a0[d][n] - reach
                    ub = a0[d][n] if k == 1 else a0[d][n] + reach
                else:
                    lb, ub = 0.0, 360.0 - theta
                a_vars[(d, n, k)] = model.add_variable(a_name(d, n, k), lb, ub)

    psi_vars: dict[tuple[int, int, int], int] = {}
    omega_vars: dict[tuple[int, int, int], int] = {}
    for k in range(1, num_slots):
        for d in range(d_count):
            for n in range(n_count):
                psi_vars[(d, n, k)] = model.add_variable(
                    psi_name(d, n, k), 0.0, 1.0, integer=True
                )
                omega_vars[(d, n, k)] = model.add_variable(
                    omega_name(d, n, k), 0.0, 1.0, integer=True
                )

    p_vars: dict[tuple[int, int, int, int], int] = {}
    for k in range(1, num_slots + 1):
        for d in range(d_count):
            for n in range(n_count):
                for dp in range(d_count):
                    if not delta[d][dp]:
                        continue
                    if not reachable(d, n, step_of(v[d][dp]), k):
                        continue
                    p_vars[(d, n, dp, k)] = model.add_variable(
                        p_name(d, n, dp, k), 0.0, 1.0, integer=True
                    )

    beta_vars: dict[tuple[int, int, int], int] = {}
    for k in range(1, num_slots + 1):
        for d in range(d_count):
            for n in range(n_count):
                if not any((d, n, dp, k) in p_vars for dp in range(d_count)):
                    continue
                if fix_boundaries:
                    lo = a0[d][n] - (k - 1) * theta
                    hi = a0[d][n] + (k - 1) * theta
                    blo = math.floor(lo / 360.0 + 1e-12)
                    bhi = math.floor(hi / 360.0 + 1e-12)
                else:
                    blo = bhi = 0
                beta_vars[(d, n, k)] = model.add_variable(
                    beta_name(d, n, k), blo, bhi, integer=True
                )

    loss_vars: dict[tuple[int, int], int] = {}
    for k in range(1, num_slots + 1):
        for d in range(d_count):
            loss_vars[(d, k)] = model.add_variable(loss_name(d, k), 0.0, rho[d])
    input_vars: dict[tuple[int, int], int] = {}
    for k in range(1, num_slots + 1):
        for d in fiber:
            input_vars[(d, k)] = model.add_variable(input_name(d, k), 0.0, total_rho)

    for idx in conflicts:
        model.add_constraint({idx: 1.0}, ">=", 1.0, name=f"pin1_{model.variables[idx].name}")
        model.add_constraint({idx: 1.0}, "<=", 0.0, name=f"pin0_{model.variables[idx].name}")

    for k in range(1, num_slots + 1):
        # one link per interface, counting both endpoint roles
        for d in range(d_count):
            for n in range(n_count):
                coeffs: dict[int, float] = {}
                for dp in range(d_count):
                    if not delta[d][dp]:
                        continue
                    for np_ in range(n_count):
                        out_key = (d, n, dp, np_, k)
                        in_key = (dp, np_, d, n, k)
                        if out_key in x_vars:
                            coeffs[x_vars[out_key]] = coeffs.get(x_vars[out_key], 0.0) + 1.0
                        if in_key in x_vars:
                            coeffs[x_vars[in_key]] = coeffs.get(x_vars[in_key], 0.0) + 1.0
                if coeffs:
                    model.add_constraint(coeffs, "<=", 1.0, name=f"iface_{d}_{n}_k{k}")

        # flows gated by capacity and link activation
        for key, z_idx in z_vars.items():
            if key[4] != k:
                continue
            d, n, dp, np_, _ = key
            r_cap = cap[d][dp]
            model.add_constraint(
                {z_idx: 1.0, x_vars[key]: -r_cap},
                "<=",
                0.0,
                name="cap_" + "_".join(map(str, key[:4])) + f"_k{k}",
            )
            if keep_rate_vars:
                stem = "_".join(map(str, key[:4])) + f"_k{k}"
                model.add_constraint(
                    {z_idx: 1.0, r_vars[key]: -1.0}, "<=", 0.0, name=f"zra_{stem}"
                )
                model.add_constraint(
                    {z_idx: 1.0, r_vars[key]: -1.0, x_vars[key]: -r_cap},
                    ">=",
                    -r_cap,
                    name=f"zrb_{stem}",
                )

        # per-node conservation with loss, plus fiber ingress
        for d in range(d_count):
            coeffs = {loss_vars[(d, k)]: 1.0}
            for dp in range(d_count):
                if not delta[d][dp]:
                    continue
                for n in range(n_count):
                    for np_ in range(n_count):
                        in_key = (dp, np_, d, n, k)
                        out_key = (d, n, dp, np_, k)
                        if in_key in z_vars:
                            coeffs[z_vars[in_key]] = coeffs.get(z_vars[in_key], 0.0) + 1.0
                        if out_key in z_vars:
                            coeffs[z_vars[out_key]] = coeffs.get(z_vars[out_key], 0.0) - 1.0
            if (d, k) in input_vars:
                coeffs[input_vars[(d, k)]] = 1.0
            model.add_constraint(coeffs, "=", rho[d], name=f"flow_{d}_k{k}")

        model.add_constraint(
            {input_vars[(d, k)]: 1.0 for d in fiber},
            "<=",
            total_rho,
            name=f"ingress_k{k}",
        )

        v_k = scenario.threshold(k)
        if force_threshold_rows or v_k < 1.0:
            model.add_constraint(
                {loss_vars[(d, k)]: 1.0 for d in range(d_count)},
                "<=",
                v_k * total_rho,
                name=f"thresh_k{k}",
            )

        # alignment: p pins the orientation to the bearing modulo 360
        for (d, n, dp, kk), p_idx in p_vars.items():
            if kk != k:
                continue
            a_idx = a_vars[(d, n, k)]
            b_idx = beta_vars[(d, n, k)]
            bearing = v[d][dp]
            model.add_constraint(
                {a_idx: 1.0, b_idx: -360.0, p_idx: big_m},
                "<=",
                bearing + big_m,
                name=f"aligna_{d}_{n}_{dp}_k{k}",
            )
            model.add_constraint(
                {a_idx: 1.0, b_idx: -360.0, p_idx: -big_m},
                ">=",
                bearing - big_m,
                name=f"alignb_{d}_{n}_{dp}_k{k}",
            )

        # links in either direction only between aligned endpoints
        for key, x_idx in x_vars.items():
            if key[4] != k:
                continue
            d, n, dp, np_, _ = key
            mirror = x_vars[(dp, np_, d, n, k)]
            coeffs = {p_vars[(d, n, dp, k)]: -1.0}
            coeffs[x_idx] = coeffs.get(x_idx, 0.0) + 1.0
            coeffs[mirror] = coeffs.get(mirror, 0.0) + 1.0
            model.add_constraint(
                coeffs,
                "<=",
                0.0,
                name="xp_" + "_".join(map(str, key[:4])) + f"_k{k}",
            )

    for k in range(1, num_slots):
        for d in range(d_count):
            for n in range(n_count):
                model.add_constraint(
                    {psi_vars[(d, n, k)]: 1.0, omega_vars[(d, n, k)]: 1.0},
                    "<=",
                    1.0,
                    name=f"excl_{d}_{n}_k{k}",
                )
                model.add_constraint(
                    {
                        a_vars[(d, n, k + 1)]: 1.0,
                        a_vars[(d, n, k)]: -1.0,
                        psi_vars[(d, n, k)]: -theta,
                        omega_vars[(d, n, k)]: theta,
                    },
                    "=",
                    0.0,
                    name=f"rot_{d}_{n}_k{k}",
                )

    objective = {}
    for (d, k), idx in loss_vars.items():
        objective[idx] = scenario.weights.weight(k)
    model.set_objective(objective)
    return model


def _parse_k(token: str) -> int:
    if not token.startswith("k"):
        raise ValueError(f"bad slot token {token!r}")
    return int(token[1:])


def extract_plan(
    scenario: Scenario, solution: Solution, model: MilpModel
) -> TransitionPlan:
    """Decode a solver assignment into per-slot network states.

    Binaries are rounded at 0.5. Display orientations are reduced into
    [0, 360); the raw unwrapped values are kept alongside for dynamics checks.
    """
    if solution.values is None:
        raise ValueError(f"solution status {solution.status!r} has no assignment")
    topo = scenario.topology
    d_count = topo.num_nodes
    n_count = topo.interfaces_per_node
    num_slots = scenario.num_slots

    raw = [
        [[0.0] * n_count for _ in range(d_count)] for _ in range(num_slots + 1)
    ]
    cw = [
        [[False] * n_count for _ in range(d_count)] for _ in range(num_slots + 1)
    ]
    ccw = [
        [[False] * n_count for _ in range(d_count)] for _ in range(num_slots + 1)
    ]
    links: list[list[tuple[int, int, int, int]]] = [[] for _ in range(num_slots + 1)]
    flows: list[dict[tuple[int, int, int, int], float]] = [
        {} for _ in range(num_slots + 1)
    ]
    loss = [[0.0] * d_count for _ in range(num_slots + 1)]
    ingress: list[dict[int, float]] = [{} for _ in range(num_slots + 1)]

    for var in model.variables:
        if var.index not in solution.values:
            raise ValueError(f"assignment missing variable {var.name}")
        value = solution.values[var.index]
        parts = var.name.split("_")
        kind = parts[0]
        if kind == "x":
            d, n, dp, np_ = map(int, parts[1:5])
            k = _parse_k(parts[5])
            if value > 0.5:
                links[k].append((d, n, dp, np_))
        elif kind == "z":
            d, n, dp, np_ = map(int, parts[1:5])
            k = _parse_k(parts[5])
            flows[k][(d, n, dp, np_)] = max(0.0, value)
        elif kind == "a":
            d, n = int(parts[1]), int(parts[2])
            k = _parse_k(parts[3])
            raw[k][d][n] = value
        elif kind == "psi":
            d, n = int(parts[1]), int(parts[2])
            k = _parse_k(parts[3])
            cw[k][d][n] = value > 0.5
        elif kind == "omega":
            d, n = int(parts[1]), int(parts[2])
            k = _parse_k(parts[3])
            ccw[k][d][n] = value > 0.5
        elif kind == "l":
            d = int(parts[1])
            k = _parse_k(parts[2])
            loss[k][d] = max(0.0, value)
        elif kind == "input":
            d = int(parts[1])
            k = _parse_k(parts[2])
            ingress[k][d] = max(0.0, value)

    slots = []
    for k in range(1, num_slots + 1):
        ordered = sorted(links[k])
        display = [
            [round(raw[k][d][n] % 360.0, 6) % 360.0 for n in range(n_count)]
            for d in range(d_count)
        ]
        slots.append(
            SlotState(
                k=k,
                orientations_deg=display,
                orientations_raw_deg=[row[:] for row in raw[k]],
                rotating_cw=[row[:] for row in cw[k]],
                rotating_ccw=[row[:] for row in ccw[k]],
                links=ordered,
                flows_mbps=[flows[k].get(key, 0.0) for key in ordered],
                loss_mbps=loss[k][:],
                ingress_mbps=dict(sorted(ingress[k].items())),
            )
        )
    objective = (
        solution.objective
        if solution.objective is not None
        else model.objective_value(
            [solution.values[i] for i in range(model.num_variables)]
        )
    )
    return TransitionPlan(scenario=scenario, objective=float(objective), slots=slots)


def validate_plan(scenario: Scenario, plan: TransitionPlan) -> list[Violation]:
    """Independently re-check every constraint family against a plan.

    Never consults the MILP; an empty list certifies the plan feasible.
    """
    topo = scenario.topology
    d_count = topo.num_nodes
    n_count = topo.interfaces_per_node
    num_slots = scenario.num_slots
    theta = scenario.rotation_step_deg
    rho = scenario.demands_mbps
    total_rho = sum(rho)
    rate_tol = 1e-6 * max(1.0, total_rho)
    out: list[Violation] = []

    def bad(code: str, message: str, slot=None, subject=None, amount=None) -> None:
        out.append(
            Violation(code=code, message=message, slot=slot, subject=subject, amount=amount)
        )

    if len(plan.slots) != num_slots:
        bad("shape", f"plan has {len(plan.slots)} slots, scenario wants {num_slots}")
        return out

    for slot in plan.slots:
        k = slot.k
        used: set[tuple[int, int]] = set()
        for link, flow in zip(slot.links, slot.flows_mbps):
            d, n, dp, np_ = link
            if not (
                0 <= d < d_count
                and 0 <= dp < d_count
                and 0 <= n < n_count
                and 0 <= np_ < n_count
            ):
                bad("link-ids", f"link {link} out of range", slot=k, subject=list(link))
                continue
            if not topo.connectivity[d][dp]:
                bad(
                    "delta",
                    f"link {link} joins nodes connectivity forbids",
                    slot=k,
                    subject=list(link),
                )
            for end in ((d, n), (dp, np_)):
                if end in used:
                    bad(
                        "interface-reuse",
                        f"interface {end} carries more than one link",
                        slot=k,
                        subject=list(end),
                    )
                used.add(end)
            r_cap = topo.capacity_mbps[d][dp]
            if flow > r_cap + rate_tol:
                bad(
                    "capacity",
                    f"flow {flow:.6g} exceeds capacity {r_cap:.6g} on {link}",
                    slot=k,
                    subject=list(link),
                    amount=flow - r_cap,
                )
            if flow < -rate_tol:
                bad("flow-negative", f"negative flow on {link}", slot=k, subject=list(link))
            want = topo.alignment_deg[d][dp]
            have = slot.orientations_raw_deg[d][n]
            if circular_diff_deg(have, want) > 1e-5:
                bad(
                    "alignment",
                    f"link {link}: interface ({d},{n}) at {have:.6g} deg, bearing needs {want:.6g}",
                    slot=k,
                    subject=list(link),
                )
            want_back = topo.alignment_deg[dp][d]
            have_back = slot.orientations_raw_deg[dp][np_]
            if circular_diff_deg(have_back, want_back) > 1e-5:
                bad(
                    "alignment",
                    f"link {link}: interface ({dp},{np_}) at {have_back:.6g} deg, bearing needs {want_back:.6g}",
                    slot=k,
                    subject=list(link),
                )

        for d in range(d_count):
            l_d = slot.loss_mbps[d]
            if l_d < -rate_tol or l_d > rho[d] + rate_tol:
                bad(
                    "loss-bound",
                    f"node {d} loss {l_d:.6g} outside [0, {rho[d]:.6g}]",
                    slot=k,
                    subject=[d],
                    amount=l_d,
                )
            inflow = sum(
                f for link, f in zip(slot.links, slot.flows_mbps) if link[2] == d
            )
            outflow = sum(
                f for link, f in zip(slot.links, slot.flows_mbps) if link[0] == d
            )
            balance = inflow - outflow + l_d + slot.ingress_mbps.get(d, 0.0) - rho[d]
            if abs(balance) > rate_tol:
                bad(
                    "conservation",
                    f"node {d} flow imbalance {balance:.6g} Mbps",
                    slot=k,
                    subject=[d],
                    amount=balance,
                )

        for d, amount in slot.ingress_mbps.items():
            if d not in topo.fiber_nodes:
                bad("ingress-node", f"ingress at non-fiber node {d}", slot=k, subject=[d])
            if amount < -rate_tol:
                bad("ingress-negative", f"negative ingress at node {d}", slot=k, subject=[d])
        if sum(slot.ingress_mbps.values()) > total_rho + rate_tol:
            bad(
                "ingress-cap",
                "total ingress exceeds total demand",
                slot=k,
                amount=sum(slot.ingress_mbps.values()) - total_rho,
            )

        total_loss = sum(slot.loss_mbps)
        v_k = scenario.threshold(k)
        if total_loss > v_k * total_rho + rate_tol:
            bad(
                "threshold",
                f"slot loss {total_loss:.6g} exceeds {v_k:.2f} of demand",
                slot=k,
                amount=total_loss - v_k * total_rho,
            )

        for d in range(d_count):
            for n in range(n_count):
                if slot.rotating_cw[d][n] and slot.rotating_ccw[d][n]:
                    bad(
                        "movement-exclusive",
                        f"interface ({d},{n}) flagged rotating both ways",
                        slot=k,
                        subject=[d, n],
                    )
                display = slot.orientations_deg[d][n]
                raw_val = slot.orientations_raw_deg[d][n]
                if circular_diff_deg(display, raw_val) > 1e-5 or not 0 <= display < 360:
                    bad(
                        "display",
                        f"display orientation {display} does not match raw {raw_val}",
                        slot=k,
                        subject=[d, n],
                    )

    for idx in range(num_slots - 1):
        cur = plan.slots[idx]
        nxt = plan.slots[idx + 1]
        for d in range(d_count):
            for n in range(n_count):
                step = theta * (
                    (1 if cur.rotating_cw[d][n] else 0)
                    - (1 if cur.rotating_ccw[d][n] else 0)
                )
                drift = (
                    nxt.orientations_raw_deg[d][n]
                    - cur.orientations_raw_deg[d][n]
                    - step
                )
                if abs(drift) > 1e-5:
                    bad(
                        "dynamics",
                        f"interface ({d},{n}) moved {drift:+.6g} deg beyond its flags "
                        f"between slots {cur.k} and {nxt.k}",
                        slot=cur.k,
                        subject=[d, n],
                    )

    first = plan.slots[0]
    if sorted(first.links) != sorted(scenario.initial_links):
        bad("boundary-initial", "slot 1 links differ from the initial snapshot", slot=1)
    for d in range(d_count):
        for n in range(n_count):
            if abs(first.orientations_raw_deg[d][n] - scenario.initial_orientations_deg[d][n]) > 1e-5:
                bad(
                    "boundary-orientation",
                    f"interface ({d},{n}) does not start at its initial orientation",
                    slot=1,
                    subject=[d, n],
                )
    last = plan.slots[-1]
    if sorted(last.links) != sorted(scenario.final_links):
        bad(
            "boundary-final",
            "slot K links differ from the final snapshot",
            slot=num_slots,
        )
    return out


def compute_metrics(
    scenario: Scenario, plan: TransitionPlan, lossless_tol_mbps: float = 1e-6
) -> PlanMetrics:
    """Loss metrics of a plan: per-slot series, total volume, convergence."""
    total_rho = sum(scenario.demands_mbps)
    per_slot = []
    total_mb = 0.0
    weighted = 0.0
    for slot in plan.slots:
        loss = float(sum(slot.loss_mbps))
        per_slot.append(
            SlotMetrics(
                k=slot.k,
                loss_mbps=loss,
                loss_fraction=loss / total_rho if total_rho > 0 else 0.0,
                active_links=len(slot.links),
            )
        )
        total_mb += scenario.slot_seconds * loss
        weighted += scenario.weights.weight(slot.k) * loss
    lossless: Optional[int] = None
    for metric in reversed(per_slot):
        if metric.loss_mbps <= lossless_tol_mbps:
            lossless = metric.k
        else:
            break
    return PlanMetrics(
        per_slot=per_slot,
        total_loss_gb=total_mb / 8000.0,
        slots_to_lossless=lossless,
        weighted_objective=weighted,
    )


def plan_transition(
    scenario: Scenario,
    config: Optional[SolveConfig] = None,
    *,
    prune_unreachable: bool = True,
) -> tuple[Optional[TransitionPlan], SolveReport]:
    """Build, solve, and decode in one step.

    Returns (plan, report); the plan is None when the solver proves
    infeasibility or stops on a limit without an incumbent.
    """
    model = build_model(scenario, prune_unreachable=prune_unreachable)
    solution = solve_milp(model, config)
    if solution.values is None:
        return None, solution.report()
    return extract_plan(scenario, solution, model), solution.report()
