"""Model assembly, exactness-preserving reductions, decoding, and checking.

The workhorse fixture is a collinear trio (fiber node flanked north and
south, outer nodes out of range of each other) whose single fiber interface
is pinned to the south peer by both snapshots. The north node can then never
be served, so the optimum is its demand summed over the horizon: an exact,
hand-checkable objective for equivalence tests across build variants.
"""

from collections import Counter

import pytest

from steermesh.models import Scenario, SolveConfig, Topology
from steermesh.planner import (
    BIG_M_DEG,
    apply_loss_thresholds,
    big_m_value,
    build_model,
    compute_metrics,
    extract_plan,
    plan_transition,
    threshold_profile,
    validate_plan,
)
from steermesh.solver import solve_milp

from _support import micro_scenario, micro_topology

CFG = SolveConfig(deterministic=True)


def trio_topology() -> Topology:
    # 1 <-> 2 distance is 200 m, past the 150 m range: node 0 relays or nothing
    return micro_topology(
        [(0.0, 0.0), (0.0, 100.0), (0.0, -100.0)], interfaces=1, theta=90.0
    )


def trio_scenario(weights: str = "constant") -> Scenario:
    topo = trio_topology()
    a0 = [
        [topo.alignment_deg[0][2]],
        [topo.alignment_deg[1][0]],
        [topo.alignment_deg[2][0]],
    ]
    return micro_scenario(
        topo,
        [0.0, 100.0, 500.0],
        [(0, 0, 2, 0)],
        [(0, 0, 2, 0)],
        num_slots=2,
        a0=a0,
        weights=weights,
    )


TRIO_OPTIMUM = 200.0  # 100 Mbps unservable at node 1, two slots, unit weights


def solve_build(scenario: Scenario, **kwargs):
    model = build_model(scenario, **kwargs)
    return model, solve_milp(model, CFG)


class TestBuildModel:
    def test_unpruned_variable_census(self):
        scen = trio_scenario()
        model = build_model(scen, prune_unreachable=False)
        census = Counter(var.name.split("_")[0] for var in model.variables)
        d, n, k, nnz, fiber = 3, 1, 2, 4, 1
        assert census["x"] == nnz * n * n * k
        assert census["z"] == census["x"]
        assert census["a"] == d * n * k
        assert census["psi"] == d * n * (k - 1)
        assert census["omega"] == d * n * (k - 1)
        assert census["p"] == nnz * n * k
        assert census["l"] == d * k
        assert census["input"] == fiber * k
        assert "r" not in census

    def test_pruning_drops_unreachable_links_only(self):
        scen = trio_scenario()
        pruned = build_model(scen, prune_unreachable=True)
        census = Counter(var.name.split("_")[0] for var in pruned.variables)
        # the 0 <-> 1 pair is unreachable in both slots, in both directions
        assert census["x"] == 4
        assert census["z"] == 4

    def test_boundary_slots_pinned_through_bounds(self):
        scen = trio_scenario()
        model = build_model(scen)
        by_name = {var.name: var for var in model.variables}
        for k in (1, 2):
            var = by_name[f"x_0_0_2_0_k{k}"]
            assert (var.lb, var.ub) == (1.0, 1.0)
        a_first = by_name["a_0_0_k1"]
        assert a_first.lb == a_first.ub == scen.initial_orientations_deg[0][0]

    def test_horizon_too_short_raises(self):
        topo = trio_topology()
        a0 = [[0.0], [topo.alignment_deg[1][0]], [topo.alignment_deg[2][0]]]
        scen = micro_scenario(
            topo, [0.0, 0.0, 500.0], [], [(0, 0, 2, 0)], num_slots=1, a0=a0
        )
        with pytest.raises(ValueError, match="horizon too short"):
            build_model(scen)

    def test_asymmetric_capacity_rejected(self):
        topo = trio_topology()
        data = topo.model_dump()
        data["capacity_mbps"][0][1] = 999.0
        scen = micro_scenario(
            Topology(**data), [0.0, 0.0, 0.0], [], [], num_slots=1
        )
        with pytest.raises(ValueError, match="symmetric"):
            build_model(scen)

    def test_threshold_rows_emitted_only_when_binding(self):
        scen = trio_scenario()
        plain = build_model(scen)
        assert not [c for c in plain.constraints if c.name.startswith("thresh_")]
        forced = build_model(scen, force_threshold_rows=True)
        rows = [c for c in forced.constraints if c.name.startswith("thresh_")]
        assert len(rows) == scen.num_slots
        assert solve_milp(forced, CFG).objective == pytest.approx(TRIO_OPTIMUM)


class TestExactnessPreservingReductions:
    def test_pruned_matches_unpruned(self):
        scen = trio_scenario()
        _, lean = solve_build(scen, prune_unreachable=True)
        _, full = solve_build(scen, prune_unreachable=False)
        assert lean.status == full.status == "optimal"
        assert lean.objective == pytest.approx(TRIO_OPTIMUM, abs=1e-9)
        assert full.objective == pytest.approx(TRIO_OPTIMUM, abs=1e-9)

    def test_rate_variable_linearization_matches(self):
        scen = trio_scenario()
        model, solution = solve_build(
            scen, prune_unreachable=False, keep_rate_vars=True
        )
        assert any(var.name.startswith("r_") for var in model.variables)
        assert solution.objective == pytest.approx(TRIO_OPTIMUM, abs=1e-9)

    def test_small_big_m_cuts_unpruned_orientations(self):
        # the fiber interface holds 180 deg while the north bearing is 0 deg:
        # residual 180 exceeds M=90, so the relaxed alignment row goes
        # infeasible. Pruning removes exactly those rows, hence the default-M
        # certificate must run on the unpruned build.
        scen = trio_scenario()
        _, wide = solve_build(scen, prune_unreachable=False, big_m_deg=360.0)
        assert wide.status == "optimal"
        assert wide.objective == pytest.approx(TRIO_OPTIMUM, abs=1e-9)
        _, narrow = solve_build(scen, prune_unreachable=False, big_m_deg=90.0)
        assert narrow.status == "infeasible"
        _, masked = solve_build(scen, prune_unreachable=True, big_m_deg=90.0)
        assert masked.status == "optimal"

    def test_big_m_constant(self):
        assert big_m_value(trio_scenario()) == BIG_M_DEG == 360.0


class TestSolveAndDecode:
    def test_single_slot_snapshot_clash_is_infeasible(self):
        topo = micro_topology([(0.0, 0.0), (0.0, 100.0)], interfaces=1)
        scen = micro_scenario(
            topo, [0.0, 500.0], [(0, 0, 1, 0)], [], num_slots=1
        )
        plan, report = plan_transition(scen, CFG)
        assert plan is None
        assert report.status == "infeasible"

    def test_extract_requires_an_assignment(self):
        topo = micro_topology([(0.0, 0.0), (0.0, 100.0)], interfaces=1)
        scen = micro_scenario(topo, [0.0, 500.0], [(0, 0, 1, 0)], [], num_slots=1)
        model = build_model(scen)
        solution = solve_milp(model, CFG)
        with pytest.raises(ValueError, match="no assignment"):
            extract_plan(scen, solution, model)

    def test_objective_equals_weighted_plan_loss(self):
        scen = trio_scenario(weights="exponential")
        plan, report = plan_transition(scen, CFG)
        assert report.status == "optimal"
        recomputed = sum(
            scen.weights.weight(slot.k) * sum(slot.loss_mbps)
            for slot in plan.slots
        )
        assert plan.objective == pytest.approx(recomputed, rel=1e-9)
        metrics = compute_metrics(scen, plan)
        assert metrics.weighted_objective == pytest.approx(plan.objective, rel=1e-9)

    def test_metrics_of_the_trio_plan(self):
        scen = trio_scenario()
        plan, _ = plan_transition(scen, CFG)
        metrics = compute_metrics(scen, plan)
        assert [m.loss_mbps for m in metrics.per_slot] == pytest.approx([100.0, 100.0])
        assert [m.loss_fraction for m in metrics.per_slot] == pytest.approx([1 / 6, 1 / 6])
        # 100 Mbps x 0.2 s x 2 slots = 40 Mb = 0.005 GB
        assert metrics.total_loss_gb == pytest.approx(0.005)
        assert metrics.slots_to_lossless is None

    def test_lossless_suffix_index(self):
        topo = micro_topology([(0.0, 0.0), (0.0, 100.0)], interfaces=1)
        scen = micro_scenario(
            topo, [0.0, 500.0], [(0, 0, 1, 0)], [(0, 0, 1, 0)], num_slots=2
        )
        plan, _ = plan_transition(scen, CFG)
        metrics = compute_metrics(scen, plan)
        assert metrics.total_loss_gb == pytest.approx(0.0)
        assert metrics.slots_to_lossless == 1


class TestThresholdHelpers:
    def test_half_window_caps_the_tail(self):
        assert threshold_profile(5, 0.5) == [1.0, 1.0, 0.5, 0.5, 0.5]
        assert threshold_profile(4, 0.25) == [1.0, 0.25, 0.25, 0.25]

    def test_all_window_caps_everything(self):
        assert threshold_profile(3, 0.1, window="all") == [0.1, 0.1, 0.1]

    def test_bad_inputs_raise(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            threshold_profile(3, 1.5)
        with pytest.raises(ValueError, match="window"):
            threshold_profile(3, 0.5, window="tail")

    def test_apply_replaces_thresholds_on_a_copy(self):
        scen = trio_scenario()
        capped = apply_loss_thresholds(scen, [1.0, 0.0])
        assert scen.loss_thresholds is None
        assert capped.loss_thresholds == [1.0, 0.0]
        assert capped.threshold(1) == 1.0 and capped.threshold(2) == 0.0


class TestValidatePlan:
    def trio_plan(self):
        scen = trio_scenario()
        plan, _ = plan_transition(scen, CFG)
        return scen, plan

    def test_optimal_plan_is_clean(self):
        scen, plan = self.trio_plan()
        assert validate_plan(scen, plan) == []

    def codes(self, scen, plan):
        return {v.code for v in validate_plan(scen, plan)}

    def test_flow_above_capacity_flagged(self):
        scen, plan = self.trio_plan()
        plan.slots[0].flows_mbps[0] = scen.topology.capacity_mbps[0][2] + 100.0
        assert "capacity" in self.codes(scen, plan)

    def test_unflagged_rotation_flagged(self):
        scen, plan = self.trio_plan()
        plan.slots[1].orientations_raw_deg[1][0] += scen.rotation_step_deg
        assert "dynamics" in self.codes(scen, plan)

    def test_missing_final_link_flagged(self):
        scen, plan = self.trio_plan()
        plan.slots[-1].links.clear()
        plan.slots[-1].flows_mbps.clear()
        codes = self.codes(scen, plan)
        assert "boundary-final" in codes and "conservation" in codes

    def test_interface_reuse_flagged(self):
        scen, plan = self.trio_plan()
        plan.slots[0].links.append((2, 0, 0, 0))
        plan.slots[0].flows_mbps.append(0.0)
        assert "interface-reuse" in self.codes(scen, plan)

    def test_threshold_breach_flagged(self):
        scen, plan = self.trio_plan()
        capped = apply_loss_thresholds(scen, [0.0, 0.0])
        assert "threshold" in self.codes(capped, plan)

    def test_misaligned_link_flagged(self):
        scen, plan = self.trio_plan()
        for slot in plan.slots:
            slot.orientations_raw_deg[2][0] += 180.0
            slot.orientations_deg[2][0] = slot.orientations_raw_deg[2][0] % 360.0
        codes = self.codes(scen, plan)
        assert "alignment" in codes and "boundary-orientation" in codes
