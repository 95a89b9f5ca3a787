"""Geometry, alignment, and link-budget unit tests."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steermesh.geometry import (
    alignment_matrix,
    angle_step,
    bearing_deg,
    capacity_matrix,
    circ_step_distance,
    circular_diff_deg,
    connectivity_from_positions,
    full_rotation_seconds,
    link_rate_mbps,
    min_horizon,
    num_steps,
    path_loss_db,
    snap_angle,
)
from steermesh.models import PhyParams


def test_bearing_cardinal_directions():
    assert bearing_deg(0, 0, 0, 1) == 0.0
    assert bearing_deg(0, 0, 1, 0) == 90.0
    assert bearing_deg(0, 0, 0, -1) == 180.0
    assert bearing_deg(0, 0, -1, 0) == 270.0
    assert bearing_deg(0, 0, 1, 1) == pytest.approx(45.0)


def test_bearing_rejects_coincident_points():
    with pytest.raises(ValueError):
        bearing_deg(3.0, 4.0, 3.0, 4.0)


def test_num_steps():
    assert num_steps(10.0) == 36
    assert num_steps(90.0) == 4
    with pytest.raises(ValueError):
        num_steps(7.0)
    with pytest.raises(ValueError):
        num_steps(0.0)


def test_snap_angle_half_rounds_up():
    assert snap_angle(45.0, 90.0) == 90.0
    assert snap_angle(44.999, 90.0) == 0.0
    assert snap_angle(359.0, 10.0) == 0.0
    assert snap_angle(123.4, 10.0) == 120.0


@settings(max_examples=200, deadline=None)
@given(
    angle=st.floats(0, 360, allow_nan=False, exclude_max=True),
    theta=st.sampled_from([10.0, 30.0, 45.0, 90.0, 120.0]),
)
def test_snap_angle_lands_on_grid_within_half_step(angle, theta):
    snapped = snap_angle(angle, theta)
    assert snapped == angle_step(snapped, theta) * theta % 360.0
    assert circular_diff_deg(snapped, angle) <= theta / 2 + 1e-9


def test_angle_step_rejects_off_grid():
    assert angle_step(270.0, 90.0) == 3
    assert angle_step(360.0, 90.0) == 0
    with pytest.raises(ValueError):
        angle_step(45.0, 90.0)


@settings(max_examples=200, deadline=None)
@given(
    i=st.integers(0, 35), j=st.integers(0, 35), total=st.sampled_from([4, 12, 36])
)
def test_circ_step_distance_symmetric_and_bounded(i, j, total):
    i %= total
    j %= total
    d = circ_step_distance(i, j, total)
    assert d == circ_step_distance(j, i, total)
    assert 0 <= d <= total // 2
    assert (d == 0) == (i == j)


def test_circular_diff():
    assert circular_diff_deg(350.0, 10.0) == pytest.approx(20.0)
    assert circular_diff_deg(0.0, 180.0) == pytest.approx(180.0)
    assert circular_diff_deg(90.0, 90.0) == 0.0


def test_alignment_matrix_reciprocity_under_snapping():
    # The raw bearing 26.57 snaps to 30 and the reverse must be exactly +180
    # even though the reverse raw bearing would snap differently on its own.
    pts = [(0.0, 0.0), (50.0, 100.0), (-30.0, -40.0)]
    v = alignment_matrix(pts, 30.0)
    for d in range(3):
        assert v[d][d] == 0.0
        for e in range(3):
            if d != e:
                assert v[e][d] == pytest.approx((v[d][e] + 180.0) % 360.0)
                assert angle_step(v[d][e], 30.0) >= 0  # on grid


def test_connectivity_range_cutoff():
    pts = [(0.0, 0.0), (100.0, 0.0), (0.0, 125.0), (200.0, 0.0)]
    delta = connectivity_from_positions(pts, 125.0)
    assert delta[0][1] == 1 and delta[1][0] == 1
    assert delta[0][2] == 1  # exactly at range
    assert delta[0][3] == 0  # beyond range
    assert delta[0][0] == 0


def test_path_loss_monotone_in_distance():
    phy = PhyParams()
    assert path_loss_db(1.0, phy) == pytest.approx(phy.ref_loss_db + 0.015)
    losses = [path_loss_db(d, phy) for d in (10, 50, 100, 200, 400)]
    assert losses == sorted(losses)
    with pytest.raises(ValueError):
        path_loss_db(0.0, phy)


def test_link_rate_clamped_and_monotone():
    phy = PhyParams()
    assert link_rate_mbps(1.0, phy) == phy.max_rate_mbps
    assert link_rate_mbps(2000.0, phy) == phy.min_rate_mbps
    rates = [link_rate_mbps(d, phy) for d in (140, 180, 220, 260)]
    assert rates == sorted(rates, reverse=True)
    # independent arithmetic for the 180 m operating point
    pl = 68.0 + 20.0 * math.log10(180.0) + 0.015 * 180.0
    noise = -174.0 + 10.0 * math.log10(2160e6) + 6.0
    snr = 10 ** ((23.0 + 20.0 - pl - noise) / 10.0)
    expected = 2160.0 * math.log2(1.0 + snr)
    assert link_rate_mbps(180.0, phy) == pytest.approx(expected, abs=1e-9)


def test_capacity_matrix_masks_disconnected_pairs():
    pts = [(0.0, 0.0), (0.0, 180.0), (0.0, 1000.0)]
    delta = connectivity_from_positions(pts, 200.0)
    cap = capacity_matrix(pts, delta, PhyParams())
    assert cap[0][1] == cap[1][0] > 0
    assert cap[0][2] == 0.0 and cap[2][0] == 0.0
    assert cap[1][1] == 0.0


def test_min_horizon_examples():
    # One interface 180 degrees away at theta=10: 18 steps, no move in slot 1.
    v = [[0.0, 0.0], [180.0, 0.0]]
    a0 = [[180.0], [0.0]]
    assert min_horizon(a0, [(0, 0, 1, 0)], v, 10.0) == 19
    # Already aligned: a single slot suffices, as does an empty snapshot.
    assert min_horizon([[0.0], [180.0]], [(0, 0, 1, 0)], v, 10.0) == 1
    assert min_horizon(a0, [], v, 10.0) == 1
    # Shorter arc is used: 270 degrees cw is 90 ccw.
    assert min_horizon([[270.0], [180.0]], [(0, 0, 1, 0)], v, 90.0) == 2


def test_full_rotation_seconds():
    assert full_rotation_seconds(0.2, 10.0) == pytest.approx(7.2)
    assert full_rotation_seconds(1.0, 90.0) == pytest.approx(4.0)
