"""Geometry, antenna alignment, and link-budget helpers.

Angles are degrees clockwise from North (the positive y axis), normalized to
[0, 360). Antenna orientations live on the discrete grid of multiples of the
per-slot rotation step theta, so several helpers work on integer step indices
modulo 360/theta.
"""

from __future__ import annotations

import math
from typing import Sequence

from .models import ANGLE_TOL, Link, PhyParams

THERMAL_NOISE_DBM_PER_HZ = -174.0


def bearing_deg(x_from: float, y_from: float, x_to: float, y_to: float) -> float:
    """Compass bearing from one point to another, in [0, 360)."""
    dx = x_to - x_from
    dy = y_to - y_from
    if dx == 0 and dy == 0:
        raise ValueError("bearing is undefined for coincident points")
    return math.degrees(math.atan2(dx, dy)) % 360.0


def num_steps(theta: float) -> int:
    """Number of grid positions for a rotation step that divides 360."""
    if theta <= 0:
        raise ValueError("rotation step must be positive")
    steps = 360.0 / theta
    if abs(steps - round(steps)) > ANGLE_TOL:
        raise ValueError("rotation step must divide 360")
    return int(round(steps))


def snap_angle(angle: float, theta: float) -> float:
    """Round an angle to the nearest multiple of theta, into [0, 360).

    Exact halves round up, so the result is deterministic.
    """
    steps = math.floor(angle / theta + 0.5)
    return (steps * theta) % 360.0


def angle_step(angle: float, theta: float) -> int:
    """Index of an on-grid angle, raising if it is off the theta grid."""
    steps = angle / theta
    if abs(steps - round(steps)) > ANGLE_TOL:
        raise ValueError(f"angle {angle} is not a multiple of {theta}")
    return int(round(steps)) % num_steps(theta)


def circ_step_distance(i: int, j: int, total: int) -> int:
    """Minimal number of single steps between two grid positions."""
    forward = (i - j) % total
    return min(forward, total - forward)


def circular_diff_deg(a: float, b: float) -> float:
    """Shorter-arc angular distance between two angles, in [0, 180]."""
    return abs((a - b + 180.0) % 360.0 - 180.0)


def alignment_matrix(
    positions: list[tuple[float, float]], theta: float
) -> list[list[float]]:
    """Required orientation V[d][e] for node d to face node e.

    Bearings are snapped to the theta grid once per unordered pair and the
    reverse direction is derived as the snapped value plus 180 degrees, so
    reciprocity holds exactly even when snapping breaks it for raw bearings.
    """
    count = len(positions)
    v = [[0.0] * count for _ in range(count)]
    for d in range(count):
        for e in range(d + 1, count):
            raw = bearing_deg(*positions[d], *positions[e])
            snapped = snap_angle(raw, theta)
            v[d][e] = snapped
            v[e][d] = (snapped + 180.0) % 360.0
    return v


def connectivity_from_positions(
    positions: list[tuple[float, float]], max_range_m: float
) -> list[list[int]]:
    """0/1 adjacency: nodes within max_range_m of each other can form links."""
    count = len(positions)
    delta = [[0] * count for _ in range(count)]
    for d in range(count):
        for e in range(d + 1, count):
            dist = math.dist(positions[d], positions[e])
            if 0 < dist <= max_range_m:
                delta[d][e] = 1
                delta[e][d] = 1
    return delta


def path_loss_db(distance_m: float, phy: PhyParams) -> float:
    """Log-distance path loss plus linear atmospheric absorption."""
    if distance_m <= 0:
        raise ValueError("distance must be positive")
    spread = 10.0 * phy.path_loss_exponent * math.log10(
        distance_m / phy.ref_distance_m
    )
    return phy.ref_loss_db + spread + phy.atmospheric_db_per_m * distance_m


def link_rate_mbps(distance_m: float, phy: PhyParams) -> float:
    """Truncated Shannon rate of a point-to-point link at a given distance.

    The Shannon rate over the configured bandwidth is clamped into
    [min_rate_mbps, max_rate_mbps]; capacities are only meaningful for node
    pairs the connectivity matrix allows.
    """
    rx_dbm = (
        phy.tx_power_dbm
        + phy.tx_gain_dbi
        + phy.rx_gain_dbi
        - path_loss_db(distance_m, phy)
    )
    noise_dbm = (
        THERMAL_NOISE_DBM_PER_HZ
        + 10.0 * math.log10(phy.bandwidth_mhz * 1e6)
        + phy.noise_figure_db
    )
    snr = 10.0 ** ((rx_dbm - noise_dbm) / 10.0)
    rate = phy.bandwidth_mhz * math.log2(1.0 + snr)
    return min(max(rate, phy.min_rate_mbps), phy.max_rate_mbps)


def capacity_matrix(
    positions: list[tuple[float, float]],
    connectivity: list[list[int]],
    phy: PhyParams,
) -> list[list[float]]:
    """Symmetric link-capacity matrix, zero where nodes cannot connect."""
    count = len(positions)
    cap = [[0.0] * count for _ in range(count)]
    for d in range(count):
        for e in range(d + 1, count):
            if connectivity[d][e]:
                rate = link_rate_mbps(math.dist(positions[d], positions[e]), phy)
                cap[d][e] = rate
                cap[e][d] = rate
    return cap


def min_horizon(
    a0: Sequence[Sequence[float]],
    x_end: Sequence[Link],
    v: Sequence[Sequence[float]],
    theta: float,
) -> int:
    """Smallest slot count under which the final snapshot is reachable.

    One step of theta per slot boundary along the shorter arc, so an
    interface s steps away from its final bearing needs s + 1 slots; the
    worst interface governs. An empty final snapshot needs one slot.
    """
    total = num_steps(theta)
    worst = 0
    for d, n, dp, np_ in x_end:
        for node, iface, peer in ((d, n, dp), (dp, np_, d)):
            start = angle_step(a0[node][iface], theta)
            target = angle_step(v[node][peer], theta)
            worst = max(worst, circ_step_distance(start, target, total))
    return worst + 1


def full_rotation_seconds(slot_seconds: float, theta: float) -> float:
    """Wall-clock time for a full 360-degree sweep of one antenna."""
    return slot_seconds * num_steps(theta)
