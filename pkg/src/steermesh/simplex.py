"""Dense bounded-variable two-phase simplex for small linear programs.

This is the self-contained LP engine used for modest model sizes and for
cross-checking; larger relaxations go through SciPy's HiGHS wrapper (see
`solver.solve_lp`). The implementation keeps an explicit tableau, supports
lower/upper bounds on every variable directly (nonbasic variables rest at a
bound, entering steps may terminate in a bound flip), uses Dantzig pricing
with an automatic switch to Bland's rule after a run of degenerate pivots, and
re-solves the basic system once per phase to shed accumulated roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AT_LB, AT_UB, BASIC, FREE = 0, 1, 2, 3

_DEGENERATE_SWITCH = 40
_REFRESH_EVERY = 128


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int


def solve(
    c,
    a,
    senses,
    b,
    lb,
    ub,
    *,
    tol: float = 1e-9,
    max_iterations: int | None = None,
) -> LpResult:
    """Minimize c'x subject to a x (<=, >=, =) b and lb <= x <= ub.

    `senses` holds one of "<=", ">=", "=" per row. Inequalities get slack
    columns internally; callers only ever see the structural variables.
    """
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    n = c.shape[0]
    m = b.shape[0]
    a = np.asarray(a, dtype=float).reshape(m, n)
    if len(senses) != m:
        raise ValueError("one sense per constraint row is required")
    if np.any(lb > ub):
        return LpResult("infeasible", None, None, 0)

    slack_rows = [i for i, s in enumerate(senses) if s != "="]
    ns = len(slack_rows)
    a_ext = np.zeros((m, n + ns))
    a_ext[:, :n] = a
    for j, i in enumerate(slack_rows):
        a_ext[i, n + j] = 1.0 if senses[i] == "<=" else -1.0
    c_ext = np.concatenate([c, np.zeros(ns)])
    lb_ext = np.concatenate([lb, np.zeros(ns)])
    ub_ext = np.concatenate([ub, np.full(ns, np.inf)])

    result = _two_phase(c_ext, a_ext, b, lb_ext, ub_ext, tol, max_iterations)
    if result.x is not None:
        x = result.x[:n]
        return LpResult(result.status, x, float(c @ x), result.iterations)
    return result


def _initial_status(lbf: np.ndarray, ubf: np.ndarray) -> np.ndarray:
    status = np.full(lbf.shape[0], FREE, dtype=np.int8)
    has_lb = np.isfinite(lbf)
    has_ub = np.isfinite(ubf)
    status[has_ub] = AT_UB
    status[has_lb] = AT_LB
    # prefer the bound closer to zero when both exist
    both = has_lb & has_ub
    status[both & (np.abs(ubf) < np.abs(lbf))] = AT_UB
    return status


def _two_phase(c, a, b, lbf, ubf, tol, max_iterations) -> LpResult:
    m, nt = a.shape
    if max_iterations is None:
        max_iterations = 10000 + 20 * (m + nt)

    status = _initial_status(lbf, ubf)
    values = np.where(status == AT_LB, lbf, np.where(status == AT_UB, ubf, 0.0))

    residual = b - a @ values
    art_sign = np.where(residual >= 0, 1.0, -1.0)
    a_full = np.hstack([a, np.diag(art_sign)]) if m else np.zeros((0, nt))
    n_total = a_full.shape[1]
    lb_full = np.concatenate([lbf, np.zeros(m)])
    ub_full = np.concatenate([ubf, np.full(m, np.inf)])
    status = np.concatenate([status, np.full(m, BASIC, dtype=np.int8)])
    values = np.concatenate([values, np.zeros(m)])

    basis = np.arange(nt, nt + m)
    xb = np.abs(residual)
    tab = art_sign[:, None] * a_full if m else a_full.copy()

    state = _State(a_full, b, lb_full, ub_full, status, values, basis, xb, tab, tol)

    phase1_cost = np.concatenate([np.zeros(nt), np.ones(m)])
    iters1, ok = _optimize(state, phase1_cost, max_iterations)
    if not ok:
        return LpResult("iteration_limit", None, None, iters1)
    _refresh(state)
    feas_gap = float(phase1_cost[state.basis] @ state.xb) if m else 0.0
    feas_tol = 1e-7 * (1.0 + (np.abs(b).max() if m else 0.0))
    if feas_gap > feas_tol:
        return LpResult("infeasible", None, None, iters1)

    _drive_out_artificials(state, nt)
    # freeze nonbasic artificials so phase 2 cannot reuse them
    for j in range(nt, n_total):
        if state.status[j] != BASIC:
            state.ub_full[j] = 0.0
            state.values[j] = 0.0

    phase2_cost = np.concatenate([c, np.zeros(m)])
    iters2, ok = _optimize(state, phase2_cost, max_iterations)
    total_iters = iters1 + iters2
    if not ok:
        status_name = state.abort or "iteration_limit"
        return LpResult(status_name, None, None, total_iters)
    _refresh(state)

    x_full = state.values.copy()
    x_full[state.basis] = state.xb
    return LpResult("optimal", x_full[:nt], None, total_iters)


class _State:
    def __init__(self, a_full, b, lb_full, ub_full, status, values, basis, xb, tab, tol):
        self.a_full = a_full
        self.b = b
        self.lb_full = lb_full
        self.ub_full = ub_full
        self.status = status
        self.values = values
        self.basis = basis
        self.xb = xb
        self.tab = tab
        self.tol = tol
        self.abort: str | None = None


def _refresh(state: _State) -> None:
    """Re-solve the basic system against the original data to shed drift."""
    m = state.b.shape[0]
    if m == 0:
        return
    x_nb = state.values.copy()
    x_nb[state.basis] = 0.0
    rhs = state.b - state.a_full @ x_nb
    basis_mat = state.a_full[:, state.basis]
    try:
        state.xb = np.linalg.solve(basis_mat, rhs)
        state.tab = np.linalg.solve(basis_mat, state.a_full)
    except np.linalg.LinAlgError:
        pass


def _drive_out_artificials(state: _State, nt: int) -> None:
    m = state.b.shape[0]
    for row in range(m):
        if state.basis[row] < nt:
            continue
        candidates = np.where(
            (np.abs(state.tab[row, :nt]) > 1e-7) & (state.status[:nt] != BASIC)
        )[0]
        if candidates.size == 0:
            # redundant row: the artificial stays basic at zero forever
            continue
        _pivot(state, row, int(candidates[0]), float(state.values[candidates[0]]))


def _pivot(state: _State, row: int, q: int, new_value: float) -> None:
    tab = state.tab
    piv = tab[row, q]
    tab[row] = tab[row] / piv
    col = tab[:, q].copy()
    col[row] = 0.0
    tab -= np.outer(col, tab[row])
    leaving = state.basis[row]
    state.status[leaving] = AT_LB  # caller fixes the exact bound afterwards
    state.basis[row] = q
    state.status[q] = BASIC
    state.xb[row] = new_value


def _optimize(state: _State, cost: np.ndarray, max_iterations: int) -> tuple[int, bool]:
    tol = state.tol
    m = state.b.shape[0]
    price_tol = tol * (1.0 + float(np.abs(cost).max())) if cost.size else tol
    dj = cost - (cost[state.basis] @ state.tab if m else 0.0)
    bland = False
    degenerate_run = 0
    iterations = 0

    while iterations < max_iterations:
        movable = (state.status != BASIC) & (state.lb_full < state.ub_full)
        up_ok = movable & ((state.status == AT_LB) | (state.status == FREE))
        down_ok = movable & ((state.status == AT_UB) | (state.status == FREE))
        score_up = np.where(up_ok, -dj, -np.inf)
        score_down = np.where(down_ok, dj, -np.inf)
        score = np.maximum(score_up, score_down)
        if not np.any(score > price_tol):
            return iterations, True
        if bland:
            q = int(np.flatnonzero(score > price_tol)[0])
        else:
            q = int(np.argmax(score))
        direction = 1.0 if score_up[q] >= score_down[q] else -1.0

        col = state.tab[:, q] if m else np.zeros(0)
        rate = -direction * col
        t_arr = np.full(m, np.inf)
        if m:
            lbb = state.lb_full[state.basis]
            ubb = state.ub_full[state.basis]
            inc = rate > tol
            dec = rate < -tol
            t_arr[inc] = (ubb[inc] - state.xb[inc]) / rate[inc]
            t_arr[dec] = (lbb[dec] - state.xb[dec]) / rate[dec]
            np.maximum(t_arr, 0.0, out=t_arr)
        span = state.ub_full[q] - state.lb_full[q]
        t_basic = float(t_arr.min()) if m else np.inf

        if span <= t_basic and np.isfinite(span):
            # bound flip, no basis change
            state.xb -= direction * span * col
            state.values[q] = (
                state.ub_full[q] if direction > 0 else state.lb_full[q]
            )
            state.status[q] = AT_UB if direction > 0 else AT_LB
            step = span
        elif not np.isfinite(t_basic):
            state.abort = "unbounded"
            return iterations, False
        else:
            near = np.flatnonzero(t_arr <= t_basic + 1e-12)
            if bland:
                row = int(near[np.argmin(state.basis[near])])
            else:
                row = int(near[np.argmax(np.abs(col[near]))])
            t = float(t_arr[row])
            leaving = int(state.basis[row])
            hit_upper = rate[row] > 0
            state.xb -= direction * t * col
            entering_value = state.values[q] + direction * t
            _pivot(state, row, q, entering_value)
            state.status[leaving] = AT_UB if hit_upper else AT_LB
            state.values[leaving] = (
                state.ub_full[leaving] if hit_upper else state.lb_full[leaving]
            )
            dj = dj - dj[q] * state.tab[row]
            step = t

        iterations += 1
        if step <= tol:
            degenerate_run += 1
            if degenerate_run >= _DEGENERATE_SWITCH:
                bland = True
        else:
            degenerate_run = 0
            bland = False
        if iterations % _REFRESH_EVERY == 0:
            _refresh(state)
            dj = cost - (cost[state.basis] @ state.tab if m else 0.0)

    return iterations, False
