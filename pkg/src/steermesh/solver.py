"""Exact MILP solving: LP relaxation engines, branch and bound, and an
exhaustive oracle.

Two LP engines sit behind `solve_lp`: the package's own bounded-variable
simplex (`simplex.solve`) and SciPy's HiGHS wrapper. `auto` picks the internal
engine for small models and HiGHS for large ones; either can be forced, and
the test suite cross-checks them against each other.

`solve_milp` is a best-bound branch-and-bound over the LP relaxation with
worklist bound propagation at every node. `brute_force` is the independent
oracle: it enumerates every assignment of the free integer variables with its
own interval feasibility check and solves one LP per surviving leaf, so small
instances can certify the branch-and-bound result.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from . import simplex
from .milp import MilpModel
from .models import SolveConfig, SolveReport

_INTERNAL_MAX_DIM = 160
_PROP_TOL = 1e-9


@dataclass
class LpSolve:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int
    engine: str


@dataclass
class Solution:
    status: str
    objective: float | None
    bound: float | None
    values: dict[int, float] | None
    nodes: int = 0
    lp_iterations: int = 0
    wall_time_s: float = 0.0
    engine: str = ""

    def value(self, model: MilpModel, name: str) -> float:
        if self.values is None:
            raise ValueError("solution carries no assignment")
        return self.values[model.variable_index(name)]

    def report(self) -> SolveReport:
        return SolveReport(
            status=self.status,
            objective=self.objective,
            bound=self.bound,
            nodes=self.nodes,
            lp_iterations=self.lp_iterations,
            wall_time_s=self.wall_time_s,
            engine=self.engine,
        )


class LpBackend:
    """One model, many relaxation solves under varying variable bounds."""

    def __init__(self, model: MilpModel, engine: str = "auto"):
        self.model = model
        n = model.num_variables
        m = model.num_constraints
        self.c = np.zeros(n)
        for i, coef in model.objective.items():
            self.c[i] = coef
        self.base_lb = np.array([v.lb for v in model.variables])
        self.base_ub = np.array([v.ub for v in model.variables])
        if engine == "auto":
            engine = "internal" if max(n, m) <= _INTERNAL_MAX_DIM else "scipy"
        self.engine = engine
        self.senses = [con.sense for con in model.constraints]
        self.b = np.array([con.rhs for con in model.constraints])
        if engine == "internal":
            self.a_dense = np.zeros((m, n))
            for row, con in enumerate(model.constraints):
                for i, coef in con.coeffs.items():
                    self.a_dense[row, i] = coef
        else:
            data, rows, cols = [], [], []
            for row, con in enumerate(model.constraints):
                for i, coef in con.coeffs.items():
                    rows.append(row)
                    cols.append(i)
                    data.append(coef)
            matrix = sparse.csr_matrix((data, (rows, cols)), shape=(m, n))
            ub_rows = [i for i, s in enumerate(self.senses) if s == "<="]
            ge_rows = [i for i, s in enumerate(self.senses) if s == ">="]
            eq_rows = [i for i, s in enumerate(self.senses) if s == "="]
            blocks = []
            rhs_ub = []
            if ub_rows:
                blocks.append(matrix[ub_rows])
                rhs_ub.append(self.b[ub_rows])
            if ge_rows:
                blocks.append(-matrix[ge_rows])
                rhs_ub.append(-self.b[ge_rows])
            self.a_ub = sparse.vstack(blocks, format="csr") if blocks else None
            self.b_ub = np.concatenate(rhs_ub) if rhs_ub else None
            self.a_eq = matrix[eq_rows] if eq_rows else None
            self.b_eq = self.b[eq_rows] if eq_rows else None

    def solve(self, lb: np.ndarray | None = None, ub: np.ndarray | None = None) -> LpSolve:
        lb = self.base_lb if lb is None else lb
        ub = self.base_ub if ub is None else ub
        if self.engine == "internal":
            res = simplex.solve(self.c, self.a_dense, self.senses, self.b, lb, ub)
            obj = (
                res.objective + self.model.objective_constant
                if res.objective is not None
                else None
            )
            return LpSolve(res.status, res.x, obj, res.iterations, "internal")
        res = linprog(
            self.c,
            A_ub=self.a_ub,
            b_ub=self.b_ub,
            A_eq=self.a_eq,
            b_eq=self.b_eq,
            bounds=np.column_stack((lb, ub)),
            method="highs",
        )
        status = {0: "optimal", 1: "iteration_limit", 2: "infeasible", 3: "unbounded"}.get(
            res.status, "numerical"
        )
        x = np.asarray(res.x) if res.x is not None else None
        obj = (
            float(res.fun) + self.model.objective_constant
            if status == "optimal"
            else None
        )
        nit = int(res.nit) if getattr(res, "nit", None) is not None else 0
        return LpSolve(status, x, obj, nit, "scipy")


def solve_lp(
    model: MilpModel,
    lb: np.ndarray | None = None,
    ub: np.ndarray | None = None,
    engine: str = "auto",
) -> LpSolve:
    """Solve the LP relaxation of `model` (integrality dropped)."""
    return LpBackend(model, engine).solve(lb, ub)


class _Propagator:
    """Worklist interval propagation over the <=-form rows of a model."""

    def __init__(self, model: MilpModel):
        self.rows: list[tuple[np.ndarray, np.ndarray, float]] = []
        n = model.num_variables
        self.var_rows: list[list[int]] = [[] for _ in range(n)]
        self.is_int = np.array([v.is_integer for v in model.variables])
        for con in model.constraints:
            idx = np.fromiter(con.coeffs.keys(), dtype=int)
            coef = np.fromiter(con.coeffs.values(), dtype=float)
            forms = []
            if con.sense in ("<=", "="):
                forms.append((idx, coef, con.rhs))
            if con.sense in (">=", "="):
                forms.append((idx, -coef, -con.rhs))
            for form in forms:
                row_id = len(self.rows)
                self.rows.append(form)
                for i in form[0]:
                    self.var_rows[int(i)].append(row_id)

    def run(
        self,
        lb: np.ndarray,
        ub: np.ndarray,
        seed_vars: list[int] | None = None,
        max_updates: int = 20000,
    ) -> bool:
        """Tighten lb/ub in place; False means the box is infeasible."""
        if seed_vars is None:
            pending = set(range(len(self.rows)))
        else:
            pending = {r for v in seed_vars for r in self.var_rows[v]}
        queue = sorted(pending)
        updates = 0
        while queue:
            row_id = queue.pop()
            pending.discard(row_id)
            idx, coef, rhs = self.rows[row_id]
            pos = coef > 0
            lows = np.where(pos, lb[idx], ub[idx])
            contrib = coef * lows
            min_act = contrib.sum()
            if min_act > rhs + _PROP_TOL * (1.0 + abs(rhs)):
                return False
            slack = rhs - min_act
            # per-variable headroom: coef_j * x_j <= slack + coef_j * low_j
            for j, cj, low in zip(idx, coef, lows):
                if not np.isfinite(low):
                    # row cannot tighten anything through an infinite term
                    continue
                limit = (slack + cj * low) / cj
                j = int(j)
                changed = False
                if cj > 0:
                    new_ub = limit
                    if self.is_int[j]:
                        new_ub = math.floor(new_ub + 1e-9)
                    if new_ub < ub[j] - 1e-12:
                        ub[j] = new_ub
                        changed = True
                else:
                    new_lb = limit
                    if self.is_int[j]:
                        new_lb = math.ceil(new_lb - 1e-9)
                    if new_lb > lb[j] + 1e-12:
                        lb[j] = new_lb
                        changed = True
                if changed:
                    if lb[j] > ub[j] + _PROP_TOL:
                        return False
                    updates += 1
                    if updates > max_updates:
                        return True
                    for other in self.var_rows[j]:
                        if other != row_id and other not in pending:
                            pending.add(other)
                            queue.append(other)
        return True


def check_assignment(
    model: MilpModel,
    values: np.ndarray,
    tol: float = 1e-6,
    integrality_tol: float = 1e-6,
) -> list[str]:
    """Independent feasibility check of a full assignment; [] means feasible."""
    issues: list[str] = []
    for var in model.variables:
        v = values[var.index]
        scale = 1.0 + max(abs(var.lb) if math.isfinite(var.lb) else 0.0, abs(v))
        if math.isfinite(var.lb) and v < var.lb - tol * scale:
            issues.append(f"{var.name} below lower bound")
        if math.isfinite(var.ub) and v > var.ub + tol * scale:
            issues.append(f"{var.name} above upper bound")
        if var.is_integer and abs(v - round(v)) > integrality_tol:
            issues.append(f"{var.name} not integral")
    for con in model.constraints:
        lhs = sum(c * values[i] for i, c in con.coeffs.items())
        scale = 1.0 + abs(con.rhs) + sum(abs(c * values[i]) for i, c in con.coeffs.items())
        gap = lhs - con.rhs
        if con.sense == "<=" and gap > tol * scale:
            issues.append(f"{con.name} violated by {gap:.3g}")
        elif con.sense == ">=" and gap < -tol * scale:
            issues.append(f"{con.name} violated by {-gap:.3g}")
        elif con.sense == "=" and abs(gap) > tol * scale:
            issues.append(f"{con.name} violated by {abs(gap):.3g}")
    return issues


@dataclass(order=True)
class _Node:
    bound: float
    neg_depth: int
    counter: int
    lb: np.ndarray = field(compare=False)
    ub: np.ndarray = field(compare=False)
    x: np.ndarray = field(compare=False)


def solve_milp(model: MilpModel, config: SolveConfig | None = None) -> Solution:
    """Best-bound branch and bound with bound propagation at every node."""
    if config is None:
        config = SolveConfig()
    start = time.perf_counter()
    backend = LpBackend(model, config.lp_engine)
    propagator = _Propagator(model)
    int_indices = [v.index for v in model.variables if v.is_integer]
    branching = config.effective_branching()

    nodes = 0
    lp_iterations = 0
    incumbent: np.ndarray | None = None
    incumbent_obj = math.inf
    heap: list[_Node] = []
    counter = 0

    def out_of_budget() -> bool:
        if config.time_limit_s is not None:
            if time.perf_counter() - start > config.time_limit_s:
                return True
        if config.node_limit is not None and nodes >= config.node_limit:
            return True
        return False

    def cuts_off(bound: float) -> bool:
        if incumbent_obj is math.inf:
            return False
        gap = incumbent_obj - bound
        return gap <= config.abs_gap or gap <= config.rel_gap * max(
            1.0, abs(incumbent_obj)
        )

    root_lb = backend.base_lb.copy()
    root_ub = backend.base_ub.copy()
    root_status: str | None = None
    if not propagator.run(root_lb, root_ub):
        root_status = "infeasible"
    else:
        relax = backend.solve(root_lb, root_ub)
        lp_iterations += relax.iterations
        if relax.status in ("infeasible", "unbounded"):
            root_status = relax.status
        elif relax.status != "optimal":
            root_status = "limit_reached"
        else:
            heapq.heappush(
                heap, _Node(relax.objective, 0, counter, root_lb, root_ub, relax.x)
            )
            counter += 1
    if root_status is not None:
        return Solution(
            root_status,
            None,
            None,
            None,
            nodes=0,
            lp_iterations=lp_iterations,
            wall_time_s=time.perf_counter() - start,
            engine=backend.engine,
        )

    best_open_bound = heap[0].bound
    hit_limit = False
    while heap:
        best_open_bound = heap[0].bound
        if cuts_off(best_open_bound):
            break
        if out_of_budget():
            hit_limit = True
            break
        node = heapq.heappop(heap)
        nodes += 1
        x = node.x
        fractional = [
            j for j in int_indices if abs(x[j] - round(x[j])) > config.integrality_tol
        ]
        if not fractional:
            candidate = x.copy()
            for j in int_indices:
                candidate[j] = round(candidate[j])
            if not check_assignment(model, candidate):
                obj = model.objective_value(list(candidate))
                if obj < incumbent_obj:
                    incumbent = candidate
                    incumbent_obj = obj
            continue
        if branching == "first-index":
            branch_var = fractional[0]
        else:
            branch_var = min(
                fractional,
                key=lambda j: (abs(x[j] - math.floor(x[j]) - 0.5), j),
            )
        floor_val = math.floor(x[branch_var] + 1e-9)
        for child_lb_val, child_ub_val in (
            (None, floor_val),
            (floor_val + 1, None),
        ):
            child_lb = node.lb.copy()
            child_ub = node.ub.copy()
            if child_ub_val is not None:
                child_ub[branch_var] = min(child_ub[branch_var], child_ub_val)
            if child_lb_val is not None:
                child_lb[branch_var] = max(child_lb[branch_var], child_lb_val)
            if child_lb[branch_var] > child_ub[branch_var]:
                continue
            if not propagator.run(child_lb, child_ub, seed_vars=[branch_var]):
                continue
            relax = backend.solve(child_lb, child_ub)
            lp_iterations += relax.iterations
            if relax.status != "optimal":
                continue
            if cuts_off(relax.objective):
                continue
            # deeper nodes win bound ties so zero-bound searches dive to
            # integral solutions instead of spreading breadth-first
            heapq.heappush(
                heap,
                _Node(
                    relax.objective,
                    node.neg_depth - 1,
                    counter,
                    child_lb,
                    child_ub,
                    relax.x,
                ),
            )
            counter += 1

    wall = time.perf_counter() - start
    if incumbent is not None:
        bound = min(best_open_bound, incumbent_obj) if heap else incumbent_obj
        status = "feasible" if hit_limit and heap else "optimal"
        return Solution(
            status,
            incumbent_obj,
            bound,
            {i: float(incumbent[i]) for i in range(model.num_variables)},
            nodes=nodes,
            lp_iterations=lp_iterations,
            wall_time_s=wall,
            engine=backend.engine,
        )
    status = "limit_reached" if hit_limit else "infeasible"
    return Solution(
        status,
        None,
        None,
        None,
        nodes=nodes,
        lp_iterations=lp_iterations,
        wall_time_s=wall,
        engine=backend.engine,
    )


def brute_force(
    model: MilpModel,
    engine: str = "auto",
    max_integers: int = 24,
    max_nodes: int = 2_000_000,
) -> Solution:
    """Exhaustive enumeration of all free integer assignments.

    Every integer variable with a non-degenerate range is assigned each value
    in its range via depth-first search; a plain interval feasibility check
    prunes impossible partial assignments, and each surviving leaf solves the
    residual LP over the continuous variables. Deliberately independent of the
    branch-and-bound machinery so results certify each other.
    """
    start = time.perf_counter()
    free = [
        v.index
        for v in model.variables
        if v.is_integer and v.lb < v.ub
    ]
    for j in free:
        var = model.variables[j]
        if not (math.isfinite(var.lb) and math.isfinite(var.ub)):
            raise ValueError(f"integer variable {var.name} has an infinite range")
    if len(free) > max_integers:
        raise ValueError(
            f"{len(free)} free integer variables exceed the oracle cap {max_integers}"
        )

    lb = np.array([v.lb for v in model.variables])
    ub = np.array([v.ub for v in model.variables])
    rows = [
        (list(con.coeffs.items()), con.sense, con.rhs) for con in model.constraints
    ]

    def interval_feasible(lo: np.ndarray, hi: np.ndarray) -> bool:
        # feasibility-only check, written apart from the solver's propagation
        for coeffs, sense, rhs in rows:
            lo_act = 0.0
            hi_act = 0.0
            for i, c in coeffs:
                if c > 0:
                    lo_act += c * lo[i]
                    hi_act += c * hi[i]
                else:
                    lo_act += c * hi[i]
                    hi_act += c * lo[i]
            margin = _PROP_TOL * (1.0 + abs(rhs))
            if sense in ("<=", "=") and lo_act > rhs + margin:
                return False
            if sense in (">=", "=") and hi_act < rhs - margin:
                return False
        return True

    backend = LpBackend(model, engine)
    best_obj = math.inf
    best_x: np.ndarray | None = None
    visits = 0
    lp_iterations = 0

    def descend(depth: int, lo: np.ndarray, hi: np.ndarray) -> None:
        nonlocal best_obj, best_x, visits, lp_iterations
        visits += 1
        if visits > max_nodes:
            raise RuntimeError("oracle enumeration exceeded its node budget")
        if depth == len(free):
            res = backend.solve(lo, hi)
            lp_iterations += res.iterations
            if res.status == "optimal" and res.objective < best_obj:
                best_obj = res.objective
                best_x = res.x
            return
        j = free[depth]
        for value in range(int(lb[j]), int(ub[j]) + 1):
            lo2 = lo.copy()
            hi2 = hi.copy()
            lo2[j] = value
            hi2[j] = value
            if interval_feasible(lo2, hi2):
                descend(depth + 1, lo2, hi2)

    descend(0, lb.copy(), ub.copy())
    wall = time.perf_counter() - start
    if best_x is None:
        return Solution(
            "infeasible",
            None,
            None,
            None,
            nodes=visits,
            lp_iterations=lp_iterations,
            wall_time_s=wall,
            engine=backend.engine,
        )
    values = {i: float(best_x[i]) for i in range(model.num_variables)}
    return Solution(
        "optimal",
        float(best_obj),
        float(best_obj),
        values,
        nodes=visits,
        lp_iterations=lp_iterations,
        wall_time_s=wall,
        engine=backend.engine,
    )
