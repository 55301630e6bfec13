"""Best-bound branch and bound over binary variables.

Exploration order is deterministic: nodes are keyed by (parent bound, depth
preferring deeper, insertion order), so equal-bound plateaus are plunged
depth-first while the global best bound still drives the search.  A rounding
dive at the root supplies an early incumbent for pruning.  Duals for the
integer optimum come from re-solving the LP with all binaries fixed at their
incumbent values.
"""

from __future__ import annotations

import heapq

import numpy as np

from .model import (
    INFEASIBLE, NODE_LIMIT, OPTIMAL, UNBOUNDED,
    MixedIntegerProgram, Solution, SolverOptions,
)
from .simplex import solve_lp


def _lp_with_fixes(mip: MixedIntegerProgram, fixes: dict[int, int]):
    lb = mip.lp.lb.copy()
    ub = mip.lp.ub.copy()
    for j in mip.binaries:
        lb[j] = max(lb[j], 0.0)
        ub[j] = min(ub[j], 1.0)
    for j, v in fixes.items():
        lb[j] = ub[j] = float(v)
    return mip.lp.with_bounds(lb, ub)


def _dive(mip: MixedIntegerProgram, start_x: np.ndarray, tol: float,
          options: SolverOptions) -> tuple[np.ndarray | None, int]:
    """Round binaries one at a time (smallest index first), re-solving."""
    fixes: dict[int, int] = {}
    x = start_x
    iters = 0
    while True:
        frac = [j for j in mip.binaries if abs(x[j] - round(x[j])) > tol]
        if not frac:
            return x, iters
        j = frac[0]
        v = int(round(x[j]))
        fixes[j] = v
        sol = solve_lp(_lp_with_fixes(mip, fixes), options)
        iters += sol.iterations
        if sol.status != OPTIMAL:
            fixes[j] = 1 - v
            sol = solve_lp(_lp_with_fixes(mip, fixes), options)
            iters += sol.iterations
            if sol.status != OPTIMAL:
                return None, iters
        x = sol.x


def solve_milp(mip: MixedIntegerProgram,
               options: SolverOptions | None = None) -> Solution:
    options = options or SolverOptions()
    binaries = mip.binaries
    if not binaries:
        return solve_lp(mip.lp, options)

    tol_int = options.integrality_tol
    gap = options.gap_tol
    incumbent_x: np.ndarray | None = None
    incumbent_obj = np.inf
    nodes = 0
    iterations = 0
    seq = 0
    # (parent bound, -depth, insertion order, fixes);
    heap: list[tuple[float, int, int, dict[int, int]]] = [(-np.inf, 0, 0, {})]
    best_bound = -np.inf
    dived = False

    def try_incumbent(x: np.ndarray, obj: float):
        nonlocal incumbent_x, incumbent_obj
        if obj < incumbent_obj - 1e-12:
            incumbent_obj = obj
            incumbent_x = x.copy()

    hit_node_limit = False
    while heap:
        bound, negdepth, _, fixes = heap[0]
        best_bound = max(best_bound, bound)
        if bound >= incumbent_obj - gap:
            break  # best-bound order: nothing left can improve
        if nodes >= options.node_limit:
            hit_node_limit = True
            break
        heapq.heappop(heap)
        nodes += 1

        sol = solve_lp(_lp_with_fixes(mip, fixes), options)
        iterations += sol.iterations
        if sol.status == INFEASIBLE:
            continue
        if sol.status == UNBOUNDED:
            return Solution(status=UNBOUNDED, nodes=nodes, iterations=iterations)
        if sol.status != OPTIMAL:
            continue  # iteration-limited node is abandoned, not fathomed
        if sol.objective >= incumbent_obj - gap:
            continue

        frac = np.array([abs(sol.x[j] - round(sol.x[j])) for j in binaries])
        if frac.max(initial=0.0) <= tol_int:
            try_incumbent(sol.x, sol.objective)
            continue

        if not dived:
            dived = True
            x_dive, it = _dive(mip, sol.x, tol_int, options)
            iterations += it
            if x_dive is not None:
                try_incumbent(x_dive, float(mip.lp.c @ x_dive))
            if sol.objective >= incumbent_obj - gap:
                continue

        j_branch = binaries[int(np.argmax(frac))]
        for v in (0, 1):
            seq += 1
            child = dict(fixes)
            child[j_branch] = v
            heapq.heappush(heap, (sol.objective, negdepth - 1, seq, child))

    exhausted = not hit_node_limit and (
        not heap or heap[0][0] >= incumbent_obj - gap)
    if incumbent_x is None:
        status = INFEASIBLE if exhausted else NODE_LIMIT
        return Solution(status=status, nodes=nodes, iterations=iterations)

    # duals: LP with binaries pinned at the incumbent commitment
    fixes = {j: int(incumbent_x[j] + 0.5) for j in binaries}
    fixed_sol = solve_lp(_lp_with_fixes(mip, fixes), options)
    iterations += fixed_sol.iterations
    x = fixed_sol.x if fixed_sol.is_optimal else incumbent_x
    return Solution(
        status=OPTIMAL if exhausted else NODE_LIMIT,
        x=x,
        objective=float(mip.lp.c @ x),
        row_duals=fixed_sol.row_duals,
        reduced_costs=fixed_sol.reduced_costs,
        iterations=iterations,
        best_bound=float(min(best_bound, incumbent_obj)),
        nodes=nodes,
        duals=fixed_sol.duals,
    )
