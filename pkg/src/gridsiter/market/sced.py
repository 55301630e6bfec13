"""Hourly security-constrained economic dispatch with LMP/dual extraction.

The network is modeled in B-theta form so every bus's power-balance dual is
its LMP directly; line-limit shadow prices come from the reduced costs of the
bounded flow variables.  Sign note: with the injection-convention PTDF used
everywhere in this package, the congestion decomposition reads
lmp = lambda_sys * 1 - Phi' (mu+ - mu-), where mu+ prices the positive
(upper) flow limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..lp import EQUAL, OPTIMAL, LpBuilder, SolverOptions, solve_lp
from ..model import GridCase
from .uc import commitment_cost, cost_segments

BINDING_EPS_MU = 1e-4   # $/MWh; an hour binds when any mu+ + mu- exceeds this


@dataclass
class HourlyMarketLog:
    """Per-hour market outcome for one (bus, envelope) scenario."""

    t: int                      # year-hour, 1-based
    lmp: np.ndarray             # (n_bus,) $/MWh
    lambda_sys: float           # $/MWh at the slack bus
    mu_plus: np.ndarray         # (n_lines,) >= 0
    mu_minus: np.ndarray        # (n_lines,) >= 0
    flows: np.ndarray           # (n_lines,) MW
    dispatch: np.ndarray        # (n_gens,) MW
    binding: bool
    decomp_residual: float      # max |lmp - (sys - Phi'(mu+ - mu-))|
    objective: float

    @property
    def max_mu(self) -> float:
        return float((self.mu_plus + self.mu_minus).max(initial=0.0))


class ScedInfeasible(Exception):
    def __init__(self, t: int, status: str):
        self.t = t
        self.status = status
        super().__init__(f"SCED infeasible at hour {t} ({status})")


def _segment_boxes(widths: np.ndarray, floor: float,
                   ceil: float) -> list[tuple[float, float]]:
    """Per-segment [lb, ub] whose sums telescope to [floor, ceil].

    Valid for convex (non-decreasing slope) segments: cheaper segments fill
    first, so pinning the leading segments full encodes a dispatch floor.
    """
    boxes = []
    cum = 0.0
    for w in widths:
        lb = min(max(floor - cum, 0.0), w)
        ub = min(max(ceil - cum, 0.0), w)
        boxes.append((lb, ub))
        cum += w
    return boxes


def run_sced_hour(case: GridCase, demand: np.ndarray, t: int,
                  committed: np.ndarray, pmax_hour: np.ndarray,
                  p_prev: np.ndarray | None, phi: np.ndarray,
                  options: SolverOptions | None = None,
                  eps_mu: float = BINDING_EPS_MU) -> HourlyMarketLog:
    """One hour of SCED with commitments fixed.

    demand: (n_bus,) MW; committed: (n_gens,) 0/1; pmax_hour: effective caps;
    p_prev: previous simulated hour's dispatch for ramp linking (None for the
    first hour); phi: injection-convention PTDF for the decomposition check.
    """
    options = options or SolverOptions()
    branches = case.in_service_branches()
    gens = case.generators
    bus_pos = case.bus_index()
    b = LpBuilder()

    theta = []
    for bus in case.buses:
        fixed = bus.id == case.slack_bus
        lim = 0.0 if fixed else np.inf
        theta.append(b.add_var(-lim, lim, 0.0, f"th_{bus.id}"))
    f_idx = [b.add_var(-br.flow_limit, br.flow_limit, 0.0, f"f_{br.id}")
             for br in branches]

    const_cost = 0.0
    seg_vars: list[list[int]] = []
    for gp, g in enumerate(gens):
        if not committed[gp]:
            seg_vars.append([])
            continue
        const_cost += commitment_cost(g)
        lo = g.pmin
        hi = min(g.pmax, float(pmax_hour[gp]))
        if p_prev is not None:
            lo = max(lo, float(p_prev[gp]) - g.ramp_down)
            hi = min(hi, float(p_prev[gp]) + g.ramp_up)
        if hi < lo - 1e-9:
            raise ScedInfeasible(t, "empty ramp window")
        widths, slopes = cost_segments(g)
        boxes = _segment_boxes(widths, lo - g.pmin, hi - g.pmin)
        seg_vars.append([b.add_var(lb, ub, slope)
                         for (lb, ub), slope in zip(boxes, slopes)])

    # flow definition rows: f - b*(theta_from - theta_to) = 0
    for row, br in enumerate(branches):
        sus = abs(br.susceptance)
        b.add_constr({f_idx[row]: 1.0,
                      theta[bus_pos[br.from_bus]]: -sus,
                      theta[bus_pos[br.to_bus]]: sus}, EQUAL, 0.0)

    # nodal balance rows (their duals are the LMPs)
    for k, bus in enumerate(case.buses):
        coeffs: dict[int, float] = {}
        rhs = float(demand[k])
        for gp, g in enumerate(gens):
            if g.bus != bus.id or not committed[gp]:
                continue
            rhs -= g.pmin
            for j in seg_vars[gp]:
                coeffs[j] = coeffs.get(j, 0.0) + 1.0
        for row, br in enumerate(branches):
            if br.from_bus == bus.id:
                coeffs[f_idx[row]] = coeffs.get(f_idx[row], 0.0) - 1.0
            if br.to_bus == bus.id:
                coeffs[f_idx[row]] = coeffs.get(f_idx[row], 0.0) + 1.0
        b.add_constr(coeffs, EQUAL, rhs, tag=f"bal_{bus.id}")

    sol = solve_lp(b.build(), options)
    if sol.status != OPTIMAL:
        raise ScedInfeasible(t, sol.status)

    lmp = np.array([sol.duals[f"bal_{bus.id}"] for bus in case.buses])
    lambda_sys = float(lmp[bus_pos[case.slack_bus]])
    d_f = sol.reduced_costs[f_idx]
    mu_plus = np.maximum(0.0, -d_f)
    mu_minus = np.maximum(0.0, d_f)
    flows = sol.x[f_idx].copy()
    dispatch = np.zeros(len(gens))
    for gp, g in enumerate(gens):
        if committed[gp]:
            dispatch[gp] = g.pmin + sum(float(sol.x[j]) for j in seg_vars[gp])

    resid = lmp - (lambda_sys - phi.T @ (mu_plus - mu_minus))
    mu_tot = mu_plus + mu_minus
    return HourlyMarketLog(
        t=t,
        lmp=lmp,
        lambda_sys=lambda_sys,
        mu_plus=mu_plus,
        mu_minus=mu_minus,
        flows=flows,
        dispatch=dispatch,
        binding=bool(mu_tot.max(initial=0.0) > eps_mu),
        decomp_residual=float(np.abs(resid).max()),
        objective=float(sol.objective) + const_cost,
    )
