"""Unit-commitment MILP builder (generic horizon, optional network cuts).

Commitment binaries exist only for units with commitment structure (nonzero
min levels, no-load/startup/shutdown costs, or multi-hour min up/down); other
units, renewables included, are treated as always committed.  Quadratic
energy costs are linearized over [pmin, pmax] with equal-width segments so
the model stays MILP/LP with exact duals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..lp import EQUAL, GREATER, LESS, LpBuilder, MixedIntegerProgram
from ..model import Generator

N_COST_SEGMENTS = 5


@dataclass(frozen=True)
class UnitState:
    """Commitment boundary condition entering a day."""

    on: bool = False
    hours_in_state: int = 10_000   # long enough to carry no obligation
    power: float = 0.0             # dispatch in the final preceding hour


@dataclass(frozen=True)
class FlowCut:
    """One network limit row: sum_g coef[g] * p_{g,t} {<,>} rhs."""

    hour: int                 # 0-based position within the day
    coef: np.ndarray          # (n_gens,)
    sense: str
    rhs: float
    label: str = ""


def commitment_required(g: Generator) -> bool:
    if g.renewable_profile_ref is not None:
        return False
    return (g.pmin > 0 or g.no_load_cost > 0 or g.startup_cost > 0
            or g.shutdown_cost > 0 or g.min_up > 1 or g.min_down > 1)


def cost_segments(g: Generator) -> tuple[np.ndarray, np.ndarray]:
    """(widths, slopes) of the piecewise-linear energy cost above pmin."""
    span = g.pmax - g.pmin
    if span <= 0:
        return np.zeros(0), np.zeros(0)
    k = N_COST_SEGMENTS if g.cost_quad[0] > 0 else 1
    edges = np.linspace(g.pmin, g.pmax, k + 1)
    widths = np.diff(edges)
    costs = np.array([g.production_cost(x) for x in edges])
    slopes = np.diff(costs) / widths
    return widths, slopes


def commitment_cost(g: Generator) -> float:
    """Hourly cost of being online at minimum output."""
    return g.production_cost(g.pmin) + g.no_load_cost


@dataclass
class UcModel:
    """Built MILP plus the index maps needed to read a solution back."""

    mip: MixedIntegerProgram
    gens: tuple[Generator, ...]
    committable: np.ndarray            # bool per gen
    horizon: int
    u_idx: dict[tuple[int, int], int]  # (gen pos, hour) -> var index
    y_idx: dict[tuple[int, int], int]
    z_idx: dict[tuple[int, int], int]
    seg_idx: dict[tuple[int, int], list[int]]
    const_cost: float
    init: tuple[UnitState, ...]

    def commitments(self, x: np.ndarray) -> np.ndarray:
        u = np.ones((len(self.gens), self.horizon), dtype=int)
        for (gp, h), j in self.u_idx.items():
            u[gp, h] = int(round(x[j]))
        return u

    def dispatch(self, x: np.ndarray) -> np.ndarray:
        """(n_gens, horizon) MW implied by a solution vector."""
        u = self.commitments(x)
        p = np.zeros((len(self.gens), self.horizon))
        for gp, g in enumerate(self.gens):
            for h in range(self.horizon):
                p[gp, h] = g.pmin * u[gp, h] + sum(
                    float(x[j]) for j in self.seg_idx[gp, h])
        return p

    def startups(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Canonical (y, z) implied by the commitment pattern."""
        u = self.commitments(x)
        y = np.zeros_like(u)
        z = np.zeros_like(u)
        for gp in range(len(self.gens)):
            if not self.committable[gp]:
                continue
            prev = 1 if self.init[gp].on else 0
            for h in range(self.horizon):
                d = u[gp, h] - prev
                y[gp, h] = max(d, 0)
                z[gp, h] = max(-d, 0)
                prev = u[gp, h]
        return y, z

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.mip.lp.c @ x) + self.const_cost


def build_uc(gens: tuple[Generator, ...],
             total_demand: np.ndarray,
             pmax_hourly: np.ndarray,
             init: tuple[UnitState, ...] | None = None,
             reserve: np.ndarray | None = None,
             flow_cuts: tuple[FlowCut, ...] = (),
             ) -> UcModel:
    """Assemble the commitment MILP.

    total_demand: (T,) system MW per hour; pmax_hourly: (T, n_gens) effective
    caps (renewable profiles applied); flow_cuts: network limit rows over the
    per-unit dispatch, loads already moved to the rhs by the caller.
    """
    T = len(total_demand)
    if init is None:
        init = tuple(UnitState() for _ in gens)
    committable = np.array([commitment_required(g) for g in gens])

    b = LpBuilder()
    u_idx: dict[tuple[int, int], int] = {}
    y_idx: dict[tuple[int, int], int] = {}
    z_idx: dict[tuple[int, int], int] = {}
    seg_idx: dict[tuple[int, int], list[int]] = {}
    binaries: list[int] = []
    const_cost = 0.0
    seg_data = [cost_segments(g) for g in gens]

    for gp, g in enumerate(gens):
        widths, slopes = seg_data[gp]
        on_cost = commitment_cost(g)
        for h in range(T):
            if committable[gp]:
                u = b.add_var(0, 1, on_cost, f"u_{g.id}_{h}")
                u_idx[gp, h] = u
                y_idx[gp, h] = b.add_var(0, 1, g.startup_cost, f"y_{g.id}_{h}")
                z_idx[gp, h] = b.add_var(0, 1, g.shutdown_cost, f"z_{g.id}_{h}")
                binaries.append(u)
            else:
                const_cost += on_cost
            segs = []
            for k, (w, slope) in enumerate(zip(widths, slopes)):
                hi = w
                if g.renewable_profile_ref is not None:
                    hi = min(w, max(0.0, pmax_hourly[h, gp] - g.pmin))
                segs.append(b.add_var(0, hi, slope, f"p_{g.id}_{k}_{h}"))
            seg_idx[gp, h] = segs

    # boundary min-up/min-down obligations pin early commitments
    for gp, g in enumerate(gens):
        if not committable[gp]:
            continue
        st = init[gp]
        if st.on and st.hours_in_state < g.min_up:
            for h in range(min(T, g.min_up - st.hours_in_state)):
                b._lb[u_idx[gp, h]] = 1.0
        if not st.on and st.hours_in_state < g.min_down:
            for h in range(min(T, g.min_down - st.hours_in_state)):
                b._ub[u_idx[gp, h]] = 0.0

    def add_dispatch_terms(row: dict[int, float], gp: int, h: int,
                           scale: float) -> float:
        """Add scale * p_{gp,h} to the row; returns the constant part."""
        g = gens[gp]
        for j in seg_idx[gp, h]:
            row[j] = row.get(j, 0.0) + scale
        if committable[gp]:
            if g.pmin:
                key = u_idx[gp, h]
                row[key] = row.get(key, 0.0) + scale * g.pmin
            return 0.0
        return scale * g.pmin

    for h in range(T):
        row: dict[int, float] = {}
        const = 0.0
        for gp in range(len(gens)):
            const += add_dispatch_terms(row, gp, h, 1.0)
        b.add_constr(row, EQUAL, float(total_demand[h]) - const,
                     tag=f"balance_{h}")

        for gp, g in enumerate(gens):
            if committable[gp] and seg_idx[gp, h]:
                cap = {j: 1.0 for j in seg_idx[gp, h]}
                cap[u_idx[gp, h]] = -(g.pmax - g.pmin)
                b.add_constr(cap, LESS, 0.0)

        if reserve is not None and reserve[h] > 0:
            rrow: dict[int, float] = {}
            rhs_r = float(reserve[h])
            for gp, g in enumerate(gens):
                rhs_r -= add_dispatch_terms(rrow, gp, h, -1.0)
                if committable[gp]:
                    key = u_idx[gp, h]
                    rrow[key] = rrow.get(key, 0.0) + pmax_hourly[h, gp]
                else:
                    rhs_r -= pmax_hourly[h, gp]
            b.add_constr(rrow, GREATER, rhs_r, tag=f"reserve_{h}")

    # start/stop logic and minimum up/down windows
    for gp, g in enumerate(gens):
        if not committable[gp]:
            continue
        u0 = 1.0 if init[gp].on else 0.0
        for h in range(T):
            row = {y_idx[gp, h]: 1.0, z_idx[gp, h]: -1.0, u_idx[gp, h]: -1.0}
            if h > 0:
                row[u_idx[gp, h - 1]] = 1.0
                b.add_constr(row, EQUAL, 0.0)
            else:
                b.add_constr(row, EQUAL, -u0)
        if g.min_up > 1:
            for h in range(T):
                row = {y_idx[gp, tau]: 1.0
                       for tau in range(max(0, h - g.min_up + 1), h + 1)}
                row[u_idx[gp, h]] = row.get(u_idx[gp, h], 0.0) - 1.0
                b.add_constr(row, LESS, 0.0)
        if g.min_down > 1:
            for h in range(T):
                row = {z_idx[gp, tau]: 1.0
                       for tau in range(max(0, h - g.min_down + 1), h + 1)}
                row[u_idx[gp, h]] = row.get(u_idx[gp, h], 0.0) + 1.0
                b.add_constr(row, LESS, 1.0)

    # ramping; startup/shutdown hours may move freely within [0, pmax]
    for gp, g in enumerate(gens):
        span = g.pmax - g.pmin
        if g.ramp_up >= span and g.ramp_down >= span:
            continue
        p0 = init[gp].power
        u0 = 1.0 if (not committable[gp] or init[gp].on) else 0.0
        for h in range(T):
            up: dict[int, float] = {}
            rhs_up = g.ramp_up if not committable[gp] else g.pmax
            const = add_dispatch_terms(up, gp, h, 1.0)
            rhs_up -= const
            if committable[gp]:
                # p_h - p_{h-1} + (pmax - RU) u_{h-1} <= pmax
                if h > 0:
                    rhs_up -= add_dispatch_terms(up, gp, h - 1, -1.0)
                    key = u_idx[gp, h - 1]
                    up[key] = up.get(key, 0.0) + (g.pmax - g.ramp_up)
                else:
                    rhs_up += p0 - (g.pmax - g.ramp_up) * u0
            else:
                if h > 0:
                    rhs_up -= add_dispatch_terms(up, gp, h - 1, -1.0)
                else:
                    rhs_up += p0
            b.add_constr(up, LESS, rhs_up)

            dn: dict[int, float] = {}
            rhs_dn = g.ramp_down if not committable[gp] else g.pmax
            rhs_dn -= add_dispatch_terms(dn, gp, h, -1.0)
            if committable[gp]:
                # p_{h-1} - p_h + (pmax - RD) u_h <= pmax
                key = u_idx[gp, h]
                dn[key] = dn.get(key, 0.0) + (g.pmax - g.ramp_down)
                if h > 0:
                    rhs_dn -= add_dispatch_terms(dn, gp, h - 1, 1.0)
                else:
                    rhs_dn -= p0
            else:
                if h > 0:
                    rhs_dn -= add_dispatch_terms(dn, gp, h - 1, 1.0)
                else:
                    rhs_dn -= p0
            b.add_constr(dn, LESS, rhs_dn)

    for cut in flow_cuts:
        row = {}
        rhs = float(cut.rhs)
        for gp in range(len(gens)):
            if cut.coef[gp] == 0.0:
                continue
            rhs -= add_dispatch_terms(row, gp, cut.hour, float(cut.coef[gp]))
        b.add_constr(row, cut.sense, rhs, tag=cut.label or None)

    lp = b.build()
    return UcModel(
        mip=MixedIntegerProgram(lp, tuple(binaries)),
        gens=gens, committable=committable, horizon=T,
        u_idx=u_idx, y_idx=y_idx, z_idx=z_idx, seg_idx=seg_idx,
        const_cost=const_cost, init=init,
    )
