"""Scenario simulation: load insertion, day-ahead SCUC, hourly SCED.

A scenario is one (candidate bus, envelope) pair.  Days run sequentially with
commitment and dispatch state chained between simulated days; within a day,
the SCUC commits units with lazily-added network cuts, then SCED redispatches
hour by hour and logs LMPs and line duals.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..envelopes import DEFAULT_PEAK_WINDOW, LoadTrajectory, map_hour
from ..lp import OPTIMAL, SolverOptions, solve_milp
from ..model import HOURS_PER_DAY, GridCase
from ..network import build_ptdf
from .sced import HourlyMarketLog, ScedInfeasible, run_sced_hour
from .uc import FlowCut, UcModel, UnitState, build_uc

log = logging.getLogger(__name__)

FLOW_TOL = 1e-6     # MW beyond a limit before a cut is added
MAX_CUT_ROUNDS = 25


@dataclass(frozen=True)
class MarketConfig:
    days: int = 2                       # simulated days (evenly spread)
    reserve_fraction: float = 0.03      # of hourly system demand
    peak_window: tuple[int, ...] = DEFAULT_PEAK_WINDOW
    eps_mu: float = 1e-4                # binding-hour dual threshold, $/MWh
    solver: SolverOptions = field(default_factory=SolverOptions)


@dataclass(frozen=True)
class DemandOverlay:
    """Base demand plus one envelope load at one bus."""

    case: GridCase
    bus: int | None
    trajectory: LoadTrajectory | None
    matrix: np.ndarray      # (horizon, n_bus) MW

    def hour(self, t: int) -> np.ndarray:
        return self.matrix[t - 1]


def insert_load(case: GridCase, bus: int | None,
                traj: LoadTrajectory | None) -> DemandOverlay:
    """Demand overlay with the envelope's within-day value added at `bus`."""
    demand = case.demand_matrix().copy()
    if bus is not None and traj is not None:
        pos = case.bus_index()[bus]
        horizon = case.horizon
        for t in range(1, horizon + 1):
            demand[t - 1, pos] += traj.at_hour(t, horizon)
    return DemandOverlay(case=case, bus=bus, trajectory=traj, matrix=demand)


@dataclass
class ScucDay:
    day: int                    # 0-based day index within the horizon
    commitments: np.ndarray     # (n_gens, 24) of 0/1
    startups: np.ndarray
    shutdowns: np.ndarray
    dispatch: np.ndarray        # (n_gens, 24) MW
    objective: float
    cut_rounds: int


@dataclass(frozen=True)
class Exclusion:
    bus: int | None
    envelope: str
    stage: str          # "scuc" | "sced"
    day: int
    reason: str


@dataclass
class ScenarioResult:
    bus: int | None
    envelope: str
    logs: list[HourlyMarketLog]
    days: list[ScucDay]
    exclusion: Exclusion | None = None

    @property
    def qualified(self) -> bool:
        return self.exclusion is None


class ScucInfeasible(Exception):
    def __init__(self, day: int, reason: str):
        self.day = day
        self.reason = reason
        super().__init__(f"SCUC day {day}: {reason}")


def select_days(total_days: int, want: int) -> list[int]:
    """Evenly spread day indices across the horizon (deterministic)."""
    want = max(1, min(want, total_days))
    if want == total_days:
        return list(range(total_days))
    pos = np.linspace(0, total_days - 1, want)
    return sorted(set(int(round(p)) for p in pos))


def _trailing_state(u_row: np.ndarray, prev: UnitState) -> UnitState:
    on = bool(u_row[-1])
    run = 0
    for v in u_row[::-1]:
        if bool(v) == on:
            run += 1
        else:
            break
    if run == len(u_row) and bool(prev.on) == on:
        run += prev.hours_in_state
    return UnitState(on=on, hours_in_state=run, power=0.0)


def run_scuc(case: GridCase, overlay: DemandOverlay, day: int,
             init: tuple[UnitState, ...], config: MarketConfig,
             phi_gen: np.ndarray, phi_load: np.ndarray,
             limits: np.ndarray) -> ScucDay:
    """Commit one day with lazily-enforced DC network limits.

    phi_gen: (L, n_gens) PTDF columns at generator buses; phi_load: (L, 24)
    flow shift caused by the day's bus demand; limits: (L,) MW.
    Raises ScucInfeasible when the day cannot be scheduled.
    """
    h0 = day * HOURS_PER_DAY
    demand_bus = overlay.matrix[h0:h0 + HOURS_PER_DAY]      # (24, n_bus)
    total = demand_bus.sum(axis=1)
    pmax_hourly = case.pmax_matrix()[h0:h0 + HOURS_PER_DAY]
    reserve = config.reserve_fraction * total

    cuts: list[FlowCut] = []
    model: UcModel | None = None
    sol = None
    for round_no in range(MAX_CUT_ROUNDS):
        model = build_uc(case.generators, total, pmax_hourly, init=init,
                         reserve=reserve, flow_cuts=tuple(cuts))
        sol = solve_milp(model.mip, config.solver)
        if sol.status != OPTIMAL:
            raise ScucInfeasible(day, f"MILP status {sol.status}"
                                 + (f" after {len(cuts)} cuts" if cuts else ""))
        p = model.dispatch(sol.x)                            # (n_gens, 24)
        flows = phi_gen @ p - phi_load                       # (L, 24)
        over = flows - limits[:, None]
        under = -limits[:, None] - flows
        new_cuts = []
        for line, hour in zip(*np.where(over > FLOW_TOL)):
            new_cuts.append(FlowCut(
                hour=int(hour), coef=phi_gen[line], sense="<",
                rhs=float(limits[line] + phi_load[line, hour]),
                label=f"cut_p_{line}_{hour}"))
        for line, hour in zip(*np.where(under > FLOW_TOL)):
            new_cuts.append(FlowCut(
                hour=int(hour), coef=phi_gen[line], sense=">",
                rhs=float(-limits[line] + phi_load[line, hour]),
                label=f"cut_n_{line}_{hour}"))
        if not new_cuts:
            y, z = model.startups(sol.x)
            return ScucDay(
                day=day,
                commitments=model.commitments(sol.x),
                startups=y,
                shutdowns=z,
                dispatch=p,
                objective=model.objective_value(sol.x),
                cut_rounds=round_no,
            )
        cuts.extend(sorted(new_cuts, key=lambda c: (c.hour, c.label)))
    raise ScucInfeasible(day, f"network cuts failed to converge in "
                              f"{MAX_CUT_ROUNDS} rounds")


def run_sced_day(case: GridCase, overlay: DemandOverlay, scuc: ScucDay,
                 p_prev: np.ndarray | None, phi: np.ndarray,
                 config: MarketConfig) -> tuple[list[HourlyMarketLog], np.ndarray]:
    """24 SCED hours with commitments fixed; returns logs + final dispatch."""
    h0 = scuc.day * HOURS_PER_DAY
    pmax_hourly = case.pmax_matrix()
    logs = []
    for h in range(HOURS_PER_DAY):
        t = h0 + h + 1
        logs.append(run_sced_hour(
            case, overlay.matrix[t - 1], t,
            committed=scuc.commitments[:, h],
            pmax_hour=pmax_hourly[t - 1],
            p_prev=p_prev,
            phi=phi,
            options=config.solver,
            eps_mu=config.eps_mu,
        ))
        p_prev = logs[-1].dispatch
    return logs, p_prev


def run_scenario(case: GridCase, bus: int | None, traj: LoadTrajectory | None,
                 config: MarketConfig, envelope: str = "",
                 day_indices: list[int] | None = None) -> ScenarioResult:
    """SCUC/SCED over the selected days for one (bus, envelope) scenario."""
    if envelope == "" and traj is not None and traj.spec is not None:
        envelope = traj.spec.name
    overlay = insert_load(case, bus, traj)
    ptdf = build_ptdf(case)
    bus_pos = case.bus_index()
    gen_cols = np.array([bus_pos[g.bus] for g in case.generators])
    phi_gen = ptdf.matrix[:, gen_cols] if len(case.generators) else \
        np.zeros((ptdf.matrix.shape[0], 0))
    limits = np.array([br.flow_limit for br in case.in_service_branches()])
    days = day_indices if day_indices is not None else \
        select_days(case.n_days, config.days)

    init = tuple(UnitState() for _ in case.generators)   # first day: all off
    p_prev: np.ndarray | None = None
    logs: list[HourlyMarketLog] = []
    day_results: list[ScucDay] = []
    for day in days:
        h0 = day * HOURS_PER_DAY
        phi_load = ptdf.matrix @ overlay.matrix[h0:h0 + HOURS_PER_DAY].T
        try:
            scuc = run_scuc(case, overlay, day, init, config,
                            phi_gen, phi_load, limits)
        except ScucInfeasible as exc:
            log.info("scenario (%s, %s) excluded: %s", bus, envelope, exc)
            return ScenarioResult(bus, envelope, logs, day_results,
                                  Exclusion(bus, envelope, "scuc", day,
                                            exc.reason))
        try:
            day_logs, p_prev = run_sced_day(case, overlay, scuc, p_prev,
                                            ptdf.matrix, config)
        except ScedInfeasible as exc:
            log.info("scenario (%s, %s) excluded: %s", bus, envelope, exc)
            return ScenarioResult(bus, envelope, logs, day_results,
                                  Exclusion(bus, envelope, "sced", day,
                                            f"hour {exc.t}: {exc.status}"))
        logs.extend(day_logs)
        day_results.append(scuc)
        init = tuple(_trailing_state(scuc.commitments[gp], init[gp])
                     for gp in range(len(case.generators)))
        init = tuple(UnitState(st.on, st.hours_in_state,
                               float(scuc.dispatch[gp, -1]))
                     for gp, st in enumerate(init))
    return ScenarioResult(bus, envelope, logs, day_results)


def window_hours(simulated: list[int], peak_window: tuple[int, ...],
                 horizon: int) -> dict[str, set[int]]:
    """all / on-peak / off-peak partitions of the simulated hours."""
    peak = set(peak_window)
    on = {t for t in simulated if map_hour(t, horizon) in peak}
    return {
        "all": set(simulated),
        "on_peak": on,
        "off_peak": set(simulated) - on,
    }
