"""Stage 1: N-1 reliability gate.

For each candidate bus and envelope, every (sampled hour, contingency) cell
solves a DC-OPF with penalized thermal slack; the pass rate is the exact
fraction of cells that stay feasible with zero slack.  A merit-order
dispatch shortcut certifies the easy feasible cells without invoking the LP
(provably the same verdict: when the cheapest balanced dispatch already
respects every limit it is an optimal zero-slack LP point).
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from .envelopes import LoadTrajectory, map_hour
from .lp import EQUAL, GREATER, LESS, OPTIMAL, LinearProgram, SolverOptions, solve_lp
from .model import Contingency, GridCase, apply_contingency
from .network import build_ptdf, island_forming_branches

log = logging.getLogger(__name__)

SLACK_PENALTY = 1e5     # $/MWh on thermal slack, far above any marginal cost
SLACK_TOL = 1e-6        # MW of slack still counted as "zero"


def candidate_set(case: GridCase, vmin_kv: float, vmax_kv: float) -> list[int]:
    """Buses with vmin < base_kv < vmax (strict on both ends)."""
    if vmin_kv >= vmax_kv:
        raise ValueError(f"need vmin < vmax, got ({vmin_kv}, {vmax_kv})")
    return [b.id for b in case.buses if vmin_kv < b.base_kv < vmax_kv]


@dataclass(frozen=True)
class ContingencyLibrary:
    """Fixed, ordered N-1 outage list shared by every site and envelope."""

    contingencies: tuple[Contingency, ...]
    fingerprint: str

    def __len__(self) -> int:
        return len(self.contingencies)


def build_library(case: GridCase, include_generators: bool = True) -> ContingencyLibrary:
    """All in-service non-island-forming branches plus individual generators."""
    formers = island_forming_branches(case)
    conts: list[Contingency] = []
    for br in case.in_service_branches():
        if br.id not in formers:
            conts.append(Contingency("branch", br.id))
    if include_generators:
        for g in case.generators:
            conts.append(Contingency("generator", g.id))
    digest = hashlib.sha256(
        ";".join(c.label() for c in conts).encode()).hexdigest()[:16]
    return ContingencyLibrary(contingencies=tuple(conts), fingerprint=digest)


@dataclass
class PassRateRecord:
    bus: int
    envelope: str
    feasible: int
    total: int
    pass_rate: float
    library_fingerprint: str
    hours: tuple[int, ...]
    bitmap: np.ndarray | None = None    # (n_hours, n_contingencies) of 0/1


@dataclass(frozen=True)
class QualifiedSet:
    tau: float
    pairs: tuple[tuple[int, str], ...]      # (bus, envelope), PR >= tau
    counts: dict[str, int]
    library_fingerprint: str

    def buses_for(self, envelope: str) -> list[int]:
        return [b for b, e in self.pairs if e == envelope]


def stage1_gate(records: list[PassRateRecord], tau: float) -> QualifiedSet:
    """Exact threshold filter PR >= tau over records from one library."""
    prints = {r.library_fingerprint for r in records}
    if len(prints) > 1:
        raise ValueError(f"records mix contingency libraries: {sorted(prints)}")
    pairs = tuple(sorted((r.bus, r.envelope) for r in records
                         if r.pass_rate >= tau))
    counts: dict[str, int] = {}
    for r in records:
        counts.setdefault(r.envelope, 0)
        if r.pass_rate >= tau:
            counts[r.envelope] += 1
    return QualifiedSet(tau=tau, pairs=pairs, counts=counts,
                        library_fingerprint=prints.pop() if prints else "")


def sample_hours(horizon: int, policy: str,
                 peak_window: tuple[int, ...]) -> tuple[int, ...]:
    """Deterministic study-hour subsample.

    "full" takes every hour; "everyN+peak" takes hours 1, 1+N, 1+2N, ... plus
    every hour whose within-day position falls in the peak window.
    """
    if policy == "full":
        return tuple(range(1, horizon + 1))
    if policy.startswith("every") and policy.endswith("+peak"):
        try:
            step = int(policy[len("every"):-len("+peak")])
        except ValueError:
            raise ValueError(f"unknown hour sampling policy {policy!r}") from None
        if step < 1:
            raise ValueError("sampling step must be >= 1")
        peak = set(peak_window)
        hours = set(range(1, horizon + 1, step))
        hours.update(t for t in range(1, horizon + 1)
                     if map_hour(t, horizon) in peak)
        return tuple(sorted(hours))
    raise ValueError(f"unknown hour sampling policy {policy!r}")


# ---------------------------------------------------------------------------


class _ContingencyCtx:
    """Per-contingency precomputation shared across hours/sites/envelopes."""

    def __init__(self, case: GridCase, cont: Contingency | None,
                 formers: set[int], demand: np.ndarray, pmax: np.ndarray):
        view = case if cont is None else apply_contingency(case, cont, formers)
        self.cont = cont
        ptdf = build_ptdf(view)
        self.limits = np.array([br.flow_limit
                                for br in view.in_service_branches()])
        bus_pos = view.bus_index()
        gens = view.generators
        self.gen_cols = np.array([bus_pos[g.bus] for g in gens])
        self.phi = ptdf.matrix                     # (L, n_bus)
        self.phi_gen = ptdf.matrix[:, self.gen_cols]   # (L, n_gens)
        self.base_flow_load = ptdf.matrix @ demand.T   # (L, horizon): Phi @ D
        # hourly generator caps under this outage
        if cont is not None and cont.kind == "generator":
            self.pmax = pmax.copy()
            gpos = [k for k, g in enumerate(gens) if g.id == cont.element]
            self.pmax[:, gpos[0]] = 0.0
        else:
            self.pmax = pmax
        # stage-1 merit order: marginal cost at the midpoint of [pmin, pmax]
        self.mcost = np.array([g.marginal_cost(0.5 * (g.pmin + g.pmax))
                               for g in gens])
        self.merit = np.lexsort((np.arange(len(gens)), self.mcost))
        self.bus_pos = bus_pos
        self.n_gens = len(gens)

class Stage1Engine:
    """Feasibility sweeps over one case + contingency library."""

    def __init__(self, case: GridCase, library: ContingencyLibrary,
                 options: SolverOptions | None = None):
        if len(library) == 0:
            raise ValueError("contingency library is empty")
        self.case = case
        self.library = library
        self.options = options or SolverOptions()
        self.demand = case.demand_matrix()
        self.pmax = case.pmax_matrix()
        formers = island_forming_branches(case)
        self.ctxs = [_ContingencyCtx(case, c, formers, self.demand, self.pmax)
                     for c in library.contingencies]
        self.bus_pos = case.bus_index()
        self.iteration_limited = 0

    def _merit_screen(self, ctx: _ContingencyCtx, hours: np.ndarray,
                      bus_pos: int, loads: np.ndarray) -> np.ndarray:
        """Vectorized shortcut verdicts over hours: 1 feasible-by-merit,
        0 capacity-infeasible, -1 needs the LP."""
        h = hours - 1
        caps = ctx.pmax[h][:, ctx.merit]              # (H, G) in merit order
        total = self.demand[h].sum(axis=1) + loads    # (H,)
        cum_before = np.cumsum(caps, axis=1) - caps
        p_merit = np.clip(total[:, None] - cum_before, 0.0, caps)
        p = np.empty_like(p_merit)
        p[:, ctx.merit] = p_merit
        flows = (p @ ctx.phi_gen.T - ctx.base_flow_load[:, h].T
                 - np.outer(loads, ctx.phi[:, bus_pos]))
        ok = np.all(np.abs(flows) <= ctx.limits + SLACK_TOL, axis=1)
        short = caps.sum(axis=1) < total - 1e-9
        out = np.full(len(hours), -1, dtype=np.int8)
        out[ok] = 1
        out[short] = 0
        return out

    def _cell(self, ctx: _ContingencyCtx, t: int, bus_pos: int,
              dc_load: float) -> int:
        """delta for one (contingency, hour) cell with dc_load MW at bus_pos."""
        verdict = self._merit_screen(ctx, np.array([t]), bus_pos,
                                     np.array([dc_load]))[0]
        if verdict >= 0:
            return int(verdict)
        total = float(self.demand[t - 1].sum()) + dc_load
        return self._cell_lp(ctx, t, bus_pos, dc_load, total)

    def _cell_lp(self, ctx: _ContingencyCtx, t: int, bus_pos: int,
                 dc_load: float, total: float) -> int:
        """Penalized DC-OPF with lazily-added limit rows.

        Solving over a row subset is conclusive both ways: positive penalty
        on a subset lower-bounds the full problem's penalty (delta=0), and a
        zero-penalty point violating no remaining limit is feasible for the
        full problem (delta=1).
        """
        h = t - 1
        L, G = ctx.phi_gen.shape
        shift = ctx.base_flow_load[:, h] + ctx.phi[:, bus_pos] * dc_load
        caps = ctx.pmax[h]
        # seed with the limits the merit-order dispatch already violates
        cum = np.cumsum(caps[ctx.merit]) - caps[ctx.merit]
        p0 = np.empty(G)
        p0[ctx.merit] = np.clip(total - cum, 0.0, caps[ctx.merit])
        flows0 = ctx.phi_gen @ p0 - shift
        rows: list[int] = sorted(
            [int(l) + 1 for l in np.flatnonzero(flows0 > ctx.limits + SLACK_TOL)]
            + [-(int(l) + 1)
               for l in np.flatnonzero(flows0 < -ctx.limits - SLACK_TOL)])
        for _ in range(12):
            R = len(rows)
            A = np.zeros((1 + R, G + R))
            A[0, :G] = 1.0
            senses = [EQUAL]
            rhs = np.empty(1 + R)
            rhs[0] = total
            for k, sr in enumerate(rows):
                line = abs(sr) - 1
                sign = 1.0 if sr > 0 else -1.0
                A[1 + k, :G] = sign * ctx.phi_gen[line]
                A[1 + k, G + k] = -1.0
                senses.append(LESS)
                rhs[1 + k] = ctx.limits[line] + sign * shift[line]
            c = np.concatenate([ctx.mcost, np.full(R, SLACK_PENALTY)])
            lb = np.zeros(G + R)
            ub = np.concatenate([caps, np.full(R, np.inf)])
            sol = solve_lp(LinearProgram(c=c, A=A, senses=senses, rhs=rhs,
                                         lb=lb, ub=ub), self.options)
            if sol.status != OPTIMAL:
                if sol.status == "iteration-limit":
                    self.iteration_limited += 1
                    log.warning("stage1 cell hit iteration limit: cont=%s t=%d",
                                ctx.cont.label() if ctx.cont else "base", t)
                return 0
            if float(sol.x[G:].max(initial=0.0)) > SLACK_TOL:
                return 0
            flows = ctx.phi_gen @ sol.x[:G] - shift
            viol_up = np.flatnonzero(flows > ctx.limits + SLACK_TOL)
            viol_dn = np.flatnonzero(flows < -ctx.limits - SLACK_TOL)
            new = ([int(l) + 1 for l in viol_up if (int(l) + 1) not in rows]
                   + [-(int(l) + 1) for l in viol_dn
                      if -(int(l) + 1) not in rows])
            if not new:
                return 1
            rows.extend(sorted(new))
        log.warning("stage1 cell row generation did not settle: cont=%s t=%d",
                    ctx.cont.label() if ctx.cont else "base", t)
        return 0

    def pass_rate(self, bus: int, traj: LoadTrajectory,
                  hours: tuple[int, ...], envelope: str = "",
                  keep_bitmap: bool = True) -> PassRateRecord:
        if not hours:
            raise ValueError("empty hour sample")
        bus_pos = self.bus_pos[bus]
        horizon = self.case.horizon
        hour_arr = np.asarray(hours, dtype=int)
        loads = np.array([traj.at_hour(t, horizon) for t in hour_arr])
        bitmap = np.zeros((len(hours), len(self.ctxs)), dtype=np.int8)
        for ci, ctx in enumerate(self.ctxs):
            verdicts = self._merit_screen(ctx, hour_arr, bus_pos, loads)
            bitmap[:, ci] = np.maximum(verdicts, 0)
            for ti in np.flatnonzero(verdicts < 0):
                t = int(hour_arr[ti])
                total = float(self.demand[t - 1].sum()) + loads[ti]
                bitmap[ti, ci] = self._cell_lp(ctx, t, bus_pos,
                                               float(loads[ti]), total)
        feasible = int(bitmap.sum())
        total = bitmap.size
        return PassRateRecord(
            bus=bus,
            envelope=envelope or (traj.spec.name if traj.spec else ""),
            feasible=feasible,
            total=total,
            pass_rate=feasible / total,
            library_fingerprint=self.library.fingerprint,
            hours=tuple(hours),
            bitmap=bitmap if keep_bitmap else None,
        )


def dcopf_feasibility(view: GridCase, injection: tuple[int, float],
                      hour: int, options: SolverOptions | None = None) -> int:
    """delta in {0,1} for one already-outaged case view and one hour.

    1 iff the penalized DC-OPF solves with every thermal slack below
    SLACK_TOL; iteration-limited solves count as 0 (logged by the engine).
    """
    lib = ContingencyLibrary(contingencies=(Contingency("branch", -1),),
                             fingerprint="adhoc")
    engine = Stage1Engine.__new__(Stage1Engine)
    engine.case = view
    engine.library = lib
    engine.options = options or SolverOptions()
    engine.demand = view.demand_matrix()
    engine.pmax = view.pmax_matrix()
    engine.bus_pos = view.bus_index()
    engine.iteration_limited = 0
    ctx = _ContingencyCtx(view, None, set(), engine.demand, engine.pmax)
    bus, mw = injection
    return engine._cell(ctx, hour, engine.bus_pos[bus], float(mw))


def pass_rate(case: GridCase, bus: int, traj: LoadTrajectory,
              library: ContingencyLibrary, hours: tuple[int, ...],
              options: SolverOptions | None = None) -> PassRateRecord:
    """Convenience wrapper building a fresh engine for one (bus, envelope)."""
    return Stage1Engine(case, library, options).pass_rate(bus, traj, hours)
