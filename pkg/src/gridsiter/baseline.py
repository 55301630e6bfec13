"""Naive historical-LMP siting heuristic benchmark and time-savings arithmetic."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .envelopes import EnvelopeSpec, build_envelope
from .market import MarketConfig, run_scenario, select_days
from .model import GridCase
from .pipeline import _write_csv
from .runconfig import RunConfig
from .screening import Stage1Engine, build_library, candidate_set, sample_hours

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NaiveRow:
    bus: int
    zone: str
    mean_lmp: float      # base-case mean LMP at this bus, $/MWh
    pass_rate: float
    passes: bool


@dataclass
class NaiveReport:
    size_mw: float
    tau_pr: float
    rows: list[NaiveRow]
    pass_fraction: float
    base_mean_lmp: dict[int, float]


def naive_baseline(case: GridCase, size_mw: float, n: int,
                   cfg: RunConfig) -> NaiveReport:
    """Rank candidate buses by base-case mean LMP and gate the lowest n.

    The heuristic picks the historically cheapest candidate buses, places a
    firm load of size_mw at each, and reports the Stage-1 verdicts.
    """
    market = MarketConfig(days=cfg.days, reserve_fraction=cfg.reserve_fraction,
                          peak_window=cfg.peak_window, eps_mu=cfg.eps_mu)
    day_idx = select_days(case.n_days, cfg.days)
    base = run_scenario(case, None, None, market, envelope="base",
                        day_indices=day_idx)
    if base.exclusion is not None:
        raise RuntimeError(
            f"base-case market simulation infeasible: {base.exclusion}")
    lmp = np.mean([lg.lmp for lg in base.logs], axis=0)
    mean_lmp = {bus.id: float(lmp[k]) for k, bus in enumerate(case.buses)}

    candidates = candidate_set(case, *cfg.voltage_band)
    if n > len(candidates):
        log.warning("requested %d naive picks but only %d candidates; capping",
                    n, len(candidates))
        n = len(candidates)
    picks = sorted(candidates, key=lambda b: (mean_lmp[b], b))[:n]

    spec = EnvelopeSpec(kind="firm", nameplate_mw=size_mw,
                        utilization=cfg.utilization,
                        peak_window=cfg.peak_window)
    traj = build_envelope(spec)
    library = build_library(case)
    hours = sample_hours(case.horizon, cfg.hour_sampling, cfg.peak_window)
    engine = Stage1Engine(case, library, market.solver)

    zones = {b.id: b.zone for b in case.buses}
    rows = []
    for bus in picks:
        rec = engine.pass_rate(bus, traj, hours, envelope="firm",
                               keep_bitmap=False)
        rows.append(NaiveRow(bus=bus, zone=zones[bus],
                             mean_lmp=mean_lmp[bus],
                             pass_rate=rec.pass_rate,
                             passes=rec.pass_rate >= cfg.tau_pr))
    frac = sum(r.passes for r in rows) / len(rows) if rows else 0.0
    return NaiveReport(size_mw=size_mw, tau_pr=cfg.tau_pr, rows=rows,
                       pass_fraction=frac, base_mean_lmp=mean_lmp)


def write_naive_report(report: NaiveReport, path) -> None:
    rows = [[r.bus, r.zone, r.mean_lmp, r.pass_rate,
             1 if r.passes else 0] for r in report.rows]
    _write_csv(path, ["bus", "zone", "base_mean_lmp", "pass_rate", "passes"],
               rows)


# -- interconnection-time savings ---------------------------------------------

@dataclass(frozen=True)
class TimeSavings:
    t_conv_years: float
    t_fast_years: float

    @property
    def delta_years(self) -> float:
        return self.t_conv_years - self.t_fast_years


def time_savings(t_conv_years: float, t_fast_years: float) -> TimeSavings:
    """Exact interconnection-time saving: conventional minus fast-track."""
    if t_conv_years < 0 or t_fast_years < 0:
        raise ValueError("timelines must be non-negative")
    return TimeSavings(float(t_conv_years), float(t_fast_years))


def time_savings_range(conv_range: tuple[float, float],
                       fast_range: tuple[float, float]) -> tuple[float, float]:
    """Min/max saving over all endpoint combinations of the two intervals."""
    deltas = [time_savings(c, f).delta_years
              for c in conv_range for f in fast_range]
    return min(deltas), max(deltas)
