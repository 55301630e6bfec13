"""Sensitivity sweeps over the reliability threshold, flexibility depth, and costs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import spearmanr

from .caseio import load_case
from .envelopes import EnvelopeSpec, build_envelope
from .market import MarketConfig, select_days
from .pipeline import (
    EnvelopeInstance, _write_csv, build_instances, run_stage1, run_stage2,
    scenario_metrics,
)
from .ranking import build_decision_matrix, rank_envelope
from .runconfig import RunConfig
from .screening import build_library, candidate_set, sample_hours, stage1_gate

log = logging.getLogger(__name__)

SWEEPABLE = ("tau_pr", "alpha_shift", "alpha_pause", "cost_scale")


@dataclass
class SweepPoint:
    value: float
    n_qualified: dict[str, int]          # per envelope, stage-2 survivors
    n_total: int
    median_all: dict[str, float]         # all-hours medians per metric
    mean_cc: dict[str, float]            # per envelope
    spearman: dict[str, float] = field(default_factory=dict)  # cost_scale only
    error: str | None = None


@dataclass
class SweepReport:
    parameter: str
    points: list[SweepPoint]


def _scale_marginal_costs(case, factor: float):
    gens = tuple(replace(g, cost_quad=(g.cost_quad[0] * factor,
                                       g.cost_quad[1] * factor,
                                       g.cost_quad[2]))
                 for g in case.generators)
    return replace(case, generators=gens)


def _run_stages(case, cfg: RunConfig, instances, records=None):
    """stage1 (unless records given) -> gate -> stage2 -> metrics -> rankings."""
    market = MarketConfig(days=cfg.days, reserve_fraction=cfg.reserve_fraction,
                          peak_window=cfg.peak_window, eps_mu=cfg.eps_mu)
    library = build_library(case)
    candidates = candidate_set(case, *cfg.voltage_band)
    hours = sample_hours(case.horizon, cfg.hour_sampling, cfg.peak_window)
    if records is None:
        records = run_stage1(case, library, instances, candidates, hours,
                             market, jobs=cfg.jobs)
    qualified = stage1_gate(records, cfg.tau_pr)
    day_idx = select_days(case.n_days, cfg.days)
    scenarios = run_stage2(case, qualified, instances, market, day_idx,
                           jobs=cfg.jobs)
    simulated = [d * 24 + h for d in day_idx for h in range(1, 25)]
    metrics = scenario_metrics(case, scenarios, simulated, market)
    rankings = {}
    for inst in instances:
        if any(m.envelope == inst.name for m in metrics):
            rankings[inst.name] = rank_envelope(
                build_decision_matrix(metrics, inst.name), k=cfg.top_k,
                strict_entropy=cfg.strict_entropy)
    return records, qualified, scenarios, metrics, rankings


def _point_from(metrics, rankings, instances) -> SweepPoint:
    n_q = {}
    mean_cc = {}
    for inst in instances:
        buses = {m.bus for m in metrics if m.envelope == inst.name}
        n_q[inst.name] = len(buses)
        if inst.name in rankings:
            mean_cc[inst.name] = float(np.mean(rankings[inst.name].cc))
    med = {}
    for metric in ("mean_lmp", "p95_p5", "lmp_std", "binding_hours",
                   "congestion_rent"):
        vals = [m.value(metric) for m in metrics if m.window == "all"]
        med[metric] = float(np.median(vals)) if vals else float("nan")
    return SweepPoint(value=0.0, n_qualified=n_q, n_total=sum(n_q.values()),
                      median_all=med, mean_cc=mean_cc)


def sensitivity_sweep(cfg: RunConfig, parameter: str,
                      values: list[float]) -> SweepReport:
    """Re-run the affected stages per value; per-value failures don't stop it."""
    if parameter not in SWEEPABLE:
        raise ValueError(f"parameter must be one of {SWEEPABLE}, got {parameter!r}")
    case = load_case(cfg.case_path)
    points: list[SweepPoint] = []

    if parameter == "tau_pr":
        # pass rates do not depend on tau: compute once, re-gate per value
        instances = build_instances(cfg)
        base_records = None
        for value in values:
            try:
                cfg_v = replace(cfg, tau_pr=float(value))
                out = _run_stages(case, cfg_v, instances, records=base_records)
                base_records, _, _, metrics, rankings = out
                point = _point_from(metrics, rankings, instances)
                point.value = float(value)
                points.append(point)
            except Exception as exc:   # noqa: BLE001 - sweep must continue
                log.warning("sweep %s=%s failed: %s", parameter, value, exc)
                points.append(SweepPoint(float(value), {}, 0, {}, {},
                                         error=str(exc)))
        return SweepReport(parameter, points)

    if parameter in ("alpha_shift", "alpha_pause"):
        kind = "shift" if parameter == "alpha_shift" else "pause"
        for value in values:
            try:
                spec = EnvelopeSpec(
                    kind=kind, nameplate_mw=cfg.sizes_mw[0],
                    utilization=cfg.utilization, peak_window=cfg.peak_window,
                    curtailment=float(value),
                    makeup=cfg.beta_shift if kind == "shift" else 1.0,
                    ramp_bound=cfg.ramp_fraction * cfg.sizes_mw[0])
                instances = [EnvelopeInstance(
                    name=kind, size_mw=cfg.sizes_mw[0], spec=spec,
                    trajectory=build_envelope(spec))]
                *_ignored, metrics, rankings = _run_stages(case, cfg, instances)
                point = _point_from(metrics, rankings, instances)
                point.value = float(value)
                points.append(point)
            except Exception as exc:   # noqa: BLE001
                log.warning("sweep %s=%s failed: %s", parameter, value, exc)
                points.append(SweepPoint(float(value), {}, 0, {}, {},
                                         error=str(exc)))
        return SweepReport(parameter, points)

    # cost_scale: stage-1 feasibility is cost-independent, so the baseline
    # pass rates are reused; stages 2-3 re-run on the scaled case
    instances = build_instances(cfg)
    base_records, _, _, base_metrics, base_rankings = _run_stages(
        case, cfg, instances)
    base_point = _point_from(base_metrics, base_rankings, instances)
    base_point.value = 1.0
    points.append(base_point)
    for value in values:
        if float(value) == 1.0:
            continue
        try:
            scaled = _scale_marginal_costs(case, float(value))
            *_ignored, metrics, rankings = _run_stages(
                scaled, cfg, instances, records=base_records)
            point = _point_from(metrics, rankings, instances)
            point.value = float(value)
            pooled_base, pooled_new = [], []
            for name, res in rankings.items():
                if name not in base_rankings:
                    continue
                base_res = base_rankings[name]
                common = sorted(set(res.buses) & set(base_res.buses))
                if len(common) >= 2:
                    a = [base_res.cc[base_res.buses.index(b)] for b in common]
                    bvals = [res.cc[res.buses.index(b)] for b in common]
                    point.spearman[name] = float(spearmanr(a, bvals).statistic)
                    pooled_base += a
                    pooled_new += bvals
            if len(pooled_base) >= 2:
                point.spearman["pooled"] = float(
                    spearmanr(pooled_base, pooled_new).statistic)
            points.append(point)
        except Exception as exc:   # noqa: BLE001
            log.warning("sweep %s=%s failed: %s", parameter, value, exc)
            points.append(SweepPoint(float(value), {}, 0, {}, {},
                                     error=str(exc)))
    return SweepReport(parameter, points)


def write_sweep_report(report: SweepReport, path) -> None:
    rows = []
    for p in report.points:
        envs = sorted((set(p.n_qualified) | set(p.mean_cc) | set(p.spearman))
                      - {"pooled"})
        if not envs:
            rows.append([p.value, "", 0, "", "", "", p.error or ""])
        for env in envs:
            rows.append([
                p.value, env, p.n_qualified.get(env, 0),
                p.mean_cc.get(env, ""),
                p.median_all.get("mean_lmp", ""),
                p.spearman.get(env, ""),
                p.error or "",
            ])
        if "pooled" in p.spearman:
            rows.append([p.value, "pooled", p.n_total, "", "",
                         p.spearman["pooled"], ""])
    _write_csv(path, ["value", "envelope", "n_qualified", "mean_cc",
                      "median_mean_lmp_all", "spearman_cc", "error"], rows)
