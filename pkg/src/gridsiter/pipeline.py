"""End-to-end siting pipeline: envelopes, reliability gate, market run, ranking.

Stages execute in order and persist deterministic CSV/JSON/GeoJSON artifacts;
re-running an identical config reproduces byte-identical outputs (timings in
the manifest aside).
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from . import lp as lpmod
from .caseio import case_to_dict, load_case
from .envelopes import EnvelopeSpec, LoadTrajectory, build_envelope
from .manifest import build_manifest, sha256_json, write_manifest
from .market import (
    MarketConfig, MetricRecord, ScenarioResult, WINDOWS, compute_metrics,
    run_scenario, select_days, summarize, window_hours,
)
from .model import GridCase
from .ranking import (
    DecisionMatrix, RankingResult, build_decision_matrix,
    pooled_robust_scores, rank_envelope, shortlist_overlaps,
)
from .runconfig import RunConfig
from .screening import (
    ContingencyLibrary, PassRateRecord, QualifiedSet, Stage1Engine,
    build_library, candidate_set, sample_hours, stage1_gate,
)

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")


@dataclass(frozen=True)
class EnvelopeInstance:
    name: str
    size_mw: float
    spec: EnvelopeSpec
    trajectory: LoadTrajectory


@dataclass
class PipelineResult:
    config: RunConfig
    case: GridCase
    library: ContingencyLibrary
    candidates: list[int]
    hours: tuple[int, ...]
    simulated_hours: list[int]
    instances: list[EnvelopeInstance]
    records: list[PassRateRecord]
    qualified: QualifiedSet
    scenarios: dict[tuple[int, str], ScenarioResult]
    metrics: list[MetricRecord]
    summaries: list
    rankings: dict[str, RankingResult]
    overlaps: dict[tuple[str, str], int]
    exclusions: list[dict]
    manifest: dict = field(default_factory=dict)
    output_dir: Path | None = None


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) or isinstance(x, np.floating):
        return format(float(x), ".10g")
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def build_instances(cfg: RunConfig) -> list[EnvelopeInstance]:
    instances = []
    for size in cfg.sizes_mw:
        for spec in cfg.menu_for_size(size):
            instances.append(EnvelopeInstance(
                name=spec.name, size_mw=size, spec=spec,
                trajectory=build_envelope(spec)))
    names = [inst.name for inst in instances]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate envelope instance names: {names}")
    return instances


# -- stage 1 -----------------------------------------------------------------

_S1_CTX: dict = {}


def _stage1_init(case, library, options, hours):
    _S1_CTX["engine"] = Stage1Engine(case, library, options)
    _S1_CTX["hours"] = hours


def _stage1_task(task):
    bus, name, values = task
    traj = LoadTrajectory(values=np.asarray(values))
    return _S1_CTX["engine"].pass_rate(bus, traj, _S1_CTX["hours"],
                                       envelope=name)


def run_stage1(case: GridCase, library: ContingencyLibrary,
               instances: list[EnvelopeInstance], candidates: list[int],
               hours: tuple[int, ...], market: MarketConfig,
               jobs: int = 1) -> list[PassRateRecord]:
    tasks = [(bus, inst.name, np.asarray(inst.trajectory.values))
             for inst in instances for bus in candidates]
    if jobs > 1 and len(tasks) > 1:
        with Pool(jobs, initializer=_stage1_init,
                  initargs=(case, library, market.solver, hours)) as pool:
            return pool.map(_stage1_task, tasks)
    engine = Stage1Engine(case, library, market.solver)
    out = []
    for bus, name, values in tasks:
        traj = LoadTrajectory(values=values)
        out.append(engine.pass_rate(bus, traj, hours, envelope=name))
    return out


# -- stage 2 -----------------------------------------------------------------

_S2_CTX: dict = {}


def _stage2_init(case, market, day_idx):
    _S2_CTX["case"] = case
    _S2_CTX["market"] = market
    _S2_CTX["day_idx"] = day_idx


def _stage2_task(task):
    bus, name, values = task
    traj = LoadTrajectory(values=np.asarray(values))
    return run_scenario(_S2_CTX["case"], bus, traj, _S2_CTX["market"],
                        envelope=name, day_indices=_S2_CTX["day_idx"])


def run_stage2(case: GridCase, qualified: QualifiedSet,
               instances: list[EnvelopeInstance], market: MarketConfig,
               day_idx: list[int], jobs: int = 1
               ) -> dict[tuple[int, str], ScenarioResult]:
    by_name = {inst.name: inst for inst in instances}
    pairs = sorted(qualified.pairs)
    tasks = [(bus, name, np.asarray(by_name[name].trajectory.values))
             for bus, name in pairs]
    if jobs > 1 and len(tasks) > 1:
        with Pool(jobs, initializer=_stage2_init,
                  initargs=(case, market, day_idx)) as pool:
            results = pool.map(_stage2_task, tasks)
    else:
        _stage2_init(case, market, day_idx)
        results = [_stage2_task(t) for t in tasks]
    return {(bus, name): res
            for (bus, name, _), res in zip(tasks, results)}


def scenario_metrics(case: GridCase, scenarios, simulated: list[int],
                     market: MarketConfig) -> list[MetricRecord]:
    wins = window_hours(simulated, market.peak_window, case.horizon)
    fmax = np.array([br.flow_limit for br in case.in_service_branches()])
    out: list[MetricRecord] = []
    for (bus, name) in sorted(scenarios):
        res = scenarios[(bus, name)]
        if not res.qualified:
            continue
        for window in WINDOWS:
            out.append(compute_metrics(res.logs, wins[window], fmax,
                                       bus, name, window))
    return out


# -- artifact writers --------------------------------------------------------

def write_envelopes_csv(path: Path, instances: list[EnvelopeInstance]) -> None:
    header = ["envelope", "size_mw"] + [f"h{h}" for h in range(1, 25)]
    rows = [[inst.name, inst.size_mw] + list(inst.trajectory.values)
            for inst in instances]
    _write_csv(path, header, rows)


def write_stage1(outdir: Path, records: list[PassRateRecord],
                 qualified: QualifiedSet) -> list[str]:
    rows = [[r.bus, r.envelope, r.pass_rate, r.feasible, r.total]
            for r in sorted(records, key=lambda r: (r.envelope, r.bus))]
    _write_csv(outdir / "stage1_passrates.csv",
               ["bus", "envelope", "pass_rate", "feasible", "total"], rows)
    doc = {
        "tau_pr": qualified.tau,
        "library_fingerprint": qualified.library_fingerprint,
        "counts": {k: qualified.counts[k] for k in sorted(qualified.counts)},
        "qualified": [[b, e] for b, e in qualified.pairs],
    }
    (outdir / "stage1_qualified.json").write_text(
        json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return ["stage1_passrates.csv", "stage1_qualified.json"]


def write_scenario_logs(outdir: Path, case: GridCase,
                        scenarios: dict) -> list[str]:
    files = []
    bus_ids = [b.id for b in case.buses]
    branches = case.in_service_branches()
    for (bus, name) in sorted(scenarios):
        res = scenarios[(bus, name)]
        if not res.logs:
            continue
        lmp_name = f"lmp_{bus}_{name}.csv"
        rows = [[lg.t, lg.lambda_sys] + list(lg.lmp) for lg in res.logs]
        _write_csv(outdir / lmp_name,
                   ["t", "lambda_sys"] + [f"lmp_{b}" for b in bus_ids], rows)
        duals_name = f"duals_{bus}_{name}.csv"
        drows = []
        for lg in res.logs:
            for li, br in enumerate(branches):
                drows.append([lg.t, br.id, lg.mu_plus[li], lg.mu_minus[li],
                              lg.flows[li], br.flow_limit])
        _write_csv(outdir / duals_name,
                   ["t", "line", "mu_plus", "mu_minus", "flow", "fmax"], drows)
        files += [lmp_name, duals_name]
    return files


def write_stage2(outdir: Path, metrics: list[MetricRecord],
                 summaries, exclusions: list[dict]) -> list[str]:
    rows = [[m.bus, m.envelope, m.window, m.mean_lmp, m.p95_p5, m.lmp_std,
             m.binding_hours, m.congestion_rent]
            for m in sorted(metrics, key=lambda m: (m.envelope, m.bus, m.window))]
    _write_csv(outdir / "stage2_metrics.csv",
               ["bus", "envelope", "window", "mean_lmp", "p95_p5", "lmp_std",
                "binding_hours", "congestion_rent"], rows)
    srows = [[s.envelope, s.window, s.metric, s.median, s.iqr, s.n]
             for s in summaries]
    _write_csv(outdir / "stage2_summary.csv",
               ["envelope", "window", "metric", "median", "iqr", "n"], srows)
    erows = [[e["bus"], e["envelope"], e["stage"], e["day"], e["reason"]]
             for e in exclusions]
    _write_csv(outdir / "exclusions.csv",
               ["bus", "envelope", "stage", "day", "reason"], erows)
    return ["stage2_metrics.csv", "stage2_summary.csv", "exclusions.csv"]


def write_stage3(outdir: Path, case: GridCase,
                 rankings: dict[str, RankingResult],
                 overlaps: dict[tuple[str, str], int],
                 robust: dict | None) -> list[str]:
    files = []
    coords = {b.id: b.coord for b in case.buses}
    for name in sorted(rankings):
        res = rankings[name]
        fname = f"stage3_ranking_{name}.csv"
        rows = []
        for i, bus in enumerate(res.buses):
            g = res.group_scores[bus]
            rows.append([res.rank[bus], bus, res.cc[i], g[0], g[1], g[2],
                         res.s_fix[bus], res.s_uniform[bus],
                         1 if bus in res.shortlist else 0])
        _write_csv(outdir / fname,
                   ["rank", "bus", "cc", "s_g1", "s_g2", "s_g3", "s_fix",
                    "s_uniform", "shortlist"], rows)
        files.append(fname)

        gname = f"shortlist_{name}.geojson"
        features = []
        for i, bus in enumerate(res.buses):
            coord = coords.get(bus)
            features.append({
                "type": "Feature",
                "geometry": None if coord is None else {
                    "type": "Point", "coordinates": [coord[0], coord[1]]},
                "properties": {
                    "bus": bus,
                    "envelope": name,
                    "cc": round(float(res.cc[i]), 10),
                    "rank": res.rank[bus],
                    "shortlist": bus in res.shortlist,
                    "class": "amber" if bus in res.shortlist else "blue",
                },
            })
        doc = {"type": "FeatureCollection", "features": features}
        (outdir / gname).write_text(json.dumps(doc, indent=1, sort_keys=True)
                                    + "\n")
        files.append(gname)

    orows = [[a, b, n] for (a, b), n in sorted(overlaps.items())]
    _write_csv(outdir / "stage3_overlaps.csv",
               ["envelope_a", "envelope_b", "topk_overlap"], orows)
    files.append("stage3_overlaps.csv")

    drows = []
    for name in sorted(rankings):
        for key, val in sorted(rankings[name].diagnostics.items()):
            drows.append([name, key, val])
    _write_csv(outdir / "stage3_diagnostics.csv",
               ["envelope", "diagnostic", "value"], drows)
    files.append("stage3_diagnostics.csv")

    if robust is not None:
        rrows = [[bus, v["min_cc"], v["mean_cc"], v["n_envelopes"]]
                 for bus, v in robust.items()]
        _write_csv(outdir / "robust_scores.csv",
                   ["bus", "min_cc", "mean_cc", "n_envelopes"], rrows)
        files.append("robust_scores.csv")
    return files


# -- the pipeline ------------------------------------------------------------

def run_pipeline(cfg: RunConfig) -> PipelineResult:
    """Execute every stage and persist all artifacts plus the manifest."""
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    if cfg.dump_lp_dir:
        lpmod.set_dump_dir(cfg.dump_lp_dir)
    timings: dict[str, float] = {}
    files: list[str] = []
    exclusions: list[dict] = []
    market = MarketConfig(days=cfg.days, reserve_fraction=cfg.reserve_fraction,
                          peak_window=cfg.peak_window, eps_mu=cfg.eps_mu)

    stage = "prepare"
    try:
        t0 = time.perf_counter()
        case = load_case(cfg.case_path)
        library = build_library(case)
        candidates = candidate_set(case, *cfg.voltage_band)
        hours = sample_hours(case.horizon, cfg.hour_sampling, cfg.peak_window)
        instances = build_instances(cfg)
        day_idx = select_days(case.n_days, cfg.days)
        simulated = [d * 24 + h for d in day_idx for h in range(1, 25)]
        write_envelopes_csv(outdir / "envelopes.csv", instances)
        files.append("envelopes.csv")
        timings["prepare"] = time.perf_counter() - t0

        stage = "stage1"
        t0 = time.perf_counter()
        records = run_stage1(case, library, instances, candidates, hours,
                             market, jobs=cfg.jobs)
        qualified = stage1_gate(records, cfg.tau_pr)
        files += write_stage1(outdir, records, qualified)
        timings["stage1"] = time.perf_counter() - t0
        log.info("stage1: %d/%d (bus, envelope) pairs qualified at tau=%.3g",
                 len(qualified.pairs), len(records), cfg.tau_pr)

        stage = "stage2"
        t0 = time.perf_counter()
        scenarios = run_stage2(case, qualified, instances, market, day_idx,
                               jobs=cfg.jobs)
        for key in sorted(scenarios):
            exc = scenarios[key].exclusion
            if exc is not None:
                exclusions.append({
                    "bus": exc.bus, "envelope": exc.envelope,
                    "stage": exc.stage, "day": exc.day, "reason": exc.reason})
        metrics = scenario_metrics(case, scenarios, simulated, market)
        summaries = []
        for inst in instances:
            summaries.extend(summarize(metrics, inst.name))
        files += write_scenario_logs(outdir, case, scenarios)
        files += write_stage2(outdir, metrics, summaries, exclusions)
        timings["stage2"] = time.perf_counter() - t0
        n_q2 = len({(m.bus, m.envelope) for m in metrics})
        if n_q2 == 0:
            log.warning("stage2: no qualified scenarios")
        else:
            log.info("stage2: %d scenarios simulated, %d excluded",
                     len(scenarios), len(exclusions))

        stage = "stage3"
        t0 = time.perf_counter()
        rankings: dict[str, RankingResult] = {}
        for inst in instances:
            if any(m.envelope == inst.name for m in metrics):
                matrix = build_decision_matrix(metrics, inst.name)
                if cfg.top_k > matrix.n_alternatives:
                    log.warning(
                        "top_k=%d exceeds the %d qualified scenarios for %s; "
                        "returning all", cfg.top_k, matrix.n_alternatives,
                        inst.name)
                rankings[inst.name] = rank_envelope(
                    matrix, k=cfg.top_k, strict_entropy=cfg.strict_entropy)
        overlaps = shortlist_overlaps(rankings)
        robust = pooled_robust_scores(rankings) if cfg.pooled_scores else None
        files += write_stage3(outdir, case, rankings, overlaps, robust)
        timings["stage3"] = time.perf_counter() - t0
    except Exception as exc:
        manifest = build_manifest(cfg.canonical(), "", "", timings,
                                  exclusions, outdir,
                                  [f for f in files if (outdir / f).exists()])
        manifest["failed_stage"] = stage
        manifest["error"] = str(exc)
        write_manifest(manifest, outdir)
        raise PipelineError(stage, exc) from exc

    manifest = build_manifest(
        cfg.canonical(), sha256_json(case_to_dict(case)),
        library.fingerprint, timings, exclusions, outdir, files)
    write_manifest(manifest, outdir)

    return PipelineResult(
        config=cfg, case=case, library=library, candidates=candidates,
        hours=hours, simulated_hours=simulated, instances=instances,
        records=records, qualified=qualified, scenarios=scenarios,
        metrics=metrics, summaries=summaries, rankings=rankings,
        overlaps=overlaps, exclusions=exclusions, manifest=manifest,
        output_dir=outdir,
    )
