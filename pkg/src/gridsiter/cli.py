"""gridsiter command-line interface.

Exit codes: 0 success, 2 configuration/input error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STAGE = 3


def _add_config_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="run config TOML file")
    p.add_argument("--jobs", type=int, default=None,
                   help="override worker count")
    p.add_argument("--dump-lp", default=None, metavar="DIR",
                   help="dump every solved model in LP format to DIR")


def _load_cfg(args):
    from .runconfig import load_config

    cfg = load_config(args.config)
    if getattr(args, "jobs", None):
        cfg = replace(cfg, jobs=args.jobs)
    if getattr(args, "dump_lp", None):
        cfg = replace(cfg, dump_lp_dir=args.dump_lp)
    return cfg


def cmd_run(args) -> int:
    from .pipeline import run_pipeline

    cfg = _load_cfg(args)
    result = run_pipeline(cfg)
    n_q1 = len(result.qualified.pairs)
    n_q2 = len({(m.bus, m.envelope) for m in result.metrics})
    print(f"stage1 qualified: {n_q1}; stage2 qualified: {n_q2}; "
          f"outputs in {result.output_dir}")
    if n_q2 == 0:
        print("no qualified scenarios")
    return EXIT_OK


def cmd_convert(args) -> int:
    if args.from_format != "matpower" or args.to_format != "case":
        print("only --from matpower --to case is supported", file=sys.stderr)
        return EXIT_CONFIG
    from .matpower import convert_matpower_file

    convert_matpower_file(args.input, args.output, horizon=args.horizon)
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_envelopes(args) -> int:
    from .envelopes import build_envelope, menu_from_json

    doc = json.loads(Path(args.menu).read_text())
    specs = menu_from_json(doc, nameplate_mw=args.size)
    if args.print_csv:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["envelope"] + [f"h{h}" for h in range(1, 25)])
        for spec in specs:
            traj = build_envelope(spec)
            writer.writerow([spec.name] + [format(v, ".10g")
                                           for v in traj.values])
    return EXIT_OK


def cmd_stage1(args) -> int:
    from .market import MarketConfig
    from .pipeline import build_instances, run_stage1, write_stage1
    from .screening import build_library, candidate_set, sample_hours, stage1_gate
    from .caseio import load_case

    cfg = _load_cfg(args)
    if args.tau is not None:
        cfg = replace(cfg, tau_pr=args.tau)
    if args.sample is not None:
        cfg = replace(cfg, hour_sampling=args.sample)
    case = load_case(cfg.case_path)
    library = build_library(case)
    market = MarketConfig(days=cfg.days, reserve_fraction=cfg.reserve_fraction,
                          peak_window=cfg.peak_window, eps_mu=cfg.eps_mu)
    instances = build_instances(cfg)
    candidates = candidate_set(case, *cfg.voltage_band)
    hours = sample_hours(case.horizon, cfg.hour_sampling, cfg.peak_window)
    records = run_stage1(case, library, instances, candidates, hours, market,
                         jobs=cfg.jobs)
    qualified = stage1_gate(records, cfg.tau_pr)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_stage1(outdir, records, qualified)
    print(f"stage1: {len(qualified.pairs)}/{len(records)} qualified; "
          f"outputs in {outdir}")
    return EXIT_OK


def cmd_stage2(args) -> int:
    from .market import MarketConfig, select_days, summarize
    from .pipeline import (
        build_instances, run_stage2, scenario_metrics, write_scenario_logs,
        write_stage2,
    )
    from .screening import QualifiedSet
    from .caseio import load_case

    cfg = _load_cfg(args)
    if args.days is not None:
        cfg = replace(cfg, days=args.days)
    case = load_case(cfg.case_path)
    qpath = Path(args.qualified) if args.qualified else \
        Path(cfg.output_dir) / "stage1_qualified.json"
    if not qpath.exists():
        print(f"qualified set {qpath} not found; run stage1 first",
              file=sys.stderr)
        return EXIT_CONFIG
    qdoc = json.loads(qpath.read_text())
    qualified = QualifiedSet(
        tau=qdoc["tau_pr"],
        pairs=tuple((int(b), e) for b, e in qdoc["qualified"]),
        counts=qdoc["counts"],
        library_fingerprint=qdoc["library_fingerprint"])
    market = MarketConfig(days=cfg.days, reserve_fraction=cfg.reserve_fraction,
                          peak_window=cfg.peak_window, eps_mu=cfg.eps_mu)
    instances = build_instances(cfg)
    day_idx = select_days(case.n_days, cfg.days)
    scenarios = run_stage2(case, qualified, instances, market, day_idx,
                           jobs=cfg.jobs)
    simulated = [d * 24 + h for d in day_idx for h in range(1, 25)]
    metrics = scenario_metrics(case, scenarios, simulated, market)
    exclusions = [
        {"bus": r.exclusion.bus, "envelope": r.exclusion.envelope,
         "stage": r.exclusion.stage, "day": r.exclusion.day,
         "reason": r.exclusion.reason}
        for _, r in sorted(scenarios.items()) if r.exclusion is not None]
    summaries = []
    for inst in instances:
        summaries.extend(summarize(metrics, inst.name))
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_scenario_logs(outdir, case, scenarios)
    write_stage2(outdir, metrics, summaries, exclusions)
    print(f"stage2: {len({(m.bus, m.envelope) for m in metrics})} scenarios "
          f"qualified, {len(exclusions)} excluded; outputs in {outdir}")
    return EXIT_OK


def cmd_stage3(args) -> int:
    from .market.metrics import MetricRecord
    from .pipeline import build_instances, write_stage3
    from .ranking import (
        build_decision_matrix, pooled_robust_scores, rank_envelope,
        shortlist_overlaps,
    )
    from .caseio import load_case

    cfg = _load_cfg(args)
    if args.top_k is not None:
        cfg = replace(cfg, top_k=args.top_k)
    case = load_case(cfg.case_path)
    mpath = Path(args.metrics) if args.metrics else \
        Path(cfg.output_dir) / "stage2_metrics.csv"
    if not mpath.exists():
        print(f"metrics file {mpath} not found; run stage2 first",
              file=sys.stderr)
        return EXIT_CONFIG
    metrics = []
    with open(mpath) as fh:
        for rec in csv.DictReader(fh):
            metrics.append(MetricRecord(
                bus=int(rec["bus"]), envelope=rec["envelope"],
                window=rec["window"], mean_lmp=float(rec["mean_lmp"]),
                p95_p5=float(rec["p95_p5"]), lmp_std=float(rec["lmp_std"]),
                binding_hours=int(rec["binding_hours"]),
                congestion_rent=float(rec["congestion_rent"])))
    instances = build_instances(cfg)
    rankings = {}
    for inst in instances:
        if any(m.envelope == inst.name for m in metrics):
            rankings[inst.name] = rank_envelope(
                build_decision_matrix(metrics, inst.name), k=cfg.top_k,
                strict_entropy=cfg.strict_entropy)
    overlaps = shortlist_overlaps(rankings)
    robust = pooled_robust_scores(rankings) if cfg.pooled_scores else None
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_stage3(outdir, case, rankings, overlaps, robust)
    print(f"stage3: ranked {len(rankings)} envelopes; outputs in {outdir}")
    return EXIT_OK


def cmd_naive(args) -> int:
    from .baseline import naive_baseline, write_naive_report
    from .caseio import load_case

    cfg = _load_cfg(args)
    case = load_case(cfg.case_path)
    size = args.size if args.size is not None else cfg.sizes_mw[0]
    report = naive_baseline(case, size, args.count, cfg)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_naive_report(report, outdir / "naive_baseline.csv")
    print(f"naive baseline: {sum(r.passes for r in report.rows)}/"
          f"{len(report.rows)} picks pass the gate "
          f"(fraction {report.pass_fraction:.3f})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .sweeps import sensitivity_sweep, write_sweep_report

    cfg = _load_cfg(args)
    values = [float(v) for v in args.values.split(",")]
    report = sensitivity_sweep(cfg, args.parameter, values)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"sweep_{args.parameter}.csv"
    write_sweep_report(report, path)
    print(f"sweep over {args.parameter}: {len(report.points)} points -> {path}")
    return EXIT_OK


def cmd_timesave(args) -> int:
    from .baseline import time_savings, time_savings_range

    if args.conv_range or args.fast_range:
        if not (args.conv_range and args.fast_range):
            print("--conv-range and --fast-range must be given together",
                  file=sys.stderr)
            return EXIT_CONFIG
        lo, hi = time_savings_range(tuple(args.conv_range),
                                    tuple(args.fast_range))
        print(json.dumps({"delta_years_min": lo, "delta_years_max": hi}))
    else:
        if args.t_conv is None or args.t_fast is None:
            print("provide --t-conv and --t-fast, or both ranges",
                  file=sys.stderr)
            return EXIT_CONFIG
        ts = time_savings(args.t_conv, args.t_fast)
        print(json.dumps({"t_conv_years": ts.t_conv_years,
                          "t_fast_years": ts.t_fast_years,
                          "delta_years": ts.delta_years}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridsiter",
        description="Reliability-gated, market-driven siting of large "
                    "flexible loads")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full pipeline from a config file")
    _add_config_arg(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("convert", help="convert a MATPOWER case to JSON")
    p.add_argument("--from", dest="from_format", required=True)
    p.add_argument("input")
    p.add_argument("--to", dest="to_format", required=True)
    p.add_argument("output")
    p.add_argument("--horizon", type=int, default=24,
                   help="hours of flat series generated from static loads")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("envelopes", help="print envelope trajectories")
    p.add_argument("--menu", required=True, help="envelope menu JSON file")
    p.add_argument("--size", type=float, default=None,
                   help="nameplate MW when the menu omits it")
    p.add_argument("--print", dest="print_csv", action="store_true")
    p.set_defaults(func=cmd_envelopes)

    p = sub.add_parser("stage1", help="reliability screening only")
    _add_config_arg(p)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--sample", default=None, help="hour sampling policy")
    p.set_defaults(func=cmd_stage1)

    p = sub.add_parser("stage2", help="market simulation for a qualified set")
    _add_config_arg(p)
    p.add_argument("--qualified", default=None,
                   help="stage1_qualified.json (default: from output dir)")
    p.add_argument("--days", type=int, default=None)
    p.set_defaults(func=cmd_stage2)

    p = sub.add_parser("stage3", help="ranking from stage-2 metrics")
    _add_config_arg(p)
    p.add_argument("--metrics", default=None,
                   help="stage2_metrics.csv (default: from output dir)")
    p.add_argument("--top-k", type=int, default=None)
    p.set_defaults(func=cmd_stage3)

    p = sub.add_parser("naive", help="naive lowest-LMP heuristic benchmark")
    _add_config_arg(p)
    p.add_argument("--size", type=float, default=None)
    p.add_argument("-n", "--count", type=int, default=20)
    p.set_defaults(func=cmd_naive)

    p = sub.add_parser("sweep", help="sensitivity sweep")
    _add_config_arg(p)
    p.add_argument("--parameter", required=True,
                   choices=["tau_pr", "alpha_shift", "alpha_pause",
                            "cost_scale"])
    p.add_argument("--values", required=True,
                   help="comma-separated parameter values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("timesave", help="interconnection-time savings")
    p.add_argument("--t-conv", type=float, default=None, help="years")
    p.add_argument("--t-fast", type=float, default=None, help="years")
    p.add_argument("--conv-range", type=float, nargs=2, default=None)
    p.add_argument("--fast-range", type=float, nargs=2, default=None)
    p.set_defaults(func=cmd_timesave)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    from .caseio import CaseParseError
    from .model import CaseValidationError
    from .pipeline import PipelineError
    from .runconfig import ConfigError

    try:
        return args.func(args)
    except (ConfigError, CaseParseError, CaseValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
