"""Command line entry point: ``iiasim <subcommand>``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import ingest
from .cochange import build_rules, dump_rules
from .config import OUTPUT_ENV, ConfigError, ExperimentConfig, default_output_dir
from .pipeline import build_space, run_experiment
from .reenact import SimulationError
from .report import OVERALL, aggregate, emit_plots, emit_tables, read_cases
from .steiner import SteinerError
from .synth import SynthParams, generate, write_dataset

log = logging.getLogger("iiasim")


def _csv_floats(s: str) -> list[float]:
    return [float(x) for x in s.split(",") if x.strip()]


def _csv_list(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


def _config(args) -> ExperimentConfig:
    overrides = {
        "graph": args.graph, "commits": args.commits, "corpus": args.corpus, "requests": args.requests,
        "heuristics": args.heuristics, "percents": args.percents, "lsi_rank": args.lsi_rank,
        "lsi_seed": args.lsi_seed, "rnd_seed": args.rnd_seed, "output_dir": args.output_dir,
        "jobs": args.jobs, "vectors": args.vectors, "path_mapping": args.path_mapping,
    }
    if args.start or args.end:
        if not (args.start and args.end):
            raise ConfigError("--start and --end go together")
        overrides["interval"] = (args.start, args.end)
    if args.config:
        return ExperimentConfig.load(args.config, **overrides)
    missing = [k for k in ("graph", "commits", "corpus", "requests") if overrides[k] is None]
    if "interval" not in overrides:
        missing.append("start/end")
    if missing:
        raise ConfigError(f"without --config these are required: {', '.join(missing)}")
    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="experiment config JSON")
    p.add_argument("--graph", type=Path)
    p.add_argument("--commits", type=Path, help="commit log (JSON Lines)")
    p.add_argument("--start", help="first commit date, YYYY-MM-DD")
    p.add_argument("--end", help="last commit date, YYYY-MM-DD")
    p.add_argument("--corpus", type=Path, help="corpus manifest JSON")
    p.add_argument("--requests", type=Path, help="change requests JSON")
    p.add_argument("--heuristics", type=_csv_list, help="comma list of rnd,dbh,hist1,ccir,hist2,rcir")
    p.add_argument("--percents", type=_csv_floats, help="comma list of TopN percents")
    p.add_argument("--lsi-rank", type=int)
    p.add_argument("--lsi-seed", type=int)
    p.add_argument("--rnd-seed", type=int)
    p.add_argument("--output-dir", type=Path, help=f"default: ${OUTPUT_ENV} or ./iiasim-out")
    p.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    p.add_argument("--vectors", type=Path, help="LSI vector cache file")
    p.add_argument("--path-mapping", type=Path, help="JSON map of committed path -> class id")


def cmd_convert_log(args) -> int:
    mapping = ingest.load_path_mapping(args.path_mapping)
    records = ingest.parse_name_only_log(args.raw, mapping)
    ingest.write_commit_log(records, args.out)
    print(f"wrote {len(records)} commits to {args.out}")
    return 0


def cmd_mine_rules(args) -> int:
    cfg = _config(args)
    ts = ingest.parse_commit_log(cfg.commits, cfg.interval, ingest.load_path_mapping(cfg.path_mapping))
    rules = build_rules(ts)
    out = args.out or cfg.output_dir / "rules.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    count = dump_rules(rules, out)
    print(f"{len(ts)} commits, {len(rules.class_counts)} classes, {count} pairs -> {out}")
    return 0


def cmd_build_vectors(args) -> int:
    cfg = _config(args)
    graph = ingest.parse_graph_file(cfg.graph)
    corpus = ingest.parse_corpus(cfg.corpus, graph.system)
    out = args.out or cfg.vectors or cfg.output_dir / "vectors.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    space = build_space(corpus.texts(), cfg.lsi_rank, cfg.lsi_seed, out)
    print(f"{len(space.doc_ids)} documents, {len(space.terms)} terms, rank {space.rank} -> {out}")
    return 0


def _summarize(metrics) -> None:
    systems = sorted({m.system for m in metrics} - {OVERALL})
    for system in systems:
        ms = [m for m in metrics if m.system == system]
        parts = []
        for h in dict.fromkeys(m.heuristic for m in ms):
            hs = sorted((m for m in ms if m.heuristic == h), key=lambda m: m.percent)
            lo, hi = hs[0], hs[-1]
            parts.append(f"{h} R {100 * lo.r_avg:.1f}->{100 * hi.r_avg:.1f} P {100 * lo.p_avg:.1f}->{100 * hi.p_avg:.1f}")
        print(f"{system}: {ms[0].request_count} requests; " + "; ".join(parts))


def cmd_reenact(args) -> int:
    cfg = _config(args)
    rows, metrics = run_experiment(cfg)
    print(f"{len(rows)} cases -> {cfg.output_dir}")
    _summarize(metrics)
    return 0


def cmd_report(args) -> int:
    rows = []
    for path in args.cases:
        rows.extend(read_cases(path))
    if not rows:
        raise ConfigError("no case rows to report")
    metrics = aggregate(rows)
    out = args.output_dir or Path(default_output_dir())
    emit_tables(metrics, out)
    emit_plots(metrics, out)
    _summarize(metrics)
    return 0


def cmd_synth(args) -> int:
    params = SynthParams(classes=args.classes, requests=args.requests, seed=args.seed, name=args.name)
    ds = generate(params)
    cfg = write_dataset(ds, args.out, seed=args.seed)
    print(f"{ds.graph.system.class_count} classes, {len(ds.graph.call_counts)} edges, "
          f"{len(ds.commits)} commits, {len(ds.cases)} requests -> {cfg}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iiasim", description="Reenact iterative impact analysis on past changes.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert-log", help="name-only text log -> commit-log JSON Lines")
    p.add_argument("raw", type=Path)
    p.add_argument("out", type=Path)
    p.add_argument("--path-mapping", type=Path)
    p.set_defaults(func=cmd_convert_log)

    p = sub.add_parser("mine-rules", help="dump the association rule table as CSV")
    _add_experiment_flags(p)
    p.add_argument("-o", "--out", type=Path)
    p.set_defaults(func=cmd_mine_rules)

    p = sub.add_parser("build-vectors", help="compute and cache LSI document vectors")
    _add_experiment_flags(p)
    p.add_argument("-o", "--out", type=Path)
    p.set_defaults(func=cmd_build_vectors)

    p = sub.add_parser("reenact", help="run every case and write per-case rows, tables and plots")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_reenact)

    p = sub.add_parser("report", help="aggregate one or more cases.csv files (adds an overall pool)")
    p.add_argument("cases", type=Path, nargs="+")
    p.add_argument("--output-dir", type=Path)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic subject system")
    p.add_argument("out", type=Path)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--classes", type=int, default=500)
    p.add_argument("--requests", type=int, default=15)
    p.add_argument("--name", default="synth")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ingest.IngestError, SimulationError, SteinerError, ValueError, OSError) as exc:
        print(f"iiasim {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
