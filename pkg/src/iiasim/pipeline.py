"""End-to-end experiment: ingest inputs, build weight providers, reenact every case, merge rows."""

from __future__ import annotations

import logging
import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import ingest
from .cochange import RuleTable, build_rules
from .config import ConfigError, ExperimentConfig
from .heuristics import (HeuristicId, WeightProvider, make_ccir, make_dbh, make_hist1, make_hist2,
                         make_rcir, make_rnd)
from .model import ChangeCase, DependencyGraph, PropagationGraph
from .reenact import Ranking, SimulationError, percent_to_n, run_request
from .report import CaseRow, aggregate, emit_plots, emit_tables, write_cases
from .textsim import LsiSpace, build_tdm, cache_key, corpus_digest, load_space, lsi_project, save_space

log = logging.getLogger(__name__)


@dataclass
class Inputs:
    graph: DependencyGraph
    pg: PropagationGraph
    rules: RuleTable | None
    space: LsiSpace | None
    cases: list[ChangeCase]


def build_space(texts: dict[str, str], rank: int | None, seed: int, cache: Path | None = None) -> LsiSpace:
    key = cache_key(corpus_digest(texts), rank, seed)
    if cache is not None:
        space = load_space(cache, key)
        if space is not None:
            log.info("using cached LSI vectors from %s", cache)
            return space
    space = lsi_project(build_tdm(texts), rank, seed=seed)
    if cache is not None:
        save_space(space, cache, key)
    return space


def load_inputs(cfg: ExperimentConfig) -> Inputs:
    """Parse and validate every input; any problem raises before simulation starts."""
    cfg.check_files()
    graph = ingest.parse_graph_file(cfg.graph)
    cases = ingest.parse_change_requests(cfg.requests, graph.system)
    if not cases:
        raise ConfigError(f"{cfg.requests}: no usable change requests")
    wanted = set(cfg.heuristics)

    rules = None
    if wanted & {HeuristicId.HIST1.value, HeuristicId.HIST2.value}:
        mapping = ingest.load_path_mapping(cfg.path_mapping)
        ts = ingest.parse_commit_log(cfg.commits, cfg.interval, mapping)
        unknown = ts.unknown_classes(graph.system)
        if unknown:
            log.info("%d historical classes are not in the current class list", len(unknown))
        rules = build_rules(ts)

    space = None
    if wanted & {HeuristicId.CCIR.value, HeuristicId.RCIR.value}:
        corpus = ingest.parse_corpus(cfg.corpus, graph.system)
        space = build_space(corpus.texts(), cfg.lsi_rank, cfg.lsi_seed, cfg.vectors)
        if HeuristicId.RCIR.value in wanted:
            for c in cases:
                if not c.text.strip():
                    raise ConfigError(f"request {c.request_id} has no text but rcir is enabled")

    return Inputs(graph, PropagationGraph.from_graph(graph), rules, space, cases)


def system_provider(inputs: Inputs, heuristic: str, rnd_seed: int) -> WeightProvider:
    h = HeuristicId(heuristic)
    if h is HeuristicId.DBH:
        return make_dbh(inputs.graph)
    if h is HeuristicId.CCIR:
        return make_ccir(inputs.space, inputs.graph.system)
    if h is HeuristicId.HIST1:
        return make_hist1(inputs.rules)
    if h is HeuristicId.HIST2:
        return make_hist2(inputs.rules)
    if h is HeuristicId.RND:
        return make_rnd(inputs.graph.system, rnd_seed)
    raise ValueError(f"{heuristic} depends on the change request")


# Per-process state for the worker pool; set before forking or in the initializer.
_STATE: dict = {}


def _init_worker(inputs, heuristics, percents, rnd_seed):
    _STATE.clear()
    _STATE.update(inputs=inputs, heuristics=heuristics, percents=percents, rnd_seed=rnd_seed, rankings={})


def _run_task(task: tuple[int, int]) -> list[tuple[tuple, CaseRow]]:
    ci, hi = task
    inputs: Inputs = _STATE["inputs"]
    heuristic = _STATE["heuristics"][hi]
    case = inputs.cases[ci]
    system = inputs.graph.system
    if heuristic == HeuristicId.RCIR.value:
        provider = make_rcir(inputs.space, case)
        ranking = Ranking(provider, inputs.pg)
    else:
        ranking = _STATE["rankings"].get(heuristic)
        if ranking is None:
            provider = system_provider(inputs, heuristic, _STATE["rnd_seed"])
            ranking = _STATE["rankings"][heuristic] = Ranking(provider, inputs.pg)
        provider = ranking.provider
    out = []
    for pi, percent in enumerate(_STATE["percents"]):
        n = percent_to_n(system.class_count, percent)
        try:
            results = run_request(provider, inputs.pg, case, n, percent, ranking)
        except Exception as exc:
            raise SimulationError(
                f"case request={case.request_id} heuristic={heuristic} percent={percent}: {exc}") from exc
        for r in results:
            out.append(((ci, r.iic, hi, pi), CaseRow.from_result(system.name, r)))
    return out


def run_cases(inputs: Inputs, heuristics: list[str], percents: list[float],
              rnd_seed: int = 0, jobs: int | None = None) -> list[CaseRow]:
    """Every (request, initial class, heuristic, percent) case, in that canonical order."""
    tasks = [(ci, hi) for ci in range(len(inputs.cases)) for hi in range(len(heuristics))]
    jobs = jobs or os.cpu_count() or 1
    jobs = min(jobs, len(tasks))
    init_args = (inputs, list(heuristics), list(percents), rnd_seed)
    if jobs <= 1:
        _init_worker(*init_args)
        try:
            parts = [_run_task(t) for t in tasks]
        finally:
            _STATE.clear()
    else:
        ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
        with ProcessPoolExecutor(jobs, mp_context=ctx, initializer=_init_worker, initargs=init_args) as pool:
            parts = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    keyed = [kv for part in parts for kv in part]
    keyed.sort(key=lambda kv: kv[0])
    return [row for _, row in keyed]


def run_experiment(cfg: ExperimentConfig) -> tuple[list[CaseRow], list]:
    """Run a configured experiment and write cases.csv, tables and plots to the output directory."""
    inputs = load_inputs(cfg)
    rows = run_cases(inputs, cfg.heuristics, cfg.percents, cfg.rnd_seed, cfg.jobs)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_cases(rows, out / "cases.csv")
    metrics = aggregate(rows)
    emit_tables(metrics, out)
    emit_plots(metrics, out)
    return rows, metrics
