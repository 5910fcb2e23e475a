"""Aggregate per-case results into request and system statistics; write CSV tables and SVG plots."""

from __future__ import annotations

import csv
import math
import re
import statistics
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .heuristics import TABLE_ORDER

OVERALL = "overall"

CASE_COLUMNS = ("system", "request_id", "heuristic", "percent", "n", "iic", "|vs|", "|m|", "precision", "recall")


@dataclass(frozen=True)
class CaseRow:
    """One simulated run as stored in the per-case CSV."""

    system: str
    request_id: str
    heuristic: str
    percent: float
    n: int
    iic: str
    vs: int
    m: int
    precision: float
    recall: float

    @classmethod
    def from_result(cls, system: str, result) -> CaseRow:
        return cls(system, result.request_id, result.heuristic, float(result.percent), result.n,
                   result.iic, len(result.visited), len(result.reachable_ais),
                   result.precision, result.recall)

    def to_csv(self) -> list[str]:
        return [self.system, self.request_id, self.heuristic, format_percent(self.percent), str(self.n),
                self.iic, str(self.vs), str(self.m), repr(self.precision), repr(self.recall)]


def format_percent(p: float) -> str:
    s = f"{p:.1f}"
    return s if float(s) == p else repr(float(p))


def write_cases(rows: Iterable[CaseRow], path: str | Path) -> int:
    count = 0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CASE_COLUMNS)
        for r in rows:
            w.writerow(r.to_csv())
            count += 1
    return count


def read_cases(path: str | Path) -> list[CaseRow]:
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CASE_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for rec in reader:
            out.append(CaseRow(rec["system"], rec["request_id"], rec["heuristic"], float(rec["percent"]),
                               int(rec["n"]), rec["iic"], int(rec["|vs|"]), int(rec["|m|"]),
                               float(rec["precision"]), float(rec["recall"])))
    return out


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RequestMetrics:
    system: str
    request_id: str
    heuristic: str
    percent: float
    n: int
    p_cr: float
    r_cr: float


@dataclass(frozen=True)
class SystemMetrics:
    system: str
    heuristic: str
    percent: float
    n_actual: int | None  # None when pooled systems use different N
    p_avg: float
    r_avg: float
    p_sd: float
    r_sd: float
    p_med: float
    r_med: float
    request_count: int


def _mean(values: Sequence[float]) -> float:
    # fsum is exactly rounded, so the mean does not depend on input order.
    return math.fsum(values) / len(values)


def request_metrics(results: Sequence) -> RequestMetrics:
    """Average precision and recall over the initial classes of one request."""
    if not results:
        raise ValueError("no case results for request")
    first = results[0]
    keys = {(getattr(r, "system", ""), r.request_id, r.heuristic, r.percent) for r in results}
    if len(keys) != 1:
        raise ValueError(f"results mix several requests or settings: {sorted(keys)}")
    return RequestMetrics(getattr(first, "system", ""), first.request_id, first.heuristic, first.percent,
                          first.n, _mean([r.precision for r in results]), _mean([r.recall for r in results]))


def system_metrics(metrics: Sequence[RequestMetrics], system: str | None = None) -> SystemMetrics:
    """Mean, population standard deviation and median of per-request precision and recall."""
    if not metrics:
        raise ValueError("no request metrics")
    ps = [m.p_cr for m in metrics]
    rs = [m.r_cr for m in metrics]
    ns = {m.n for m in metrics}
    first = metrics[0]
    return SystemMetrics(
        system if system is not None else first.system,
        first.heuristic, first.percent,
        ns.pop() if len(ns) == 1 else None,
        _mean(ps), _mean(rs),
        statistics.pstdev(ps), statistics.pstdev(rs),
        statistics.median(ps), statistics.median(rs),
        len(metrics),
    )


def aggregate(rows: Iterable[CaseRow], overall: bool = True) -> list[SystemMetrics]:
    """Per-system statistics plus, when asked, an ``overall`` pool of all requests."""
    by_request: dict[tuple, list[CaseRow]] = defaultdict(list)
    for r in rows:
        by_request[(r.system, r.heuristic, r.percent, r.request_id)].append(r)
    requests = [request_metrics(v) for _, v in sorted(by_request.items())]

    groups: dict[tuple, list[RequestMetrics]] = defaultdict(list)
    for m in requests:
        groups[(m.system, m.heuristic, m.percent)].append(m)
        if overall:
            groups[(OVERALL, m.heuristic, m.percent)].append(m)
    return [system_metrics(v, system=k[0]) for k, v in sorted(groups.items())]


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

def heuristic_order(names: Iterable[str]) -> list[str]:
    names = set(names)
    known = [h.value for h in TABLE_ORDER if h.value in names]
    return known + sorted(names - set(known))


def safe_name(system: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", system) or "system"


def _systems(metrics: Iterable[SystemMetrics]) -> list[str]:
    names = {m.system for m in metrics}
    return sorted(names - {OVERALL}) + ([OVERALL] if OVERALL in names else [])


def _grid(metrics, system):
    cells = {(m.percent, m.heuristic): m for m in metrics if m.system == system}
    percents = sorted({p for p, _ in cells})
    heuristics = heuristic_order(h for _, h in cells)
    return cells, percents, heuristics


def _n_actual(cells, percent, heuristics) -> str:
    ns = {cells[(percent, h)].n_actual for h in heuristics if (percent, h) in cells}
    return str(ns.pop()) if len(ns) == 1 and None not in ns else "-"


def emit_tables(metrics: Sequence[SystemMetrics], out_dir: str | Path) -> list[Path]:
    """Precision and recall tables per system: mean columns then population sd columns.

    Medians go to ``<system>_<precision|recall>_median.csv``; a rounded
    human-readable rendering of all tables goes to ``tables.md``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    md = []
    for system in _systems(metrics):
        cells, percents, heuristics = _grid(metrics, system)
        for kind, avg, sd, med in (("recall", "r_avg", "r_sd", "r_med"), ("precision", "p_avg", "p_sd", "p_med")):
            path = out_dir / f"{safe_name(system)}_{kind}.csv"
            header = ["percent", "n_actual"] + [f"mean_{h}" for h in heuristics] + [f"sd_{h}" for h in heuristics]
            rows = []
            for p in percents:
                row = [format_percent(p), _n_actual(cells, p, heuristics)]
                for attr in (avg, sd):
                    row += [repr(getattr(cells[(p, h)], attr)) if (p, h) in cells else "" for h in heuristics]
                rows.append(row)
            _write_csv(path, header, rows)
            written.append(path)

            mpath = out_dir / f"{safe_name(system)}_{kind}_median.csv"
            mrows = [[format_percent(p), _n_actual(cells, p, heuristics)]
                     + [repr(getattr(cells[(p, h)], med)) if (p, h) in cells else "" for h in heuristics]
                     for p in percents]
            _write_csv(mpath, ["percent", "n_actual"] + [f"median_{h}" for h in heuristics], mrows)
            written.append(mpath)

            md.append(f"## {system} - {kind} (%)\n")
            md.append("| % | Act | " + " | ".join(heuristics) + " | " + " | ".join(f"sd {h}" for h in heuristics) + " |")
            md.append("|" + "---|" * (2 + 2 * len(heuristics)))
            for p in percents:
                vals = []
                for attr in (avg, sd):
                    vals += [f"{100 * getattr(cells[(p, h)], attr):.1f}" if (p, h) in cells else "" for h in heuristics]
                md.append(f"| {format_percent(p)} | {_n_actual(cells, p, heuristics)} | " + " | ".join(vals) + " |")
            md.append("")
    md_path = out_dir / "tables.md"
    md_path.write_text("\n".join(md) + "\n", encoding="utf-8")
    written.append(md_path)
    return written


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# Plots
# ---------------------------------------------------------------------------

def emit_plots(metrics: Sequence[SystemMetrics], out_dir: str | Path) -> list[Path]:
    """Precision (left) and recall (right) versus TopN percent, mean and median variants."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    with matplotlib.rc_context({"svg.hashsalt": "iiasim", "svg.fonttype": "none"}):
        for system in _systems(metrics):
            cells, percents, heuristics = _grid(metrics, system)
            for stat, (p_attr, r_attr) in (("mean", ("p_avg", "r_avg")), ("median", ("p_med", "r_med"))):
                fig, axes = plt.subplots(1, 2, figsize=(10, 4))
                for ax, attr, label in ((axes[0], p_attr, "precision"), (axes[1], r_attr, "recall")):
                    for h in heuristics:
                        xs = [p for p in percents if (p, h) in cells]
                        ax.plot(xs, [100 * getattr(cells[(p, h)], attr) for p in xs], marker="o", label=h)
                    ax.set_xlabel("TopN (% of classes)")
                    ax.set_ylabel(f"{stat} {label} (%)")
                    ax.set_xticks(percents)
                    ax.grid(True, alpha=0.3)
                axes[1].legend(loc="lower right")
                fig.suptitle(f"{system}: {stat} precision and recall")
                fig.tight_layout()
                path = out_dir / f"{safe_name(system)}_{stat}.svg"
                fig.savefig(path, format="svg", metadata={"Date": None})
                plt.close(fig)
                written.append(path)
    return written
