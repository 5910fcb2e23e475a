"""Simulated iterative impact analysis: TopN pruning, reachable subgraph, Steiner reconstruction, metrics."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .model import ChangeCase, ClassId, Edge, Mark, PropagationGraph
from .steiner import UnitGraph, steiner_approx

DEFAULT_PERCENTS = (0.5, 1.0, 2.0, 3.0, 4.0, 5.0)


class SimulationError(ValueError):
    pass


def percent_to_n(class_count: int, percent: float) -> int:
    """N = ceil(class_count * percent / 100), at least 1."""
    if percent <= 0:
        raise ValueError(f"percent must be positive, got {percent}")
    # Decimal-string conversion keeps 3% of 200 at exactly 6.
    exact = Fraction(class_count) * Fraction(str(percent)) / 100
    return max(1, math.ceil(exact))


class Ranking:
    """Neighbors of each class sorted by descending weight under one provider, computed on demand."""

    def __init__(self, provider, pg: PropagationGraph):
        self.provider = provider
        self.pg = pg
        self._cache: dict[ClassId, tuple[list[ClassId], list[float]]] = {}

    def ranked(self, x: ClassId) -> tuple[list[ClassId], list[float]]:
        hit = self._cache.get(x)
        if hit is None:
            w = self.provider.weight
            pairs = sorted(((w(x, y), y) for y in self.pg.sorted_neighbors(x)), key=lambda p: (-p[0], p[1]))
            hit = self._cache[x] = ([y for _, y in pairs], [float(v) for v, _ in pairs])
        return hit

    def top_n(self, x: ClassId, n: int) -> list[ClassId]:
        ys, ws = self.ranked(x)
        if len(ys) <= n:
            return list(ys)
        threshold = ws[n - 1]
        k = n
        while k < len(ys) and ws[k] >= threshold:
            k += 1
        return ys[:k]


def top_n(provider, pg: PropagationGraph, x: ClassId, n: int) -> frozenset[ClassId]:
    """Neighbors weighted at least the n-th largest weight; ties at the threshold all count."""
    return frozenset(Ranking(provider, pg).top_n(x, n))


@dataclass(frozen=True)
class ReachableSubgraph:
    iic: ClassId
    n: int
    nodes: frozenset[ClassId]
    arcs: frozenset[Edge]
    reachable_ais: frozenset[ClassId]

    def unit_graph(self) -> UnitGraph:
        return UnitGraph(self.nodes, self.arcs, self.iic)


def build_subgraph(
    provider,
    pg: PropagationGraph,
    iic: ClassId,
    n: int,
    ais: Iterable[ClassId] = (),
    ranking: Ranking | None = None,
) -> ReachableSubgraph:
    if iic not in pg.system.classes:
        raise SimulationError(f"unknown initial class {iic!r}")
    ranking = ranking or Ranking(provider, pg)
    nodes = {iic}
    arcs = set()
    work = deque([iic])
    while work:
        x = work.popleft()
        for y in ranking.top_n(x, n):
            arcs.add((x, y))
            if y not in nodes:
                nodes.add(y)
                work.append(y)
    nodes = frozenset(nodes)
    return ReachableSubgraph(iic, n, nodes, frozenset(arcs), nodes & frozenset(ais))


@dataclass(frozen=True)
class CaseResult:
    request_id: str
    heuristic: str
    percent: float | None
    n: int
    iic: ClassId
    marks: Mapping[ClassId, Mark]
    visited: frozenset[ClassId]
    reachable_ais: frozenset[ClassId]
    precision: float
    recall: float

    def with_mark(self, mark: Mark) -> frozenset[ClassId]:
        return frozenset(c for c, m in self.marks.items() if m is mark)

    @property
    def impacted(self) -> frozenset[ClassId]:
        return self.with_mark(Mark.IMPACTED)

    @property
    def propagating(self) -> frozenset[ClassId]:
        return self.with_mark(Mark.PROPAGATING)

    @property
    def unchanged(self) -> frozenset[ClassId]:
        return self.with_mark(Mark.UNCHANGED)


def precision_recall(visited: frozenset, ais: frozenset, iic: ClassId) -> tuple[float, float]:
    hits = len((visited & ais) - {iic})
    inspected = len(visited - {iic})
    expected = len(ais - {iic})
    if expected == 0:
        raise SimulationError("recall undefined: AIS has no class besides the initial one")
    # A run that inspects nothing beyond the start finds nothing.
    p = hits / inspected if inspected else 0.0
    return p, hits / expected


def simulate_case(
    provider,
    pg: PropagationGraph,
    case: ChangeCase,
    iic: ClassId,
    n: int,
    percent: float | None = None,
    ranking: Ranking | None = None,
) -> CaseResult:
    ais = frozenset(case.ais)
    if len(ais) < 2:
        raise SimulationError(f"request {case.request_id}: AIS needs at least 2 classes")
    if iic not in ais:
        raise SimulationError(f"request {case.request_id}: initial class {iic!r} not in AIS")
    sub = build_subgraph(provider, pg, iic, n, ais, ranking)
    tree = steiner_approx(sub.unit_graph(), sub.reachable_ais)
    in_tree = tree.nodes

    succ: dict[ClassId, list[ClassId]] = {}
    for x, y in sub.arcs:
        succ.setdefault(x, []).append(y)
    unchanged = {y for x in in_tree for y in succ.get(x, ()) if y not in in_tree}

    marks = dict.fromkeys(pg.system.classes, Mark.BLANK)
    for c in unchanged:
        marks[c] = Mark.UNCHANGED
    for c in in_tree:
        marks[c] = Mark.IMPACTED if c in ais else Mark.PROPAGATING
    visited = frozenset(in_tree | unchanged)
    p, r = precision_recall(visited, ais, iic)
    return CaseResult(case.request_id, str(provider.id), percent, n, iic,
                      marks, visited, sub.reachable_ais, p, r)


def run_request(
    provider,
    pg: PropagationGraph,
    case: ChangeCase,
    n: int,
    percent: float | None = None,
    ranking: Ranking | None = None,
) -> list[CaseResult]:
    """One result per AIS member taken as the initial class, in class-id order."""
    ranking = ranking or Ranking(provider, pg)
    return [simulate_case(provider, pg, case, c, n, percent, ranking) for c in sorted(case.ais)]
