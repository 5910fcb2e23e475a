"""Propagation heuristics as weight providers over the edges of a propagation graph."""

from __future__ import annotations

import enum
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Callable

from .cochange import RuleTable
from .model import ChangeCase, ClassId, DependencyGraph, SubjectSystem
from .textsim import LsiSpace, cosine_sim, fold_in_query, query_sim

log = logging.getLogger(__name__)


class HeuristicId(str, enum.Enum):
    RND = "rnd"
    DBH = "dbh"
    HIST1 = "hist1"
    CCIR = "ccir"
    HIST2 = "hist2"
    RCIR = "rcir"

    def __str__(self):
        return self.value


# Column order of the result tables.
TABLE_ORDER = (HeuristicId.RND, HeuristicId.DBH, HeuristicId.HIST1,
               HeuristicId.CCIR, HeuristicId.HIST2, HeuristicId.RCIR)


def parse_heuristic(name: str) -> HeuristicId:
    try:
        return HeuristicId(name.strip().lower())
    except ValueError:
        valid = ", ".join(h.value for h in HeuristicId)
        raise ValueError(f"unknown heuristic {name!r}; expected one of {valid}") from None


@dataclass(frozen=True)
class WeightProvider:
    id: str
    fn: Callable[[ClassId, ClassId], float] = field(repr=False)
    provenance: str = ""
    # Weights that ignore the source class let rankings be shared across sources.
    source_independent: bool = False

    def weight(self, x: ClassId, y: ClassId) -> float:
        return self.fn(x, y)

    def __call__(self, x: ClassId, y: ClassId) -> float:
        return self.fn(x, y)


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(str(p).encode())
        h.update(b"\0")
    return h.hexdigest()[:16]


def make_dbh(graph: DependencyGraph) -> WeightProvider:
    counts = graph.call_counts

    def dbh(x, y):
        return counts.get((x, y), 0) + counts.get((y, x), 0)

    return WeightProvider(HeuristicId.DBH.value, dbh, _digest("dbh", graph.system.name, len(counts)))


def make_ccir(space: LsiSpace, system: SubjectSystem) -> WeightProvider:
    missing = sorted(c for c in system.classes if c not in space)
    if missing:
        raise KeyError(f"LSI space has no vector for class {missing[0]!r}")

    def ccir(x, y):
        return cosine_sim(space, x, y)

    return WeightProvider(HeuristicId.CCIR.value, ccir, _digest("ccir", space.rank, len(space.doc_ids)))


def make_rcir(space: LsiSpace, request: ChangeCase) -> WeightProvider:
    if not request.text.strip():
        log.warning("change request %s has no text; rcir weights are all zero", request.request_id)
    qv = fold_in_query(space, request.text)
    sims: dict[ClassId, float] = {}

    def rcir(x, y):
        w = sims.get(y)
        if w is None:
            w = sims[y] = query_sim(space, qv, y)
        return w

    return WeightProvider(HeuristicId.RCIR.value, rcir,
                          _digest("rcir", space.rank, request.request_id), source_independent=True)


def make_hist1(rules: RuleTable) -> WeightProvider:
    return WeightProvider(HeuristicId.HIST1.value, rules.confidence, _digest("hist1", rules.total))


def make_hist2(rules: RuleTable) -> WeightProvider:
    return WeightProvider(HeuristicId.HIST2.value, rules.support, _digest("hist2", rules.total))


def rnd_weight(seed: int, system: str, x: ClassId, y: ClassId) -> float:
    """Uniform draw in [0, 1) keyed on (seed, system, x, y)."""
    key = f"{seed}\x1f{system}\x1f{x}\x1f{y}".encode()
    bits = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")
    return (bits >> 11) / float(1 << 53)


def make_rnd(system: SubjectSystem, seed: int) -> WeightProvider:
    name = system.name

    def rnd(x, y):
        return rnd_weight(seed, name, x, y)

    return WeightProvider(HeuristicId.RND.value, rnd, _digest("rnd", seed, name))
