"""Graph types, mark vocabulary and change-request records shared by every stage."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol

ClassId = str
Edge = tuple[ClassId, ClassId]


class MalformedInputError(ValueError):
    """Raised when model data violates a structural invariant."""


class Mark(enum.Enum):
    BLANK = "Blank"
    IMPACTED = "Impacted"
    UNCHANGED = "Unchanged"
    NEXT = "Next"
    PROPAGATING = "Propagating"


@dataclass(frozen=True)
class SubjectSystem:
    name: str
    classes: frozenset[ClassId]

    def __post_init__(self):
        if not self.classes:
            raise MalformedInputError(f"system {self.name!r} has no classes")
        for c in self.classes:
            if not isinstance(c, str) or not c:
                raise MalformedInputError(f"invalid class id {c!r}")

    @property
    def class_count(self) -> int:
        return len(self.classes)


@dataclass(frozen=True)
class DependencyGraph:
    """Directed class dependency graph; ``call_counts`` has one entry per edge."""

    system: SubjectSystem
    call_counts: Mapping[Edge, int]
    _out: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        classes = self.system.classes
        for (src, dst), calls in self.call_counts.items():
            for c in (src, dst):
                if c not in classes:
                    raise MalformedInputError(f"edge {src}->{dst} mentions unknown class {c!r}")
            if src == dst:
                raise MalformedInputError(f"self-loop on {src!r}")
            if not isinstance(calls, int) or calls < 0:
                raise MalformedInputError(f"edge {src}->{dst} has invalid call count {calls!r}")
        out: dict[ClassId, set[ClassId]] = {}
        for src, dst in self.call_counts:
            out.setdefault(src, set()).add(dst)
        object.__setattr__(self, "_out", out)

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(self.call_counts)

    def calls(self, x: ClassId, y: ClassId) -> int:
        return self.call_counts.get((x, y), 0)

    def successors(self, x: ClassId) -> frozenset[ClassId]:
        return frozenset(self._out.get(x, ()))


def symmetric_closure(edges: Iterable[Edge]) -> frozenset[Edge]:
    edges = set(edges)
    return frozenset(edges | {(y, x) for x, y in edges})


class _Weighted(Protocol):
    id: str

    def weight(self, x: ClassId, y: ClassId) -> float: ...


@dataclass(frozen=True)
class PropagationGraph:
    """Symmetric closure of a dependency graph with per-heuristic directed weights.

    ``weights[h][(x, y)]`` is defined on every symmetric edge for every
    registered heuristic ``h``; weights of ``(x, y)`` and ``(y, x)`` may differ.
    """

    base: DependencyGraph
    sym_edges: frozenset[Edge]
    weights: Mapping[str, Mapping[Edge, float]]
    _adj: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for x, y in self.sym_edges:
            if (y, x) not in self.sym_edges:
                raise MalformedInputError(f"edge set is not symmetric at {x}->{y}")
        for h, table in self.weights.items():
            for e in self.sym_edges:
                w = table.get(e)
                if w is None:
                    raise MalformedInputError(f"heuristic {h} has no weight for {e}")
                if w < 0:
                    raise MalformedInputError(f"heuristic {h} has negative weight {w} for {e}")
        adj: dict[ClassId, set[ClassId]] = {}
        for x, y in self.sym_edges:
            adj.setdefault(x, set()).add(y)
        sorted_adj = {x: tuple(sorted(ys)) for x, ys in adj.items()}
        object.__setattr__(self, "_adj", sorted_adj)

    @classmethod
    def from_graph(cls, graph: DependencyGraph, providers: Iterable[_Weighted] = ()) -> PropagationGraph:
        sym = symmetric_closure(graph.call_counts)
        weights = {p.id: {e: float(p.weight(*e)) for e in sym} for p in providers}
        return cls(base=graph, sym_edges=sym, weights=weights)

    @property
    def system(self) -> SubjectSystem:
        return self.base.system

    def neighbors(self, x: ClassId) -> frozenset[ClassId]:
        return frozenset(self.sorted_neighbors(x))

    def sorted_neighbors(self, x: ClassId) -> tuple[ClassId, ...]:
        if x not in self.base.system.classes:
            raise MalformedInputError(f"unknown class {x!r}")
        return self._adj.get(x, ())

    def weight(self, heuristic: str, x: ClassId, y: ClassId) -> float:
        return self.weights[heuristic][(x, y)]


def neighbors(pg: PropagationGraph, x: ClassId) -> frozenset[ClassId]:
    return pg.neighbors(x)


@dataclass(frozen=True)
class ChangeCase:
    request_id: str
    text: str
    ais: frozenset[ClassId]
    revision: str = ""

    def __post_init__(self):
        if len(self.ais) < 2:
            raise MalformedInputError(
                f"change request {self.request_id!r} has {len(self.ais)} AIS classes; at least 2 required"
            )
