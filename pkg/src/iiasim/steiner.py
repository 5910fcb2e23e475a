"""Rooted directed Steiner trees on unit-weight graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

from .model import ClassId, Edge

EXACT_MAX_NODES = 14


class SteinerError(ValueError):
    pass


@dataclass(frozen=True)
class UnitGraph:
    nodes: frozenset[ClassId]
    arcs: frozenset[Edge]
    root: ClassId
    _succ: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.root not in self.nodes:
            raise SteinerError(f"root {self.root!r} not among nodes")
        succ: dict[ClassId, list[ClassId]] = {}
        for x, y in self.arcs:
            if x not in self.nodes or y not in self.nodes:
                raise SteinerError(f"arc {x}->{y} leaves the node set")
            succ.setdefault(x, []).append(y)
        object.__setattr__(self, "_succ", {x: tuple(sorted(ys)) for x, ys in succ.items()})

    @classmethod
    def build(cls, arcs: Iterable[Edge], root: ClassId, nodes: Iterable[ClassId] = ()) -> UnitGraph:
        arcs = frozenset(arcs)
        ns = set(nodes) | {root}
        for x, y in arcs:
            ns.update((x, y))
        return cls(frozenset(ns), arcs, root)

    def successors(self, x: ClassId) -> tuple[ClassId, ...]:
        return self._succ.get(x, ())

    def induced(self, keep: Iterable[ClassId]) -> UnitGraph:
        keep = frozenset(keep) | {self.root}
        return UnitGraph(keep, frozenset((x, y) for x, y in self.arcs if x in keep and y in keep), self.root)


@dataclass(frozen=True)
class SteinerTree:
    root: ClassId
    parent: Mapping[ClassId, ClassId]

    @property
    def nodes(self) -> frozenset[ClassId]:
        return frozenset(self.parent) | {self.root}

    @property
    def cost(self) -> int:
        return len(self.parent)

    @property
    def arcs(self) -> frozenset[Edge]:
        return frozenset((p, v) for v, p in self.parent.items())

    def steiner_nodes(self, terminals: Iterable[ClassId]) -> frozenset[ClassId]:
        return self.nodes - set(terminals) - {self.root}


def bfs_dist(g: UnitGraph, sources: Iterable[ClassId]) -> dict[ClassId, tuple[int, ClassId | None]]:
    """Multi-source BFS: node -> (distance, predecessor); ties go to the smallest predecessor."""
    frontier = sorted(set(sources))
    for s in frontier:
        if s not in g.nodes:
            raise SteinerError(f"source {s!r} not in graph")
    out: dict[ClassId, tuple[int, ClassId | None]] = {s: (0, None) for s in frontier}
    d = 0
    while frontier:
        d += 1
        nxt = []
        # Frontier is sorted, so the first discovery of a node uses its smallest predecessor.
        for x in frontier:
            for y in g.successors(x):
                if y not in out:
                    out[y] = (d, x)
                    nxt.append(y)
        frontier = sorted(nxt)
    return out


def steiner_approx(g: UnitGraph, terminals: Iterable[ClassId]) -> SteinerTree:
    """Greedy shortest-path splicing: repeatedly attach the nearest uncovered terminal."""
    terminals = set(terminals)
    for t in terminals:
        if t not in g.nodes:
            raise SteinerError(f"terminal {t!r} not in graph")
    parent: dict[ClassId, ClassId] = {}
    tree = {g.root}
    uncovered = terminals - tree
    while uncovered:
        dist = bfs_dist(g, tree)
        reachable = [(dist[t][0], t) for t in uncovered if t in dist]
        if len(reachable) < len(uncovered):
            lost = sorted(t for t in uncovered if t not in dist)
            raise SteinerError(f"terminal {lost[0]!r} unreachable from root {g.root!r}")
        _, target = min(reachable)
        v = target
        while v not in tree:
            p = dist[v][1]
            parent[v] = p
            tree.add(v)
            v = p
        uncovered -= tree
    return SteinerTree(g.root, parent)


def steiner_exact(g: UnitGraph, terminals: Iterable[ClassId]) -> SteinerTree:
    """Minimum tree by exhaustive search over Steiner-node subsets; test oracle for small graphs."""
    if len(g.nodes) > EXACT_MAX_NODES:
        raise SteinerError(f"exact solver limited to {EXACT_MAX_NODES} nodes, got {len(g.nodes)}")
    required = frozenset(terminals) | {g.root}
    for t in required:
        if t not in g.nodes:
            raise SteinerError(f"terminal {t!r} not in graph")
    others = sorted(g.nodes - required)
    for size in range(len(others) + 1):
        best = None
        for extra in combinations(others, size):
            keep = required | set(extra)
            sub = g.induced(keep)
            dist = bfs_dist(sub, [g.root])
            if len(dist) == len(keep):
                key = tuple(sorted(keep))
                if best is None or key < best[0]:
                    best = (key, dist)
        if best is not None:
            dist = best[1]
            return SteinerTree(g.root, {v: p for v, (_, p) in dist.items() if p is not None})
    lost = sorted(t for t in required if t not in bfs_dist(g, [g.root]))
    raise SteinerError(f"terminal {lost[0]!r} unreachable from root {g.root!r}")


def check_tree(g: UnitGraph, tree: SteinerTree, terminals: Iterable[ClassId]) -> None:
    """Raise ``SteinerError`` unless ``tree`` is a valid arborescence of ``g`` spanning ``terminals``."""
    if tree.root != g.root:
        raise SteinerError("tree rooted elsewhere")
    for v, p in tree.parent.items():
        if (p, v) not in g.arcs:
            raise SteinerError(f"tree arc {p}->{v} not in graph")
    for v in tree.parent:
        seen = set()
        while v != tree.root:
            if v in seen:
                raise SteinerError(f"cycle through {v!r}")
            seen.add(v)
            if v not in tree.parent:
                raise SteinerError(f"{v!r} does not reach the root")
            v = tree.parent[v]
    missing = set(terminals) - tree.nodes
    if missing:
        raise SteinerError(f"terminal {sorted(missing)[0]!r} not spanned")
