"""Daily correlation graphs, multi-day integration and clique reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from statistics import fmean
from typing import IO, Iterable, Sequence

import numpy as np

from .correlation import CorrelationMatrix
from .orders import id_sort_key

DEFAULT_CORR_THRESHOLD = 0.90
DEFAULT_OCCURRENCE_THRESHOLD = 2

Edge = tuple[str, str]


def edge_key(a: str, b: str) -> Edge:
    if a == b:
        raise ValueError(f"self-loop on {a!r}")
    return (a, b) if id_sort_key(a) < id_sort_key(b) else (b, a)


def _sorted_ids(ids: Iterable[str]) -> list[str]:
    return sorted(ids, key=id_sort_key)


class UnionFind:
    def __init__(self, items: Iterable[str] = ()):
        self.parent: dict[str, str] = {}
        self.size: dict[str, int] = {}
        for item in items:
            self.add(item)

    def add(self, item: str) -> None:
        if item not in self.parent:
            self.parent[item] = item
            self.size[item] = 1

    def find(self, item: str) -> str:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def groups(self) -> list[set[str]]:
        out: dict[str, set[str]] = {}
        for item in self.parent:
            out.setdefault(self.find(item), set()).add(item)
        return list(out.values())


def _components(nodes: Iterable[str], edges: Iterable[Edge]) -> list[frozenset[str]]:
    uf = UnionFind(nodes)
    for a, b in edges:
        uf.add(a)
        uf.add(b)
        uf.union(a, b)
    comps = [frozenset(g) for g in uf.groups() if len(g) >= 2]
    return sorted(comps, key=lambda c: id_sort_key(min(c, key=id_sort_key)))


@dataclass(frozen=True)
class DailyGraph:
    day: str
    nodes: tuple[str, ...]
    edges: dict[Edge, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        known = set(self.nodes)
        for (a, b) in self.edges:
            if a == b:
                raise ValueError(f"self-loop on {a!r}")
            if a not in known or b not in known:
                raise ValueError(f"edge ({a}, {b}) references an unknown node")
            if edge_key(a, b) != (a, b):
                raise ValueError(f"edge ({a}, {b}) is not in canonical order")


@dataclass(frozen=True)
class IntegratedGraph:
    nodes: tuple[str, ...]
    edges: dict[Edge, int]
    days: tuple[str, ...]
    # days on which each surviving edge occurred
    edge_days: dict[Edge, tuple[str, ...]] = field(default_factory=dict)


def build_daily_graph(matrix: CorrelationMatrix, delta_w: float = DEFAULT_CORR_THRESHOLD, day: str = "") -> DailyGraph:
    """Edges for every pair whose correlation is strictly above ``delta_w``."""
    if not 0.0 < delta_w < 1.0:
        raise ValueError(f"correlation threshold must lie in (0, 1), got {delta_w}")
    rows, cols = np.nonzero(np.triu(matrix.entries > delta_w, k=1))
    edges: dict[Edge, float] = {}
    for i, j in zip(rows.tolist(), cols.tolist()):
        edges[edge_key(matrix.ids[i], matrix.ids[j])] = float(matrix.entries[i, j])
    return DailyGraph(day, tuple(matrix.ids), dict(sorted(edges.items(), key=lambda kv: _edge_sort(kv[0]))))


def _edge_sort(e: Edge) -> tuple:
    return (id_sort_key(e[0]), id_sort_key(e[1]))


def connected_components(graph: DailyGraph | IntegratedGraph) -> list[frozenset[str]]:
    """Connected node sets of size >= 2, ordered by their smallest member."""
    return _components(graph.nodes, graph.edges)


def integrate(daily: Sequence[DailyGraph], delta_f: int = DEFAULT_OCCURRENCE_THRESHOLD) -> IntegratedGraph:
    """Count, per edge, the days whose components contain it; keep counts >= ``delta_f``."""
    if delta_f < 1:
        raise ValueError(f"occurrence threshold must be >= 1, got {delta_f}")
    if not daily:
        raise ValueError("need at least one daily graph")
    seen: dict[Edge, list[str]] = {}
    for k, graph in enumerate(daily):
        label = graph.day or str(k)
        # every daily edge lies inside exactly one component, so the component
        # edge sets of a day are its edge set
        for e in graph.edges:
            seen.setdefault(e, []).append(label)
    kept = {e: days for e, days in seen.items() if len(days) >= delta_f}
    order = sorted(kept, key=_edge_sort)
    # isolated nodes are dropped
    nodes = {n for e in kept for n in e}
    return IntegratedGraph(
        nodes=tuple(_sorted_ids(nodes)),
        edges={e: len(kept[e]) for e in order},
        days=tuple(g.day or str(k) for k, g in enumerate(daily)),
        edge_days={e: tuple(kept[e]) for e in order},
    )


@dataclass(frozen=True)
class Clique:
    members: tuple[str, ...]
    edges: tuple[tuple[str, str, int], ...]
    days_observed: int
    complete: bool

    @property
    def min_occurrence(self) -> int:
        return min(w for _, _, w in self.edges)

    @property
    def mean_occurrence(self) -> float:
        return fmean(w for _, _, w in self.edges)

    def pairs(self) -> set[Edge]:
        return {edge_key(a, b) for a, b in combinations(self.members, 2)}

    def to_dict(self) -> dict:
        return {
            "members": list(self.members),
            "edges": [list(e) for e in self.edges],
            "min_occurrence": self.min_occurrence,
            "mean_occurrence": round(self.mean_occurrence, 6),
            "days_observed": self.days_observed,
            "complete": self.complete,
        }


@dataclass(frozen=True)
class CliqueReport:
    cliques: tuple[Clique, ...]
    parameters: dict = field(default_factory=dict)
    days: tuple[dict, ...] = ()

    def __len__(self) -> int:
        return len(self.cliques)

    def to_dict(self) -> dict:
        return {
            "parameters": dict(self.parameters),
            "days": [dict(d) for d in self.days],
            "cliques": [c.to_dict() for c in self.cliques],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def cliques_from_integrated(graph: IntegratedGraph) -> tuple[Clique, ...]:
    out = []
    for comp in _components((), graph.edges):
        members = tuple(_sorted_ids(comp))
        edges = tuple((a, b, w) for (a, b), w in graph.edges.items() if a in comp)
        days = {d for (a, b) in graph.edges if a in comp for d in graph.edge_days.get((a, b), ())}
        n = len(members)
        out.append(Clique(members, edges, len(days), len(edges) == n * (n - 1) // 2))
    return tuple(out)


def detect_cliques(daily: Sequence[DailyGraph], delta_f: int = DEFAULT_OCCURRENCE_THRESHOLD) -> CliqueReport:
    """Integrate the daily graphs and report connected subgraphs as suspect cliques."""
    graph = integrate(daily, delta_f)
    return CliqueReport(cliques_from_integrated(graph), parameters={"occurrence_threshold": delta_f})


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_dot(graph: DailyGraph | IntegratedGraph, stream: IO[str], name: str = "G") -> None:
    """Undirected DOT; correlations print to 3 decimals, occurrence counts as integers."""
    stream.write(f"graph {_dot_id(name)} {{\n")
    for node in graph.nodes:
        stream.write(f"  {_dot_id(node)} [label={_dot_id(node)}];\n")
    for (a, b), w in graph.edges.items():
        label = f"{w:.3f}" if isinstance(graph, DailyGraph) else str(int(w))
        stream.write(f"  {_dot_id(a)} -- {_dot_id(b)} [label=\"{label}\", weight={label}];\n")
    stream.write("}\n")
