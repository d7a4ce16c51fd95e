"""Index map, derived graphs and the admissible-partition test.

Global indices run over ``1..n*m``; index ``(i - 1) * m + k`` is entry ``k``
of agent ``i``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

import numpy as np

from .exceptions import PartitionError
from .graph import Graph

__all__ = [
    "IndexMap",
    "IndexPartition",
    "DerivedGraph",
    "CellReport",
    "AdmissibilityReport",
    "psi",
    "derived_graph",
    "realized_mixing_graph",
    "is_admissible",
    "SAME_AGENT",
    "NETWORK_EDGE",
]

SAME_AGENT = "same-agent"
NETWORK_EDGE = "network-edge"


@dataclass(frozen=True)
class IndexMap:
    num_agents: int
    entries_per_agent: int

    def __post_init__(self):
        if self.num_agents < 1 or self.entries_per_agent < 1:
            raise ValueError("num_agents and entries_per_agent must be >= 1")

    @property
    def size(self) -> int:
        return self.num_agents * self.entries_per_agent

    def psi(self, i: int, k: int) -> int:
        n, m = self.num_agents, self.entries_per_agent
        if not (1 <= i <= n and 1 <= k <= m):
            raise ValueError(f"(agent={i}, entry={k}) outside 1..{n} x 1..{m}")
        return (i - 1) * m + k

    def agent_of(self, idx: int) -> int:
        if not 1 <= idx <= self.size:
            raise ValueError(f"index {idx} outside 1..{self.size}")
        return -(-idx // self.entries_per_agent)

    def entry_of(self, idx: int) -> int:
        return idx - (self.agent_of(idx) - 1) * self.entries_per_agent

    def indices_of(self, agent: int) -> range:
        m = self.entries_per_agent
        return range((agent - 1) * m + 1, agent * m + 1)


def psi(i: int, k: int, m: int) -> int:
    """Global index of entry ``k`` of agent ``i`` when each agent has ``m`` entries."""
    if i < 1 or not 1 <= k <= m:
        raise ValueError(f"(agent={i}, entry={k}) out of range for m={m}")
    return (i - 1) * m + k


@dataclass(frozen=True)
class IndexPartition:
    """Partition ``pi0, pi1, ..., pi_l`` of the global index set.

    ``pi0`` holds the indices meant to end up in a permutation block and may
    be empty; every other cell is a consensus cluster and must be non-empty.
    """

    pi0: frozenset = frozenset()
    cells: tuple[frozenset, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pi0", frozenset(int(v) for v in self.pi0))
        cells = tuple(frozenset(int(v) for v in c) for c in self.cells)
        object.__setattr__(self, "cells", cells)
        for a, c in enumerate(cells, start=1):
            if not c:
                raise PartitionError(f"cell pi_{a} is empty")
        seen = set(self.pi0)
        for a, c in enumerate(cells, start=1):
            clash = seen & c
            if clash:
                raise PartitionError(f"cell pi_{a} overlaps earlier cells at {sorted(clash)}")
            seen |= c

    @property
    def num_cells(self) -> int:
        """Number of consensus cells (excluding pi0)."""
        return len(self.cells)

    def all_cells(self) -> list[frozenset]:
        return [self.pi0, *self.cells]

    def complement(self) -> frozenset:
        return frozenset().union(*self.cells)

    def validate(self, size: int) -> None:
        """Raise :class:`PartitionError` unless the cells cover ``1..size`` exactly."""
        union = self.pi0.union(*self.cells)
        missing = sorted(set(range(1, size + 1)) - union)
        extra = sorted(union - set(range(1, size + 1)))
        msgs = []
        if missing:
            msgs.append(f"indices not covered by the partition: {missing}")
        if extra:
            msgs.append(f"indices outside 1..{size}: {extra}")
        if msgs:
            raise PartitionError("; ".join(msgs))

    def labels(self, size: int) -> np.ndarray:
        """Array ``lab`` with ``lab[idx - 1] = a`` for ``idx`` in ``pi_a``."""
        lab = np.zeros(size, dtype=int)
        for a, c in enumerate(self.cells, start=1):
            for idx in c:
                lab[idx - 1] = a
        return lab

    def relabel(self, order: Iterable[int]) -> "IndexPartition":
        """Same partition with consensus cells reordered (``order`` is 0-based)."""
        return IndexPartition(self.pi0, tuple(self.cells[a] for a in order))


@dataclass(frozen=True)
class DerivedGraph:
    """Graph on the indices of one cell.

    ``edges`` holds ``(k, l, rule)`` with ``k < l``; a pair reachable by both
    rules would appear twice (a multi-edge).
    """

    cell: tuple[int, ...]
    edges: tuple[tuple[int, int, str], ...]

    @property
    def nodes(self) -> tuple[int, ...]:
        return self.cell

    def pairs(self) -> set[tuple[int, int]]:
        return {(k, l) for k, l, _ in self.edges}

    def spanning_forest(self) -> list[tuple[int, int]]:
        """BFS tree edges; a spanning tree when the graph is connected."""
        adj = {v: [] for v in self.cell}
        for k, l in sorted(self.pairs()):
            adj[k].append(l)
            adj[l].append(k)
        seen = set()
        tree = []
        for root in self.cell:
            if root in seen:
                continue
            seen.add(root)
            queue = deque([root])
            while queue:
                v = queue.popleft()
                for u in adj[v]:
                    if u not in seen:
                        seen.add(u)
                        tree.append((min(u, v), max(u, v)))
                        queue.append(u)
        return tree

    def is_connected(self) -> bool:
        # connected iff a spanning forest has |V| - 1 edges; the empty cell counts as connected
        return len(self.cell) <= 1 or len(self.spanning_forest()) == len(self.cell) - 1


def _build(g: Graph, imap: IndexMap, cell, rules) -> DerivedGraph:
    nodes = tuple(sorted(int(v) for v in cell))
    for idx in nodes:
        if not 1 <= idx <= imap.size:
            raise PartitionError(f"index {idx} outside 1..{imap.size}")
    edges = []
    for k, l in combinations(nodes, 2):
        ak, al = imap.agent_of(k), imap.agent_of(l)
        if SAME_AGENT in rules and ak == al:
            edges.append((k, l, SAME_AGENT))
        if NETWORK_EDGE in rules and g.has_edge(ak, al):
            edges.append((k, l, NETWORK_EDGE))
    return DerivedGraph(nodes, tuple(edges))


def derived_graph(g: Graph, imap: IndexMap, cell) -> DerivedGraph:
    """Derived graph of ``g`` on ``cell``.

    Indices ``k`` and ``l`` are joined when they belong to the same agent, or
    when their owning agents are adjacent in ``g``.
    """
    return _build(g, imap, cell, (SAME_AGENT, NETWORK_EDGE))


def realized_mixing_graph(g: Graph, imap: IndexMap, cell) -> DerivedGraph:
    """Derived graph restricted to network-edge couplings.

    These are exactly the index pairs a rate-matrix factor can ever mix.
    """
    return _build(g, imap, cell, (NETWORK_EDGE,))


@dataclass
class CellReport:
    label: str
    derived: DerivedGraph
    connected: bool
    mixing_connected: bool
    spanning_tree: list

    @property
    def num_edges(self) -> int:
        return len(self.derived.edges)

    def to_dict(self) -> dict:
        return {
            "cell": self.label,
            "indices": list(self.derived.cell),
            "edges": [[k, l, rule] for k, l, rule in self.derived.edges],
            "edge_count": self.num_edges,
            "connected": self.connected,
            "mixing_connected": self.mixing_connected,
            "spanning_tree": [list(e) for e in self.spanning_tree],
        }


@dataclass
class AdmissibilityReport:
    cells: list[CellReport]
    admissible: bool
    warnings: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.admissible

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "warnings": list(self.warnings),
            "cells": [c.to_dict() for c in self.cells],
        }


def is_admissible(g: Graph, imap: IndexMap, p: IndexPartition) -> AdmissibilityReport:
    """Check that every cell (pi0 included) has a connected derived graph.

    Cells that are connected only through same-agent edges are reported in
    ``warnings``: the construction never mixes two entries of one agent
    directly, so such a cell will not reach consensus.
    """
    p.validate(imap.size)
    reports = []
    warnings = []
    for a, cell in enumerate(p.all_cells()):
        label = f"pi{a}"
        dg = derived_graph(g, imap, cell)
        mg = realized_mixing_graph(g, imap, cell)
        connected = dg.is_connected()
        mixing = mg.is_connected()
        if a >= 1 and connected and not mixing:
            warnings.append(
                f"{label} {sorted(cell)} is connected only through same-agent edges; "
                "rate-matrix factors cannot mix it"
            )
        reports.append(CellReport(label, dg, connected, mixing, dg.spanning_forest()))
    return AdmissibilityReport(reports, all(r.connected for r in reports), warnings)
