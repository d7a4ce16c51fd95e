"""Agent network: topology predicates and directed cycle enumeration.

Agent ids are 1-based everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import networkx as nx

from ._tolerances import DEFAULT_CYCLE_CAP
from .exceptions import CycleExplosion, GraphError

__all__ = [
    "Graph",
    "DirectedCycle",
    "check_simple",
    "check_two_edge_connected",
    "enumerate_cycles",
    "node_coverage",
]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on agents ``1..num_agents``.

    Edges are stored as ``(i, j)`` with ``i < j`` in the order they were given;
    that order is used by round-robin scheduling.
    """

    num_agents: int
    edges: tuple[tuple[int, int], ...] = ()
    _adj: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.num_agents) != self.num_agents or self.num_agents < 1:
            raise GraphError(f"num_agents must be a positive integer, got {self.num_agents!r}")
        edges = []
        seen = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise GraphError(f"self-loop ({i}, {i})")
            for v in (i, j):
                if not 1 <= v <= self.num_agents:
                    raise GraphError(f"agent id {v} outside 1..{self.num_agents}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            seen.add(key)
            edges.append(key)
        object.__setattr__(self, "num_agents", int(self.num_agents))
        object.__setattr__(self, "edges", tuple(edges))
        adj = {v: set() for v in range(1, self.num_agents + 1)}
        for i, j in edges:
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "_adj", {v: frozenset(s) for v, s in adj.items()})

    @property
    def nodes(self) -> range:
        return range(1, self.num_agents + 1)

    def neighbors(self, v: int) -> frozenset:
        return self._adj[v]

    def has_edge(self, i: int, j: int) -> bool:
        return j in self._adj.get(i, ())

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g


def _canonical_rotation(vertices: Sequence[int]) -> tuple[int, ...]:
    k = min(range(len(vertices)), key=vertices.__getitem__)
    return tuple(vertices[k:]) + tuple(vertices[:k])


@dataclass(frozen=True, order=True)
class DirectedCycle:
    """Simple directed cycle ``v1 -> v2 -> ... -> vk -> v1``.

    Stored in the rotation that puts the smallest agent id first, so two
    cycles compare equal iff they visit the same vertices in the same cyclic
    order. A cycle and its reversal are different values.
    """

    vertices: tuple[int, ...]

    def __post_init__(self):
        vs = tuple(int(v) for v in self.vertices)
        if len(vs) < 3:
            raise GraphError(f"cycles must have length >= 3, got {vs}")
        if len(set(vs)) != len(vs):
            raise GraphError(f"cycle repeats a vertex: {vs}")
        object.__setattr__(self, "vertices", _canonical_rotation(vs))

    @property
    def length(self) -> int:
        return len(self.vertices)

    def edges(self) -> list[tuple[int, int]]:
        """Directed edges in traversal order, starting at the basepoint."""
        vs = self.vertices
        return [(vs[t], vs[(t + 1) % len(vs)]) for t in range(len(vs))]

    def reversed(self) -> "DirectedCycle":
        return DirectedCycle(tuple(reversed(self.vertices)))

    def rotations(self) -> list[tuple[int, ...]]:
        """All pointed representatives of this cycle."""
        vs = self.vertices
        return [vs[k:] + vs[:k] for k in range(len(vs))]

    def is_in(self, g: Graph) -> bool:
        return all(g.has_edge(a, b) for a, b in self.edges())


def check_simple(g: Graph | Iterable[Sequence[int]]) -> bool:
    """True iff the edge collection has no self-loops and no duplicate edges.

    Accepts a raw edge list so that ingest code can validate before building
    a :class:`Graph` (which refuses non-simple input).
    """
    edges = g.edges if isinstance(g, Graph) else g
    seen = set()
    for e in edges:
        i, j = e
        if i == j:
            return False
        key = frozenset((i, j))
        if key in seen:
            return False
        seen.add(key)
    return True


def _bridges(g: Graph) -> list[tuple[int, int]]:
    # iterative DFS with discovery times and low-links
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    found = []
    clock = 0
    for root in g.nodes:
        if root in disc:
            continue
        disc[root] = low[root] = clock
        clock += 1
        stack = [(root, 0, iter(sorted(g.neighbors(root))))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for u in it:
                if u not in disc:
                    disc[u] = low[u] = clock
                    clock += 1
                    stack.append((u, v, iter(sorted(g.neighbors(u)))))
                    advanced = True
                    break
                if u != parent:
                    low[v] = min(low[v], disc[u])
            if advanced:
                continue
            stack.pop()
            if parent:
                low[parent] = min(low[parent], low[v])
                if low[v] > disc[parent]:
                    found.append((min(v, parent), max(v, parent)))
    return found


def _is_connected(g: Graph) -> bool:
    seen = {1}
    frontier = [1]
    while frontier:
        v = frontier.pop()
        for u in g.neighbors(v):
            if u not in seen:
                seen.add(u)
                frontier.append(u)
    return len(seen) == g.num_agents


def check_two_edge_connected(g: Graph) -> bool:
    """True iff ``g`` is connected and has no bridge.

    A single agent with no edges counts as 2-edge connected (vacuously).
    """
    return _is_connected(g) and not _bridges(g)


def bridges(g: Graph) -> list[tuple[int, int]]:
    """Edges whose removal disconnects their component."""
    return _bridges(g)


def enumerate_cycles(g: Graph, cap: int = DEFAULT_CYCLE_CAP) -> list[DirectedCycle]:
    """Every directed simple cycle of length >= 3 in the bidirected graph.

    One representative per rotation class; both orientations of each
    undirected cycle are returned. Result is sorted for reproducibility.

    Raises
    ------
    CycleExplosion
        If more than ``cap`` cycles exist.
    """
    dg = g.to_networkx().to_directed()
    out = set()
    for vs in nx.simple_cycles(dg):
        if len(vs) < 3:
            continue
        out.add(DirectedCycle(tuple(vs)))
        if len(out) > cap:
            raise CycleExplosion(cap)
    return sorted(out, key=lambda c: (c.length, c.vertices))


def node_coverage(cycles: Iterable[DirectedCycle], g: Graph) -> bool:
    """True iff every agent of ``g`` lies on at least one of ``cycles``."""
    covered = set()
    for c in cycles:
        covered.update(c.vertices)
    return covered >= set(g.nodes)
