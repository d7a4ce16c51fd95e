"""Random instance generators and brute-force oracles shared by the tests.

Oracles here deliberately avoid the package's own algorithms.
"""
from itertools import combinations, permutations

import numpy as np

from gossip_realize import Graph, IndexPartition


def ring_plus(n, rng, p_extra=0.3):
    """Random 2-edge connected graph: a shuffled Hamiltonian cycle plus extra edges."""
    order = rng.permutation(np.arange(1, n + 1)).tolist()
    edges = {tuple(sorted((order[t], order[(t + 1) % n]))) for t in range(n)}
    for i, j in combinations(range(1, n + 1), 2):
        if (i, j) not in edges and rng.random() < p_extra:
            edges.add((i, j))
    return Graph(n, sorted(edges))


def gnp(n, rng, p=0.5):
    return Graph(n, [(i, j) for i, j in combinations(range(1, n + 1), 2) if rng.random() < p])


def connected_oracle(nodes, edges):
    nodes = list(nodes)
    if len(nodes) <= 1:
        return True
    adj = {v: set() for v in nodes}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, todo = {nodes[0]}, [nodes[0]]
    while todo:
        v = todo.pop()
        for u in adj[v] - seen:
            seen.add(u)
            todo.append(u)
    return len(seen) == len(nodes)


def two_edge_connected_oracle(g):
    """Connected, and still connected after deleting any single edge."""
    nodes = range(1, g.num_agents + 1)
    if not connected_oracle(nodes, g.edges):
        return False
    return all(connected_oracle(nodes, [f for f in g.edges if f != e]) for e in g.edges)


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)

    def groups(self):
        return len({self.find(x) for x in self.parent})


def derived_connected_oracle(g, m, cell, same_agent=True):
    """Union-find connectivity of the derived graph, edges recomputed from the definition."""
    cell = list(cell)
    if len(cell) <= 1:
        return True
    owner = {k: (k - 1) // m + 1 for k in cell}
    adjacent = {frozenset(e) for e in g.edges}
    uf = UnionFind(cell)
    for k, l in combinations(cell, 2):
        if (same_agent and owner[k] == owner[l]) or frozenset((owner[k], owner[l])) in adjacent:
            uf.union(k, l)
    return uf.groups() == 1


def admissible_oracle(g, m, p):
    return all(derived_connected_oracle(g, m, c) for c in p.all_cells())


def random_partition(nm, rng, with_pi0=False, max_cells=3):
    labels = rng.integers(0 if with_pi0 else 1, max_cells + 1, size=nm)
    pi0 = [q + 1 for q in range(nm) if labels[q] == 0]
    cells = [[q + 1 for q in range(nm) if labels[q] == a] for a in range(1, max_cells + 1)]
    return IndexPartition(pi0, tuple(c for c in cells if c))


def random_admissible_partition(g, m, rng, with_pi0=False, tries=200):
    nm = g.num_agents * m
    for _ in range(tries):
        p = random_partition(nm, rng, with_pi0)
        if admissible_oracle(g, m, p):
            return p
    return IndexPartition((), (range(1, nm + 1),))


def random_weights(nm, rng):
    w = rng.uniform(0.05, 1.0, size=nm)
    return w / w.sum()


def brute_force_cycles(g):
    """Directed simple cycles of length >= 3 as rotation-canonical tuples."""
    out = set()
    for r in range(3, g.num_agents + 1):
        for subset in combinations(range(1, g.num_agents + 1), r):
            first = subset[0]
            for rest in permutations(subset[1:]):
                cyc = (first, *rest)
                if all(g.has_edge(cyc[t], cyc[(t + 1) % r]) for t in range(r)):
                    out.add(cyc)
    return out


def random_stochastic(size, rng):
    a = rng.dirichlet(np.ones(size), size=size)
    return a
