"""Gossip process simulation: ``x(t+1) = A_e x(t)`` for scheduled edges.

Random schedules draw from numpy's PCG64 bit generator seeded with the
run seed, in fixed-size chunks, so a given seed reproduces a trace bit for
bit on any platform numpy supports.
"""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._tolerances import DEFAULT_MAX_STEPS, SIM_TOL
from .exceptions import UnknownEdge
from .partition import IndexPartition
from .realization import LocalMatrixSet

__all__ = [
    "SimState",
    "Scheduler",
    "StopRule",
    "Trace",
    "step",
    "run",
    "cluster_spread",
    "cell_sums",
    "weighted_targets",
    "CellVerdict",
    "Pi0Verdict",
    "ConvergenceReport",
    "detect_limit_behavior",
]

_CHUNK = 4096
SCHEDULERS = ("uniform", "roundrobin")
ALLOWABLE_NOTE = (
    "schedules are uniform-random or round-robin; both are assumed to be allowable update sequences"
)


@dataclass
class SimState:
    t: int
    x: np.ndarray
    seed: int | None = None
    history: deque | None = None


@dataclass(frozen=True)
class Scheduler:
    """Edge activation order.

    ``uniform`` draws each edge with equal probability, independently per
    step. ``roundrobin`` sweeps ``order`` cyclically.
    """

    kind: str = "uniform"
    order: tuple = ()

    def __post_init__(self):
        if self.kind not in SCHEDULERS:
            raise ValueError(f"unknown scheduler {self.kind!r}; choose from {SCHEDULERS}")

    def edge_stream(self, edges: Sequence, seed: int | None):
        """Infinite iterator of positions into ``edges``."""
        order = list(self.order) or list(edges)
        pos = [list(edges).index(tuple(sorted(e))) for e in order]
        if self.kind == "roundrobin":
            while True:
                yield from pos
        rng = np.random.Generator(np.random.PCG64(seed))
        while True:
            yield from rng.integers(0, len(edges), size=_CHUNK).tolist()


@dataclass(frozen=True)
class StopRule:
    """Stop after ``max_steps``, or once every consensus cell has spread
    below ``tol`` for ``sustain`` consecutive steps (default: one sweep of
    the edge list). Convergence detection needs ``partition``.
    """

    max_steps: int = DEFAULT_MAX_STEPS
    tol: float = SIM_TOL
    partition: IndexPartition | None = None
    sustain: int | None = None


@dataclass
class Trace:
    edges: list
    steps: np.ndarray
    snapshot_t: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    def edge_at(self, t: int) -> tuple[int, int]:
        """Edge applied to go from ``x(t-1)`` to ``x(t)``."""
        return self.edges[self.steps[t - 1]]

    def to_csv(self, path) -> None:
        size = len(self.snapshots[0]) if self.snapshots else 0
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "edge_i", "edge_j", *[f"x_{q}" for q in range(1, size + 1)]])
            for t, x in zip(self.snapshot_t, self.snapshots):
                ei, ej = self.edge_at(t) if t > 0 else ("", "")
                writer.writerow([t, ei, ej, *(repr(float(v)) for v in x)])


def _local_blocks(ms: LocalMatrixSet):
    # (indices, sub-block) per edge; A_e is the identity outside its two agents' rows/columns
    blocks = []
    for i, j in ms.edges:
        idx = np.array([*ms.imap.indices_of(i), *ms.imap.indices_of(j)]) - 1
        blocks.append((idx, np.ascontiguousarray(ms[(i, j)][np.ix_(idx, idx)])))
    return blocks


def _apply(x: np.ndarray, idx: np.ndarray, block: np.ndarray) -> None:
    x[idx] = block @ x[idx]


def step(s: SimState, edge, ms: LocalMatrixSet) -> SimState:
    """One gossip update on ``edge``; returns a new state."""
    if edge not in ms:
        raise UnknownEdge(f"no local matrix for edge {tuple(edge)}")
    i, j = sorted(edge)
    idx = np.array([*ms.imap.indices_of(i), *ms.imap.indices_of(j)]) - 1
    x = np.array(s.x, dtype=float)
    _apply(x, idx, ms[(i, j)][np.ix_(idx, idx)])
    hist = None
    if s.history is not None:
        hist = deque(s.history, maxlen=s.history.maxlen)
        hist.append(x.copy())
    return SimState(s.t + 1, x, s.seed, hist)


def cluster_spread(x, cell) -> float:
    """max - min of ``x`` over the 1-based indices in ``cell``."""
    cell = sorted(cell)
    if not cell:
        raise ValueError("cell must be non-empty")
    vals = np.asarray(x, dtype=float)[np.array(cell) - 1]
    return float(vals.max() - vals.min())


def cell_sums(x, p: IndexPartition, w) -> np.ndarray:
    """Weighted sums ``sum_{idx in pi_a} w_idx x_idx`` for each consensus cell."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    return np.array([w[np.array(sorted(c)) - 1] @ x[np.array(sorted(c)) - 1] for c in p.cells])


def weighted_targets(x0, p: IndexPartition, w) -> np.ndarray:
    """Consensus value each cell should reach: its w-weighted mean of ``x0``."""
    w = np.asarray(w, dtype=float)
    totals = np.array([w[np.array(sorted(c)) - 1].sum() for c in p.cells])
    return cell_sums(x0, p, w) / totals


def run(
    x0,
    ms: LocalMatrixSet,
    scheduler: Scheduler | None = None,
    stop: StopRule | None = None,
    seed: int | None = None,
    stride: int | None = None,
    history: int = 64,
) -> tuple[SimState, Trace]:
    """Run the gossip process from ``x0`` until ``stop`` fires.

    Snapshots of the state (``t = 0`` included) are recorded every
    ``stride`` steps, default ``|E|``, and at the final step. The last
    ``history`` states are kept on the returned :class:`SimState`.
    """
    scheduler = scheduler or Scheduler()
    stop = stop or StopRule()
    x = np.array(x0, dtype=float)
    if x.shape != (ms.size,):
        raise ValueError(f"initial state has shape {x.shape}, expected ({ms.size},)")
    edges = ms.edges
    stride = stride or max(len(edges), 1)
    sustain = stop.sustain or max(len(edges), 1)
    cells = [np.array(sorted(c)) - 1 for c in stop.partition.cells] if stop.partition else None

    blocks = _local_blocks(ms)
    steps = np.zeros(stop.max_steps, dtype=np.int32)
    trace = Trace(edges, steps, [0], [x.copy()])
    hist = deque([x.copy()], maxlen=history)
    stream = scheduler.edge_stream(edges, seed) if edges else iter(())
    calm = 0
    t = 0
    while t < stop.max_steps and edges:
        e = next(stream)
        _apply(x, *blocks[e])
        steps[t] = e
        t += 1
        hist.append(x.copy())
        if t % stride == 0:
            trace.snapshot_t.append(t)
            trace.snapshots.append(x.copy())
        if cells is not None:
            if all(x[c].max() - x[c].min() < stop.tol for c in cells):
                calm += 1
                if calm >= sustain:
                    break
            else:
                calm = 0
    trace.steps = steps[:t]
    if trace.snapshot_t[-1] != t:
        trace.snapshot_t.append(t)
        trace.snapshots.append(x.copy())
    return SimState(t, x, seed, hist), trace


@dataclass
class CellVerdict:
    label: str
    indices: list
    converged: bool
    spread: float
    target: float
    achieved: float
    conserved_sum_drift: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class Pi0Verdict:
    indices: list
    multiset_conserved: bool
    orbit_size: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ConvergenceReport:
    cells: list[CellVerdict]
    pi0: Pi0Verdict
    steps: int
    converged: bool
    note: str = ALLOWABLE_NOTE

    def __bool__(self):
        return self.converged

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "steps": self.steps,
            "cells": [c.to_dict() for c in self.cells],
            "pi0": self.pi0.to_dict(),
            "note": self.note,
        }


def detect_limit_behavior(s: SimState, p: IndexPartition, w, x0, tol: float = SIM_TOL) -> ConvergenceReport:
    """Compare the state ``s`` against the expected multiple-consensus limit.

    A consensus cell has converged when its spread and the distance between
    its mean and its w-weighted initial mean are both below ``tol``. On
    ``pi0`` the values must be a rearrangement of the initial ones; the orbit
    size counts distinct arrangements seen in ``s.history``.
    """
    x = np.asarray(s.x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    targets = weighted_targets(x0, p, w)
    drift = cell_sums(x, p, w) - cell_sums(x0, p, w)
    cells = []
    for a, c in enumerate(p.cells, start=1):
        idx = np.array(sorted(c)) - 1
        spread = float(x[idx].max() - x[idx].min())
        achieved = float(x[idx].mean())
        target = float(targets[a - 1])
        cells.append(
            CellVerdict(
                label=f"pi{a}",
                indices=sorted(c),
                converged=spread < tol and abs(achieved - target) < tol,
                spread=spread,
                target=target,
                achieved=achieved,
                conserved_sum_drift=float(abs(drift[a - 1])),
            )
        )
    zero = np.array(sorted(p.pi0), dtype=int) - 1
    conserved = bool(np.array_equal(np.sort(x[zero]), np.sort(x0[zero])))
    states = list(s.history) if s.history else [x]
    orbit = len({tuple(v[zero]) for v in states}) if zero.size else 1
    pi0 = Pi0Verdict(sorted(p.pi0), conserved, orbit)
    ok = all(c.converged for c in cells) and conserved
    return ConvergenceReport(cells, pi0, s.t, ok)
