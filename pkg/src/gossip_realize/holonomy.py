"""Cycle transition matrices, w-orders and the holonomy verdict."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable

import numpy as np

from ._tolerances import COUPLING_ATOL, DEFAULT_CYCLE_CAP, DEFAULT_ORDER_CAP, HOLONOMY_ATOL
from .graph import DirectedCycle, Graph, enumerate_cycles
from .partition import IndexPartition
from .realization import LocalMatrixSet

__all__ = [
    "transition_matrix",
    "cycle_matrix",
    "w_order",
    "order_search",
    "OrderResult",
    "BlockCheck",
    "block_structure",
    "check_block_structure",
    "permutation_order",
    "CycleReport",
    "HolonomyReport",
    "verify_holonomy",
]


def transition_matrix(seq: Iterable, ms: LocalMatrixSet) -> np.ndarray:
    """Left product ``A_{e_t} ... A_{e_1}`` over the edge sequence.

    The empty sequence gives the identity.
    """
    out = np.eye(ms.size)
    for e in seq:
        out = ms[e] @ out
    return out


def cycle_matrix(c: DirectedCycle, ms: LocalMatrixSet) -> np.ndarray:
    """Transition matrix of one trip around ``c`` from its basepoint."""
    return transition_matrix(c.edges(), ms)


def _as_permutation(block: np.ndarray) -> np.ndarray | None:
    # column of the single 1 in each row, or None if not exactly a 0/1 permutation matrix
    if block.size == 0:
        return np.zeros(0, dtype=int)
    if not np.all((block == 0) | (block == 1)):
        return None
    if not (np.all(block.sum(axis=0) == 1) and np.all(block.sum(axis=1) == 1)):
        return None
    return np.argmax(block, axis=1)


def permutation_order(perm: np.ndarray) -> int:
    """Multiplicative order (lcm of cycle lengths) of a permutation array."""
    seen = np.zeros(len(perm), dtype=bool)
    lengths = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        n = 0
        v = start
        while not seen[v]:
            seen[v] = True
            v = perm[v]
            n += 1
        lengths.append(n)
    return reduce(math.lcm, lengths, 1)


@dataclass
class BlockCheck:
    """Decomposition of a cycle matrix along ``(pi0, complement)``."""

    pi0_is_permutation: bool
    invariant_ok: bool
    decoupled: bool
    w0_moved: bool
    permutation_order: int | None = None

    def __iter__(self):
        return iter((self.pi0_is_permutation, self.invariant_ok, self.w0_moved))


def block_structure(pc: np.ndarray, p: IndexPartition, w, atol: float = HOLONOMY_ATOL) -> BlockCheck:
    """Check ``pc`` for a permutation block on pi0 and a w-preserving remainder."""
    w = np.asarray(w, dtype=float)
    zero = sorted(u - 1 for u in p.pi0)
    rest = sorted(u - 1 for u in p.complement())
    pblock = pc[np.ix_(zero, zero)]
    mblock = pc[np.ix_(rest, rest)]
    off = np.concatenate([pc[np.ix_(zero, rest)].ravel(), pc[np.ix_(rest, zero)].ravel()])
    decoupled = bool(off.size == 0 or np.max(np.abs(off)) < COUPLING_ATOL)
    perm = _as_permutation(pblock)
    wt = w[rest]
    invariant_ok = bool(not rest or np.max(np.abs(wt @ mblock - wt)) < atol)
    w0 = w[zero]
    w0_moved = bool(zero and np.max(np.abs(w0 @ pblock - w0)) >= atol)
    return BlockCheck(
        pi0_is_permutation=perm is not None,
        invariant_ok=invariant_ok,
        decoupled=decoupled,
        w0_moved=w0_moved,
        permutation_order=permutation_order(perm) if perm is not None else None,
    )


def check_block_structure(c: DirectedCycle, ms: LocalMatrixSet, p: IndexPartition, w) -> BlockCheck:
    return block_structure(cycle_matrix(c, ms), p, w)


@dataclass
class OrderResult:
    order: int
    status: str  # "found" | "cap_exhausted" | "provably_empty"
    cap: int


def _default_cap(pc: np.ndarray, p: IndexPartition, w) -> int:
    check = block_structure(pc, p, w)
    if check.decoupled and check.permutation_order is not None:
        return check.permutation_order
    if not p.pi0:
        return 1
    return min(math.factorial(len(p.pi0)), DEFAULT_ORDER_CAP)


def order_search(
    pc: np.ndarray,
    w,
    p: IndexPartition | None = None,
    cap: int | None = None,
    atol: float = HOLONOMY_ATOL,
) -> OrderResult:
    """Smallest ``k`` in ``1..cap`` with ``w P^k == w`` (infinity norm below ``atol``).

    Without an explicit ``cap``, the search length is the order of the pi0
    permutation block when ``pc`` decomposes cleanly, else ``|pi0|!`` capped
    at 10**6 (1 when pi0 is empty). Stops early, reporting
    ``provably_empty``, if the orbit lands on a fixed point other than ``w``.
    """
    w = np.asarray(w, dtype=float)
    if cap is None:
        cap = _default_cap(pc, p if p is not None else IndexPartition(cells=(range(1, len(w) + 1),)), w)
    if cap < 1:
        raise ValueError("cap must be >= 1")
    v = w
    for k in range(1, cap + 1):
        nxt = v @ pc
        if np.max(np.abs(nxt - w)) < atol:
            return OrderResult(k, "found", cap)
        if np.array_equal(nxt, v):
            return OrderResult(0, "provably_empty", cap)
        v = nxt
    return OrderResult(0, "cap_exhausted", cap)


def w_order(c: DirectedCycle, ms: LocalMatrixSet, w=None, cap: int | None = None) -> int:
    """w-order of ``c``; 0 when none is found within the search cap."""
    w = ms.weights if w is None else w
    return order_search(cycle_matrix(c, ms), w, ms.partition, cap).order


@dataclass
class CycleReport:
    cycle: DirectedCycle
    order: int
    status: str
    pi0_block_is_permutation: bool
    invariant_block_ok: bool
    decoupled: bool
    w0_moved: bool
    residual: float

    def to_dict(self) -> dict:
        return {
            "cycle": list(self.cycle.vertices),
            "order": self.order,
            "status": self.status,
            "pi0_block_is_permutation": self.pi0_block_is_permutation,
            "invariant_block_ok": self.invariant_block_ok,
            "decoupled": self.decoupled,
            "w0_moved": self.w0_moved,
            "residual": self.residual,
        }


@dataclass
class HolonomyReport:
    cycles: list[CycleReport] = field(default_factory=list)
    overall: bool = False

    def __bool__(self):
        return self.overall

    def by_cycle(self) -> dict:
        return {r.cycle: r for r in self.cycles}

    def to_dict(self) -> dict:
        return {
            "w_holonomic": self.overall,
            "num_cycles": len(self.cycles),
            "cycles": [r.to_dict() for r in self.cycles],
        }


def verify_holonomy(
    g: Graph,
    ms: LocalMatrixSet,
    w=None,
    p: IndexPartition | None = None,
    cycle_cap: int = DEFAULT_CYCLE_CAP,
    order_cap: int | None = None,
) -> HolonomyReport:
    """Compute the w-order of every cycle of length >= 3 in both orientations.

    ``overall`` is true iff every order is finite and non-zero. A graph
    without cycles yields an empty, vacuously true report.
    """
    w = ms.weights if w is None else np.asarray(w, dtype=float)
    p = ms.partition if p is None else p
    reports = []
    for c in enumerate_cycles(g, cap=cycle_cap):
        pc = cycle_matrix(c, ms)
        res = order_search(pc, w, p, order_cap)
        check = block_structure(pc, p, w)
        k = max(res.order, 1)
        resid = float(np.max(np.abs(w @ np.linalg.matrix_power(pc, k) - w)))
        reports.append(
            CycleReport(
                cycle=c,
                order=res.order,
                status=res.status,
                pi0_block_is_permutation=check.pi0_is_permutation,
                invariant_block_ok=check.invariant_ok,
                decoupled=check.decoupled,
                w0_moved=check.w0_moved,
                residual=resid,
            )
        )
    return HolonomyReport(reports, all(r.order >= 1 for r in reports))
