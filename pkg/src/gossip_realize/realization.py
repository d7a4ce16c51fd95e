"""Construction of local stochastic matrices from rate-matrix factors.

Each edge ``(i, j)`` gets an ``nm x nm`` row-stochastic matrix built as an
ordered product of 2x2 rate-matrix blocks, one for every pair of entries of
agents ``i`` and ``j`` lying in the same consensus cell. Every factor keeps
the weight vector as a left eigenvector, so the product does as well.
Optionally a permutation block is placed on the ``pi0`` indices of the two
agents.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._tolerances import (
    DEFAULT_THETA,
    EIGEN_ATOL,
    HOLONOMY_ATOL,
    RATIO_RTOL,
    RENORMALIZE_ATOL,
    STOCHASTIC_ATOL,
)
from .exceptions import (
    IndexCollision,
    NoCouplingWarning,
    NoPermutationPlacement,
    PermutationFixesWeight,
    PreconditionError,
    RatioViolation,
    RealizationError,
    UnknownEdge,
)
from .graph import Graph, check_simple, check_two_edge_connected
from .partition import IndexMap, IndexPartition, is_admissible

logger = logging.getLogger(__name__)

__all__ = [
    "check_weights",
    "is_stochastic",
    "default_betas",
    "rate_matrix",
    "BetaPolicy",
    "PermutationSpec",
    "default_permutation_spec",
    "build_local_matrix",
    "LocalMatrixSet",
    "realize_all",
]

Pair = tuple[tuple[int, int], tuple[int, int]]


def check_weights(w, size: int | None = None, atol: float = RENORMALIZE_ATOL) -> np.ndarray:
    """Validate a weight vector and return it as a read-only float array.

    Entries must be strictly positive. A vector summing to within ``atol`` of
    one is rescaled to sum to one; anything further off is rejected.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 1:
        raise ValueError(f"weight vector must be 1-d, got shape {w.shape}")
    if size is not None and w.shape[0] != size:
        raise ValueError(f"weight vector has length {w.shape[0]}, expected {size}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weight vector entries must be finite and strictly positive")
    total = w.sum()
    if abs(total - 1.0) > atol:
        raise ValueError(f"weight vector sums to {total!r}, not 1 (tolerance {atol})")
    w = w / total
    w.flags.writeable = False
    return w


def is_stochastic(a: np.ndarray, atol: float = STOCHASTIC_ATOL) -> bool:
    a = np.asarray(a)
    return bool(np.all(a >= 0) and np.allclose(a.sum(axis=1), 1.0, rtol=0, atol=atol))


def default_betas(r: float, theta: float = DEFAULT_THETA) -> tuple[float, float]:
    """Pick ``(beta1, beta2)`` in ``(0, 1)`` with ``beta1 / beta2 == r``.

    ``beta2 = theta * min(1, 1/r)`` and ``beta1 = r * beta2``; ``theta`` slides
    along the one-parameter family of valid choices.
    """
    if not r > 0:
        raise ValueError(f"ratio must be positive, got {r}")
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    beta2 = theta * min(1.0, 1.0 / r)
    return r * beta2, beta2


def _ratio_residual(a_first: float, a_second: float, beta1: float, beta2: float) -> float:
    lhs, rhs = a_first * beta1, a_second * beta2
    return abs(lhs - rhs) / max(lhs, rhs)


def rate_matrix(
    imap: IndexMap,
    w,
    pair: Pair,
    beta1: float,
    beta2: float,
    rtol: float = RATIO_RTOL,
) -> np.ndarray:
    """Rate matrix coupling entry ``(i, k)`` with entry ``(j, l)``.

    Identity except the 2x2 principal block on ``{psi(i,k), psi(j,l)}``,
    which is ``[[1 - beta1, beta1], [beta2, 1 - beta2]]``. The betas must
    satisfy ``w[psi(i,k)] * beta1 == w[psi(j,l)] * beta2`` up to ``rtol``.
    """
    (i, k), (j, l) = pair
    u, v = imap.psi(i, k), imap.psi(j, l)
    if u == v:
        raise IndexCollision(f"both entries map to global index {u}")
    if not (0 < beta1 < 1 and 0 < beta2 < 1):
        raise ValueError(f"betas must lie in (0, 1), got ({beta1}, {beta2})")
    w = np.asarray(w, dtype=float)
    resid = _ratio_residual(w[u - 1], w[v - 1], beta1, beta2)
    if resid > rtol:
        raise RatioViolation(
            f"pair {pair}: w[{u}]*beta1 = {w[u - 1] * beta1!r} but w[{v}]*beta2 = {w[v - 1] * beta2!r} "
            f"(relative residual {resid:.3g} > {rtol:g})"
        )
    b = np.eye(imap.size)
    b[u - 1, u - 1] = 1.0 - beta1
    b[u - 1, v - 1] = beta1
    b[v - 1, u - 1] = beta2
    b[v - 1, v - 1] = 1.0 - beta2
    return b


@dataclass(frozen=True)
class BetaPolicy:
    """How ``(beta1, beta2)`` are chosen for each coupled pair.

    ``overrides`` maps a pair ``((i, k), (j, l))`` to ``(beta1, beta2)`` or
    ``(beta1, beta2, rtol)``. An override for the reversed pair is used with
    the betas swapped. Pairs without an override use :func:`default_betas`.
    """

    theta: float = DEFAULT_THETA
    overrides: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        norm = {}
        for pair, vals in dict(self.overrides).items():
            (i, k), (j, l) = pair
            vals = tuple(float(x) for x in vals)
            if len(vals) == 2:
                vals = (*vals, RATIO_RTOL)
            norm[((int(i), int(k)), (int(j), int(l)))] = vals
        object.__setattr__(self, "overrides", norm)

    def betas(self, pair: Pair, a_first: float, a_second: float) -> tuple[float, float, float]:
        """Return ``(beta1, beta2, rtol)`` for ``pair`` with weights ``(a_first, a_second)``."""
        if pair in self.overrides:
            return self.overrides[pair]
        rev = (pair[1], pair[0])
        if rev in self.overrides:
            b1, b2, rtol = self.overrides[rev]
            return b2, b1, rtol
        b1, b2 = default_betas(a_second / a_first, self.theta)
        return b1, b2, RATIO_RTOL


def _edge_key(edge) -> tuple[int, int]:
    i, j = (int(v) for v in edge)
    return (min(i, j), max(i, j))


@dataclass(frozen=True)
class PermutationSpec:
    """Per-edge permutations of ``pi0`` indices, in cycle notation.

    A cycle ``(c1, c2, ..., cr)`` puts a one at row ``c_t``, column
    ``c_{t+1}`` (wrapping around), so ``(A x)[c_t] = x[c_{t+1}]``. Several
    disjoint cycles may be given for one edge.
    """

    cycles: Mapping = field(default_factory=dict)

    def __post_init__(self):
        norm = {}
        for edge, cyc in dict(self.cycles).items():
            if cyc and isinstance(cyc[0], (int, np.integer)):
                cyc = (cyc,)
            norm[_edge_key(edge)] = tuple(tuple(int(c) for c in cy) for cy in cyc)
        object.__setattr__(self, "cycles", norm)

    def for_edge(self, edge) -> tuple[tuple[int, ...], ...]:
        return self.cycles.get(_edge_key(edge), ())

    def __bool__(self):
        return any(self.cycles.values())


def _pi0_owned(imap: IndexMap, p: IndexPartition, i: int, j: int) -> tuple[list[int], list[int]]:
    return (
        [u for u in imap.indices_of(i) if u in p.pi0],
        [u for u in imap.indices_of(j) if u in p.pi0],
    )


def default_permutation_spec(g: Graph, imap: IndexMap, p: IndexPartition, w) -> PermutationSpec:
    """Transposition of the two lowest ``pi0`` indices on every eligible edge.

    An edge is eligible when both of its agents own ``pi0`` indices and the two
    swapped weights differ.

    Raises
    ------
    PermutationFixesWeight
        Candidate edges exist, but every swap would fix the weights.
    NoPermutationPlacement
        No edge joins two agents that both own ``pi0`` indices.
    """
    w = np.asarray(w, dtype=float)
    spec = {}
    candidates = 0
    for i, j in g.edges:
        own_i, own_j = _pi0_owned(imap, p, i, j)
        if not own_i or not own_j:
            continue
        candidates += 1
        a, b = sorted(own_i + own_j)[:2]
        if abs(w[a - 1] - w[b - 1]) > HOLONOMY_ATOL:
            spec[(i, j)] = ((a, b),)
    if not spec:
        if candidates:
            raise PermutationFixesWeight(
                f"pi0 = {sorted(p.pi0)}: every candidate swap exchanges equal weights"
            )
        raise NoPermutationPlacement(
            f"pi0 = {sorted(p.pi0)}: no edge joins two agents that both own pi0 indices"
        )
    return PermutationSpec(spec)


def _permutation_block(size: int, cycles, allowed: set[int], w: np.ndarray, edge) -> np.ndarray:
    perm = np.arange(size)
    touched = set()
    for cyc in cycles:
        if len(cyc) < 2 or len(set(cyc)) != len(cyc):
            raise RealizationError(f"edge {edge}: invalid permutation cycle {cyc}")
        bad = [c for c in cyc if c not in allowed]
        if bad:
            raise RealizationError(
                f"edge {edge}: permutation touches {bad}, which are not pi0 indices of the edge's agents"
            )
        if touched & set(cyc):
            raise RealizationError(f"edge {edge}: permutation cycles overlap")
        touched |= set(cyc)
        for t, c in enumerate(cyc):
            perm[c - 1] = cyc[(t + 1) % len(cyc)] - 1
    idx = sorted(u - 1 for u in touched)
    if all(abs(w[u] - w[perm[u]]) <= HOLONOMY_ATOL for u in idx):
        raise PermutationFixesWeight(
            f"edge {edge}: permutation on {sorted(touched)} fixes the weight subvector {w[idx].tolist()}"
        )
    return perm


def build_local_matrix(
    g: Graph,
    imap: IndexMap,
    p: IndexPartition,
    w,
    edge,
    betas: BetaPolicy | None = None,
    perm: PermutationSpec | None = None,
) -> np.ndarray:
    """Local stochastic matrix for one edge.

    Starts from the identity and right-multiplies one rate matrix for every
    ``(a, k, l)`` (cells ascending, then entries of the lower agent, then of
    the higher agent) with ``psi(i, k)`` and ``psi(j, l)`` both in cell
    ``pi_a``. The edge is always taken with ``i < j``. If ``perm`` has cycles
    for this edge, they are written into the ``pi0`` block.

    Warns :class:`NoCouplingWarning` if the result is the identity.
    """
    i, j = _edge_key(edge)
    if not g.has_edge(i, j):
        raise UnknownEdge(f"({i}, {j}) is not an edge of the graph")
    betas = betas or BetaPolicy()
    w = np.asarray(w, dtype=float)
    m = imap.entries_per_agent
    a_mat = np.eye(imap.size)
    slack = 0.0
    factors = 0
    for cell in p.cells:
        for k in range(1, m + 1):
            u = imap.psi(i, k)
            if u not in cell:
                continue
            for l in range(1, m + 1):
                v = imap.psi(j, l)
                if v not in cell:
                    continue
                pair = ((i, k), (j, l))
                b1, b2, rtol = betas.betas(pair, w[u - 1], w[v - 1])
                a_mat = a_mat @ rate_matrix(imap, w, pair, b1, b2, rtol=rtol)
                slack += abs(w[u - 1] * b1 - w[v - 1] * b2)
                factors += 1

    cycles = perm.for_edge((i, j)) if perm is not None else ()
    if cycles:
        own_i, own_j = _pi0_owned(imap, p, i, j)
        block = own_i + own_j
        perm_map = _permutation_block(imap.size, cycles, set(block), w, (i, j))
        rows = np.array(block) - 1
        sub = np.zeros((len(rows), len(rows)))
        for r, u in enumerate(rows):
            sub[r, list(rows).index(perm_map[u])] = 1.0
        a_mat[np.ix_(rows, rows)] = sub
    elif factors == 0:
        warnings.warn(f"edge ({i}, {j}) couples no index pair; its matrix is the identity", NoCouplingWarning)

    if not is_stochastic(a_mat):
        raise RealizationError(f"edge ({i}, {j}): product is not row-stochastic")
    comp = sorted(u - 1 for u in p.complement())
    if comp:
        wt = w[comp]
        drift = np.max(np.abs(wt @ a_mat[np.ix_(comp, comp)] - wt))
        # loose-rtol overrides leave a residual; each factor moves w by at most twice its ratio residual in l1
        if drift > EIGEN_ATOL + 2 * slack:
            raise RealizationError(f"edge ({i}, {j}): weight subvector not preserved (drift {drift:.3g})")
    return a_mat


@dataclass(frozen=True)
class LocalMatrixSet:
    """One local stochastic matrix per undirected edge, plus the inputs used."""

    graph: Graph
    imap: IndexMap
    partition: IndexPartition
    weights: np.ndarray
    matrices: Mapping[tuple[int, int], np.ndarray]

    def __post_init__(self):
        mats = {}
        for e, a in self.matrices.items():
            a = np.array(a, dtype=float)
            a.flags.writeable = False
            mats[_edge_key(e)] = a
        object.__setattr__(self, "matrices", mats)

    def __getitem__(self, edge) -> np.ndarray:
        key = _edge_key(edge)
        try:
            return self.matrices[key]
        except KeyError:
            raise UnknownEdge(f"no local matrix for edge {key}") from None

    def __contains__(self, edge) -> bool:
        return _edge_key(edge) in self.matrices

    def __len__(self):
        return len(self.matrices)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [e for e in self.graph.edges if e in self.matrices]

    @property
    def size(self) -> int:
        return self.imap.size

    def replace(self, edge, matrix) -> "LocalMatrixSet":
        """Copy with the matrix of ``edge`` swapped out."""
        key = _edge_key(edge)
        if key not in self.matrices:
            raise UnknownEdge(f"no local matrix for edge {key}")
        mats = dict(self.matrices)
        mats[key] = matrix
        return LocalMatrixSet(self.graph, self.imap, self.partition, self.weights, mats)


def realize_all(
    g: Graph,
    imap: IndexMap,
    p: IndexPartition,
    w,
    betas: BetaPolicy | None = None,
    perm: PermutationSpec | None = None,
) -> LocalMatrixSet:
    """Build the local matrix of every edge.

    When ``pi0`` is non-empty and ``perm`` is None, the default transposition
    placement from :func:`default_permutation_spec` is used.

    Raises
    ------
    PreconditionError
        ``g`` is not simple and 2-edge connected, or ``p`` is not admissible.
    """
    if imap.num_agents != g.num_agents:
        raise PreconditionError(f"index map has {imap.num_agents} agents, graph has {g.num_agents}")
    if not check_simple(g) or not check_two_edge_connected(g):
        raise PreconditionError("graph must be simple and 2-edge connected")
    report = is_admissible(g, imap, p)
    if not report.admissible:
        bad = [c.label for c in report.cells if not c.connected]
        raise PreconditionError(f"partition is not admissible: disconnected derived graphs {bad}")
    w = check_weights(w, imap.size)
    if p.pi0:
        if perm is None:
            perm = default_permutation_spec(g, imap, p, w)
        elif not perm:
            raise NoPermutationPlacement("pi0 is non-empty but the permutation spec places no permutation")
    elif perm:
        raise RealizationError("permutation spec given but pi0 is empty")
    if perm is not None:
        unknown = [e for e in perm.cycles if not g.has_edge(*e)]
        if unknown:
            raise UnknownEdge(f"permutation spec names edges not in the graph: {unknown}")
    mats = {e: build_local_matrix(g, imap, p, w, e, betas, perm) for e in g.edges}
    logger.debug("realized %d local matrices of size %d", len(mats), imap.size)
    return LocalMatrixSet(g, imap, p, w, mats)
