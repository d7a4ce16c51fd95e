"""scikit-learn compatible wrapper.

``fit`` realizes (and by default verifies) the local matrices for the
configured network; ``transform`` runs the gossip process from each row of
``X`` and returns the final states, so the realizer can sit in a
``Pipeline`` as a consensus step.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_random_state

from ._tolerances import DEFAULT_MAX_STEPS, DEFAULT_THETA, SIM_TOL
from .exceptions import RealizationError
from .graph import Graph
from .holonomy import verify_holonomy
from .partition import IndexMap, IndexPartition, is_admissible
from .realization import BetaPolicy, PermutationSpec, check_weights, realize_all
from .simulation import Scheduler, StopRule, detect_limit_behavior, run, weighted_targets


class GossipRealizer(TransformerMixin, BaseEstimator):
    """Gossip matrices with prescribed consensus weights and clusters.

    Parameters
    ----------
    num_agents : int
    edges : sequence of (int, int)
        Undirected network edges, 1-based agent ids.
    entries_per_agent : int, default=1
    weights : array-like of shape (num_agents * entries_per_agent,)
        Strictly positive consensus weights summing to one.
    cells : sequence of sequences, optional
        Consensus clusters as 1-based global indices. Defaults to a single
        cluster holding every index outside ``pi0``.
    pi0 : sequence of int, default=()
        Indices that should end up permuted rather than averaged.
    theta : float, default=0.5
    beta_overrides : dict, optional
        ``{((i, k), (j, l)): (beta1, beta2[, rtol])}``.
    permutation : dict, optional
        ``{(i, j): cycle or list of cycles}``; defaults to one transposition
        per eligible edge when ``pi0`` is non-empty.
    scheduler : {"uniform", "roundrobin"}, default="uniform"
    max_steps : int, default=10**6
    tol : float, default=1e-8
    verify : bool, default=True
        Run the w-holonomy check during ``fit`` and raise if it fails.
    random_state : int, RandomState or None

    Attributes
    ----------
    matrices_ : LocalMatrixSet
    admissibility_ : AdmissibilityReport
    holonomy_ : HolonomyReport or None
    n_features_in_ : int
    """

    def __init__(
        self,
        num_agents=None,
        edges=(),
        entries_per_agent=1,
        weights=None,
        cells=None,
        pi0=(),
        theta=DEFAULT_THETA,
        beta_overrides=None,
        permutation=None,
        scheduler="uniform",
        max_steps=DEFAULT_MAX_STEPS,
        tol=SIM_TOL,
        verify=True,
        random_state=None,
    ):
        self.num_agents = num_agents
        self.edges = edges
        self.entries_per_agent = entries_per_agent
        self.weights = weights
        self.cells = cells
        self.pi0 = pi0
        self.theta = theta
        self.beta_overrides = beta_overrides
        self.permutation = permutation
        self.scheduler = scheduler
        self.max_steps = max_steps
        self.tol = tol
        self.verify = verify
        self.random_state = random_state

    def _partition(self, size):
        pi0 = frozenset(self.pi0)
        cells = self.cells
        if cells is None:
            cells = [sorted(set(range(1, size + 1)) - pi0)]
        return IndexPartition(pi0, tuple(cells))

    def fit(self, X=None, y=None):
        """Realize the local matrices. ``X`` only fixes ``n_features_in_``."""
        graph = Graph(self.num_agents, self.edges)
        imap = IndexMap(graph.num_agents, self.entries_per_agent)
        partition = self._partition(imap.size)
        partition.validate(imap.size)
        w = check_weights(self.weights, imap.size)
        if X is not None:
            X = check_array(X)
            if X.shape[1] != imap.size:
                raise ValueError(f"X has {X.shape[1]} features, the network has {imap.size} state entries")
        perm = PermutationSpec(self.permutation) if self.permutation is not None else None
        betas = BetaPolicy(self.theta, self.beta_overrides or {})

        self.admissibility_ = is_admissible(graph, imap, partition)
        self.matrices_ = realize_all(graph, imap, partition, w, betas, perm)
        self.holonomy_ = None
        if self.verify:
            self.holonomy_ = verify_holonomy(graph, self.matrices_)
            if not self.holonomy_.overall:
                raise RealizationError("realized matrices are not w-holonomic")
        self.n_features_in_ = imap.size
        return self

    def _run_rows(self, X):
        rng = check_random_state(self.random_state)
        stop = StopRule(self.max_steps, self.tol, self.matrices_.partition)
        sched = Scheduler(self.scheduler)
        for x0 in X:
            seed = int(rng.randint(0, 2**31 - 1))
            state, _ = run(x0, self.matrices_, sched, stop, seed=seed)
            yield x0, state

    def transform(self, X):
        """Final gossip state for every initial state (row) in ``X``."""
        check_is_fitted(self, "matrices_")
        X = check_array(X, ensure_min_features=self.n_features_in_)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return np.vstack([state.x for _, state in self._run_rows(X)])

    def convergence_reports(self, X):
        """ConvergenceReport for every row of ``X``."""
        check_is_fitted(self, "matrices_")
        X = check_array(X)
        ms = self.matrices_
        return [
            detect_limit_behavior(state, ms.partition, ms.weights, x0, self.tol)
            for x0, state in self._run_rows(X)
        ]

    def limit_targets(self, X):
        """w-weighted cell means of each row; where each cluster should settle."""
        check_is_fitted(self, "matrices_")
        X = check_array(X)
        ms = self.matrices_
        return np.vstack([weighted_targets(x, ms.partition, ms.weights) for x in X])
