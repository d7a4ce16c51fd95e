"""JSON problem configuration.

All agent ids and state indices are 1-based. Minimal document::

    {
      "num_agents": 4,
      "entries_per_agent": 2,
      "edges": [[1, 2], [2, 3], [3, 4], [4, 1]],
      "weights": [0.012, 0.209, 0.062, 0.027, 0.050, 0.081, 0.013, 0.544],
      "normalize_weights": true,
      "partition": {"pi0": [1, 3], "cells": [[2, 4, 5, 7], [6, 8]]}
    }

Optional keys: ``theta``, ``beta_overrides``, ``permutation``, ``scheduler``,
``schedule_order``, ``seed``, ``tol``, ``max_steps``, ``stride``,
``initial_state``, ``cycle_cap``, ``order_cap``. See the README for the
full reference.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._tolerances import DEFAULT_CYCLE_CAP, DEFAULT_MAX_STEPS, DEFAULT_THETA, RATIO_RTOL, SIM_TOL
from .exceptions import ConfigError, GossipError
from .graph import Graph, check_simple
from .partition import IndexMap, IndexPartition
from .realization import BetaPolicy, PermutationSpec, check_weights
from .simulation import SCHEDULERS, Scheduler

__all__ = ["ProblemConfig", "load_config", "parse_config", "config_hash"]

KNOWN_KEYS = {
    "num_agents", "entries_per_agent", "edges", "weights", "normalize_weights",
    "partition", "theta", "beta_overrides", "permutation", "scheduler",
    "schedule_order", "seed", "tol", "max_steps", "stride", "initial_state",
    "cycle_cap", "order_cap", "description",
}


def config_hash(raw: dict) -> str:
    """sha256 of the canonical JSON encoding of ``raw``."""
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class ProblemConfig:
    raw: dict
    graph: Graph
    imap: IndexMap
    partition: IndexPartition
    weights: np.ndarray
    betas: BetaPolicy
    permutation: PermutationSpec | None
    scheduler: Scheduler
    seed: int
    tol: float
    max_steps: int
    stride: int | None
    initial_state: np.ndarray
    cycle_cap: int
    order_cap: int | None

    @property
    def hash(self) -> str:
        return config_hash(self.raw)


def _int(raw, key, errors, default=None, minimum=None):
    val = raw.get(key, default)
    if val is None:
        if default is None and key in ("num_agents", "entries_per_agent"):
            errors.append(f"{key}: required")
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)) or int(val) != val:
        errors.append(f"{key}: expected an integer, got {val!r}")
        return None
    val = int(val)
    if minimum is not None and val < minimum:
        errors.append(f"{key}: must be >= {minimum}, got {val}")
        return None
    return val


def _pair(x) -> tuple[int, int]:
    if not isinstance(x, (list, tuple)) or len(x) != 2:
        raise ValueError(f"expected a pair, got {x!r}")
    return int(x[0]), int(x[1])


def parse_config(raw: dict) -> ProblemConfig:
    """Validate ``raw`` and build the domain objects.

    Raises
    ------
    ConfigError
        With every field-level problem found, not just the first.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    errors: list[str] = []
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        errors.append(f"unknown keys: {unknown}")

    n = _int(raw, "num_agents", errors, minimum=1)
    m = _int(raw, "entries_per_agent", errors, minimum=1)

    graph = None
    try:
        edges = [_pair(e) for e in raw.get("edges", [])]
        if not check_simple(edges):
            errors.append("edges: graph must be simple (no self-loops, no duplicate edges)")
        elif n is not None:
            graph = Graph(n, edges)
    except (ValueError, TypeError) as exc:
        errors.append(f"edges: {exc}")

    imap = IndexMap(n, m) if n and m else None

    partition = None
    part = raw.get("partition")
    if not isinstance(part, dict) or "cells" not in part:
        errors.append('partition: expected {"pi0": [...], "cells": [[...], ...]}')
    else:
        try:
            partition = IndexPartition(part.get("pi0", []), tuple(part["cells"]))
            if imap is not None:
                partition.validate(imap.size)
        except (GossipError, ValueError, TypeError) as exc:
            errors.append(f"partition: {exc}")
            partition = None

    weights = None
    if "weights" not in raw:
        errors.append("weights: required")
    else:
        try:
            w = np.asarray(raw["weights"], dtype=float)
            if raw.get("normalize_weights", False) and w.ndim == 1 and np.all(w > 0):
                w = w / w.sum()
            weights = check_weights(w, imap.size if imap else None)
        except (ValueError, TypeError) as exc:
            errors.append(f"weights: {exc}")

    theta = raw.get("theta", DEFAULT_THETA)
    overrides = {}
    for q, item in enumerate(raw.get("beta_overrides", [])):
        try:
            a, b = item["pair"]
            pair = (_pair(a), _pair(b))
            overrides[pair] = (float(item["beta1"]), float(item["beta2"]), float(item.get("rtol", RATIO_RTOL)))
        except (KeyError, ValueError, TypeError) as exc:
            errors.append(f"beta_overrides[{q}]: {exc!r}")
    betas = None
    try:
        betas = BetaPolicy(float(theta), overrides)
    except (ValueError, TypeError) as exc:
        errors.append(f"theta: {exc}")

    perm = None
    if "permutation" in raw:
        try:
            spec: dict = {}
            for item in raw["permutation"].get("edges", []):
                e = _pair(item["edge"])
                if graph is not None and not graph.has_edge(*e):
                    errors.append(f"permutation: {e} is not an edge")
                spec.setdefault((min(e), max(e)), []).append(tuple(int(c) for c in item["cycle"]))
            perm = PermutationSpec(spec)
        except (KeyError, ValueError, TypeError, AttributeError) as exc:
            errors.append(f"permutation: {exc!r}")

    kind = raw.get("scheduler", "uniform")
    scheduler = None
    if kind not in SCHEDULERS:
        errors.append(f"scheduler: expected one of {SCHEDULERS}, got {kind!r}")
    else:
        try:
            order = tuple(_pair(e) for e in raw.get("schedule_order", []))
            if graph is not None:
                bad = [e for e in order if not graph.has_edge(*e)]
                if bad:
                    errors.append(f"schedule_order: not edges of the graph: {bad}")
            scheduler = Scheduler(kind, order)
        except (ValueError, TypeError) as exc:
            errors.append(f"schedule_order: {exc}")

    seed = _int(raw, "seed", errors, default=0, minimum=0)
    max_steps = _int(raw, "max_steps", errors, default=DEFAULT_MAX_STEPS, minimum=0)
    stride = _int(raw, "stride", errors, default=0, minimum=0) or None
    cycle_cap = _int(raw, "cycle_cap", errors, default=DEFAULT_CYCLE_CAP, minimum=1)
    order_cap = raw.get("order_cap")
    if order_cap is not None:
        order_cap = _int(raw, "order_cap", errors, minimum=1)
    tol = raw.get("tol", SIM_TOL)
    if not isinstance(tol, (int, float)) or not tol > 0:
        errors.append(f"tol: expected a positive number, got {tol!r}")

    x0 = None
    init = raw.get("initial_state", {"random": {"low": 0.0, "high": 1.0}})
    try:
        if isinstance(init, dict):
            rnd = init["random"]
            rng = np.random.Generator(np.random.PCG64(seed or 0))
            if imap is not None:
                x0 = rng.uniform(float(rnd.get("low", 0.0)), float(rnd.get("high", 1.0)), imap.size)
        else:
            x0 = np.asarray(init, dtype=float)
            if imap is not None and x0.shape != (imap.size,):
                errors.append(f"initial_state: length {x0.size}, expected {imap.size}")
    except (KeyError, ValueError, TypeError) as exc:
        errors.append(f"initial_state: {exc!r}")

    if errors:
        raise ConfigError(errors)
    return ProblemConfig(
        raw=raw, graph=graph, imap=imap, partition=partition, weights=weights,
        betas=betas, permutation=perm, scheduler=scheduler, seed=seed, tol=float(tol),
        max_steps=max_steps, stride=stride, initial_state=x0, cycle_cap=cycle_cap,
        order_cap=order_cap,
    )


def load_config(path, **overrides) -> ProblemConfig:
    """Read a JSON config file; non-None ``overrides`` replace top-level keys."""
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(raw, dict):
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(raw)
