"""Reading and writing matrix sets and reports.

Floats are written with Python's shortest round-trip repr, so a matrix
read back is bit-identical to the one written.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .config import ProblemConfig
from .exceptions import MatrixFileError
from .realization import LocalMatrixSet

__all__ = ["write_json", "write_matrix_set", "read_matrix_set", "MANIFEST"]

MANIFEST = "manifest.json"


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, default=_default) + "\n")


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _matrix_name(edge, fmt: str) -> str:
    return f"A_{edge[0]}_{edge[1]}.{fmt}"


def write_matrix_set(ms: LocalMatrixSet, directory, fmt: str = "json", config_hash: str | None = None) -> Path:
    """Write one file per edge plus a manifest; returns the manifest path."""
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown matrix format {fmt!r}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for e in ms.edges:
        name = _matrix_name(e, fmt)
        a = ms[e]
        if fmt == "json":
            write_json(directory / name, {"edge": list(e), "size": ms.size, "rows": a.tolist()})
        else:
            with open(directory / name, "w", newline="") as fh:
                writer = csv.writer(fh)
                for row in a:
                    writer.writerow([repr(float(v)) for v in row])
        entries.append({"edge": list(e), "file": name})
    manifest = {
        "config_hash": config_hash,
        "format": fmt,
        "size": ms.size,
        "num_agents": ms.imap.num_agents,
        "entries_per_agent": ms.imap.entries_per_agent,
        "matrices": entries,
    }
    path = directory / MANIFEST
    write_json(path, manifest)
    return path


def _read_one(path: Path, fmt: str, size: int) -> np.ndarray:
    try:
        if fmt == "json":
            doc = json.loads(path.read_text())
            a = np.array(doc["rows"], dtype=float)
        else:
            with open(path, newline="") as fh:
                a = np.array([[float(v) for v in row] for row in csv.reader(fh) if row], dtype=float)
    except FileNotFoundError:
        raise MatrixFileError(f"{path}: missing matrix file") from None
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise MatrixFileError(f"{path}: unreadable matrix ({exc})") from None
    if a.shape != (size, size):
        raise MatrixFileError(f"{path}: dimension mismatch, got shape {a.shape}, expected ({size}, {size})")
    return a


def read_matrix_set(directory, cfg: ProblemConfig) -> LocalMatrixSet:
    """Load matrices written by :func:`write_matrix_set` and check them against ``cfg``."""
    directory = Path(directory)
    mpath = directory / MANIFEST
    try:
        manifest = json.loads(mpath.read_text())
    except FileNotFoundError:
        raise MatrixFileError(f"{mpath}: manifest not found") from None
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"{mpath}: invalid JSON ({exc})") from None
    size = cfg.imap.size
    if manifest.get("size") != size:
        raise MatrixFileError(f"{mpath}: dimension mismatch, manifest size {manifest.get('size')}, config needs {size}")
    fmt = manifest.get("format", "json")
    mats = {}
    for item in manifest.get("matrices", []):
        e = tuple(item["edge"])
        if not cfg.graph.has_edge(*e):
            raise MatrixFileError(f"{directory / item['file']}: edge {e} is not in the configured graph")
        mats[e] = _read_one(directory / item["file"], fmt, size)
    missing = [e for e in cfg.graph.edges if e not in mats]
    if missing:
        raise MatrixFileError(f"{mpath}: no matrices for edges {missing}")
    return LocalMatrixSet(cfg.graph, cfg.imap, cfg.partition, cfg.weights, mats)
