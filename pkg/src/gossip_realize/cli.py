"""Command line entry point: ``gossip-realize {check,realize,verify,simulate,all}``.

Exit codes: 0 success, 1 a check or verification failed, 2 bad configuration
or input files. Output for a config goes to ``<out>/<config-hash[:12]>/``.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import ProblemConfig, load_config
from .exceptions import ConfigError, CycleExplosion, GossipError, RealizationError, UnknownEdge
from .graph import check_simple, check_two_edge_connected
from .holonomy import verify_holonomy
from .io import read_matrix_set, write_json, write_matrix_set
from .partition import is_admissible
from .realization import realize_all
from .simulation import StopRule, detect_limit_behavior, run

logger = logging.getLogger("gossip_realize")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class StageFailed(Exception):
    def __init__(self, stage, message, code=EXIT_FAIL):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.code = code


def run_dir(cfg: ProblemConfig, out) -> Path:
    d = Path(out) / cfg.hash[:12]
    d.mkdir(parents=True, exist_ok=True)
    return d


def _stamp(report: dict, cfg: ProblemConfig) -> dict:
    return {"config_hash": cfg.hash, **report}


def stage_check(cfg: ProblemConfig, rdir: Path) -> dict:
    g = cfg.graph
    report = is_admissible(g, cfg.imap, cfg.partition)
    out = _stamp(
        {
            "simple": check_simple(g),
            "two_edge_connected": check_two_edge_connected(g),
            **report.to_dict(),
        },
        cfg,
    )
    out["passed"] = bool(out["simple"] and out["two_edge_connected"] and out["admissible"])
    write_json(rdir / "check.json", out)
    for msg in report.warnings:
        logger.warning(msg)
    if not out["passed"]:
        why = [k for k in ("simple", "two_edge_connected", "admissible") if not out[k]]
        raise StageFailed("check", f"failed: {', '.join(why)}")
    return out


def stage_realize(cfg: ProblemConfig, rdir: Path, fmt: str = "json"):
    try:
        ms = realize_all(cfg.graph, cfg.imap, cfg.partition, cfg.weights, cfg.betas, cfg.permutation)
    except (RealizationError, UnknownEdge) as exc:
        raise StageFailed("realize", f"{type(exc).__name__}: {exc}") from exc
    manifest = write_matrix_set(ms, rdir / "matrices", fmt, cfg.hash)
    return ms, manifest


def stage_verify(cfg: ProblemConfig, rdir: Path, matrices: Path):
    ms = read_matrix_set(matrices, cfg)
    try:
        report = verify_holonomy(cfg.graph, ms, cycle_cap=cfg.cycle_cap, order_cap=cfg.order_cap)
    except CycleExplosion as exc:
        raise StageFailed("verify", str(exc)) from exc
    out = _stamp(report.to_dict(), cfg)
    write_json(rdir / "holonomy.json", out)
    if not report.overall:
        bad = [r.cycle.vertices for r in report.cycles if r.order == 0]
        raise StageFailed("verify", f"not w-holonomic; order 0 on cycles {bad}")
    return ms, out


def stage_simulate(cfg: ProblemConfig, rdir: Path, matrices: Path):
    ms = read_matrix_set(matrices, cfg)
    stop = StopRule(cfg.max_steps, cfg.tol, cfg.partition)
    state, trace = run(cfg.initial_state, ms, cfg.scheduler, stop, seed=cfg.seed, stride=cfg.stride)
    trace.to_csv(rdir / "trace.csv")
    report = detect_limit_behavior(state, cfg.partition, cfg.weights, cfg.initial_state, cfg.tol)
    out = _stamp({"scheduler": cfg.scheduler.kind, "seed": cfg.seed, **report.to_dict()}, cfg)
    write_json(rdir / "convergence.json", out)
    if not report.converged:
        raise StageFailed("simulate", f"no multiple consensus after {state.t} steps")
    return out


def _load(args) -> ProblemConfig:
    return load_config(
        args.config,
        seed=args.seed,
        max_steps=args.max_steps,
        tol=args.tol,
        scheduler=args.scheduler,
    )


def _matrices_dir(args, rdir: Path) -> Path:
    return Path(args.matrices) if args.matrices else rdir / "matrices"


def cmd_check(args) -> dict:
    cfg = _load(args)
    return stage_check(cfg, run_dir(cfg, args.out))


def cmd_realize(args) -> dict:
    cfg = _load(args)
    rdir = run_dir(cfg, args.out)
    stage_check(cfg, rdir)
    ms, manifest = stage_realize(cfg, rdir, args.format)
    return {"config_hash": cfg.hash, "manifest": str(manifest), "edges": [list(e) for e in ms.edges]}


def cmd_verify(args) -> dict:
    cfg = _load(args)
    rdir = run_dir(cfg, args.out)
    _, out = stage_verify(cfg, rdir, _matrices_dir(args, rdir))
    return out


def cmd_simulate(args) -> dict:
    cfg = _load(args)
    rdir = run_dir(cfg, args.out)
    return stage_simulate(cfg, rdir, _matrices_dir(args, rdir))


def cmd_all(args) -> dict:
    cfg = _load(args)
    rdir = run_dir(cfg, args.out)
    write_json(rdir / "config.json", cfg.raw)
    bundle = {
        "provenance": {
            "config_hash": cfg.hash,
            "seed": cfg.seed,
            "tool_version": __version__,
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        },
        "stages": {},
        "failed_stage": None,
    }
    stages = [
        ("check", lambda: stage_check(cfg, rdir), "check.json"),
        ("realize", lambda: stage_realize(cfg, rdir, args.format), "matrices/manifest.json"),
        ("verify", lambda: stage_verify(cfg, rdir, rdir / "matrices"), "holonomy.json"),
        ("simulate", lambda: stage_simulate(cfg, rdir, rdir / "matrices"), "convergence.json"),
    ]
    try:
        for name, fn, artifact in stages:
            try:
                fn()
            except GossipError as exc:
                code = EXIT_CONFIG if isinstance(exc, ConfigError) else EXIT_FAIL
                raise StageFailed(name, str(exc), code) from exc
            bundle["stages"][name] = {"status": "ok", "artifact": artifact}
    except StageFailed as exc:
        bundle["stages"][exc.stage] = {"status": "failed", "error": str(exc)}
        bundle["failed_stage"] = exc.stage
        write_json(rdir / "bundle.json", bundle)
        raise
    write_json(rdir / "bundle.json", bundle)
    return bundle


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="problem config (JSON)")
    common.add_argument("--out", default="runs", help="output root directory (default: runs)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--max-steps", type=int, help="override the simulation step budget")
    common.add_argument("--tol", type=float, help="override the consensus tolerance")
    common.add_argument("--scheduler", choices=["uniform", "roundrobin"], help="override the edge scheduler")
    common.add_argument("--format", choices=["json", "csv"], default="json", help="matrix file format")
    common.add_argument("--matrices", help="matrix directory (default: <run dir>/matrices)")

    parser = argparse.ArgumentParser(
        prog="gossip-realize",
        description="Realize, verify and simulate gossip matrices with multiple consensus.",
        epilog="exit codes: 0 success, 1 check or verification failed, 2 bad configuration",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in [
        ("check", cmd_check, "topology and partition admissibility"),
        ("realize", cmd_realize, "build and write the local stochastic matrices"),
        ("verify", cmd_verify, "w-holonomy over every cycle"),
        ("simulate", cmd_simulate, "run the gossip process and test for multiple consensus"),
        ("all", cmd_all, "check, realize, verify and simulate"),
    ]:
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("GOSSIP_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except StageFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except GossipError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(json.dumps(result, indent=2, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
