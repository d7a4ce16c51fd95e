import json

import numpy as np
import pytest

from gossip_realize.cli import main
from gossip_realize.config import parse_config

from conftest import FIXTURES, load_fixture
from test_realization import REFERENCE_A12


def write_cfg(tmp_path, raw, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


def run_dir(raw, out):
    return out / parse_config(raw).hash[:12]


def test_check_passes_on_example(tmp_path):
    out = tmp_path / "runs"
    assert main(["check", "--config", str(FIXTURES / "square_swap.json"), "--out", str(out)]) == 0
    report = json.loads((run_dir(load_fixture("square_swap.json"), out) / "check.json").read_text())
    assert report["passed"] and report["admissible"]


def test_check_fails_on_path_graph(tmp_path):
    raw = load_fixture("square_three_clusters.json")
    raw["edges"] = [[1, 2], [2, 3], [3, 4]]
    raw["partition"] = {"pi0": [], "cells": [list(range(1, 9))]}
    code = main(["check", "--config", str(write_cfg(tmp_path, raw)), "--out", str(tmp_path)])
    assert code == 1
    report = json.loads((run_dir(raw, tmp_path) / "check.json").read_text())
    assert report["two_edge_connected"] is False


def test_realize_reproduces_reference_matrix(tmp_path):
    raw = load_fixture("square_reference_betas.json")
    assert main(["realize", "--config", str(FIXTURES / "square_reference_betas.json"), "--out", str(tmp_path)]) == 0
    doc = json.loads((run_dir(raw, tmp_path) / "matrices" / "A_1_2.json").read_text())
    a = np.array(doc["rows"])
    assert np.max(np.abs(a - REFERENCE_A12)) < 5e-4
    assert np.array_equal(a != 0, REFERENCE_A12 != 0)


def test_equal_pi0_weights_cannot_be_permuted(tmp_path, capsys):
    raw = load_fixture("square_swap.json")
    raw["weights"][2] = raw["weights"][0]
    code = main(["realize", "--config", str(write_cfg(tmp_path, raw)), "--out", str(tmp_path)])
    assert code == 1
    assert "PermutationFixesWeight" in capsys.readouterr().err


def test_verify_exit_codes(tmp_path):
    good = str(FIXTURES / "square_swap.json")
    assert main(["realize", "--config", good, "--out", str(tmp_path)]) == 0
    assert main(["verify", "--config", good, "--out", str(tmp_path)]) == 0
    # the reference betas are only 1% consistent, so these matrices are not exactly holonomic
    ref = str(FIXTURES / "square_reference_betas.json")
    assert main(["realize", "--config", ref, "--out", str(tmp_path)]) == 0
    assert main(["verify", "--config", ref, "--out", str(tmp_path)]) == 1


def test_verify_without_matrices_is_input_error(tmp_path):
    assert main(["verify", "--config", str(FIXTURES / "square_swap.json"), "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("name", ["square_swap.json", "square_three_clusters.json", "butterfly.json"])
def test_all_writes_green_bundle(tmp_path, name):
    assert main(["all", "--config", str(FIXTURES / name), "--out", str(tmp_path)]) == 0
    rdir = run_dir(load_fixture(name), tmp_path)
    bundle = json.loads((rdir / "bundle.json").read_text())
    assert bundle["failed_stage"] is None
    assert set(bundle["stages"]) == {"check", "realize", "verify", "simulate"}
    conv = json.loads((rdir / "convergence.json").read_text())
    assert conv["converged"]
    assert conv["config_hash"] == bundle["provenance"]["config_hash"]
    assert (rdir / "trace.csv").exists()


def test_inadmissible_config_stops_after_check(tmp_path):
    raw = load_fixture("square_three_clusters.json")
    raw["partition"] = {"pi0": [], "cells": [[1, 5], [2, 3, 4, 6, 7, 8]]}
    assert main(["all", "--config", str(write_cfg(tmp_path, raw)), "--out", str(tmp_path)]) == 1
    rdir = run_dir(raw, tmp_path)
    bundle = json.loads((rdir / "bundle.json").read_text())
    assert bundle["failed_stage"] == "check"
    assert not (rdir / "matrices").exists()


def test_config_error_exit_code(tmp_path, capsys):
    raw = load_fixture("square_swap.json")
    raw["partition"]["cells"] = [[2, 4, 5, 7], [6]]
    assert main(["check", "--config", str(write_cfg(tmp_path, raw)), "--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err
    assert main(["check", "--config", str(tmp_path / "missing.json")]) == 2


def test_same_seed_same_bundle(tmp_path):
    cfg = str(FIXTURES / "square_swap.json")
    runs = []
    for out in ("a", "b"):
        assert main(["all", "--config", cfg, "--out", str(tmp_path / out), "--seed", "3"]) == 0
        rdir = next((tmp_path / out).iterdir())
        bundle = json.loads((rdir / "bundle.json").read_text())
        del bundle["provenance"]["created"]
        runs.append((bundle, (rdir / "trace.csv").read_text(), (rdir / "convergence.json").read_text()))
    assert runs[0] == runs[1]


def test_csv_matrices_round_trip(tmp_path):
    cfg = str(FIXTURES / "square_swap.json")
    assert main(["realize", "--config", cfg, "--out", str(tmp_path), "--format", "csv"]) == 0
    rdir = run_dir(load_fixture("square_swap.json"), tmp_path)
    assert (rdir / "matrices" / "A_1_2.csv").exists()
    assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 0
    # overrides change the config hash, so point at the existing matrices
    mats = str(rdir / "matrices")
    args = ["simulate", "--config", cfg, "--out", str(tmp_path), "--scheduler", "roundrobin", "--matrices", mats]
    assert main(args) == 0
