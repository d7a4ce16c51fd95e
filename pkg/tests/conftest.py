import json
from pathlib import Path

import numpy as np
import pytest

from gossip_realize import Graph, IndexMap, IndexPartition, check_weights

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

SQUARE_W = [0.012, 0.209, 0.062, 0.027, 0.050, 0.081, 0.013, 0.544]

BUTTERFLY_EDGES = [(1, 2), (2, 3), (3, 1), (1, 4), (4, 5), (1, 5), (5, 6), (6, 7), (5, 7)]

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _criteria.append((mark.args[0], mark.args[1], rep.outcome, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, duration in sorted(_criteria):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] AC{number} {title} ({duration:.2f}s)")


@pytest.fixture
def square():
    return Graph(4, [(1, 2), (2, 3), (3, 4), (4, 1)])


@pytest.fixture
def butterfly():
    return Graph(7, BUTTERFLY_EDGES)


@pytest.fixture
def imap42():
    return IndexMap(4, 2)


@pytest.fixture
def swap_partition():
    return IndexPartition({1, 3}, ({2, 4, 5, 7}, {6, 8}))


@pytest.fixture
def three_cluster_partition():
    return IndexPartition((), ({1, 3}, {2, 4, 5, 7}, {6, 8}))


@pytest.fixture
def square_w():
    w = np.array(SQUARE_W)
    return check_weights(w / w.sum())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def load_fixture(name):
    return json.loads((FIXTURES / name).read_text())
