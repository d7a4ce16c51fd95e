import numpy as np
import pytest

from gossip_realize import (
    LocalMatrixSet,
    Scheduler,
    SimState,
    StopRule,
    UnknownEdge,
    cluster_spread,
    detect_limit_behavior,
    realize_all,
    run,
    step,
)
from gossip_realize.simulation import cell_sums, weighted_targets

from _gen import random_stochastic

X0 = np.arange(1.0, 9.0)


@pytest.fixture
def ms_pi0(square, imap42, swap_partition, square_w):
    return realize_all(square, imap42, swap_partition, square_w)


@pytest.fixture
def ms_plain(square, imap42, three_cluster_partition, square_w):
    return realize_all(square, imap42, three_cluster_partition, square_w)


def test_step_identity_matrix(square, imap42, swap_partition, square_w):
    ms = LocalMatrixSet(square, imap42, swap_partition, square_w, {e: np.eye(8) for e in square.edges})
    s = step(SimState(0, X0.copy()), (1, 2), ms)
    assert s.t == 1 and np.array_equal(s.x, X0)


def test_step_matches_dense_product(ms_pi0):
    e2 = np.zeros(8)
    e2[1] = 1.0
    s = step(SimState(0, e2), (1, 2), ms_pi0)
    assert np.allclose(s.x, ms_pi0[(1, 2)] @ e2, atol=1e-15)
    assert np.array_equal(np.nonzero(s.x)[0], [1, 3])
    with pytest.raises(UnknownEdge):
        step(SimState(0, e2), (1, 3), ms_pi0)


def test_step_conserves_cell_sums(ms_pi0, swap_partition, square_w):
    rng = np.random.default_rng(0)
    s = SimState(0, rng.normal(size=8))
    for e in [(1, 2), (2, 3), (3, 4), (1, 4)] * 5:
        before = cell_sums(s.x, swap_partition, square_w)
        s = step(s, e, ms_pi0)
        assert np.max(np.abs(cell_sums(s.x, swap_partition, square_w) - before)) < 1e-10


def test_run_zero_steps(ms_plain):
    state, trace = run(X0, ms_plain, stop=StopRule(max_steps=0))
    assert state.t == 0 and np.array_equal(state.x, X0)
    assert trace.snapshot_t == [0]


def test_cell_targets():
    # independent arithmetic for the {6, 8} cell
    target = (0.081 * 6 + 0.544 * 8) / (0.081 + 0.544)
    assert target == pytest.approx(7.7408, abs=1e-12)


def test_uniform_run_reaches_weighted_averages(ms_plain, three_cluster_partition, square_w):
    p = three_cluster_partition
    state, trace = run(X0, ms_plain, Scheduler("uniform"), StopRule(10**5, 1e-8, p), seed=11)
    assert state.t < 10**5
    report = detect_limit_behavior(state, p, square_w, X0, tol=1e-8)
    assert report.converged
    pi2 = report.cells[2]
    assert pi2.indices == [6, 8]
    assert pi2.target == pytest.approx(7.7408, abs=1e-9)
    assert pi2.achieved == pytest.approx(7.7408, abs=1e-6)
    assert abs(float(square_w @ state.x - square_w @ X0)) < 1e-10


def test_roundrobin_is_deterministic_and_reaches_same_targets(ms_plain, three_cluster_partition, square_w):
    p = three_cluster_partition
    stop = StopRule(10**5, 1e-8, p)
    s1, t1 = run(X0, ms_plain, Scheduler("roundrobin"), stop)
    s2, t2 = run(X0, ms_plain, Scheduler("roundrobin"), stop)
    assert np.array_equal(s1.x, s2.x) and np.array_equal(t1.steps, t2.steps)
    assert t1.steps[:8].tolist() == [0, 1, 2, 3, 0, 1, 2, 3]
    su, _ = run(X0, ms_plain, Scheduler("uniform"), stop, seed=5)
    rr = detect_limit_behavior(s1, p, square_w, X0)
    un = detect_limit_behavior(su, p, square_w, X0)
    for a, b in zip(rr.cells, un.cells):
        assert abs(a.achieved - b.achieved) < 2e-8


def test_seeded_runs_are_bitwise_identical(ms_pi0, swap_partition):
    stop = StopRule(5000, 1e-8, swap_partition)
    s1, t1 = run(X0, ms_pi0, stop=stop, seed=99, stride=7)
    s2, t2 = run(X0, ms_pi0, stop=stop, seed=99, stride=7)
    assert np.array_equal(t1.steps, t2.steps)
    assert all(np.array_equal(a, b) for a, b in zip(t1.snapshots, t2.snapshots))
    s3, t3 = run(X0, ms_pi0, stop=StopRule(5000, 1e-8, swap_partition), seed=100)
    assert not np.array_equal(t1.steps[: len(t3.steps)], t3.steps[: len(t1.steps)])


def test_pi0_values_are_only_permuted(ms_pi0, swap_partition, square_w):
    x0 = X0.copy()
    x0[[0, 2]] = [10.0, 20.0]
    s = SimState(0, x0)
    rng = np.random.default_rng(1)
    edges = ms_pi0.edges
    for _ in range(500):
        s = step(s, edges[rng.integers(len(edges))], ms_pi0)
        assert sorted(s.x[[0, 2]]) == [10.0, 20.0]
    state, _ = run(x0, ms_pi0, stop=StopRule(20000, 1e-8, swap_partition), seed=4)
    report = detect_limit_behavior(state, swap_partition, square_w, x0)
    assert report.pi0.multiset_conserved
    assert report.pi0.orbit_size == 2


def test_constant_state_converges_immediately(ms_pi0, swap_partition, square_w):
    x0 = np.full(8, 3.5)
    state, _ = run(x0, ms_pi0, stop=StopRule(100, 1e-8, swap_partition), seed=0)
    assert state.t == len(ms_pi0.edges)
    report = detect_limit_behavior(state, swap_partition, square_w, x0)
    assert report.converged
    assert all(c.achieved == 3.5 and abs(c.target - 3.5) < 1e-15 for c in report.cells)


def test_perturbed_matrix_breaks_conservation(ms_pi0, swap_partition, square_w):
    bad = ms_pi0.replace((2, 3), random_stochastic(8, np.random.default_rng(8)))
    state, _ = run(X0, bad, stop=StopRule(10**4, 1e-8, swap_partition), seed=3)
    report = detect_limit_behavior(state, swap_partition, square_w, X0)
    assert not report.converged
    assert max(c.conserved_sum_drift for c in report.cells) > 1e-6


def test_cluster_spread():
    assert cluster_spread(np.full(4, 2.0), {1, 2, 3}) == 0.0
    assert cluster_spread([0.0, 1.0], {1, 2}) == 1.0
    with pytest.raises(ValueError):
        cluster_spread([0.0], set())


def test_weighted_targets_formula(swap_partition, square_w):
    t = weighted_targets(X0, swap_partition, square_w)
    w = square_w
    assert t[0] == pytest.approx((w[1] * 2 + w[3] * 4 + w[4] * 5 + w[6] * 7) / (w[1] + w[3] + w[4] + w[6]))


def test_trace_csv(tmp_path, ms_pi0, swap_partition):
    _, trace = run(X0, ms_pi0, stop=StopRule(40, 1e-8, swap_partition), seed=1, stride=10)
    path = tmp_path / "trace.csv"
    trace.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",")[:4] == ["t", "edge_i", "edge_j", "x_1"]
    assert [ln.split(",")[0] for ln in lines[1:]] == ["0", "10", "20", "30", "40"]
    assert lines[1].split(",")[1:3] == ["", ""]


def test_bad_scheduler():
    with pytest.raises(ValueError):
        Scheduler("greedy")
