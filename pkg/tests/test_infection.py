import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from probgsp.graphs import Graph, grid_2d
from probgsp.infection import (
    InfectionConfig,
    PropagationTree,
    TreeAtoms,
    draw_fast_edges,
    infection_loss,
    is_acyclic,
    is_spanning_tree,
    observation_step,
    random_bfs_tree,
    rewire_tree,
    run_experiment,
    score_sources,
    snapshot,
    source_score,
)
from probgsp.oracles import oracle_infection_loss, oracle_snapshot

# Seeded 4x4 tree (source 5) and its step-2 infected set from the matrix-power oracle.
TREE_4X4_PARENT = [4, 5, 1, 2, 5, 5, 5, 6, 4, 5, 6, 10, 8, 9, 10, 11]
TREE_4X4_STEP2 = [0, 1, 2, 4, 5, 6, 7, 8, 9, 10, 13]


def cycle(n):
    return Graph(n, tuple((min(i, (i + 1) % n), max(i, (i + 1) % n), 1.0) for i in range(n)))


def path_tree(g, n):
    return PropagationTree(0, np.array([0] + list(range(n - 1))), g)


def test_tree_graph_gives_itself():
    g = Graph(5, ((0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0), (3, 4, 1.0)))
    t = random_bfs_tree(g, 2, np.random.default_rng(0))
    assert t.edges() == g.edge_set()


def test_four_cycle_parent_frequency():
    g = cycle(4)
    rng = np.random.default_rng(0)
    picks = [random_bfs_tree(g, 0, rng).parent[2] for _ in range(10_000)]
    assert abs(np.mean(np.array(picks) == 1) - 0.5) <= 0.02


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_bfs_tree_is_shortest_path_tree(seed):
    g = grid_2d(4, 5)
    rng = np.random.default_rng(seed)
    s = int(rng.integers(20))
    t = random_bfs_tree(g, s, rng)
    assert is_spanning_tree(g, t.edges())
    np.testing.assert_array_equal(t.depths(), g.bfs_distances(s))


def test_snapshot_examples():
    g = grid_2d(4, 4)
    t = PropagationTree(5, np.array(TREE_4X4_PARENT), g)
    np.testing.assert_array_equal(snapshot(t, 0), np.eye(16)[5])
    assert snapshot(t, t.height).all()
    assert np.flatnonzero(oracle_snapshot(t, 2)).tolist() == TREE_4X4_STEP2
    assert np.flatnonzero(snapshot(t, 2)).tolist() == TREE_4X4_STEP2


def test_loss_examples():
    g = grid_2d(4, 4)
    t = PropagationTree(5, np.array(TREE_4X4_PARENT), g)
    assert infection_loss(t, snapshot(t, 2)) == 0
    assert infection_loss(t, np.ones(16)) == 0
    f = np.zeros(16)
    f[[5, 6, 9, 1, 4, 0]] = 1
    assert oracle_infection_loss(t, f) == 1.0
    assert infection_loss(t, f) == 1.0


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_loss_matches_brute_force(seed):
    g = grid_2d(4, 4)
    rng = np.random.default_rng(seed)
    t = random_bfs_tree(g, int(rng.integers(16)), rng)
    f = (rng.uniform(size=16) < 0.4).astype(float)
    assert abs(infection_loss(t, f) - oracle_infection_loss(t, f)) <= 1e-12
    atoms = TreeAtoms.from_trees([t])
    assert abs(atoms.losses(f)[0] - oracle_infection_loss(t, f)) <= 1e-12


def test_rewire_cuts_median_of_non_fast_path():
    g = cycle(10)
    t = path_tree(g, 10)
    out = rewire_tree(g, t, [(1, 2), (3, 4), (0, 9)])
    expected = {(i, i + 1) for i in range(9)} - {(7, 8)} | {(0, 9)}
    assert out.edges() == expected
    assert is_spanning_tree(g, out.edges())
    np.testing.assert_array_equal(out.depths(), [0, 1, 2, 3, 4, 5, 6, 7, 2, 1])


def test_rewire_noop_when_fast_in_tree():
    g = grid_2d(3, 3)
    t = random_bfs_tree(g, 4, np.random.default_rng(1))
    fast = sorted(t.edges())[:3]
    np.testing.assert_array_equal(rewire_tree(g, t, fast).parent, t.parent)


def test_rewire_errors():
    g = cycle(4)
    t = path_tree(g, 4)
    with pytest.raises(ValueError, match="cycle"):
        rewire_tree(g, t, [(0, 1), (1, 2), (2, 3), (0, 3)])
    with pytest.raises(ValueError):
        rewire_tree(g, t, [(0, 2)])


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_rewire_lattice_invariants(seed):
    g = grid_2d(5, 5)
    rng = np.random.default_rng(seed)
    fast = draw_fast_edges(g, 4 / 40, rng)
    assert len(fast) == 4 and is_acyclic(fast, 25)
    t = random_bfs_tree(g, int(rng.integers(25)), rng)
    out = rewire_tree(g, t, fast)
    assert is_spanning_tree(g, out.edges())
    assert set(fast) <= out.edges()
    assert out.edges() - set(fast) <= t.edges()
    assert out.source == t.source


def test_source_score_examples():
    g = grid_2d(4, 4)
    rng = np.random.default_rng(2)
    training = [random_bfs_tree(g, s, rng) for s in (0, 5, 10, 15) for _ in range(3)]
    f = snapshot(training[4], 2)
    scores = source_score(g, [0, 5, 10, 15], [], training, f, 10.0)
    assert int(np.argmax(scores)) == 1
    np.testing.assert_allclose(source_score(g, [0, 5, 10, 15], [], training, f, 0.0), 0.25)
    np.testing.assert_allclose(source_score(g, [10], [], training, f, 3.0), [1.0])
    w = np.arange(1, 13, dtype=float)
    prior = np.array([w[i * 3:(i + 1) * 3].sum() for i in range(4)]) / w.sum()
    np.testing.assert_allclose(score_sources(TreeAtoms.from_trees(training, w), [0, 5, 10, 15], f, 0.0), prior)


def test_observation_step():
    g = cycle(10)
    t = path_tree(g, 10)
    assert observation_step(t, 0.4) == 3


def test_draw_fast_edges_is_forest():
    g = grid_2d(6, 6)
    fast = draw_fast_edges(g, 0.8, np.random.default_rng(0))
    assert is_acyclic(fast, 36) and len(fast) <= 35
    assert draw_fast_edges(g, 0.0, np.random.default_rng(0)) == []


def test_no_fast_edges_gives_identical_errors():
    cfg = InfectionConfig(rows=5, cols=5, fractions=(0.0,), trials=6, fast_draws=2, trees_per_candidate=2, bootstrap=50, seed=1)
    (row,) = run_experiment(cfg)
    np.testing.assert_array_equal(row.errors_with, row.errors_without)
    assert row.fast_edges == 0


def test_experiment_deterministic():
    cfg = InfectionConfig(rows=5, cols=5, fractions=(0.5,), trials=6, fast_draws=2, trees_per_candidate=2, bootstrap=50, seed=4)
    a, b = run_experiment(cfg), run_experiment(cfg)
    np.testing.assert_array_equal(a[0].errors_with, b[0].errors_with)
    assert (a[0].ci_low, a[0].ci_high) == (b[0].ci_low, b[0].ci_high)


def test_config_validation():
    with pytest.raises(ValueError):
        InfectionConfig(fractions=(1.5,))
    with pytest.raises(ValueError):
        InfectionConfig(graph="torus")


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_loss_zero_only_on_snapshots(seed):
    g = grid_2d(3, 4)
    rng = np.random.default_rng(seed)
    t = random_bfs_tree(g, int(rng.integers(12)), rng)
    snaps = {tuple(snapshot(t, i)) for i in range(t.height + 1)}
    f = (rng.uniform(size=12) < 0.5).astype(float)
    assert (infection_loss(t, f) == 0) == (tuple(f) in snaps)
    assert infection_loss(t, f) >= 0
