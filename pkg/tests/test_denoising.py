import numpy as np
import pytest

from probgsp.denoising import ToyConfig, accuracy, block_graph, cutoff_grid, run_toy


def test_block_graph_symmetric():
    g = block_graph(np.array([0, 0, 1, 1, 1]), 1.0, 0.0, np.random.default_rng(0))
    assert g.edge_set() == {(0, 1), (2, 3), (2, 4), (3, 4)}


def test_accuracy_and_grid():
    assert accuracy(np.array([[0.2, 1.6, 2.9]]), np.array([0, 2, 2]))[0] == pytest.approx(1.0)
    assert accuracy(np.array([0.6, 0.4, 1.2]), np.array([0, 2, 2])) == pytest.approx(0.0)
    grid = cutoff_grid(40)
    assert grid[0] >= 1 and grid[-1] <= 40 and list(grid) == sorted(set(grid))


@pytest.mark.parametrize("seed", range(5))
def test_distributional_not_worse_than_single(seed):
    res = run_toy(ToyConfig(seed=seed))
    for snr in (-5.0, -3.0, -1.0):
        by_mode = {r.mode: r.test_accuracy for r in res if r.snr_db == snr}
        assert by_mode["distributional"] >= by_mode["single_a"]
        assert by_mode["distributional"] >= by_mode["single_d"]
