import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from probgsp.opspace import (
    convex_family,
    discrete_space,
    expected_operator,
    make_operator,
)
from probgsp.oracles import oracle_expected_power

from conftest import random_laplacian, random_symmetric


def test_p2_closed_form():
    op = make_operator([[1.0, -1.0], [-1.0, 1.0]])
    np.testing.assert_allclose(op.eigenvalues, [0, 2], atol=1e-14)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(op.eigenvectors, [[s, s], [s, -s]], atol=1e-14)


def test_identity_canonical():
    op = make_operator(np.eye(4))
    np.testing.assert_allclose(op.eigenvalues, 1.0)
    np.testing.assert_allclose(op.eigenvectors, np.eye(4), atol=1e-14)


def test_asymmetric_rejected():
    with pytest.raises(ValueError, match="not symmetric"):
        make_operator([[1.0, 2.0], [0.0, 1.0]])


@given(st.integers(0, 10_000), st.integers(2, 9))
@settings(max_examples=40, deadline=None)
def test_decomposition_invariants(seed, n):
    M = random_symmetric(np.random.default_rng(seed), n)
    op = make_operator(M)
    U, lam = op.eigenvectors, op.eigenvalues
    assert np.abs(U.T @ U - np.eye(n)).max() <= 1e-8
    assert np.abs(M @ U - U * lam).max() <= 1e-8 * np.abs(M).max()
    assert np.all(np.diff(np.abs(lam)) >= 0)
    np.testing.assert_allclose(U @ np.diag(lam) @ U.T, M, atol=1e-9)
    again = make_operator(op.matrix)
    np.testing.assert_allclose(again.eigenvectors, U, atol=1e-9)
    # Flipping any eigenvector sign is undone by canonicalization.
    flip = U * np.where(np.arange(n) % 2, -1.0, 1.0)
    op2 = make_operator(flip @ np.diag(lam) @ flip.T)
    np.testing.assert_allclose(op2.eigenvectors, U, atol=1e-8)


def test_discrete_space_weights():
    op = make_operator(np.eye(3))
    assert discrete_space([op], [1.0]).weights.tolist() == [1.0]
    assert discrete_space([op, op], [0.5, 0.5]).weights.tolist() == [0.5, 0.5]
    with pytest.raises(ValueError):
        discrete_space([op, op], [0.3, 0.8])
    with pytest.raises(ValueError):
        discrete_space([op, make_operator(np.eye(2))], [0.5, 0.5])


def test_convex_family_midpoint():
    rng = np.random.default_rng(5)
    L0, L1 = random_laplacian(rng, 6), random_laplacian(rng, 6)
    sp = convex_family(L0, L1, nodes=1)
    np.testing.assert_allclose(sp.params, [0.5])
    np.testing.assert_allclose(sp.atoms[0].matrix, (L0 + L1) / 2, atol=1e-15)


@pytest.mark.parametrize("nodes", [2, 3, 8, 16])
def test_convex_family_moments(nodes):
    rng = np.random.default_rng(nodes)
    L0, L1 = random_laplacian(rng, 5), random_laplacian(rng, 5)
    sp = convex_family(L0, L1, nodes=nodes)
    assert abs(sp.weights @ sp.params - 0.5) <= 1e-14
    assert abs(sp.weights @ sp.params**2 - 1 / 3) <= 1e-14
    for t, atom in zip(sp.params, sp.atoms):
        np.testing.assert_array_equal(atom.matrix, (1 - t) * L0 + t * L1)


def test_linear_density_moment():
    rng = np.random.default_rng(9)
    sp = convex_family(random_laplacian(rng, 4), random_laplacian(rng, 4), nodes=8, density=lambda t: 2 * t)
    assert abs(sp.weights @ sp.params - 2 / 3) <= 1e-12


def test_expected_operator_closed_forms():
    rng = np.random.default_rng(11)
    L0, L1 = random_laplacian(rng, 8), random_laplacian(rng, 8)
    sp = convex_family(L0, L1, nodes=4)
    np.testing.assert_allclose(expected_operator(sp, 0), np.eye(8), atol=1e-14)
    np.testing.assert_allclose(expected_operator(sp, 1), (L0 + L1) / 2, atol=1e-12)
    second = (2 * L0 @ L0 + 2 * L1 @ L1 + L0 @ L1 + L1 @ L0) / 6
    np.testing.assert_allclose(expected_operator(sp, 2), second, atol=1e-12)
    first = expected_operator(sp, 1)
    assert np.linalg.norm(second - first @ first) > 1e-3


@given(st.integers(0, 10_000), st.integers(0, 4))
@settings(max_examples=25, deadline=None)
def test_expected_operator_matches_oracle(seed, k):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.1, 1, 3)
    sp = discrete_space([random_symmetric(rng, 5) for _ in range(3)], w / w.sum())
    np.testing.assert_allclose(expected_operator(sp, k), oracle_expected_power(sp, k), atol=1e-10)
