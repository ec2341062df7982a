import numpy as np
from hypothesis import given, settings, strategies as st

from probgsp.opspace import discrete_space, make_operator
from probgsp.oracles import oracle_gft, oracle_left_inverse
from probgsp.spectral import (
    FiberField,
    SpectralCoefficients,
    alpha,
    alpha_inverse,
    beta,
    energy_profile,
    fourier,
    inverse_fourier,
    spectral_norm_sq,
)

from conftest import random_space

P2 = [[1.0, -1.0], [-1.0, 1.0]]


def test_p2_transform():
    sp = discrete_space([make_operator(P2)], [1.0])
    np.testing.assert_allclose(fourier(sp, [1.0, 0.0]).values, [[2**-0.5, 2**-0.5]], atol=1e-15)


def test_eigenvector_gives_indicator(rng):
    sp = random_space(rng, 6, 1)
    u = sp.atoms[0].eigenvectors[:, 3]
    np.testing.assert_allclose(fourier(sp, u).values[0], np.eye(6)[3], atol=1e-12)


def test_rows_match_per_atom_oracle(rng):
    sp = random_space(rng, 7, 5)
    f = rng.standard_normal(7)
    g = fourier(sp, f).values
    for j, atom in enumerate(sp.atoms):
        np.testing.assert_allclose(g[j], oracle_gft(atom.eigenvectors, f), atol=1e-12)


def test_inverse_examples(rng):
    sp = random_space(rng, 5, 1)
    zero = SpectralCoefficients(np.zeros((1, 5)), sp.space_id)
    np.testing.assert_array_equal(inverse_fourier(sp, zero), 0)
    g = rng.standard_normal((1, 5))
    np.testing.assert_allclose(
        inverse_fourier(sp, SpectralCoefficients(g, sp.space_id)), sp.atoms[0].eigenvectors @ g[0], atol=1e-12
    )


def test_alpha_beta(rng):
    sp = random_space(rng, 6, 3)
    f = rng.standard_normal(6)
    q = alpha(sp, fourier(sp, f))
    np.testing.assert_allclose(q.values, np.tile(f, (3, 1)), atol=1e-12)
    g = rng.standard_normal((3, 6))
    q = alpha(sp, SpectralCoefficients(g, sp.space_id))
    for j, atom in enumerate(sp.atoms):
        np.testing.assert_allclose(q.values[j], atom.eigenvectors @ g[j], atol=1e-12)
    np.testing.assert_allclose(alpha_inverse(sp, q).values, g, atol=1e-10)


def test_beta_weighted_rows():
    op = make_operator(P2)
    sp = discrete_space([op, op], [0.25, 0.75])
    r1, r2 = np.array([1.0, 2.0]), np.array([-3.0, 5.0])
    np.testing.assert_allclose(beta(sp, FiberField(np.vstack([r1, r2]))), 0.25 * r1 + 0.75 * r2)
    np.testing.assert_allclose(beta(sp, FiberField(np.vstack([r1, r1]))), r1)


@given(st.integers(0, 10_000), st.integers(1, 12), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_left_inverse_and_parseval(seed, n, m):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, n, m)
    f = rng.standard_normal(n)
    g = fourier(sp, f)
    back = inverse_fourier(sp, g)
    ref_back, ref_energy = oracle_left_inverse(sp, f)
    np.testing.assert_allclose(back, f, atol=1e-10 * np.linalg.norm(f))
    np.testing.assert_allclose(back, ref_back, atol=1e-10)
    assert abs(spectral_norm_sq(sp, g) - f @ f) <= 1e-10 * (f @ f)
    assert abs(ref_energy - f @ f) <= 1e-10 * (f @ f)


def test_energy_profile_rows_sum_to_norm(rng):
    sp = random_space(rng, 8, 4)
    f = rng.standard_normal(8)
    np.testing.assert_allclose(energy_profile(sp, f).sum(axis=1), f @ f, rtol=1e-12)
