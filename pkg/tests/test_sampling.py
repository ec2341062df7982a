import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from probgsp.errors import NumericalError
from probgsp.opspace import discrete_space
from probgsp.sampling import (
    band_from_mask,
    bandlimit_residual,
    bandpass_matrix,
    bandpass_spectrum,
    coefficient_bound_check,
    lowpass_band,
    plan_recovery,
    recover,
)

from conftest import random_space, random_symmetric


def test_bandpass_extremes(rng):
    sp = random_space(rng, 6, 3)
    np.testing.assert_allclose(bandpass_matrix(sp, lowpass_band(sp, 6)), np.eye(6), atol=1e-12)
    np.testing.assert_array_equal(bandpass_matrix(sp, lowpass_band(sp, 0)), 0)
    f = rng.standard_normal(6)
    assert bandlimit_residual(sp, lowpass_band(sp, 6), f) <= 1e-12
    assert bandlimit_residual(sp, lowpass_band(sp, 2), np.zeros(6)) == 0
    vals, _ = bandpass_spectrum(sp, lowpass_band(sp, 6))
    np.testing.assert_allclose(vals, 1.0, atol=1e-12)


def test_single_atom_projection(rng):
    sp = random_space(rng, 7, 1)
    B = bandpass_matrix(sp, lowpass_band(sp, 3))
    np.testing.assert_allclose(B @ B, B, atol=1e-10)
    assert np.linalg.matrix_rank(B, tol=1e-8) == 3
    vals, _ = bandpass_spectrum(sp, lowpass_band(sp, 3))
    assert np.all(np.minimum(np.abs(vals), np.abs(vals - 1)) < 1e-10)


def test_multi_atom_interior_eigenvalues():
    rng = np.random.default_rng(8)
    sp = random_space(rng, 8, 2)
    vals, _ = bandpass_spectrum(sp, lowpass_band(sp, 4))
    assert np.any((vals > 0.01) & (vals < 0.99))
    B = bandpass_matrix(sp, lowpass_band(sp, 4))
    assert np.linalg.norm(B @ B - B) > 1e-3


@given(st.integers(0, 10_000), st.integers(2, 10), st.integers(1, 5))
@settings(max_examples=40, deadline=None)
def test_spectrum_in_unit_interval(seed, n, m):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, n, m)
    y = band_from_mask(sp, rng.uniform(size=(m, n)) < 0.5)
    raw = np.linalg.eigvalsh(bandpass_matrix(sp, y))
    assert raw.min() >= -1e-10 and raw.max() <= 1 + 1e-10
    f = rng.standard_normal(n)
    assert coefficient_bound_check(sp, y, f, bandlimit_residual(sp, y, f))


def test_coefficient_bound_tight_on_bottom_vector():
    rng = np.random.default_rng(12)
    sp = random_space(rng, 8, 3)
    y = lowpass_band(sp, 4)
    vals, vecs = bandpass_spectrum(sp, y)
    u1, un = vecs[:, 0], vecs[:, -1]
    eps = bandlimit_residual(sp, y, u1)
    assert abs(eps - (1 - vals[0])) <= 1e-10
    assert abs(1.0 - eps**2 / (1 - vals[0]) ** 2) <= 1e-9
    assert coefficient_bound_check(sp, y, u1, eps)
    assert coefficient_bound_check(sp, y, un, bandlimit_residual(sp, y, un))


def test_classical_recovery_exact():
    rng = np.random.default_rng(13)
    sp = discrete_space([random_symmetric(rng, 10)], [1.0])
    y = lowpass_band(sp, 6)
    plan = plan_recovery(sp, y, 4, rng=0)
    f = plan.U_gt @ rng.standard_normal(6)
    f_rec, a, b = recover(plan, f[plan.vertices], eps=0.0)
    assert np.linalg.norm(f_rec - f) <= 1e-9
    assert a == 0 and b == 0


def test_full_set_plan(rng):
    sp = random_space(rng, 6, 2)
    plan = plan_recovery(sp, lowpass_band(sp, 3), 0)
    np.testing.assert_array_equal(plan.vertices, np.arange(6))
    np.testing.assert_allclose(plan.G.T @ plan.G, np.eye(6), atol=1e-10)
    assert abs(plan.sigma - 1) <= 1e-10


def test_plan_rows_match_indexing():
    rng = np.random.default_rng(10)
    sp = random_space(rng, 10, 3)
    y = lowpass_band(sp, 5)
    plan = plan_recovery(sp, y, 3, rng=1)
    _, vecs = bandpass_spectrum(sp, y)
    ref = np.array([[vecs[v, i] for i in range(3, 10)] for v in plan.vertices])
    np.testing.assert_allclose(plan.G, ref, atol=1e-12)
    with pytest.raises(ValueError):
        plan_recovery(sp, y, 3, vertices=[0, 1])


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_recovery_bounds_hold(seed):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, 9, 3)
    y = lowpass_band(sp, 5)
    try:
        plan = plan_recovery(sp, y, 3, rng=rng)
    except NumericalError:
        return
    f = plan.U_gt @ rng.standard_normal(6) + 0.05 * rng.standard_normal(9)
    f_rec, a, b = recover(plan, f[plan.vertices], f_true=f)
    assert np.linalg.norm(f_rec - f) <= a * (1 + 1e-9) + 1e-12
    assert bandlimit_residual(sp, y, f_rec) <= b * (1 + 1e-9) + 1e-12


def test_bottom_vector_bound_finite():
    rng = np.random.default_rng(17)
    sp = random_space(rng, 8, 2)
    y = lowpass_band(sp, 4)
    plan = plan_recovery(sp, y, 2, rng=3)
    _, vecs = bandpass_spectrum(sp, y)
    f = 3.0 * vecs[:, 0]
    f_rec, a, _ = recover(plan, f[plan.vertices], f_true=f)
    assert np.isfinite(a) and np.linalg.norm(f_rec - f) <= a


def test_degenerate_lambda_rejected():
    rng = np.random.default_rng(1)
    sp = random_space(rng, 5, 2)
    plan = plan_recovery(sp, lowpass_band(sp, 5), 2, rng=0)
    with pytest.raises(NumericalError):
        recover(plan, np.zeros(3), eps=0.0)
