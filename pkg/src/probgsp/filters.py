"""Convolution filters over an operator space.

A kernel assigns a gain to every (atom, frequency) pair. The filter it
induces is the expectation, under the space's weights, of the classical
per-atom spectral multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from numpy.polynomial import legendre as L
from numpy.polynomial import polynomial as P

from .opspace import OperatorSpace, ShiftOperator
from .spectral import SpectralCoefficients, fourier, inverse_fourier


@dataclass(frozen=True, eq=False)
class SpectralKernel:
    """``values[j, i]`` is the gain on eigenvector ``i`` of atom ``j``."""

    values: np.ndarray
    space_id: str


def _kernel(space: OperatorSpace, kernel: SpectralKernel) -> np.ndarray:
    space.check(kernel.space_id, "kernel")
    values = np.asarray(kernel.values, dtype=float)
    if values.shape != (space.size, space.n):
        raise ValueError(f"kernel has shape {values.shape}, expected ({space.size}, {space.n})")
    if not np.isfinite(values).all():
        raise ValueError("kernel has non-finite entries")
    return values


def kernel_from_values(space: OperatorSpace, values) -> SpectralKernel:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = np.broadcast_to(values, (space.size, space.n)).copy()
    return SpectralKernel(values, space.space_id)


def constant_kernel(space: OperatorSpace, c: float = 1.0) -> SpectralKernel:
    return SpectralKernel(np.full((space.size, space.n), float(c)), space.space_id)


def eigenvalue_kernel(space: OperatorSpace, power: int = 1) -> SpectralKernel:
    """``Lambda^k``: the kernel whose filter is ``E[X^k]``."""
    return SpectralKernel(space.eigenvalues**power, space.space_id)


def response_kernel(space: OperatorSpace, response: Callable[[np.ndarray], np.ndarray]) -> SpectralKernel:
    """Kernel ``Gamma(j, i) = response(lambda_{j,i})``."""
    return SpectralKernel(np.asarray(response(space.eigenvalues), dtype=float), space.space_id)


def frequency_mask(
    space: OperatorSpace,
    r1: float,
    r2: float,
    c: int,
    overrides: Mapping[int, tuple[float, float, int]] | None = None,
) -> SpectralKernel:
    """Two-level mask: gain ``r1`` on the lowest ``c`` frequencies, ``r2`` above.

    ``overrides`` maps an atom index to its own ``(r1, r2, c)`` triple.
    """
    values = np.empty((space.size, space.n))
    per_atom = dict(overrides or {})
    for j in range(space.size):
        a, b, cut = per_atom.get(j, (r1, r2, c))
        if not 1 <= cut <= space.n:
            raise ValueError(f"cutoff must lie in [1, {space.n}], got {cut}")
        if a < 0 or b < 0:
            raise ValueError("mask gains must be nonnegative")
        values[j, :cut] = a
        values[j, cut:] = b
    return SpectralKernel(values, space.space_id)


def convolve(space: OperatorSpace, kernel: SpectralKernel, f) -> np.ndarray:
    """Apply the convolution filter: inverse transform of ``kernel * fourier(f)``."""
    gains = _kernel(space, kernel)
    fhat = fourier(space, f)
    return inverse_fourier(space, SpectralCoefficients(gains * fhat.values, space.space_id))


def fiber_matrices(space: OperatorSpace, kernel: SpectralKernel) -> np.ndarray:
    """``(#atoms, n, n)`` per-atom classical filters ``U_j diag(Gamma_j) U_j^T``."""
    gains = _kernel(space, kernel)
    U = space.eigenvectors
    return np.einsum("jvi,ji,jwi->jvw", U, gains, U)


def filter_matrix(space: OperatorSpace, kernel: SpectralKernel) -> np.ndarray:
    """Dense matrix of the convolution filter."""
    gains = _kernel(space, kernel)
    out = np.zeros((space.n, space.n))
    for w, atom, g in zip(space.weights, space.atoms, gains):
        U = atom.eigenvectors
        out += w * ((U * g) @ U.T)
    return out


def signal_kernel(space: OperatorSpace, g) -> SpectralKernel:
    """Kernel given by the transform of a signal ``g``."""
    return SpectralKernel(fourier(space, g).values, space.space_id)


# -- polynomial representation ---------------------------------------------


@dataclass(frozen=True, eq=False)
class PolynomialFilterRep:
    """``coeffs[j, i]`` multiplies ``X_j^i`` in the per-atom polynomial."""

    coeffs: np.ndarray
    space_id: str


def _check_distinct(j: int, atom: ShiftOperator) -> None:
    pairs = atom.repeated_pairs()
    if pairs:
        a, b = pairs[0]
        raise ValueError(
            f"atom {j} has repeated eigenvalues {atom.eigenvalues[a]:.12g} "
            f"(index {a}) and {atom.eigenvalues[b]:.12g} (index {b})"
        )


def interpolating_coefficients(nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Monomial coefficients (ascending) of the Lagrange interpolant.

    Built from the barycentric weights: each basis polynomial is the node
    polynomial deflated by one root, scaled by its barycentric weight.
    """
    x = np.asarray(nodes, dtype=float)
    y = np.asarray(values, dtype=float)
    m = x.size
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / diff.prod(axis=1)
    full = P.polyfromroots(x)
    coeffs = np.zeros(m)
    for i in range(m):
        quotient, _ = P.polydiv(full, np.array([-x[i], 1.0]))
        coeffs += (y[i] * bary[i]) * quotient[:m]
    return coeffs


def polynomial_rep(space: OperatorSpace, kernel: SpectralKernel) -> PolynomialFilterRep:
    """Express each fiber filter as a polynomial of degree ``<= n-1`` in its atom.

    Raises
    ------
    ValueError
        If any atom has repeated eigenvalues (relative gap below ``1e-8``).
    """
    gains = _kernel(space, kernel)
    coeffs = np.empty((space.size, space.n))
    for j, atom in enumerate(space.atoms):
        _check_distinct(j, atom)
        coeffs[j] = interpolating_coefficients(atom.eigenvalues, gains[j])
    return PolynomialFilterRep(coeffs, space.space_id)


def matrix_polynomial(X: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """``sum_i coeffs[i] X^i`` by Horner's rule."""
    n = X.shape[0]
    out = coeffs[-1] * np.eye(n)
    for a in coeffs[-2::-1]:
        out = out @ X + a * np.eye(n)
    return out


def polynomial_filter_matrix(space: OperatorSpace, rep: PolynomialFilterRep) -> np.ndarray:
    """``E[R(X)]``: weighted sum of the per-atom matrix polynomials."""
    space.check(rep.space_id, "polynomial representation")
    out = np.zeros((space.n, space.n))
    for w, atom, a in zip(space.weights, space.atoms, rep.coeffs):
        out += w * matrix_polynomial(atom.matrix, a)
    return out


# -- bi-polynomial fitting --------------------------------------------------


@dataclass(frozen=True, eq=False)
class BiPolynomialRep:
    """Fiber filter ``sum_q a_q(t) X_t^q`` with each ``a_q`` a polynomial in ``t``.

    ``coeff_polys[q]`` is a callable numpy polynomial giving ``a_q``.
    """

    coeff_polys: tuple
    bi_degree: tuple[int, int]
    fit_residual: float

    def coefficients(self, t) -> np.ndarray:
        """``a_q(t)`` for ``q = 0..k``; shape ``(k+1,)`` or ``(k+1, len(t))``."""
        return np.array([p(t) for p in self.coeff_polys])

    def fiber_matrix(self, X, t: float) -> np.ndarray:
        X = np.asarray(getattr(X, "matrix", X), dtype=float)
        return matrix_polynomial(X, self.coefficients(t))


def fit_bipolynomial(space: OperatorSpace, kernel: SpectralKernel, d: int, k: int) -> BiPolynomialRep:
    """Least-squares bi-polynomial filter of bi-degree ``(d, k)``.

    All ``(d+1)(k+1)`` coefficients are fitted jointly, weighting node ``t_j``
    by its probability. Because fiber filters and their polynomial fits share
    the atom's eigenbasis, the Frobenius misfit at a node equals the
    Euclidean misfit of the spectral responses, which is what is minimized.
    The model spaces are nested in ``d``, so the residual cannot increase
    with ``d``.

    Raises
    ------
    ValueError
        Without params, with ``k > n - 1``, or when the design is rank
        deficient (too few distinct nodes for ``d``).
    """
    gains = _kernel(space, kernel)
    if space.params is None:
        raise ValueError("bi-polynomial fitting needs a parametrized space")
    if not 0 <= k <= space.n - 1:
        raise ValueError(f"k must lie in [0, {space.n - 1}], got {k}")
    if d < 0:
        raise ValueError(f"d must be nonnegative, got {d}")
    for j, atom in enumerate(space.atoms):
        _check_distinct(j, atom)
    t = space.params
    lo, hi = space.domain if space.domain is not None else (float(t[0]), float(t[-1]))
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    x = (2 * t - (lo + hi)) / (hi - lo)
    lam = space.eigenvalues
    scale = max(float(np.abs(lam).max()), 1e-300)
    tb = L.legvander(x, d)  # (nodes, d+1)
    lb = (lam / scale)[..., None] ** np.arange(k + 1)  # (nodes, n, k+1)
    design = np.einsum("jp,jiq->jiqp", tb, lb).reshape(space.size * space.n, (k + 1) * (d + 1))
    rw = np.repeat(np.sqrt(space.weights), space.n)
    A = design * rw[:, None]
    b = gains.ravel() * rw
    rank = np.linalg.matrix_rank(A)
    if rank < A.shape[1]:
        raise ValueError(
            f"bi-degree ({d}, {k}) fit is rank deficient (rank {rank} < {A.shape[1]}); try a lower d"
        )
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    C = sol.reshape(k + 1, d + 1) / scale ** np.arange(k + 1)[:, None]
    polys = tuple(L.Legendre(C[q], domain=[lo, hi]) for q in range(k + 1))
    fitted = (design @ sol).reshape(space.size, space.n)
    resid = float(np.sqrt(np.dot(space.weights, ((fitted - gains) ** 2).sum(axis=1))))
    return BiPolynomialRep(polys, (d, k), resid)
