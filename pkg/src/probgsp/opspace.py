"""Shift operators and finite probability spaces of them.

A continuous distribution over a one-parameter family of operators is
represented by its Gauss-Legendre discretization: the atoms are the operators
at the quadrature nodes and the weights are the quadrature weights times the
density, renormalized.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

SYMMETRY_RTOL = 1e-10
REPEATED_RTOL = 1e-8
DEFAULT_NODES = 16


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def canonical_signs(vectors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Flip columns so that the largest-magnitude entry of each is positive.

    Entries within ``tol`` (relative) of the column maximum count as tied;
    the lowest such index decides the sign.
    """
    U = np.array(vectors, dtype=float, copy=True)
    mags = np.abs(U)
    peak = mags.max(axis=0)
    lead = np.argmax(mags >= peak * (1 - tol), axis=0)
    signs = np.sign(U[lead, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def order_by_magnitude(eigenvalues: np.ndarray) -> np.ndarray:
    """Permutation sorting by ``|lambda|``, then signed value, then position."""
    lam = np.asarray(eigenvalues)
    return np.lexsort((np.arange(lam.size), lam, np.abs(lam)))


@dataclass(frozen=True, eq=False)
class ShiftOperator:
    """Symmetric operator with an ordered orthonormal eigenbasis.

    Build with :func:`make_operator`. Column ``i`` of ``eigenvectors`` pairs
    with ``eigenvalues[i]``; eigenvalues increase in absolute value.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def repeated_pairs(self, rtol: float = REPEATED_RTOL) -> list[tuple[int, int]]:
        """Index pairs of eigenvalues closer than ``rtol`` times the spectral scale."""
        lam = self.eigenvalues
        scale = max(float(np.abs(lam).max()), np.finfo(float).tiny)
        order = np.argsort(lam, kind="stable")
        gaps = np.diff(lam[order])
        return [
            (int(min(order[i], order[i + 1])), int(max(order[i], order[i + 1])))
            for i in np.flatnonzero(gaps < rtol * scale)
        ]


def make_operator(matrix) -> ShiftOperator:
    """Eigendecompose a symmetric matrix into a :class:`ShiftOperator`.

    Raises
    ------
    ValueError
        If the matrix is not square or not symmetric to ``1e-10`` relative.
    """
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"shift operator must be square, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise ValueError("shift operator has non-finite entries")
    asym = float(np.abs(M - M.T).max()) if M.size else 0.0
    if asym > SYMMETRY_RTOL * max(1.0, float(np.abs(M).max())):
        raise ValueError(f"matrix is not symmetric: max |M - M^T| = {asym:.3e}")
    M = (M + M.T) / 2
    lam, U = np.linalg.eigh(M)
    order = order_by_magnitude(lam)
    return ShiftOperator(_frozen(M), _frozen(lam[order]), _frozen(canonical_signs(U[:, order])))


def _space_id(matrices: Sequence[np.ndarray], weights: np.ndarray) -> str:
    h = hashlib.sha1()
    for M in matrices:
        h.update(np.ascontiguousarray(M).tobytes())
    h.update(np.ascontiguousarray(weights).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class OperatorSpace:
    """Finite probability space of shift operators.

    ``params`` holds the scalar parameter of each atom when the space
    discretizes a one-parameter family; ``domain`` is the parameter interval.
    """

    atoms: tuple[ShiftOperator, ...]
    weights: np.ndarray
    params: np.ndarray | None = None
    domain: tuple[float, float] | None = None
    space_id: str = ""

    @property
    def n(self) -> int:
        return self.atoms[0].n

    @property
    def size(self) -> int:
        return len(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def eigenvalues(self) -> np.ndarray:
        """``(#atoms, n)`` stacked eigenvalues."""
        return np.stack([a.eigenvalues for a in self.atoms])

    @property
    def eigenvectors(self) -> np.ndarray:
        """``(#atoms, n, n)`` stacked eigenbases."""
        return np.stack([a.eigenvectors for a in self.atoms])

    def with_weights(self, weights) -> OperatorSpace:
        """Same atoms under a different probability vector."""
        return discrete_space(self.atoms, weights, params=self.params, domain=self.domain)

    def check(self, space_id: str, what: str = "coefficients") -> None:
        if space_id != self.space_id:
            raise ValueError(
                f"{what} belong to space {space_id!r}, not to space {self.space_id!r}"
            )


def discrete_space(
    atoms: Sequence[ShiftOperator],
    weights,
    params=None,
    domain: tuple[float, float] | None = None,
) -> OperatorSpace:
    """Probability space on finitely many atoms.

    Weights must be nonnegative and sum to one within ``1e-6``; they are
    renormalized to sum exactly to one.
    """
    atoms = tuple(a if isinstance(a, ShiftOperator) else make_operator(a) for a in atoms)
    if not atoms:
        raise ValueError("an operator space needs at least one atom")
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != len(atoms):
        raise ValueError(f"{len(atoms)} atoms but {w.size} weights")
    n = atoms[0].n
    for j, a in enumerate(atoms):
        if a.n != n:
            raise ValueError(f"atom {j} has dimension {a.n}, expected {n}")
    if not np.isfinite(w).all() or (w < 0).any():
        raise ValueError("weights must be finite and nonnegative")
    total = float(w.sum())
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"weights sum to {total:.12g}, not 1")
    w = w / total
    p = None
    if params is not None:
        p = np.asarray(params, dtype=float).ravel()
        if p.size != len(atoms):
            raise ValueError(f"{len(atoms)} atoms but {p.size} params")
        if (np.diff(p) <= 0).any():
            raise ValueError("params must be strictly increasing")
        p = _frozen(p)
    w = _frozen(w)
    sid = _space_id([a.matrix for a in atoms], w)
    return OperatorSpace(atoms, w, p, domain, sid)


def single_atom_space(operator) -> OperatorSpace:
    """Point mass at one operator: classical graph signal processing."""
    return discrete_space([operator], [1.0])


DENSITIES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "uniform": lambda t: np.ones_like(t),
    "linear": lambda t: 2.0 * t,
    "linear-down": lambda t: 2.0 * (1.0 - t),
}


def gauss_legendre(nodes: int, a: float = 0.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[a, b]`` (weights sum to ``b - a``)."""
    if nodes < 1:
        raise ValueError(f"need at least one quadrature node, got {nodes}")
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = (b - a) / 2
    return a + half * (x + 1), half * w


def convex_family(
    L0,
    L1,
    nodes: int = DEFAULT_NODES,
    density: str | Callable[[np.ndarray], np.ndarray] = "uniform",
) -> OperatorSpace:
    """Discretize ``t -> (1 - t) L0 + t L1`` on ``[0, 1]`` under a density.

    ``density`` is a name from :data:`DENSITIES` or a callable evaluated at
    the quadrature nodes.
    """
    A = np.asarray(getattr(L0, "matrix", L0), dtype=float)
    B = np.asarray(getattr(L1, "matrix", L1), dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"operator shapes differ: {A.shape} vs {B.shape}")
    dens = DENSITIES[density] if isinstance(density, str) else density
    t, w = gauss_legendre(nodes)
    p = np.asarray(dens(t), dtype=float)
    if (p < 0).any() or not np.isfinite(p).all():
        raise ValueError("density must be finite and nonnegative at the quadrature nodes")
    w = w * p
    if w.sum() <= 0:
        raise ValueError("density integrates to zero")
    atoms = [make_operator((1 - tj) * A + tj * B) for tj in t]
    return discrete_space(atoms, w / w.sum(), params=t, domain=(0.0, 1.0))


def parametric_space(
    build: Callable[[float], np.ndarray],
    params: Sequence[float],
    weights=None,
) -> OperatorSpace:
    """Space over a discrete parameter set, e.g. ``k`` in a k-NN family."""
    params = np.asarray(params, dtype=float)
    if weights is None:
        weights = np.full(params.size, 1.0 / params.size)
    atoms = [make_operator(build(p)) for p in params]
    return discrete_space(atoms, weights, params=params)


def expected_operator(space: OperatorSpace, power: int = 1) -> np.ndarray:
    """``sum_j w_j X_j^power`` accumulated in atom order."""
    if power < 0:
        raise ValueError("power must be nonnegative")
    out = np.zeros((space.n, space.n))
    for w, atom in zip(space.weights, space.atoms):
        out += w * np.linalg.matrix_power(atom.matrix, power)
    return out
