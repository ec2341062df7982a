"""Brute-force reference implementations for testing.

Each routine recomputes a library result along a different path: explicit
outer-product sums instead of batched spectral multipliers, Vandermonde
solves instead of barycentric interpolation, exhaustive enumeration instead
of sorting, and dense matrix powers instead of tree depths. They are slow
and meant for small sizes only (``n <= 64``, ``#atoms <= 32``).
"""

from __future__ import annotations

import itertools

import numpy as np


def oracle_gft(U, f) -> np.ndarray:
    """``<u_i, f>`` by an explicit double loop."""
    U = np.asarray(U, dtype=float)
    n = U.shape[0]
    out = np.zeros(n)
    for i in range(n):
        s = 0.0
        for v in range(n):
            s += U[v, i] * f[v]
        out[i] = s
    return out


def oracle_filter_matrix(space, kernel) -> np.ndarray:
    """``sum_j w_j sum_i Gamma_ji u_ji u_ji^T`` assembled from outer products."""
    gains = np.asarray(kernel.values, dtype=float)
    n = space.n
    out = np.zeros((n, n))
    for j, (w, atom) in enumerate(zip(space.weights, space.atoms)):
        U = np.asarray(atom.eigenvectors)
        for i in range(n):
            u = U[:, i]
            out += (w * gains[j, i]) * np.outer(u, u)
    return out


def oracle_convolve(space, kernel, f) -> np.ndarray:
    """Expectation-form convolution applied to ``f``."""
    return oracle_filter_matrix(space, kernel) @ np.asarray(f, dtype=float)


def oracle_left_inverse(space, f) -> tuple[np.ndarray, float]:
    """Round trip through per-atom transforms, plus the transform's squared norm."""
    f = np.asarray(f, dtype=float)
    back = np.zeros_like(f)
    energy = 0.0
    for w, atom in zip(space.weights, space.atoms):
        U = np.asarray(atom.eigenvectors)
        c = oracle_gft(U, f)
        energy += w * float(c @ c)
        back += w * sum(c[i] * U[:, i] for i in range(U.shape[1]))
    return back, energy


def oracle_expected_power(space, power: int) -> np.ndarray:
    """``E[X^k]`` by repeated multiplication of each atom's matrix."""
    n = space.n
    out = np.zeros((n, n))
    for w, atom in zip(space.weights, space.atoms):
        M = np.eye(n)
        for _ in range(power):
            M = M @ atom.matrix
        out += w * M
    return out


def oracle_interpolation(nodes, values) -> np.ndarray:
    """Monomial coefficients from a Vandermonde solve."""
    x = np.asarray(nodes, dtype=float)
    V = np.vander(x, increasing=True)
    return np.linalg.solve(V, np.asarray(values, dtype=float))


def oracle_knn_edges(points, k: int) -> set[tuple[int, int]]:
    """Union of each point's ``k`` nearest others, found by scanning all distances.

    Ties are broken toward lower indices.
    """
    P = np.asarray(points, dtype=float)
    n = P.shape[0]
    edges = set()
    for u in range(n):
        cand = []
        for v in range(n):
            if v != u:
                cand.append((float(np.sum((P[u] - P[v]) ** 2)), v))
        chosen = []
        for _ in range(k):
            best = min(c for c in cand if c[1] not in chosen)
            chosen.append(best[1])
        for v in chosen:
            edges.add((min(u, v), max(u, v)))
    return edges


def oracle_correlation_edges(signals, tau: float, absolute: bool = True) -> set[tuple[int, int]]:
    """Pairs whose Pearson correlation (computed pair by pair) is at least ``tau``."""
    X = np.asarray(signals, dtype=float)
    edges = set()
    for u, v in itertools.combinations(range(X.shape[0]), 2):
        a = X[u] - X[u].mean()
        b = X[v] - X[v].mean()
        r = float(a @ b) / np.sqrt(float(a @ a) * float(b @ b))
        if (abs(r) if absolute else r) >= tau:
            edges.add((u, v))
    return edges


def oracle_snapshot(tree, steps: int) -> np.ndarray:
    """Infected indicator from the dense matrix power ``(I + W_T)^i delta_s``."""
    n = tree.n
    A = np.eye(n)
    for v, p in enumerate(tree.parent):
        if v != tree.source:
            A[v, p] = A[p, v] = 1.0
    delta = np.zeros(n)
    delta[tree.source] = 1.0
    x = np.linalg.matrix_power(A, steps) @ delta
    return (x != 0).astype(float)


def oracle_infection_loss(tree, f) -> float:
    """Minimum over every step up to the tree height of the snapshot mismatch."""
    f = np.asarray(f, dtype=float)
    best = np.inf
    for i in range(tree.n):
        snap = oracle_snapshot(tree, i)
        best = min(best, float(np.linalg.norm(snap - f)))
        if snap.all():
            break
    return best


def oracle_pullback_conv(target_of, z_weights, z_vectors, x_gains, f) -> np.ndarray:
    """Pulled-back kernel convolution on Z as an explicit double sum over atoms and frequencies."""
    f = np.asarray(f, dtype=float)
    out = np.zeros_like(f)
    for z, w in enumerate(z_weights):
        U = np.asarray(z_vectors[z])
        for i in range(U.shape[1]):
            out += w * x_gains[target_of[z]][i] * float(U[:, i] @ f) * U[:, i]
    return out


def oracle_pushforward_conv(target_of, z_weights, x_vectors, x_gains, f) -> np.ndarray:
    """Image-basis convolution averaged under Z's weights, as an explicit double sum."""
    f = np.asarray(f, dtype=float)
    out = np.zeros_like(f)
    for z, w in enumerate(z_weights):
        k = target_of[z]
        U = np.asarray(x_vectors[k])
        for i in range(U.shape[1]):
            out += w * x_gains[k][i] * float(U[:, i] @ f) * U[:, i]
    return out


def oracle_gibbs(risks, gamma: float, prior=None) -> np.ndarray:
    """Gibbs weights computed in extended precision by direct exponentiation."""
    r = np.asarray(risks, dtype=np.longdouble)
    p = np.ones_like(r) if prior is None else np.asarray(prior, dtype=np.longdouble)
    shift = r.min()
    w = p * np.exp(-np.longdouble(gamma) * (r - shift))
    return np.asarray(w / w.sum(), dtype=float)


def oracle_bfs_distances(n: int, edges, source: int) -> np.ndarray:
    """Hop distances via repeated relaxation (Bellman-Ford with unit weights)."""
    d = np.full(n, np.inf)
    d[source] = 0
    for _ in range(n):
        changed = False
        for u, v, *_ in edges:
            if d[u] + 1 < d[v]:
                d[v] = d[u] + 1
                changed = True
            if d[v] + 1 < d[u]:
                d[u] = d[v] + 1
                changed = True
        if not changed:
            break
    return d
