"""Graph construction: lattices, k-NN graphs, correlation graphs, Laplacians."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .opspace import ShiftOperator, make_operator


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph on vertices ``0..n-1``.

    Each edge is stored once as ``(u, v, w)`` with ``u < v`` and ``w > 0``.
    ``lattice`` records ``(rows, cols)`` for graphs built by :func:`grid_2d`.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    lattice: tuple[int, int] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"graph needs at least one vertex, got n={self.n}")
        seen = set()
        norm = []
        for u, v, w in self.edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not w > 0:
                raise ValueError(f"edge ({u}, {v}) has non-positive weight {w}")
            u, v = min(u, v), max(u, v)
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            norm.append((u, v, w))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(u, v) for u, v, _ in self.edges}

    def weight_matrix(self) -> np.ndarray:
        W = np.zeros((self.n, self.n))
        for u, v, w in self.edges:
            W[u, v] = W[v, u] = w
        return W

    def neighbors(self) -> list[list[int]]:
        """Adjacency lists, each sorted ascending."""
        adj = [[] for _ in range(self.n)]
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for a in adj:
            a.sort()
        return adj

    def degrees(self) -> np.ndarray:
        return self.weight_matrix().sum(axis=1)

    def bfs_distances(self, source: int) -> np.ndarray:
        """Hop distances from ``source``; unreachable vertices get -1."""
        adj = self.neighbors()
        dist = np.full(self.n, -1, dtype=int)
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def is_connected(self) -> bool:
        return bool((self.bfs_distances(0) >= 0).all())


def grid_2d(rows: int, cols: int) -> Graph:
    """``rows x cols`` lattice with unit weights; vertex ``r*cols + c``."""
    if rows < 1 or cols < 1:
        raise ValueError(f"lattice dimensions must be positive, got {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, 1.0))
            if r + 1 < rows:
                edges.append((v, v + cols, 1.0))
    return Graph(rows * cols, tuple(edges), lattice=(rows, cols))


def split_axes(g: Graph) -> tuple[Graph, Graph]:
    """Split a lattice into its horizontal-edge and vertical-edge subgraphs."""
    if g.lattice is None:
        raise ValueError("split_axes needs a graph built by grid_2d")
    rows, cols = g.lattice
    if g.edges != grid_2d(rows, cols).edges:
        raise ValueError("graph edges do not match its declared lattice shape")
    horiz = tuple(e for e in g.edges if e[1] - e[0] == 1 and e[0] // cols == e[1] // cols)
    vert = tuple(e for e in g.edges if e[1] - e[0] == cols)
    return Graph(g.n, horiz, lattice=None), Graph(g.n, vert, lattice=None)


def _pairwise_distances(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def knn_graph(points, k: int, weighting: str = "unweighted") -> Graph:
    """Symmetrized k-nearest-neighbour graph under Euclidean distance.

    ``(u, v)`` is an edge when either endpoint is among the other's ``k``
    nearest points. Distance ties go to the lower vertex index.

    Parameters
    ----------
    points : array_like, shape (n, d)
    k : int
        Number of neighbours, ``1 <= k < n``.
    weighting : {"unweighted", "gaussian"}
        ``"gaussian"`` uses ``exp(-d^2 / 2 sigma^2)`` with ``sigma`` the
        median pairwise distance.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n={n}, got k={k}")
    D = _pairwise_distances(pts)
    idx = np.arange(n)
    chosen = set()
    for u in range(n):
        others = idx[idx != u]
        order = np.lexsort((others, D[u, others]))
        for v in others[order[:k]]:
            chosen.add((min(u, int(v)), max(u, int(v))))
    if weighting == "unweighted":
        weight = lambda u, v: 1.0  # noqa: E731
    elif weighting == "gaussian":
        sigma = float(np.median(D[np.triu_indices(n, 1)]))
        if sigma <= 0:
            raise ValueError("median pairwise distance is zero; gaussian weights undefined")
        weight = lambda u, v: float(np.exp(-D[u, v] ** 2 / (2 * sigma**2)))  # noqa: E731
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    # Gaussian weights of coincident points would be exactly 1, still positive.
    return Graph(n, tuple((u, v, weight(u, v)) for u, v in sorted(chosen)))


def correlation_threshold_graph(signals, tau: float, absolute: bool = True) -> Graph:
    """Connect nodes whose signal rows have Pearson correlation at least ``tau``.

    Rows are nodes, columns are samples. With ``absolute`` the magnitude of
    the correlation is thresholded.
    """
    X = np.asarray(signals, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError("signals must be an n x m matrix with m >= 2")
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    centered = X - X.mean(axis=1, keepdims=True)
    norms = np.sqrt((centered**2).sum(axis=1))
    flat = np.flatnonzero(norms <= 1e-12 * max(1.0, float(np.abs(X).max())))
    if flat.size:
        raise ValueError(f"row {int(flat[0])} has zero variance")
    Z = centered / norms[:, None]
    C = np.clip(Z @ Z.T, -1.0, 1.0)
    score = np.abs(C) if absolute else C
    n = X.shape[0]
    edges = [(u, v, 1.0) for u in range(n) for v in range(u + 1, n) if score[u, v] >= tau]
    return Graph(n, tuple(edges))


def scale_free_graph(n: int, m: int, seed: int) -> Graph:
    """Synthetic preferential-attachment graph (stand-in for real social graphs).

    Starts from a star on ``m + 1`` vertices; each new vertex attaches to
    ``m`` distinct existing vertices chosen proportionally to degree.
    """
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    edges = {(0, v) for v in range(1, m + 1)}
    ends = [0] * m + list(range(1, m + 1))
    for v in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(int(ends[rng.integers(len(ends))]))
        for t in sorted(targets):
            edges.add((t, v))
            ends.extend((t, v))
    return Graph(n, tuple((u, v, 1.0) for u, v in sorted(edges)))


def laplacian_matrix(g: Graph) -> np.ndarray:
    W = g.weight_matrix()
    return np.diag(W.sum(axis=1)) - W


def laplacian(g: Graph) -> ShiftOperator:
    """Combinatorial Laplacian ``D - W``."""
    return make_operator(laplacian_matrix(g))


def adjacency_with_loops(g: Graph) -> ShiftOperator:
    """``I + W``: adjacency with a unit self-loop at every vertex."""
    return make_operator(np.eye(g.n) + g.weight_matrix())
