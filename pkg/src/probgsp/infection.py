"""Infection spreading on graphs and source localization with base change.

A propagation tree is a spanning tree rooted at the source; after ``i``
applications of ``I + W_T`` the infected set is the tree ball of radius
``i``. Training trees come from the unconstrained model; :func:`rewire_tree`
maps each onto a tree containing every fast edge, and the source posterior
uses the pushed-forward empirical measure.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graphs import Graph, grid_2d, scale_free_graph

log = logging.getLogger(__name__)

Edge = tuple[int, int]


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class PropagationTree:
    """Spanning tree of ``graph`` rooted at ``source``; ``parent[source] == source``."""

    source: int
    parent: np.ndarray
    graph: Graph = field(repr=False)

    @property
    def n(self) -> int:
        return self.parent.size

    def edges(self) -> set[Edge]:
        return {_edge(v, int(p)) for v, p in enumerate(self.parent) if v != self.source}

    def depths(self) -> np.ndarray:
        """Tree distance of every vertex from the source."""
        children = [[] for _ in range(self.n)]
        for v, p in enumerate(self.parent):
            if v != self.source:
                children[int(p)].append(v)
        depth = np.full(self.n, -1, dtype=int)
        depth[self.source] = 0
        queue = deque([self.source])
        while queue:
            u = queue.popleft()
            for v in children[u]:
                depth[v] = depth[u] + 1
                queue.append(v)
        if (depth < 0).any():
            raise ValueError("parent array does not describe a tree rooted at the source")
        return depth

    @property
    def height(self) -> int:
        return int(self.depths().max())

    def adjacency_with_loops(self) -> np.ndarray:
        A = np.eye(self.n)
        for u, v in self.edges():
            A[u, v] = A[v, u] = 1.0
        return A


def is_spanning_tree(g: Graph, edges: set[Edge]) -> bool:
    """``edges`` is a subset of ``g`` forming a connected acyclic spanning subgraph."""
    if len(edges) != g.n - 1 or not edges <= g.edge_set():
        return False
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def is_acyclic(edges: Sequence[Edge], n: int) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def random_bfs_tree(g: Graph, source: int, rng: np.random.Generator, adj=None, dist=None) -> PropagationTree:
    """BFS tree with each vertex's parent drawn uniformly from its neighbours one layer closer.

    Independent uniform parent choices give the uniform distribution over
    all BFS trees rooted at ``source``.
    """
    adj = g.neighbors() if adj is None else adj
    dist = g.bfs_distances(source) if dist is None else dist
    if (dist < 0).any():
        raise ValueError("graph is disconnected; no spanning BFS tree exists")
    parent = np.empty(g.n, dtype=int)
    parent[source] = source
    for v in range(g.n):
        if v == source:
            continue
        closer = [u for u in adj[v] if dist[u] == dist[v] - 1]
        parent[v] = closer[int(rng.integers(len(closer)))]
    return PropagationTree(int(source), parent, g)


def snapshot(tree: PropagationTree, steps: int) -> np.ndarray:
    """0/1 infection indicator after ``steps`` shifts: the tree ball of that radius."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    return (tree.depths() <= steps).astype(float)


def _ball_losses(depths: np.ndarray, f: np.ndarray, radius_max: int) -> np.ndarray:
    """Euclidean distance between ``f`` and each tree ball, radii ``0..radius_max``.

    ``depths`` is ``(trees, n)``; returns ``(trees, radius_max + 1)``.
    """
    depths = np.atleast_2d(depths)
    m = depths.shape[0]
    width = radius_max + 1
    idx = (np.arange(m)[:, None] * width + np.minimum(depths, radius_max)).ravel()
    counts = np.bincount(idx, minlength=m * width).reshape(m, width)
    hits = np.bincount(idx, weights=np.tile(f, m), minlength=m * width).reshape(m, width)
    ball = np.cumsum(counts, axis=1)
    inside = np.cumsum(hits, axis=1)
    symdiff = ball + f.sum() - 2 * inside
    return np.sqrt(np.maximum(symdiff, 0.0))


def infection_loss(tree: PropagationTree, f) -> float:
    """Distance from ``f`` to the closest snapshot of ``tree``."""
    f = np.asarray(f, dtype=float)
    depths = tree.depths()
    return float(_ball_losses(depths, f, int(depths.max())).min())


def _path_edges(parent: np.ndarray, v: int, w: int) -> tuple[list[Edge], list[Edge]]:
    """Tree path between ``v`` and ``w`` as ``(v-side edges, w-side edges)``.

    Edges on each side are listed from the endpoint up to the meeting vertex.
    """
    ancestors = {}
    x, k = v, 0
    while True:
        ancestors[x] = k
        p = int(parent[x])
        if p == x:
            break
        x, k = p, k + 1
    w_side = []
    y = w
    while y not in ancestors:
        p = int(parent[y])
        w_side.append((y, p))
        y = p
    v_side = []
    x = v
    while x != y:
        p = int(parent[x])
        v_side.append((x, p))
        x = p
    return v_side, w_side


def rewire_tree(
    g: Graph,
    tree: PropagationTree,
    fast_edges: Sequence[Edge],
    source_dist: np.ndarray | None = None,
) -> PropagationTree:
    """Insert every fast edge into ``tree``, each time cutting the median path edge.

    Fast edges are handled in order of their distance to the source (the
    smaller hop distance in ``g`` of the two endpoints). A fast edge already
    in the tree is skipped. Otherwise the tree path joining its endpoints is
    found, and among the path edges that are not fast the one at median
    distance to the source (lower median; ties by edge) is removed.

    Raises
    ------
    ValueError
        If the fast edges contain a cycle or are not edges of ``g``.
    """
    s = tree.source
    fast = sorted({_edge(int(u), int(v)) for u, v in fast_edges})
    if not set(fast) <= g.edge_set():
        raise ValueError("fast edges must be edges of the graph")
    if not is_acyclic(fast, g.n):
        raise ValueError("fast edges contain a cycle")
    dist = g.bfs_distances(s) if source_dist is None else source_dist

    def edge_dist(e: Edge) -> int:
        return int(min(dist[e[0]], dist[e[1]]))

    fast_set = set(fast)
    parent = tree.parent.copy()
    for v, w in sorted(fast, key=lambda e: (edge_dist(e), e)):
        if parent[v] == w or parent[w] == v:
            continue
        v_side, w_side = _path_edges(parent, v, w)
        candidates = [(edge_dist(_edge(a, b)), _edge(a, b), a, b, side)
                      for side, edges in (("v", v_side), ("w", w_side))
                      for a, b in edges if _edge(a, b) not in fast_set]
        if not candidates:
            raise AssertionError("tree path between fast-edge endpoints is entirely fast")
        candidates.sort(key=lambda c: (c[0], c[1]))
        _, _, child, _, side = candidates[(len(candidates) - 1) // 2]
        # Detaching child's subtree leaves the endpoint on that side inside it;
        # re-root the subtree at that endpoint and hang it on the other one.
        inner, outer = (v, w) if side == "v" else (w, v)
        prev, cur = outer, inner
        while True:
            nxt = int(parent[cur])
            parent[cur] = prev
            if cur == child:
                break
            prev, cur = cur, nxt
    return PropagationTree(s, parent, g)


# -- source scoring ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TreeAtoms:
    """Finite set of rooted trees with probabilities, stored by depth arrays."""

    sources: np.ndarray
    depths: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_trees(cls, trees: Sequence[PropagationTree], weights=None) -> TreeAtoms:
        if not trees:
            raise ValueError("need at least one tree")
        w = np.full(len(trees), 1.0 / len(trees)) if weights is None else np.asarray(weights, dtype=float)
        return cls(
            np.array([t.source for t in trees], dtype=int),
            np.stack([t.depths() for t in trees]),
            w / w.sum(),
        )

    def losses(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        return _ball_losses(self.depths, f, int(self.depths.max())).min(axis=1)


def score_sources(atoms: TreeAtoms, candidates: Sequence[int], f, gamma: float) -> np.ndarray:
    """Posterior probability of each candidate source, trees marginalized out."""
    candidates = np.asarray(candidates, dtype=int)
    if candidates.size == 0:
        raise ValueError("empty candidate set")
    loss = atoms.losses(f)
    with np.errstate(divide="ignore"):
        logw = np.where(atoms.weights > 0, -gamma * loss + np.log(atoms.weights), -np.inf)
    member = np.isin(atoms.sources, candidates)
    logw = np.where(member, logw, -np.inf)
    top = logw.max()
    if not np.isfinite(top):
        raise ValueError("no training tree is rooted at a candidate source")
    post = np.exp(logw - top)
    pos = {int(c): i for i, c in enumerate(candidates)}
    scores = np.zeros(candidates.size)
    for s, p in zip(atoms.sources, post):
        if int(s) in pos:
            scores[pos[int(s)]] += p
    return scores / scores.sum()


def source_score(
    g: Graph,
    candidates: Sequence[int],
    fast_edges: Sequence[Edge],
    training: Sequence[PropagationTree],
    f,
    gamma: float,
    weights=None,
    base_change: bool = True,
) -> np.ndarray:
    """Score candidate sources of snapshot ``f``.

    With ``base_change`` every training tree is rewired to contain the fast
    edges, carrying its empirical mass along; otherwise the raw training
    trees are used.
    """
    if base_change and len(fast_edges):
        dists: dict[int, np.ndarray] = {}
        mapped = []
        for t in training:
            if t.source not in dists:
                dists[t.source] = g.bfs_distances(t.source)
            mapped.append(rewire_tree(g, t, fast_edges, dists[t.source]))
        training = mapped
    return score_sources(TreeAtoms.from_trees(list(training), weights), candidates, f, gamma)


# -- experiment -------------------------------------------------------------


@dataclass(frozen=True)
class InfectionConfig:
    """Parameters of the source-localization experiment.

    ``graph`` is ``"lattice"`` (``rows x cols``) or ``"scale_free"``
    (``nodes`` vertices, ``attach`` edges per new vertex). For each fraction
    in ``fractions`` that many randomly ordered graph edges are offered as
    fast edges, keeping those that do not close a cycle. Trials are split
    into ``fast_draws`` blocks; each block redraws the fast edges, the
    candidate sources and the training trees.
    """

    graph: str = "lattice"
    rows: int = 15
    cols: int = 15
    nodes: int = 300
    attach: int = 2
    fractions: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)
    candidate_fraction: float = 0.2
    infected_fraction: float = 0.4
    trials: int = 200
    fast_draws: int = 10
    trees_per_candidate: int = 5
    gamma: float = 10.0
    bootstrap: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.graph not in ("lattice", "scale_free"):
            raise ValueError(f"unknown graph kind {self.graph!r}")
        if not all(0 <= f <= 1 for f in self.fractions):
            raise ValueError("fractions must lie in [0, 1]")
        if not 0 < self.candidate_fraction <= 1 or not 0 < self.infected_fraction <= 1:
            raise ValueError("candidate_fraction and infected_fraction must lie in (0, 1]")
        if min(self.trials, self.fast_draws, self.trees_per_candidate) < 1:
            raise ValueError("trials, fast_draws and trees_per_candidate must be positive")
        if self.trials % self.fast_draws:
            raise ValueError("trials must be a multiple of fast_draws")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")

    def build_graph(self) -> Graph:
        if self.graph == "lattice":
            return grid_2d(self.rows, self.cols)
        return scale_free_graph(self.nodes, self.attach, self.seed)


def draw_fast_edges(g: Graph, fraction: float, rng: np.random.Generator) -> list[Edge]:
    """Acyclic subset of a random ``fraction`` of the edges, kept in draw order."""
    edges = sorted(g.edge_set())
    order = rng.permutation(len(edges))[: int(round(fraction * len(edges)))]
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    kept = []
    for i in order:
        u, v = edges[i]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            kept.append((u, v))
    return kept


def observation_step(tree: PropagationTree, infected_fraction: float) -> int:
    """Snapshot step whose infected fraction is closest to the target (earliest on ties)."""
    depths = tree.depths()
    frac = np.cumsum(np.bincount(depths)) / tree.n
    return int(np.argmin(np.abs(frac - infected_fraction)))


@dataclass(frozen=True, eq=False)
class ExperimentRow:
    fraction: float
    fast_edges: float
    error_without: float
    error_with: float
    improvement_pct: float
    ci_low: float
    ci_high: float
    errors_without: np.ndarray = field(repr=False)
    errors_with: np.ndarray = field(repr=False)


def _bootstrap_ci(diff: np.ndarray, reps: int, rng: np.random.Generator) -> tuple[float, float]:
    idx = rng.integers(diff.size, size=(reps, diff.size))
    means = diff[idx].mean(axis=1)
    lo, hi = np.quantile(means, [0.025, 0.975])
    return float(lo), float(hi)


def run_experiment(config: InfectionConfig) -> list[ExperimentRow]:
    """Mean source-distance error with and without base change, per fast-edge fraction.

    In every trial the true spreading tree is a uniform BFS tree from a
    random candidate source, rewired to contain the fast edges; the
    snapshot is taken when about ``infected_fraction`` of nodes are
    infected. ``ci_low`` / ``ci_high`` bound the mean paired error reduction
    (without minus with) by percentile bootstrap.
    """
    g = config.build_graph()
    adj = g.neighbors()
    all_dist = np.stack([g.bfs_distances(v) for v in range(g.n)])
    if (all_dist < 0).any():
        raise ValueError("experiment graph must be connected")
    per_block = config.trials // config.fast_draws
    n_cand = max(1, int(round(config.candidate_fraction * g.n)))
    rows = []
    for fi, frac in enumerate(config.fractions):
        err_without, err_with, fast_sizes = [], [], []
        for b in range(config.fast_draws):
            rng = np.random.default_rng([config.seed, fi, b])
            fast = draw_fast_edges(g, frac, rng)
            fast_sizes.append(len(fast))
            cands = np.sort(rng.choice(g.n, size=n_cand, replace=False))
            raw, rewired = [], []
            for s in cands:
                for _ in range(config.trees_per_candidate):
                    t = random_bfs_tree(g, int(s), rng, adj, all_dist[s])
                    raw.append(t)
                    rewired.append(rewire_tree(g, t, fast, all_dist[s]))
            raw_atoms = TreeAtoms.from_trees(raw)
            new_atoms = TreeAtoms.from_trees(rewired)
            for _ in range(per_block):
                s = int(cands[rng.integers(n_cand)])
                truth = rewire_tree(g, random_bfs_tree(g, s, rng, adj, all_dist[s]), fast, all_dist[s])
                f = snapshot(truth, observation_step(truth, config.infected_fraction))
                s_raw = int(cands[np.argmax(score_sources(raw_atoms, cands, f, config.gamma))])
                s_new = int(cands[np.argmax(score_sources(new_atoms, cands, f, config.gamma))])
                err_without.append(all_dist[s, s_raw])
                err_with.append(all_dist[s, s_new])
        e0 = np.array(err_without, dtype=float)
        e1 = np.array(err_with, dtype=float)
        mean0, mean1 = float(e0.mean()), float(e1.mean())
        improvement = 100.0 * (mean0 - mean1) / mean0 if mean0 > 0 else 0.0
        lo, hi = _bootstrap_ci(e0 - e1, config.bootstrap, np.random.default_rng([config.seed, fi, 10**6]))
        rows.append(ExperimentRow(frac, float(np.mean(fast_sizes)), mean0, mean1, improvement, lo, hi, e0, e1))
        log.info("fraction %.2f: without %.3f, with %.3f (%.1f%%)", frac, mean0, mean1, improvement)
    return rows
