"""Small self-contained input set exercising every CLI subcommand."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .graphs import Graph, knn_graph, laplacian_matrix
from .io import write_csv, write_edge_list


def _ring_with_chords(n: int, chords: int, rng: np.random.Generator) -> Graph:
    edges = {(i, (i + 1) % n) for i in range(n)}
    edges = {(min(u, v), max(u, v)) for u, v in edges}
    while len(edges) < n + chords:
        u, v = sorted(rng.choice(n, size=2, replace=False).tolist())
        edges.add((u, v))
    return Graph(n, tuple((u, v, float(rng.uniform(0.5, 2.0))) for u, v in sorted(edges)))


# Config bodies, keyed by file name; paths are relative to the config file.
CONFIGS = {
    "spectrum.cfg": """\
space = discrete.manifest
signals = signals.csv
column = 0
""",
    "filter.cfg": """\
space = discrete.manifest
signals = signals.csv
response = mask
mask = 1 0.2 4
mask.2 = 1 0 6
polynomial = true
emit_matrix = true
""",
    "filter_bipoly.cfg": """\
space = convex.manifest
signals = signals.csv
response = heat
heat = 0.3
bidegree = 3 4
""",
    "denoise.cfg": """\
mode = toy
nodes = 45
snr_db = -5, -1
test_samples = 100
seed = 3
""",
    "denoise_files.cfg": """\
mode = files
space = discrete.manifest
signals = signals.csv
clean = signals.csv
mask = 1 1 12
""",
    "sample.cfg": """\
space = convex.manifest
band_j = 4
j = 8
trials = 5
seed = 11
""",
    "learn.cfg": """\
space = knn.manifest
signals = knn_signals.csv
loss = spectral_compaction
cutoff = 3
gamma = 5
method = exact
""",
    "learn_mh.cfg": """\
space = convex.manifest
signals = signals.csv
loss = spectral_compaction
cutoff = 4
gamma = 4
method = mh
chain_length = 6000
burn_in = 1000
thinning = 2
step_size = 0.3
seed = 5
""",
    "basechange.cfg": """\
z_space = discrete.manifest
x_space = coarse.manifest
map = coarse.map
construction = pushforward_filter
signals = signals.csv
response = power
power = 1
""",
    "basechange_measure.cfg": """\
z_space = discrete.manifest
x_space = coarse.manifest
map = coarse.map
construction = pushforward_measure
""",
    "infect.cfg": """\
rows = 6
cols = 6
fractions = 0, 0.6
trials = 12
fast_draws = 2
trees_per_candidate = 3
bootstrap = 200
seed = 2
""",
    "selftest.cfg": """\
only = 1, 3, 6
""",
}


def write_demo(directory: str | Path, seed: int = 0) -> Path:
    """Write demo graphs, manifests, signals and one config per run into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    n = 12
    graphs = [_ring_with_chords(n, c, rng) for c in (3, 5, 8)]
    for i, g in enumerate(graphs):
        write_csv(d / f"L{i}.csv", laplacian_matrix(g))
        write_edge_list(d / f"g{i}.edges", g)
    (d / "discrete.manifest").write_text(
        "kind = discrete\nmatrices = L0.csv, L1.csv, L2.csv\nweights = 0.5, 0.3, 0.2\n"
    )
    (d / "coarse.manifest").write_text("kind = discrete\nmatrices = L0.csv, L2.csv\nweights = 0.5, 0.5\n")
    (d / "coarse.map").write_text("0 -> 0\n1 -> 0\n2 -> 1\nfiber 0 = 0.25 0.75\n")
    (d / "convex.manifest").write_text(
        "kind = convex-pair\nedges0 = g0.edges\nedges1 = g1.edges\nnodes = 12\ndensity = uniform\nquadrature = 8\n"
    )
    # Smooth signals: low-frequency combinations on the first graph.
    _, U = np.linalg.eigh(laplacian_matrix(graphs[0]))
    sig = U[:, :4] @ rng.standard_normal((4, 3)) + 0.05 * rng.standard_normal((n, 3))
    write_csv(d / "signals.csv", sig)

    pts = rng.uniform(size=(20, 2))
    write_csv(d / "points.csv", pts)
    (d / "knn.manifest").write_text("kind = knn\npoints = points.csv\nk = 2, 3, 4, 6, 8, 10\n")
    # Low-pass signals on the 3-NN graph.
    _, V = np.linalg.eigh(laplacian_matrix(knn_graph(pts, 3)))
    smooth = V[:, :3] @ rng.standard_normal((3, 4)) + 0.02 * rng.standard_normal((20, 4))
    write_csv(d / "knn_signals.csv", smooth)

    for name, body in CONFIGS.items():
        (d / name).write_text(body)
    return d
