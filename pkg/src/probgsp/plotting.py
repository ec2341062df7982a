"""Optional PNG rendering of CLI results; requires matplotlib (``pip install .[plot]``).

Figures are written with fixed size, DPI and empty metadata so reruns give
identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("plotting needs matplotlib; install the 'plot' extra") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> None:
    fig.savefig(path, dpi=100, metadata={"Software": None})
    fig.clf()


def heatmap(path, values, title: str, xlabel: str = "frequency", ylabel: str = "atom") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    im = ax.imshow(np.asarray(values), aspect="auto", interpolation="nearest", cmap="viridis")
    fig.colorbar(im, ax=ax)
    ax.set(title=title, xlabel=xlabel, ylabel=ylabel)
    fig.tight_layout()
    _save(fig, Path(path))
    plt.close(fig)


def bars(path, labels, heights, title: str, ylabel: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(range(len(heights)), heights, color="tab:blue")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels([str(x) for x in labels], rotation=45, ha="right")
    ax.set(title=title, ylabel=ylabel)
    fig.tight_layout()
    _save(fig, Path(path))
    plt.close(fig)


def lines(path, x, series: dict, title: str, xlabel: str, ylabel: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, y in series.items():
        ax.plot(x, y, marker="o", label=name)
    ax.legend()
    ax.set(title=title, xlabel=xlabel, ylabel=ylabel)
    fig.tight_layout()
    _save(fig, Path(path))
    plt.close(fig)
