"""Text formats: key-value configs, CSV matrices, edge lists and manifests.

Config and manifest files hold one ``key = value`` pair per line; blank
lines and ``#`` comments are ignored. Unknown keys are rejected.
"""

from __future__ import annotations

import csv
import io
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .basechange import BaseChangeMap, make_map
from .graphs import Graph, knn_graph, laplacian_matrix
from .opspace import DENSITIES, OperatorSpace, convex_family, discrete_space

REQUIRED = object()


class ConfigError(ValueError):
    """Malformed or inconsistent input file."""


# -- value parsers ----------------------------------------------------------


def as_int(s: str) -> int:
    return int(s)


def as_float(s: str) -> float:
    return float(s)


def as_bool(s: str) -> bool:
    low = s.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def as_floats(s: str) -> tuple[float, ...]:
    return tuple(float(x) for x in re.split(r"[,\s]+", s.strip()) if x)


def as_ints(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in re.split(r"[,\s]+", s.strip()) if x)


def as_strs(s: str) -> tuple[str, ...]:
    return tuple(x for x in re.split(r"[,\s]+", s.strip()) if x)


def one_of(*choices: str) -> Callable[[str], str]:
    def parse(s: str) -> str:
        if s not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}; got {s!r}")
        return s

    return parse


def read_pairs(path: str | os.PathLike) -> list[tuple[int, str, str]]:
    """``(line number, key, raw value)`` for every non-comment line."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    out = []
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out.append((no, key, value))
    return out


def parse_config(
    path: str | os.PathLike | None,
    schema: dict[str, tuple[Callable[[str], Any], Any]],
    overrides: dict[str, Any] | None = None,
    prefixed: dict[str, Callable[[str], Any]] | None = None,
) -> dict[str, Any]:
    """Parse ``path`` against ``schema`` (``key -> (parser, default)``).

    ``prefixed`` accepts families of keys such as ``mask.3``; their parsed
    values are collected as ``{suffix: value}`` under ``"mask."``.
    ``overrides`` (already parsed) win over file values. Missing keys
    without defaults raise :class:`ConfigError`.
    """
    prefixed = prefixed or {}
    values: dict[str, Any] = {p + ".": {} for p in prefixed}
    seen: dict[str, int] = {}
    pairs = read_pairs(path) if path is not None else []
    where = str(path)
    for no, key, raw in pairs:
        if key in seen:
            raise ConfigError(f"{where}:{no}: duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = no
        head, _, tail = key.partition(".")
        if key in schema:
            parser = schema[key][0]
            target, slot = values, key
        elif tail and head in prefixed:
            parser = prefixed[head]
            target, slot = values[head + "."], tail
        else:
            raise ConfigError(f"{where}:{no}: unknown key {key!r}; allowed: {', '.join(sorted(schema))}")
        try:
            target[slot] = parser(raw)
        except ValueError as exc:
            raise ConfigError(f"{where}:{no}: bad value for {key!r}: {exc}") from exc
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    for key, (_, default) in schema.items():
        if key not in values:
            if default is REQUIRED:
                raise ConfigError(f"{where}: missing required key {key!r}")
            values[key] = default
    return values


def resolve(base: str | os.PathLike | None, p: str) -> Path:
    """Interpret ``p`` relative to the directory of the file ``base``."""
    q = Path(p)
    if q.is_absolute() or base is None:
        return q
    return Path(base).parent / q


def format_value(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, dict):
        return "; ".join(f"{k}: {format_value(x)}" for k, x in sorted(v.items()))
    if isinstance(v, (tuple, list, np.ndarray)):
        return ", ".join(format_value(x) for x in v)
    return str(v)


def write_config(path: str | os.PathLike, values: dict[str, Any]) -> None:
    """Dump resolved settings, sorted by key, one per line."""
    lines = [f"{k} = {format_value(values[k])}" for k in sorted(values)]
    Path(path).write_text("\n".join(lines) + "\n")


# -- CSV --------------------------------------------------------------------


def read_csv(path: str | os.PathLike, expect_header: bool = False) -> tuple[np.ndarray, str | None]:
    """Numeric CSV as a 2-D array; a leading ``#`` line is returned as the header.

    One row of column names before the data is skipped.
    """
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    header = None
    names_seen = False
    rows = []
    for no, line in enumerate(lines, 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            if header is None and not rows:
                header = s[1:].strip()
            continue
        try:
            rows.append([float(x) for x in s.split(",")])
        except ValueError as exc:
            if not rows and not names_seen:
                names_seen = True  # column-name row
                continue
            raise ConfigError(f"{path}:{no}: non-numeric entry") from exc
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    width = len(rows[0])
    for no, r in enumerate(rows, 1):
        if len(r) != width:
            raise ConfigError(f"{path}: data row {no} has {len(r)} columns, expected {width}")
    if expect_header and header is None:
        raise ConfigError(f"{path}: missing '# space=...' header line")
    return np.array(rows), header


def format_number(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: str | os.PathLike, rows, header: str | None = None, columns: list[str] | None = None) -> None:
    """Write rows with every number at 17 significant digits.

    ``header`` becomes a ``#`` line; ``columns`` a plain name row.
    """
    buf = io.StringIO()
    if header is not None:
        buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    if columns is not None:
        w.writerow(columns)
    for r in rows:
        cells = r if isinstance(r, (list, tuple)) else np.atleast_1d(r)
        w.writerow([x if isinstance(x, str) else format_number(x) for x in cells])
    Path(path).write_text(buf.getvalue())


def space_header(manifest: str | os.PathLike, space: OperatorSpace) -> str:
    return f"space={Path(manifest).name} id={space.space_id}"


def check_space_header(header: str | None, space: OperatorSpace, path) -> None:
    """Reject a spectral CSV written for a different space."""
    m = re.search(r"id=([0-9a-f]+)", header or "")
    if m is None:
        raise ConfigError(f"{path}: header does not name a space id")
    if m.group(1) != space.space_id:
        raise ConfigError(f"{path}: written for space {m.group(1)}, but loaded space is {space.space_id}")


# -- edge lists -------------------------------------------------------------


def read_edge_list(path: str | os.PathLike, n: int) -> Graph:
    """``u v w`` per line (``w`` optional, default 1); ``#`` starts a comment."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    edges = []
    for no, line in enumerate(text.splitlines(), 1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        if len(parts) not in (2, 3):
            raise ConfigError(f"{path}:{no}: expected 'u v w'")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ConfigError(f"{path}:{no}: {exc}") from exc
        edges.append((u, v, w))
    try:
        return Graph(n, tuple(edges))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def write_edge_list(path: str | os.PathLike, g: Graph) -> None:
    Path(path).write_text("".join(f"{u} {v} {format_number(w)}\n" for u, v, w in g.edges))


# -- operator-space manifests -----------------------------------------------

_SPACE_SCHEMA = {
    "kind": (one_of("discrete", "convex-pair", "knn"), REQUIRED),
    "matrices": (as_strs, ()),
    "weights": (as_floats, ()),
    "params": (as_floats, ()),
    "edges0": (str, None),
    "edges1": (str, None),
    "nodes": (as_int, None),
    "density": (one_of(*DENSITIES), "uniform"),
    "quadrature": (as_int, 16),
    "points": (str, None),
    "k": (as_ints, ()),
    "weighting": (one_of("unweighted", "gaussian"), "unweighted"),
    "weights_file": (str, None),
}


@dataclass(frozen=True)
class LoadedSpace:
    """A space with its manifest; ``endpoints`` holds ``(L0, L1)`` for convex pairs."""

    space: OperatorSpace
    manifest: Path
    settings: dict
    endpoints: tuple[np.ndarray, np.ndarray] | None = None


def load_space(manifest: str | os.PathLike) -> LoadedSpace:
    """Build an operator space from a manifest.

    ``kind = discrete``: ``matrices`` (CSV paths) with ``weights`` and
    optional ``params``. ``kind = convex-pair``: ``edges0``, ``edges1``,
    ``nodes``, ``density`` and ``quadrature``; atoms interpolate the two
    Laplacians. ``kind = knn``: ``points`` CSV and a list ``k``; atoms are
    k-NN Laplacians with ``weights`` (uniform by default).
    ``weights_file`` replaces the weights with the last column of a CSV
    such as the one written by ``learn``.
    """
    manifest = Path(manifest)
    cfg = parse_config(manifest, _SPACE_SCHEMA)
    kind = cfg["kind"]
    endpoints = None
    try:
        if kind == "discrete":
            if not cfg["matrices"]:
                raise ConfigError(f"{manifest}: discrete space needs 'matrices'")
            mats = [read_csv(resolve(manifest, p))[0] for p in cfg["matrices"]]
            w = cfg["weights"] or tuple([1.0 / len(mats)] * len(mats))
            space = discrete_space(mats, w, params=cfg["params"] or None)
        elif kind == "convex-pair":
            for key in ("edges0", "edges1", "nodes"):
                if cfg[key] is None:
                    raise ConfigError(f"{manifest}: convex-pair space needs {key!r}")
            g0 = read_edge_list(resolve(manifest, cfg["edges0"]), cfg["nodes"])
            g1 = read_edge_list(resolve(manifest, cfg["edges1"]), cfg["nodes"])
            endpoints = (laplacian_matrix(g0), laplacian_matrix(g1))
            space = convex_family(*endpoints, cfg["quadrature"], cfg["density"])
        else:
            if cfg["points"] is None or not cfg["k"]:
                raise ConfigError(f"{manifest}: knn space needs 'points' and 'k'")
            pts = read_csv(resolve(manifest, cfg["points"]))[0]
            ks = cfg["k"]
            mats = [laplacian_matrix(knn_graph(pts, k, cfg["weighting"])) for k in ks]
            w = cfg["weights"] or tuple([1.0 / len(ks)] * len(ks))
            space = discrete_space(mats, w, params=[float(k) for k in ks])
        if cfg["weights_file"] is not None:
            table = read_csv(resolve(manifest, cfg["weights_file"]))[0]
            space = space.with_weights(table[:, -1])
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{manifest}: {exc}") from exc
    return LoadedSpace(space, manifest, cfg, endpoints)


# -- base-change manifests ----------------------------------------------------

_ARROW = re.compile(r"^\s*(\d+)\s*->\s*(\d+)\s*$")
_FIBER = re.compile(r"^\s*fiber\s+(\d+)\s*=\s*(.+)$")
_TARGETS = re.compile(r"^\s*targets\s*=\s*(\d+)\s*$")


def load_basechange(path: str | os.PathLike) -> BaseChangeMap:
    """Parse ``z -> x`` lines, optional ``fiber k = w1 w2 ...`` and ``targets = m``.

    Every Z-atom must appear exactly once. Without ``targets`` the X-space
    size is one more than the largest target index.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    pairs: dict[int, int] = {}
    fibers: dict[int, tuple[float, ...]] = {}
    targets = None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if m := _ARROW.match(s):
            z, x = int(m.group(1)), int(m.group(2))
            if z in pairs:
                raise ConfigError(f"{path}:{no}: Z-atom {z} mapped twice")
            pairs[z] = x
        elif m := _FIBER.match(s):
            try:
                fibers[int(m.group(1))] = as_floats(m.group(2))
            except ValueError as exc:
                raise ConfigError(f"{path}:{no}: {exc}") from exc
        elif m := _TARGETS.match(s):
            targets = int(m.group(1))
        else:
            raise ConfigError(f"{path}:{no}: expected 'z -> x', 'fiber k = ...' or 'targets = m'")
    if not pairs:
        raise ConfigError(f"{path}: no 'z -> x' lines")
    m_z = max(pairs) + 1
    missing = sorted(set(range(m_z)) - set(pairs))
    if missing:
        raise ConfigError(f"{path}: Z-atoms {missing} have no image")
    tgt = [pairs[z] for z in range(m_z)]
    n_x = targets if targets is not None else max(tgt) + 1
    try:
        return make_map(tgt, n_x, fibers or None)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
