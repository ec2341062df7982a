"""Moving measures and filter families between operator spaces.

A map ``h`` from the atoms of a space Z to the atoms of a space X is stored
as an index array. Pulling measures back and pushing filter families forward
also need a probability vector on each preimage (the fiber measure); the
default is uniform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .filters import SpectralKernel, fiber_matrices
from .opspace import OperatorSpace


@dataclass(frozen=True)
class ParamMap:
    """Monotone bijection of a parameter interval, with its inverse."""

    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class BaseChangeMap:
    """Discretized map from Z-atoms to X-atoms.

    ``fiber_weights[k]`` is a probability vector over ``preimage(k)`` (Z
    indices in ascending order), or ``None`` when the preimage is empty.
    """

    target_of: np.ndarray
    n_targets: int
    fiber_weights: tuple
    param_map: ParamMap | None = None

    def preimage(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.target_of == k)

    @property
    def is_injective(self) -> bool:
        return np.unique(self.target_of).size == self.target_of.size

    def member_weights(self) -> np.ndarray:
        """Fiber weight of every Z-atom inside the fiber it maps into."""
        out = np.zeros(self.target_of.size)
        for k, fw in enumerate(self.fiber_weights):
            if fw is not None:
                out[self.preimage(k)] = fw
        return out


def make_map(target_of, n_targets: int, fiber_weights=None, param_map: ParamMap | None = None) -> BaseChangeMap:
    """Build a :class:`BaseChangeMap`.

    ``fiber_weights`` is ``None`` (uniform on every preimage) or a mapping /
    sequence giving, per X-atom, weights over its preimage in ascending Z
    order. Missing entries default to uniform.
    """
    tgt = np.asarray(target_of, dtype=int).ravel()
    if tgt.size == 0:
        raise ValueError("base-change map has no source atoms")
    if (tgt < 0).any() or (tgt >= n_targets).any():
        bad = int(tgt[(tgt < 0) | (tgt >= n_targets)][0])
        raise ValueError(f"target index {bad} out of range for {n_targets} X-atoms")
    given = {}
    if fiber_weights is not None:
        items = fiber_weights.items() if hasattr(fiber_weights, "items") else enumerate(fiber_weights)
        given = {int(k): v for k, v in items if v is not None}
    fws = []
    for k in range(n_targets):
        size = int((tgt == k).sum())
        if size == 0:
            if k in given and len(given[k]):
                raise ValueError(f"X-atom {k} has an empty preimage but fiber weights were given")
            fws.append(None)
            continue
        w = np.asarray(given.get(k, np.full(size, 1.0 / size)), dtype=float)
        if w.size != size:
            raise ValueError(f"X-atom {k}: {size} preimage atoms but {w.size} fiber weights")
        if (w < 0).any() or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"X-atom {k}: fiber weights must be a probability vector")
        fws.append(w)
    return BaseChangeMap(tgt, int(n_targets), tuple(fws), param_map)


def identity_map(m: int) -> BaseChangeMap:
    return make_map(np.arange(m), m)


def _check_source(h: BaseChangeMap, z_space: OperatorSpace) -> None:
    if z_space.size != h.target_of.size:
        raise ValueError(f"map has {h.target_of.size} source atoms, space has {z_space.size}")


def _check_target(h: BaseChangeMap, x_space: OperatorSpace) -> None:
    if x_space.size != h.n_targets:
        raise ValueError(f"map has {h.n_targets} target atoms, space has {x_space.size}")


def pushforward_weights(h: BaseChangeMap, z_weights) -> np.ndarray:
    """Mass of each X-atom = total mass of its preimage."""
    z_weights = np.asarray(z_weights, dtype=float)
    if z_weights.size != h.target_of.size:
        raise ValueError(f"map has {h.target_of.size} source atoms, got {z_weights.size} weights")
    out = np.zeros(h.n_targets)
    for z, k in enumerate(h.target_of):
        out[k] += z_weights[z]
    return out


def pushforward_measure(h: BaseChangeMap, z_space: OperatorSpace, x_space: OperatorSpace) -> OperatorSpace:
    """X-atoms of ``x_space`` reweighted by the pushforward of Z's measure."""
    _check_source(h, z_space)
    _check_target(h, x_space)
    return x_space.with_weights(pushforward_weights(h, z_space.weights))


def pullback_weights(h: BaseChangeMap, x_weights) -> np.ndarray:
    """Z-atom mass = X-weight of its image times its fiber weight."""
    x_weights = np.asarray(x_weights, dtype=float)
    if x_weights.size != h.n_targets:
        raise ValueError(f"map has {h.n_targets} target atoms, got {x_weights.size} weights")
    out = np.zeros(h.target_of.size)
    for k, fw in enumerate(h.fiber_weights):
        if x_weights[k] == 0:
            continue
        if fw is None:
            raise ValueError(f"X-atom {k} carries weight {x_weights[k]:.6g} but has no fiber")
        out[h.preimage(k)] += x_weights[k] * fw
    return out


def pullback_measure(h: BaseChangeMap, x_space: OperatorSpace, z_space: OperatorSpace) -> OperatorSpace:
    """Z-atoms of ``z_space`` reweighted by the pullback of X's measure."""
    _check_source(h, z_space)
    _check_target(h, x_space)
    return z_space.with_weights(pullback_weights(h, x_space.weights))


def pullback_filter_family(h: BaseChangeMap, family) -> np.ndarray:
    """Z-atom ``z`` gets the filter of X-atom ``h(z)``."""
    family = np.asarray(family, dtype=float)
    if family.shape[0] != h.n_targets:
        raise ValueError(f"family has {family.shape[0]} members, map has {h.n_targets} targets")
    return family[h.target_of]


def pushforward_filter_family(h: BaseChangeMap, family, x_weights=None) -> np.ndarray:
    """X-atom ``k`` gets the fiber-weighted average of its preimage's filters.

    X-atoms with an empty preimage get a zero matrix when ``x_weights`` marks
    them as massless; otherwise that is an error.
    """
    family = np.asarray(family, dtype=float)
    if family.shape[0] != h.target_of.size:
        raise ValueError(f"family has {family.shape[0]} members, map has {h.target_of.size} sources")
    out = np.zeros((h.n_targets,) + family.shape[1:])
    for k, fw in enumerate(h.fiber_weights):
        if fw is None:
            if x_weights is None or x_weights[k] > 0:
                raise ValueError(f"X-atom {k} has an empty preimage; its pushed filter is undefined")
            continue
        for z, w in zip(h.preimage(k), fw):
            out[k] += w * family[z]
    return out


def pullback_kernel(h: BaseChangeMap, z_space: OperatorSpace, x_space: OperatorSpace, x_kernel: SpectralKernel) -> SpectralKernel:
    """Kernel on Z given by ``Gamma(h(z), i)``."""
    _check_source(h, z_space)
    _check_target(h, x_space)
    x_space.check(x_kernel.space_id, "kernel")
    return SpectralKernel(np.asarray(x_kernel.values)[h.target_of], z_space.space_id)


def filter_pullback_conv(h: BaseChangeMap, z_space: OperatorSpace, x_space: OperatorSpace, x_kernel: SpectralKernel, f) -> np.ndarray:
    """Convolution on Z with the pulled-back kernel, summed atom by atom."""
    _check_source(h, z_space)
    _check_target(h, x_space)
    x_space.check(x_kernel.space_id, "kernel")
    f = np.asarray(f, dtype=float)
    gains = np.asarray(x_kernel.values)
    out = np.zeros(z_space.n)
    for wz, atom, k in zip(z_space.weights, z_space.atoms, h.target_of):
        U = atom.eigenvectors
        out += wz * (U @ (gains[k] * (U.T @ f)))
    return out


def filter_pushforward_conv(h: BaseChangeMap, z_space: OperatorSpace, x_space: OperatorSpace, x_kernel: SpectralKernel, f) -> np.ndarray:
    """Fiber convolutions taken on the image operators, averaged under Z's measure."""
    _check_source(h, z_space)
    _check_target(h, x_space)
    x_space.check(x_kernel.space_id, "kernel")
    f = np.asarray(f, dtype=float)
    gains = np.asarray(x_kernel.values)
    out = np.zeros(z_space.n)
    for wz, k in zip(z_space.weights, h.target_of):
        U = x_space.atoms[k].eigenvectors
        out += wz * (U @ (gains[k] * (U.T @ f)))
    return out


def fiber_filter_family(space: OperatorSpace, kernel: SpectralKernel) -> np.ndarray:
    """Per-atom filters of a kernel, as a family to push or pull."""
    return fiber_matrices(space, kernel)


# -- parametrized maps -----------------------------------------------------


def stretch_map(eta: float) -> ParamMap:
    """Reparametrization ``z -> z eta / (1 - z + z eta)`` of ``[0, 1]``."""
    if not eta > 0:
        raise ValueError(f"stretch factor must be positive, got {eta}")
    eta = float(eta)
    return ParamMap(
        forward=lambda z: np.asarray(z) * eta / (1 - np.asarray(z) + np.asarray(z) * eta),
        inverse=lambda x: np.asarray(x) / (np.asarray(x) + eta - np.asarray(x) * eta),
    )


def stretched_operator(L0, L1, x: float, eta: float) -> np.ndarray:
    """``x L1 + (1 - x) eta L0``: the convex combination with L0 scaled by ``eta``."""
    A = np.asarray(getattr(L0, "matrix", L0), dtype=float)
    B = np.asarray(getattr(L1, "matrix", L1), dtype=float)
    return x * B + (1 - x) * eta * A


def nearest_node_map(z_params, x_params, param_map: ParamMap | None = None) -> tuple[BaseChangeMap, float]:
    """Send each Z-node (through ``param_map``) to the nearest X-node.

    Returns the map and the largest distance between a mapped parameter and
    its assigned node.
    """
    z = np.asarray(z_params, dtype=float)
    x = np.asarray(x_params, dtype=float)
    mapped = param_map.forward(z) if param_map is not None else z
    dist = np.abs(mapped[:, None] - x[None, :])
    tgt = np.argmin(dist, axis=1)
    err = float(dist[np.arange(z.size), tgt].max())
    return make_map(tgt, x.size, param_map=param_map), err


def interval_coarsening(z_params, breakpoints) -> BaseChangeMap:
    """Send every Z-node in ``[b_i, b_{i+1})`` to X-atom ``i``.

    ``breakpoints`` are the interior cut points of the parameter interval.
    """
    z = np.asarray(z_params, dtype=float)
    cuts = np.asarray(breakpoints, dtype=float)
    if (np.diff(cuts) <= 0).any():
        raise ValueError("breakpoints must be strictly increasing")
    tgt = np.searchsorted(cuts, z, side="right")
    return make_map(tgt, cuts.size + 1)
