"""Fourier transform over an operator space and its left inverse.

Coefficients live on ``atoms x frequencies``. The left inverse factors as
``beta . alpha``: ``alpha`` runs the per-atom inverse transform, ``beta``
averages the resulting per-atom signals under the space's weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .opspace import OperatorSpace


@dataclass(frozen=True, eq=False)
class SpectralCoefficients:
    """``values[j, i]`` is the coefficient of the signal on eigenvector ``i`` of atom ``j``."""

    values: np.ndarray
    space_id: str


@dataclass(frozen=True, eq=False)
class FiberField:
    """``values[j, v]``: one vertex signal per atom."""

    values: np.ndarray


def _signal(space: OperatorSpace, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (space.n,):
        raise ValueError(f"signal has shape {f.shape}, expected ({space.n},)")
    return f


def _shaped(space: OperatorSpace, values, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (space.size, space.n):
        raise ValueError(f"{what} has shape {values.shape}, expected ({space.size}, {space.n})")
    return values


def fourier(space: OperatorSpace, f) -> SpectralCoefficients:
    f = _signal(space, f)
    values = np.einsum("jvi,v->ji", space.eigenvectors, f)
    return SpectralCoefficients(values, space.space_id)


def alpha(space: OperatorSpace, g: SpectralCoefficients) -> FiberField:
    """Per-atom inverse transform: ``q[j] = U_j @ g[j]``."""
    space.check(g.space_id)
    values = _shaped(space, g.values, "coefficients")
    return FiberField(np.einsum("jvi,ji->jv", space.eigenvectors, values))


def alpha_inverse(space: OperatorSpace, q: FiberField) -> SpectralCoefficients:
    """Per-atom forward transform, undoing :func:`alpha`."""
    values = _shaped(space, q.values, "fiber field")
    return SpectralCoefficients(np.einsum("jvi,jv->ji", space.eigenvectors, values), space.space_id)


def beta(space: OperatorSpace, q: FiberField) -> np.ndarray:
    """Average a fiber field over the atoms under the space's weights."""
    values = _shaped(space, q.values, "fiber field")
    out = np.zeros(space.n)
    for w, row in zip(space.weights, values):
        out += w * row
    return out


def inverse_fourier(space: OperatorSpace, g: SpectralCoefficients) -> np.ndarray:
    """Left inverse of :func:`fourier`."""
    return beta(space, alpha(space, g))


def spectral_norm_sq(space: OperatorSpace, g: SpectralCoefficients) -> float:
    """Squared norm in the weighted ``L2(atoms x frequencies)``."""
    space.check(g.space_id)
    values = _shaped(space, g.values, "coefficients")
    return float(np.dot(space.weights, (values**2).sum(axis=1)))


def energy_profile(space: OperatorSpace, f) -> np.ndarray:
    """Squared coefficients per atom, ``(#atoms, n)``."""
    return fourier(space, f).values ** 2
