"""Band-pass filters, approximately bandlimited signals, sampling and recovery."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .filters import SpectralKernel, filter_matrix
from .opspace import OperatorSpace, canonical_signs

DEFAULT_COND_MAX = 1e8
DEFAULT_MAX_TRIES = 1000


@dataclass(frozen=True, eq=False)
class BandSpec:
    """Boolean ``(#atoms, n)`` mask; ``True`` marks (atom, frequency) pairs in the band."""

    mask: np.ndarray
    space_id: str


def band_from_mask(space: OperatorSpace, mask) -> BandSpec:
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim == 1:
        mask = np.broadcast_to(mask, (space.size, space.n)).copy()
    if mask.shape != (space.size, space.n):
        raise ValueError(f"band mask has shape {mask.shape}, expected ({space.size}, {space.n})")
    return BandSpec(mask, space.space_id)


def lowpass_band(space: OperatorSpace, j: int) -> BandSpec:
    """The lowest ``j`` frequencies of every atom."""
    if not 0 <= j <= space.n:
        raise ValueError(f"band size must lie in [0, {space.n}], got {j}")
    mask = np.zeros((space.size, space.n), dtype=bool)
    mask[:, :j] = True
    return BandSpec(mask, space.space_id)


def bandpass_matrix(space: OperatorSpace, y: BandSpec) -> np.ndarray:
    space.check(y.space_id, "band")
    B = filter_matrix(space, SpectralKernel(y.mask.astype(float), space.space_id))
    return (B + B.T) / 2


def bandlimit_residual(space: OperatorSpace, y: BandSpec, f) -> float:
    """``||B_Y f - f||``; ``f`` is (Y, eps)-bandlimited iff this is at most eps."""
    f = np.asarray(f, dtype=float)
    return float(np.linalg.norm(bandpass_matrix(space, y) @ f - f))


def _spectrum(B: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    raw, U = np.linalg.eigh(B)
    return np.clip(raw, 0.0, 1.0), canonical_signs(U), raw


def bandpass_spectrum(space: OperatorSpace, y: BandSpec) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues (clamped to ``[0, 1]``) and eigenvectors of ``B_Y``."""
    vals, vecs, _ = _spectrum(bandpass_matrix(space, y))
    return vals, vecs


def coefficient_bound_check(space: OperatorSpace, y: BandSpec, f, eps: float, rtol: float = 1e-9) -> bool:
    """Check ``sum_{i<=j} a_i^2 <= eps^2 / (1 - lambda_j)^2`` for every ``lambda_j < 1``.

    ``a`` are the coordinates of ``f`` in the eigenbasis of ``B_Y``. A true
    theorem for any bandlimited ``f``; exposed so it can be tested.
    """
    vals, vecs = bandpass_spectrum(space, y)
    a = vecs.T @ np.asarray(f, dtype=float)
    head = np.cumsum(a**2)
    ok = vals < 1.0 - 1e-12
    bound = eps**2 / (1.0 - vals[ok]) ** 2
    atol = 1e-12 * float(a @ a)
    return bool(np.all(head[ok] <= bound * (1 + rtol) + atol))


@dataclass(frozen=True, eq=False)
class RecoveryPlan:
    """Sampling set and the recovery matrix built from the top eigenvectors of ``B_Y``.

    ``vertices`` has ``n - j`` entries; ``G`` holds the rows of ``U_gt`` at
    those vertices. ``lambda_j`` is the ``j``-th smallest eigenvalue of
    ``B_Y`` (taken as 0 when ``j = 0``).
    """

    j: int
    vertices: np.ndarray
    U_gt: np.ndarray
    G: np.ndarray
    sigma: float
    lambda_j: float
    log_abs_det: float
    condition: float
    bandpass: np.ndarray


def plan_recovery(
    space: OperatorSpace,
    y: BandSpec,
    j: int,
    vertices=None,
    rng: np.random.Generator | int | None = None,
    cond_max: float = DEFAULT_COND_MAX,
    max_tries: int = DEFAULT_MAX_TRIES,
) -> RecoveryPlan:
    """Choose (or validate) a uniqueness set of size ``n - j``.

    Without ``vertices``, sets are drawn uniformly at random from ``rng``
    until the recovery matrix has condition number at most ``cond_max``.

    Raises
    ------
    NumericalError
        If no acceptable set is found within ``max_tries`` draws, or the
        given set is too ill-conditioned.
    """
    n = space.n
    if not 0 <= j < n:
        raise ValueError(f"j must lie in [0, {n - 1}], got {j}")
    B = bandpass_matrix(space, y)
    vals, vecs, _ = _spectrum(B)
    U_gt = vecs[:, j:]
    lam_j = float(vals[j - 1]) if j > 0 else 0.0

    def build(vs):
        G = U_gt[vs, :]
        return G, float(np.linalg.cond(G))

    if vertices is not None:
        vs = np.asarray(vertices, dtype=int).ravel()
        if vs.size != n - j or len(set(vs.tolist())) != vs.size:
            raise ValueError(f"need {n - j} distinct vertices, got {vs.tolist()}")
        if (vs < 0).any() or (vs >= n).any():
            raise ValueError("sampling vertex out of range")
        G, cond = build(vs)
        if not cond <= cond_max:
            raise NumericalError(f"recovery matrix has condition number {cond:.3e} > {cond_max:.1e}")
    else:
        rng = np.random.default_rng(rng)
        best = np.inf
        for _ in range(max_tries):
            vs = np.sort(rng.choice(n, size=n - j, replace=False))
            G, cond = build(vs)
            if cond <= cond_max:
                break
            best = min(best, cond)
        else:
            raise NumericalError(
                f"no uniqueness set with condition number <= {cond_max:.1e} after "
                f"{max_tries} draws (best {best:.3e})"
            )
    svals = np.linalg.svd(G, compute_uv=False)
    _, logdet = np.linalg.slogdet(G)
    return RecoveryPlan(j, vs, U_gt, G, float(1.0 / svals[-1]), lam_j, float(logdet), cond, B)


def recover(plan: RecoveryPlan, f_obs, eps: float | None = None, f_true=None) -> tuple[np.ndarray, float, float]:
    """Reconstruct from samples at ``plan.vertices``.

    Returns ``(f_rec, bound_a, bound_b)``: the reconstruction, the bound on
    ``||f_rec - f||`` and the bandlimit level guaranteed for ``f_rec``. ``eps``
    defaults to the measured residual of ``f_true`` when that is given.
    """
    if plan.lambda_j >= 1 - 1e-10:
        raise NumericalError(f"lambda_j = {plan.lambda_j:.12g} is 1; recovery bounds degenerate")
    f_obs = np.asarray(f_obs, dtype=float).ravel()
    if f_obs.size != plan.vertices.size:
        raise ValueError(f"expected {plan.vertices.size} samples, got {f_obs.size}")
    if eps is None:
        if f_true is None:
            raise ValueError("supply eps or the ground-truth signal to measure it")
        f_true = np.asarray(f_true, dtype=float)
        eps = float(np.linalg.norm(plan.bandpass @ f_true - f_true))
    f_rec = plan.U_gt @ np.linalg.solve(plan.G, f_obs)
    ratio = (1 + plan.sigma) / (1 - plan.lambda_j)
    return f_rec, eps * ratio, eps * (1 + 2 * ratio)
