"""Learning a distribution over operators from data.

Risks are averaged losses per atom; the Gibbs posterior reweights a prior by
``exp(-gamma * risk)``. Finite spaces get exact weights. One-parameter
families can also be sampled with a random-walk Metropolis-Hastings chain
whose draws are binned onto the space's quadrature nodes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .basechange import BaseChangeMap, pullback_weights, pushforward_weights
from .errors import NumericalError
from .opspace import OperatorSpace, ShiftOperator, discrete_space, make_operator

log = logging.getLogger(__name__)

LOSS_KINDS = ("spectral_compaction", "zero_one_detection", "custom")


# -- losses -----------------------------------------------------------------


def loss_spectral_compaction(op: ShiftOperator, f, c: int) -> float:
    """Fraction (in norm) of ``f`` outside the lowest ``c`` frequencies of ``op``."""
    f = np.asarray(f, dtype=float)
    norm_sq = float(f @ f)
    if norm_sq == 0:
        raise ValueError("spectral compaction loss is undefined for the zero signal")
    if not 1 <= c <= op.n:
        raise ValueError(f"cutoff must lie in [1, {op.n}], got {c}")
    fhat = op.eigenvectors.T @ f
    high = float(fhat[c:] @ fhat[c:])
    return math.sqrt(min(max(high / norm_sq, 0.0), 1.0))


def high_pass_energy(op: ShiftOperator, f, band) -> float:
    """Norm of the components of ``f`` on the eigenvectors indexed by ``band``."""
    coeffs = op.eigenvectors[:, np.asarray(band, dtype=int)].T @ np.asarray(f, dtype=float)
    return float(np.sqrt(coeffs @ coeffs))


def loss_zero_one_detection(op: ShiftOperator, f, band, threshold: float, label: int) -> int:
    """0 when the high-pass detector ``e > threshold`` agrees with ``label``, else 1."""
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    return abs(int(high_pass_energy(op, f, band) > threshold) - int(label))


def calibrate_threshold(op: ShiftOperator, signals, band) -> float:
    """Detector threshold: mean high-pass energy over a labelled calibration sample."""
    signals = np.asarray(signals, dtype=float)
    return float(np.mean([high_pass_energy(op, s, band) for s in signals]))


def anomaly_score(space: OperatorSpace, f, band, thresholds) -> float:
    """Expected normalized excess ``(e - eps) / eps`` over the space; positive flags an anomaly."""
    thresholds = np.asarray(thresholds, dtype=float)
    e = np.array([high_pass_energy(a, f, band) for a in space.atoms])
    return float(np.dot(space.weights, (e - thresholds) / thresholds))


@dataclass(frozen=True)
class LossSpec:
    """Which loss to evaluate, with its parameters.

    ``spectral_compaction`` uses ``cutoff``; ``zero_one_detection`` uses
    ``band`` (0-based frequency indices) and one threshold per atom;
    ``custom`` calls ``fn(op, f)`` or ``fn(op, f, label)``.
    """

    kind: str
    cutoff: int | None = None
    band: tuple[int, ...] = ()
    thresholds: tuple[float, ...] = ()
    fn: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}; expected one of {LOSS_KINDS}")
        if self.kind == "spectral_compaction" and (self.cutoff is None or self.cutoff < 1):
            raise ValueError("spectral_compaction needs a cutoff >= 1")
        if self.kind == "zero_one_detection":
            if not self.band:
                raise ValueError("zero_one_detection needs a frequency band")
            if any(t < 0 for t in self.thresholds):
                raise ValueError("thresholds must be nonnegative")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("custom loss needs a callable")

    @property
    def labelled(self) -> bool:
        return self.kind == "zero_one_detection"


def empirical_risk(space: OperatorSpace, loss: LossSpec, signals, labels=None, custom_labelled: bool = False) -> np.ndarray:
    """Mean loss over the data set, for every atom.

    ``signals`` has one signal per row.
    """
    signals = np.atleast_2d(np.asarray(signals, dtype=float))
    if signals.shape[0] == 0:
        raise ValueError("empirical risk needs at least one signal")
    needs_labels = loss.labelled or (loss.kind == "custom" and custom_labelled)
    if needs_labels and labels is None:
        raise ValueError(f"{loss.kind} loss needs labels")
    if not needs_labels and labels is not None:
        raise ValueError(f"{loss.kind} loss takes no labels")
    if labels is not None:
        labels = np.asarray(labels).ravel()
        if labels.size != signals.shape[0]:
            raise ValueError(f"{signals.shape[0]} signals but {labels.size} labels")
    if loss.kind == "zero_one_detection" and len(loss.thresholds) != space.size:
        raise ValueError(f"need one threshold per atom ({space.size}), got {len(loss.thresholds)}")
    theta = np.zeros(space.size)
    for j, op in enumerate(space.atoms):
        total = 0.0
        for i, f in enumerate(signals):
            if loss.kind == "spectral_compaction":
                total += loss_spectral_compaction(op, f, loss.cutoff)
            elif loss.kind == "zero_one_detection":
                total += loss_zero_one_detection(op, f, loss.band, loss.thresholds[j], int(labels[i]))
            elif needs_labels:
                total += loss.fn(op, f, labels[i])
            else:
                total += loss.fn(op, f)
        theta[j] = total / signals.shape[0]
    return theta


# -- Gibbs posterior --------------------------------------------------------


def gibbs_posterior_exact(theta, gamma: float, prior=None) -> np.ndarray:
    """Weights proportional to ``exp(-gamma * theta) * prior``.

    Raises
    ------
    NumericalError
        When every weight vanishes (all prior mass sits where ``exp`` underflows).
    """
    theta = np.asarray(theta, dtype=float)
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    prior = np.full(theta.size, 1.0 / theta.size) if prior is None else np.asarray(prior, dtype=float)
    if prior.shape != theta.shape:
        raise ValueError(f"prior has shape {prior.shape}, risk has {theta.shape}")
    if (prior < 0).any():
        raise ValueError("prior must be nonnegative")
    if not np.isfinite(theta[prior > 0]).all():
        raise ValueError("risk must be finite wherever the prior has mass")
    with np.errstate(divide="ignore"):
        logw = np.where(prior > 0, -gamma * np.where(prior > 0, theta, 0.0) + np.log(prior), -np.inf)
    top = logw.max()
    if not np.isfinite(top):
        raise NumericalError("all posterior weights vanish; prior has no mass")
    w = np.exp(logw - top)
    total = w.sum()
    if not total > 0 or not np.isfinite(total):
        raise NumericalError("posterior weights underflow; try a smaller gamma")
    return w / total


POSTERIOR_FORMS = (
    "risk+prior",
    "risk+mapped_prior",
    "mapped_risk+prior",
    "mapped_risk+mapped_prior",
)


def pushforward_risk(h: BaseChangeMap, z_theta) -> np.ndarray:
    """Risk on X: fiber-weighted average of the Z risk over each preimage (NaN if empty)."""
    z_theta = np.asarray(z_theta, dtype=float)
    out = np.full(h.n_targets, np.nan)
    for k, fw in enumerate(h.fiber_weights):
        if fw is not None:
            out[k] = float(np.dot(fw, z_theta[h.preimage(k)]))
    return out


def pullback_risk(h: BaseChangeMap, x_theta) -> np.ndarray:
    return np.asarray(x_theta, dtype=float)[h.target_of]


def base_changed_posterior(
    form: str,
    h: BaseChangeMap,
    gamma: float,
    *,
    theta=None,
    prior=None,
    other_theta=None,
    other_prior=None,
    direction: str = "push",
) -> np.ndarray:
    """Gibbs posterior mixing native and transported risk / prior.

    With ``direction="push"`` the posterior lives on X: native quantities are
    X's own, and ``other_*`` come from Z and are pushed forward along ``h``.
    With ``direction="pull"`` it lives on Z and X quantities are pulled back.
    ``form`` is one of :data:`POSTERIOR_FORMS`.
    """
    if form not in POSTERIOR_FORMS:
        raise ValueError(f"unknown posterior form {form!r}; expected one of {POSTERIOR_FORMS}")
    if direction not in ("push", "pull"):
        raise ValueError(f"direction must be 'push' or 'pull', got {direction!r}")
    risk_mapped = form.startswith("mapped_risk")
    prior_mapped = form.endswith("mapped_prior")
    size = h.n_targets if direction == "push" else h.target_of.size

    if risk_mapped:
        if other_theta is None:
            raise ValueError(f"form {form!r} needs other_theta")
        risk = pushforward_risk(h, other_theta) if direction == "push" else pullback_risk(h, other_theta)
    else:
        if theta is None:
            raise ValueError(f"form {form!r} needs theta")
        risk = np.asarray(theta, dtype=float)
    if prior_mapped:
        if other_prior is None:
            raise ValueError(f"form {form!r} needs other_prior")
        p0 = pushforward_weights(h, other_prior) if direction == "push" else pullback_weights(h, other_prior)
    else:
        p0 = np.full(size, 1.0 / size) if prior is None else np.asarray(prior, dtype=float)
    if risk.size != size or p0.size != size:
        raise ValueError(f"risk/prior sizes ({risk.size}, {p0.size}) do not match {size} atoms")
    undefined = np.flatnonzero(np.isnan(risk) & (p0 > 0))
    if undefined.size:
        raise ValueError(f"atom {int(undefined[0])} has prior mass but no fiber to average the risk over")
    return gibbs_posterior_exact(np.nan_to_num(risk), gamma, p0)


# -- Metropolis-Hastings ----------------------------------------------------


@dataclass(frozen=True)
class GibbsConfig:
    gamma: float = 10.0
    chain_length: int = 50_000
    burn_in: int = 5_000
    thinning: int = 5
    step_size: float = 0.05
    chains: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if min(self.chain_length, self.thinning, self.chains) < 1:
            raise ValueError("chain_length, thinning and chains must be positive")
        if not 0 <= self.burn_in < self.chain_length:
            raise ValueError("burn_in must lie in [0, chain_length)")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")


@dataclass(frozen=True, eq=False)
class MHResult:
    weights: np.ndarray
    samples: np.ndarray
    acceptance_rate: float
    ess: float
    warnings: tuple[str, ...] = ()


def _reflect(x: np.ndarray | float, lo: float, hi: float):
    width = hi - lo
    y = np.mod(np.asarray(x) - lo, 2 * width)
    return lo + np.where(y > width, 2 * width - y, y)


def effective_sample_size(x) -> float:
    """Autocorrelation-based ESS, truncating at the first negative pair sum."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4 or np.var(x) == 0:
        return float(n)
    y = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    fy = np.fft.rfft(y, size)
    acf = np.fft.irfft(fy * np.conj(fy), size)[:n]
    acf /= acf[0]
    tau = 1.0
    for k in range(1, n - 1, 2):
        pair = acf[k] + acf[k + 1]
        if pair < 0:
            break
        tau += 2 * pair
    return float(n / tau)


def bin_to_nodes(samples, nodes) -> np.ndarray:
    """Index of the nearest node for every sample (ties go to the lower node)."""
    nodes = np.asarray(nodes, dtype=float)
    mids = (nodes[1:] + nodes[:-1]) / 2
    return np.searchsorted(mids, np.asarray(samples, dtype=float), side="left")


def _run_chain(log_target, lo, hi, cfg: GibbsConfig, rng: np.random.Generator):
    total = cfg.chain_length
    steps = rng.uniform(-cfg.step_size, cfg.step_size, size=total)
    logu = np.log(rng.uniform(size=total))
    x = float(rng.uniform(lo, hi))
    lp = log_target(x)
    kept = []
    accepted = 0
    for it in range(total):
        y = float(_reflect(x + steps[it], lo, hi))
        ly = log_target(y)
        if logu[it] < ly - lp:
            x, lp = y, ly
            if it >= cfg.burn_in:
                accepted += 1
        if it >= cfg.burn_in and (it - cfg.burn_in) % cfg.thinning == 0:
            kept.append(x)
    return np.array(kept), accepted / max(total - cfg.burn_in, 1)


def metropolis_hastings(
    space: OperatorSpace,
    risk: Callable[[float], float],
    config: GibbsConfig = GibbsConfig(),
    prior: Callable[[float], float] | None = None,
) -> MHResult:
    """Sample ``t`` with density proportional to ``exp(-gamma risk(t)) prior(t)``.

    The proposal adds a uniform step in ``[-step, step]`` and reflects at
    the ends of the parameter interval, so it is symmetric. The chain runs
    ``burn_in`` steps, then ``chain_length - burn_in`` more of which every
    ``thinning``-th is kept. Samples are binned to the nearest node of the
    space; the normalized histogram is returned as weights.
    """
    if space.params is None:
        raise ValueError("Metropolis-Hastings needs a parametrized space")
    lo, hi = space.domain if space.domain is not None else (float(space.params[0]), float(space.params[-1]))

    def log_target(t: float) -> float:
        p = 1.0 if prior is None else float(prior(t))
        if p <= 0:
            return -math.inf
        return -config.gamma * float(risk(t)) + math.log(p)

    seeds = np.random.SeedSequence(config.seed).spawn(config.chains)
    draws, rates, ess = [], [], 0.0
    for ss in seeds:
        kept, rate = _run_chain(log_target, lo, hi, config, np.random.default_rng(ss))
        draws.append(kept)
        rates.append(rate)
        ess += effective_sample_size(kept)
    samples = np.concatenate(draws)
    counts = np.bincount(bin_to_nodes(samples, space.params), minlength=space.size).astype(float)
    rate = float(np.mean(rates))
    warnings = []
    if not 0.05 <= rate <= 0.95:
        warnings.append(f"acceptance rate {rate:.3f} outside [0.05, 0.95]; adjust step_size")
        log.warning(warnings[-1])
    return MHResult(counts / counts.sum(), samples, rate, ess, tuple(warnings))


class ConvexFamilyRisk:
    """Exact empirical risk at any ``t`` of ``(1 - t) L0 + t L1``, memoized on a grid.

    ``t`` is rounded to a multiple of ``1 / resolution`` before evaluation.
    """

    def __init__(self, L0, L1, loss: LossSpec, signals, labels=None, resolution: int = 2000):
        self.A = np.asarray(getattr(L0, "matrix", L0), dtype=float)
        self.B = np.asarray(getattr(L1, "matrix", L1), dtype=float)
        self.loss = loss
        self.signals = np.atleast_2d(np.asarray(signals, dtype=float))
        self.labels = labels
        self.resolution = resolution
        self._cache: dict[int, float] = {}

    def __call__(self, t: float) -> float:
        key = int(round(float(t) * self.resolution))
        if key not in self._cache:
            s = key / self.resolution
            op = make_operator((1 - s) * self.A + s * self.B)
            self._cache[key] = float(empirical_risk(discrete_space([op], [1.0]), self.loss, self.signals, self.labels)[0])
        return self._cache[key]


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)).sum())


def node_cells(nodes: Sequence[float], lo: float, hi: float) -> np.ndarray:
    """Length of each nearest-node cell of ``nodes`` inside ``[lo, hi]``."""
    nodes = np.asarray(nodes, dtype=float)
    mids = (nodes[1:] + nodes[:-1]) / 2
    return np.diff(np.concatenate([[lo], mids, [hi]]))
