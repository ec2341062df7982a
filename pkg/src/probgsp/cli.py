"""Command-line entry point: ``probgsp <subcommand> --config FILE --out DIR``.

Exit status is 0 on success, 1 for invalid input and 2 for numerical
failure. Every run writes ``config.resolved`` (all settings, defaults
filled in, seed included) into the output directory.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .basechange import (
    filter_pullback_conv,
    filter_pushforward_conv,
    pullback_kernel,
    pullback_measure,
    pushforward_measure,
)
from .denoising import ToyConfig, accuracy, apply_masks, run_toy
from .errors import NumericalError
from .filters import (
    SpectralKernel,
    convolve,
    eigenvalue_kernel,
    filter_matrix,
    fit_bipolynomial,
    frequency_mask,
    polynomial_filter_matrix,
    polynomial_rep,
    response_kernel,
)
from .infection import InfectionConfig, run_experiment
from .io import (
    REQUIRED,
    ConfigError,
    as_bool,
    as_float,
    as_floats,
    as_int,
    as_ints,
    check_space_header,
    format_number,
    format_value,
    load_basechange,
    load_space,
    one_of,
    parse_config,
    read_csv,
    resolve,
    space_header,
    write_config,
    write_csv,
)
from .learning import (
    ConvexFamilyRisk,
    GibbsConfig,
    LossSpec,
    calibrate_threshold,
    empirical_risk,
    gibbs_posterior_exact,
    metropolis_hastings,
    total_variation,
)
from .opspace import DENSITIES, OperatorSpace
from .sampling import (
    band_from_mask,
    bandlimit_residual,
    bandpass_matrix,
    coefficient_bound_check,
    lowpass_band,
    plan_recovery,
    recover,
)
from .spectral import energy_profile, fourier, inverse_fourier, spectral_norm_sq

log = logging.getLogger("probgsp")


# -- shared helpers ---------------------------------------------------------


def _mask_triple(s: str) -> tuple[float, float, int]:
    vals = as_floats(s)
    if len(vals) != 3 or vals[2] != int(vals[2]):
        raise ValueError("mask needs 'r1 r2 c' with integer c")
    return (vals[0], vals[1], int(vals[2]))


KERNEL_KEYS = {
    "response": (one_of("mask", "power", "heat", "file"), "mask"),
    "mask": (_mask_triple, None),
    "power": (as_int, 1),
    "heat": (as_float, 1.0),
    "kernel": (str, None),
}
KERNEL_PREFIXED = {"mask": _mask_triple}


def _kernel(cfg: dict, space: OperatorSpace, base: Path) -> SpectralKernel:
    kind = cfg["response"]
    if kind == "mask":
        if cfg["mask"] is None:
            raise ConfigError("response = mask needs 'mask = r1 r2 c'")
        overrides = {int(k): v for k, v in cfg["mask."].items()} if cfg.get("mask.") else {}
        bad = [k for k in overrides if not 0 <= k < space.size]
        if bad:
            raise ConfigError(f"mask override for atom {bad[0]}, but the space has {space.size} atoms")
        return frequency_mask(space, *cfg["mask"], overrides=overrides)
    if kind == "power":
        return eigenvalue_kernel(space, cfg["power"])
    if kind == "heat":
        tau = cfg["heat"]
        return response_kernel(space, lambda lam: np.exp(-tau * lam))
    if cfg["kernel"] is None:
        raise ConfigError("response = file needs 'kernel = path'")
    path = resolve(base, cfg["kernel"])
    values, header = read_csv(path, expect_header=True)
    check_space_header(header, space, path)
    if values.shape != (space.size, space.n):
        raise ConfigError(f"{path}: kernel has shape {values.shape}, expected ({space.size}, {space.n})")
    return SpectralKernel(values, space.space_id)


def _signals(base: Path, rel: str, n: int) -> np.ndarray:
    """Signals CSV (rows nodes, columns signals) as ``(signals, n)``."""
    path = resolve(base, rel)
    table, _ = read_csv(path)
    if table.shape[0] != n:
        raise ConfigError(f"{path}: {table.shape[0]} rows but the space has {n} nodes")
    return table.T


def _require_seed(cfg: dict) -> int:
    if cfg.get("seed") is None:
        raise ConfigError("this subcommand is stochastic; give 'seed' in the config or --seed")
    return int(cfg["seed"])



def _space_at(cfg: dict, key: str, base: Path):
    return load_space(resolve(base, cfg[key]))


def _summary(path: Path, items: list[tuple[str, object]]) -> None:
    write_csv(path, [[k, v if isinstance(v, str) else format_number(v)] for k, v in items], columns=["quantity", "value"])


def _echo(items: list[tuple[str, object]]) -> None:
    for k, v in items:
        print(f"{k},{v if isinstance(v, str) else format_number(v)}")


def _emit(out: Path, items: list[tuple[str, object]]) -> None:
    _summary(out / "summary.csv", items)
    _echo(items)


# -- subcommands ------------------------------------------------------------

SPECTRUM_KEYS = {
    "space": (str, REQUIRED),
    "signals": (str, REQUIRED),
    "column": (as_int, 0),
    "seed": (as_int, None),
}


def cmd_spectrum(cfg: dict, base: Path, out: Path, plot: bool) -> None:
    loaded = _space_at(cfg, "space", base)
    space = loaded.space
    signals = _signals(base, cfg["signals"], space.n)
    if not 0 <= cfg["column"] < signals.shape[0]:
        raise ConfigError(f"column {cfg['column']} out of range for {signals.shape[0]} signals")
    f = signals[cfg["column"]]
    fhat = fourier(space, f)
    header = space_header(loaded.manifest, space)
    write_csv(out / "spectral.csv", fhat.values, header=header)
    energy = energy_profile(space, f)
    params = space.params if space.params is not None else np.arange(space.size, dtype=float)
    rows = [[j, params[j], space.weights[j], energy[j].sum(), *energy[j]] for j in range(space.size)]
    cols = ["atom", "param", "weight", "total"] + [f"e{i}" for i in range(space.n)]
    write_csv(out / "energy.csv", rows, header=header, columns=cols)
    norm_sq = float(f @ f)
    tnorm = spectral_norm_sq(space, fhat)
    _emit(out, [
        ("norm_sq", norm_sq),
        ("transform_norm_sq", tnorm),
        ("parseval_gap", abs(norm_sq - tnorm)),
        ("roundtrip_error", float(np.linalg.norm(inverse_fourier(space, fhat) - f))),
    ])
    if plot:
        plotting.heatmap(out / "energy.png", energy, "spectral energy per atom")


FILTER_KEYS = {
    "space": (str, REQUIRED),
    "signals": (str, REQUIRED),
    **KERNEL_KEYS,
    "polynomial": (as_bool, False),
    "bidegree": (as_ints, ()),
    "emit_matrix": (as_bool, False),
    "seed": (as_int, None),
}


def cmd_filter(cfg: dict, base: Path, out: Path, plot: bool) -> None:
    loaded = _space_at(cfg, "space", base)
    space = loaded.space
    header = space_header(loaded.manifest, space)
    kernel = _kernel(cfg, space, base)
    signals = _signals(base, cfg["signals"], space.n)
    filtered = np.array([convolve(space, kernel, f) for f in signals])
    write_csv(out / "kernel.csv", kernel.values, header=header)
    write_csv(out / "filtered.csv", filtered.T)
    M = filter_matrix(space, kernel)
    items = [("filter_norm", float(np.linalg.norm(M, 2)))]
    if cfg["emit_matrix"]:
        write_csv(out / "matrix.csv", M, header=header)
    if cfg["polynomial"]:
        rep = polynomial_rep(space, kernel)
        write_csv(out / "polynomial.csv", rep.coeffs, header=header)
        P = polynomial_filter_matrix(space, rep)
        items.append(("polynomial_path_gap", float(np.abs(P - M).max())))
    if cfg["bidegree"]:
        if len(cfg["bidegree"]) != 2:
            raise ConfigError("bidegree needs two integers 'd k'")
        d, k = cfg["bidegree"]
        rep = fit_bipolynomial(space, kernel, d, k)
        write_csv(out / "bipolynomial.csv", [p.coef for p in rep.coeff_polys], header=f"{header} legendre-basis domain={rep.coeff_polys[0].domain[0]:.17g},{rep.coeff_polys[0].domain[1]:.17g}")
        items.append(("bipolynomial_residual", rep.fit_residual))
    _emit(out, items)
    if plot:
        plotting.heatmap(out / "kernel.png", kernel.values, "kernel")


DENOISE_KEYS = {
    "mode": (one_of("toy", "files"), "toy"),
    "space": (str, None),
    "signals": (str, None),
    "clean": (str, None),
    "mask": (_mask_triple, None),
    "nodes": (as_int, 60),
    "classes": (as_int, 3),
    "dense_in": (as_float, 0.25),
    "dense_out": (as_float, 0.04),
    "sparse_in": (as_float, 0.1),
    "sparse_out": (as_float, 0.01),
    "snr_db": (as_floats, (-5.0, -3.0, -1.0)),
    "tune_samples": (as_int, 30),
    "test_samples": (as_int, 300),
    "mixture_steps": (as_int, 19),
    "seed": (as_int, None),
}


def cmd_denoise(cfg: dict, base: Path, out: Path, plot: bool) -> None:
    if cfg["mode"] == "toy":
        seed = _require_seed(cfg)
        toy = ToyConfig(
            nodes=cfg["nodes"], classes=cfg["classes"],
            dense_in=cfg["dense_in"], dense_out=cfg["dense_out"],
            sparse_in=cfg["sparse_in"], sparse_out=cfg["sparse_out"],
            snr_db=tuple(cfg["snr_db"]), tune_samples=cfg["tune_samples"],
            test_samples=cfg["test_samples"], mixture_steps=cfg["mixture_steps"], seed=seed,
        )
        results = run_toy(toy)
        rows = [[r.mode, r.snr_db, r.tune_accuracy, r.test_accuracy, r.noisy_accuracy, r.setting] for r in results]
        write_csv(out / "results.csv", rows, columns=["mode", "snr_db", "tune_accuracy", "test_accuracy", "noisy_accuracy", "setting"])
        items = []
        for snr in toy.snr_db:
            acc = {r.mode: r.test_accuracy for r in results if r.snr_db == snr}
            items.append((f"distributional_margin_{snr:g}dB", acc["distributional"] - max(acc["single_a"], acc["single_d"])))
        _emit(out, items)
        if plot:
            plotting.bars(out / "accuracy.png", [f"{r.mode} {r.snr_db:g}dB" for r in results],
                          [r.test_accuracy for r in results], "test accuracy", "accuracy")
        return
    for key in ("space", "signals", "mask"):
        if cfg[key] is None:
            raise ConfigError(f"mode = files needs {key!r}")
    space = _space_at(cfg, "space", base).space
    noisy = _signals(base, cfg["signals"], space.n)
    overrides = {int(k): v for k, v in cfg["mask."].items()}
    filtered = apply_masks(space, noisy, (cfg["mask"], overrides))
    write_csv(out / "filtered.csv", filtered.T)
    items = []
    if cfg["clean"] is not None:
        clean = _signals(base, cfg["clean"], space.n)
        if clean.shape[0] == 1:
            clean = np.repeat(clean, noisy.shape[0], axis=0)
        if clean.shape != noisy.shape:
            raise ConfigError(f"clean signals have {clean.shape[0]} columns, noisy have {noisy.shape[0]}")
        for i, (fo, fc) in enumerate(zip(filtered, clean)):
            items.append((f"mse_{i}", float(np.mean((fo - fc) ** 2))))
            items.append((f"accuracy_{i}", float(accuracy(fo, fc))))
    _emit(out, items)


SAMPLE_KEYS = {
    "space": (str, REQUIRED),
    "j": (as_int, REQUIRED),
    "band_j": (as_int, None),
    "band_mask": (str, None),
    "signals": (str, None),
    "trials": (as_int, 10),
    "noise": (as_float, 0.01),
    "vertices": (as_ints, ()),
    "cond_max": (as_float, 1e8),
    "max_tries": (as_int, 1000),
    "seed": (as_int, None),
}


def cmd_sample(cfg: dict, base: Path, out: Path, plot: bool) -> None:
    seed = _require_seed(cfg)
    loaded = _space_at(cfg, "space", base)
    space = loaded.space
    if (cfg["band_j"] is None) == (cfg["band_mask"] is None):
        raise ConfigError("give exactly one of 'band_j' and 'band_mask'")
    if cfg["band_j"] is not None:
        band = lowpass_band(space, cfg["band_j"])
    else:
        path = resolve(base, cfg["band_mask"])
        mask, header = read_csv(path, expect_header=True)
        check_space_header(header, space, path)
        band = band_from_mask(space, mask != 0)
    if cfg["trials"] < 1:
        raise ConfigError("trials must be positive")
    B = bandpass_matrix(space, band)
    rng = np.random.default_rng(seed)
    given = _signals(base, cfg["signals"], space.n) if cfg["signals"] is not None else None
    fixed = cfg["vertices"] or None
    rows, recovered, chosen = [], [], []
    for t in range(cfg["trials"]):
        if given is not None:
            f = given[t % given.shape[0]]
        else:
            g = rng.standard_normal(space.n)
            f = B @ (B @ (B @ g))
            f = f / np.linalg.norm(f) + cfg["noise"] * rng.standard_normal(space.n) / np.sqrt(space.n)
        plan = plan_recovery(space, band, cfg["j"], fixed, rng, cfg["cond_max"], cfg["max_tries"])
        f_rec, bound_a, bound_b = recover(plan, f[plan.vertices], f_true=f)
        eps = bandlimit_residual(space, band, f)
        rows.append([
            t, plan.lambda_j, plan.sigma, plan.log_abs_det, plan.condition, eps,
            float(np.linalg.norm(f_rec - f)), bound_a,
            bandlimit_residual(space, band, f_rec), bound_b,
            int(coefficient_bound_check(space, band, f, eps)),
        ])
        recovered.append(f_rec)
        chosen.append(plan.vertices)
    cols = ["trial", "lambda_j", "sigma", "log_abs_det", "condition", "eps", "error", "bound_a",
            "recovered_residual", "bound_b", "coefficient_bound_holds"]
    write_csv(out / "summary.csv", rows, columns=cols)
    write_csv(out / "recovered.csv", np.array(recovered).T)
    write_csv(out / "vertices.csv", np.array(chosen))
    table = np.array(rows, dtype=float)
    _echo([
        ("trials", cfg["trials"]),
        ("max_error_over_bound_a", float((table[:, 6] / np.maximum(table[:, 7], 1e-300)).max())),
        ("max_residual_over_bound_b", float((table[:, 8] / np.maximum(table[:, 9], 1e-300)).max())),
    ])
    if plot:
        plotting.lines(out / "recovery.png", table[:, 0], {"error": table[:, 6], "bound_a": table[:, 7]},
                       "recovery error and bound", "trial", "norm")


LEARN_KEYS = {
    "space": (str, REQUIRED),
    "signals": (str, REQUIRED),
    "labels": (str, None),
    "loss": (one_of("spectral_compaction", "zero_one_detection"), "spectral_compaction"),
    "cutoff": (as_int, None),
    "band": (as_ints, ()),
    "thresholds": (as_floats, ()),
    "gamma": (as_float, 10.0),
    "method": (one_of("exact", "mh"), "exact"),
    "chain_length": (as_int, 50_000),
    "burn_in": (as_int, 5_000),
    "thinning": (as_int, 5),
    "step_size": (as_float, 0.05),
    "chains": (as_int, 1),
    "seed": (as_int, None),
}


def cmd_learn(cfg: dict, base: Path, out: Path, plot: bool) -> None:
    loaded = _space_at(cfg, "space", base)
    space = loaded.space
    signals = _signals(base, cfg["signals"], space.n)
    labels = None
    if cfg["labels"] is not None:
        labels = read_csv(resolve(base, cfg["labels"]))[0].ravel().astype(int)
    thresholds = tuple(cfg["thresholds"])
    if cfg["loss"] == "zero_one_detection" and not thresholds:
        if labels is None:
            raise ConfigError("zero_one_detection needs 'labels'")
        normal = signals[labels == 0]
        if normal.shape[0] == 0:
            raise ConfigError("no label-0 signals to calibrate thresholds from")
        thresholds = tuple(calibrate_threshold(op, normal, cfg["band"]) for op in space.atoms)
    loss = LossSpec(cfg["loss"], cutoff=cfg["cutoff"], band=tuple(cfg["band"]), thresholds=thresholds)
    theta = empirical_risk(space, loss, signals, labels)
    exact = gibbs_posterior_exact(theta, cfg["gamma"], prior=space.weights)
    params = space.params if space.params is not None else np.arange(space.size, dtype=float)
    items = [("method", cfg["method"]), ("gamma", cfg["gamma"])]
    if cfg["method"] == "exact":
        weights = exact
    else:
        seed = _require_seed(cfg)
        if loaded.endpoints is None:
            raise ConfigError("method = mh needs a convex-pair space")
        gcfg = GibbsConfig(cfg["gamma"], cfg["chain_length"], cfg["burn_in"], cfg["thinning"],
                           cfg["step_size"], cfg["chains"], seed)
        risk = ConvexFamilyRisk(*loaded.endpoints, loss, signals, labels)
        res = metropolis_hastings(space, risk, gcfg, prior=DENSITIES[loaded.settings["density"]])
        weights = res.weights
        items += [("acceptance_rate", res.acceptance_rate), ("ess", res.ess),
                  ("tv_to_node_posterior", total_variation(weights, exact)), ("warnings", len(res.warnings))]
    top = int(np.argmax(weights))
    items += [("map_atom", top), ("map_param", float(params[top]))]
    rows = [[j, params[j], theta[j], weights[j]] for j in range(space.size)]
    write_csv(out / "weights.csv", rows, columns=["atom", "param", "risk", "weight"])
    _emit(out, items)
    if plot:
        plotting.bars(out / "weights.png", [f"{p:g}" for p in params], weights, "learned weights", "weight")


BASECHANGE_KEYS = {
    "z_space": (str, REQUIRED),
    "x_space": (str, REQUIRED),
    "map": (str, REQUIRED),
    "construction": (one_of("pushforward_measure", "pullback_measure", "pullback_filter", "pushforward_filter"), REQUIRED),
    "signals": (str, None),
    **KERNEL_KEYS,
    "seed": (as_int, None),
}

_PATH_KEYS = ("matrices", "edges0", "edges1", "points")


def _reweighted_manifest(loaded, out: Path) -> str:
    """Manifest text for ``loaded``'s space with weights read from ``weights.csv``."""
    lines = []
    for key, value in sorted(loaded.settings.items()):
        if key in ("weights", "weights_file") or value in (None, ()):
            continue
        if key in _PATH_KEYS:
            paths = value if isinstance(value, tuple) else (value,)
            rel = [os.path.relpath(resolve(loaded.manifest, p).resolve(), out.resolve()) for p in paths]
            value = tuple(rel) if isinstance(value, tuple) else rel[0]
        lines.append(f"{key} = {format_value(value)}")
    lines.append("weights_file = weights.csv")
    return "\n".join(lines) + "\n"


def _filter_as_matrix(apply, n: int) -> np.ndarray:
    return np.column_stack([apply(e) for e in np.eye(n)])


def cmd_basechange(cfg: dict, base: Path, out: Path, plot: bool) -> None:
    z = _space_at(cfg, "z_space", base)
    x = _space_at(cfg, "x_space", base)
    h = load_basechange(resolve(base, cfg["map"]))
    if z.space.n != x.space.n:
        raise ConfigError(f"Z has {z.space.n} nodes but X has {x.space.n}")
    kind = cfg["construction"]
    items = [("construction", kind), ("injective", "true" if h.is_injective else "false")]
    if kind in ("pushforward_measure", "pullback_measure"):
        target = pushforward_measure(h, z.space, x.space) if kind == "pushforward_measure" else pullback_measure(h, x.space, z.space)
        src = x if kind == "pushforward_measure" else z
        params = target.params if target.params is not None else np.arange(target.size, dtype=float)
        write_csv(out / "weights.csv", [[j, params[j], w] for j, w in enumerate(target.weights)],
                  columns=["atom", "param", "weight"])
        (out / "space.manifest").write_text(_reweighted_manifest(src, out))
        items.append(("space_id", target.space_id))
        _emit(out, items)
        return
    kernel = _kernel(cfg, x.space, base)
    n = z.space.n
    pulled = _filter_as_matrix(lambda e: filter_pullback_conv(h, z.space, x.space, kernel, e), n)
    pushed = _filter_as_matrix(lambda e: filter_pushforward_conv(h, z.space, x.space, kernel, e), n)
    if kind == "pullback_filter":
        zk = pullback_kernel(h, z.space, x.space, kernel)
        write_csv(out / "kernel.csv", zk.values, header=space_header(z.manifest, z.space))
        M = pulled
    else:
        M = pushed
        moved = pushforward_measure(h, z.space, x.space)
        direct = filter_matrix(moved, SpectralKernel(kernel.values, moved.space_id))
        items.append(("gap_to_pushed_measure_convolution", float(np.abs(M - direct).max())))
    items.append(("gap_between_constructions", float(np.abs(pushed - pulled).max())))
    write_csv(out / "matrix.csv", M)
    if cfg["signals"] is not None:
        sig = _signals(base, cfg["signals"], n)
        write_csv(out / "filtered.csv", (sig @ M.T).T)
    _emit(out, items)
    if plot:
        plotting.heatmap(out / "matrix.png", M, kind, "node", "node")


INFECT_KEYS = {
    "graph": (one_of("lattice", "scale_free"), "lattice"),
    "rows": (as_int, 15),
    "cols": (as_int, 15),
    "nodes": (as_int, 300),
    "attach": (as_int, 2),
    "fractions": (as_floats, (0.2, 0.4, 0.6, 0.8)),
    "candidate_fraction": (as_float, 0.2),
    "infected_fraction": (as_float, 0.4),
    "trials": (as_int, 200),
    "fast_draws": (as_int, 10),
    "trees_per_candidate": (as_int, 5),
    "gamma": (as_float, 10.0),
    "bootstrap": (as_int, 2000),
    "seed": (as_int, None),
}


def cmd_infect(cfg: dict, base: Path, out: Path, plot: bool) -> None:
    seed = _require_seed(cfg)
    icfg = InfectionConfig(**{k: (tuple(v) if isinstance(v, tuple) else v) for k, v in cfg.items() if k != "seed"}, seed=seed)
    rows = run_experiment(icfg)
    table = [[r.fraction, r.fast_edges, r.error_without, r.error_with, r.improvement_pct, r.ci_low, r.ci_high] for r in rows]
    write_csv(out / "table.csv", table, columns=["fast_fraction", "fast_edges", "error_without", "error_with",
                                                  "improvement_pct", "ci_low", "ci_high"])
    trials = [[r.fraction, i, a, b] for r in rows for i, (a, b) in enumerate(zip(r.errors_without, r.errors_with))]
    write_csv(out / "trials.csv", trials, columns=["fast_fraction", "trial", "error_without", "error_with"])
    _echo([(f"improvement_pct_{r.fraction:g}", r.improvement_pct) for r in rows])
    if plot:
        plotting.lines(out / "errors.png", [r.fraction for r in rows],
                       {"without": [r.error_without for r in rows], "with": [r.error_with for r in rows]},
                       "source distance error", "fast-edge fraction", "mean distance")


SELFTEST_KEYS = {
    "only": (as_ints, ()),
    "seed": (as_int, None),
}


def cmd_selftest(cfg: dict, base: Path, out: Path, plot: bool) -> None:
    from .selftest import run_checks

    results = run_checks(cfg["only"] or None)
    write_csv(out / "selftest.csv", [[r.id, r.name, "pass" if r.passed else "fail", r.detail] for r in results],
              columns=["id", "name", "result", "detail"])
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} [{r.id}] {r.name}: {r.detail}")
    failed = [r for r in results if not r.passed]
    if failed:
        raise NumericalError(f"{len(failed)} self-check(s) failed: {', '.join(r.name for r in failed)}")


COMMANDS = {
    "spectrum": (cmd_spectrum, SPECTRUM_KEYS, None, "transform a signal and report per-atom energy"),
    "denoise": (cmd_denoise, DENOISE_KEYS, {"mask": _mask_triple}, "frequency-mask denoising (files or synthetic comparison)"),
    "filter": (cmd_filter, FILTER_KEYS, KERNEL_PREFIXED, "apply a convolution filter and its polynomial forms"),
    "sample": (cmd_sample, SAMPLE_KEYS, None, "sample and recover approximately bandlimited signals"),
    "learn": (cmd_learn, LEARN_KEYS, None, "learn the operator distribution from data"),
    "basechange": (cmd_basechange, BASECHANGE_KEYS, KERNEL_PREFIXED, "move measures and filters along a map"),
    "infect": (cmd_infect, INFECT_KEYS, None, "infection source localization with and without base change"),
    "selftest": (cmd_selftest, SELFTEST_KEYS, None, "run the built-in property checks"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probgsp", description="Signal processing over distributions of graph shift operators.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, _, _, helptext) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", type=Path, required=name != "selftest", help="key = value config file")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--plot", action="store_true", help="also render PNG figures (needs matplotlib)")
        p.add_argument("-v", "--verbose", action="store_true")
    demo = sub.add_parser("demo", help="write example inputs and configs")
    demo.add_argument("--out", type=Path, default=Path("demo"))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "demo":
        from .demo import write_demo

        write_demo(args.out)
        print(f"demo inputs written to {args.out}")
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    fn, schema, prefixed, _ = COMMANDS[args.command]
    try:
        cfg = parse_config(args.config, schema, {"seed": args.seed}, prefixed)
        args.out.mkdir(parents=True, exist_ok=True)
        resolved = {"command": args.command, **{k: v for k, v in cfg.items() if not k.endswith(".")}}
        for fam in (k for k in cfg if k.endswith(".")):
            for suffix, value in cfg[fam].items():
                resolved[fam + suffix] = value
        write_config(args.out / "config.resolved", resolved)
        base = args.config if args.config is not None else Path.cwd() / "selftest.cfg"
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            fn(cfg, base, args.out, args.plot)
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"probgsp {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"probgsp {args.command}: invalid input: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
