import filecmp
import subprocess
import sys

import numpy as np
import pytest

from probgsp.cli import main
from probgsp.demo import CONFIGS, write_demo
from probgsp.io import read_csv


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    return write_demo(tmp_path_factory.mktemp("demo"))


def run(demo, tmp_path, name, *extra):
    out = tmp_path / name.replace(".cfg", "")
    code = main([name.split("_")[0].replace(".cfg", ""), "--config", str(demo / name), "--out", str(out), *extra])
    return code, out


@pytest.mark.parametrize("name", [n for n in CONFIGS if n != "selftest.cfg"])
def test_demo_configs_succeed(demo, tmp_path, name):
    code, out = run(demo, tmp_path, name)
    assert code == 0
    assert (out / "config.resolved").exists() and len(list(out.iterdir())) >= 2


def test_filter_identity_mask(demo, tmp_path):
    cfg = demo / "id.cfg"
    cfg.write_text("space = discrete.manifest\nsignals = signals.csv\nresponse = mask\nmask = 1 1 5\n")
    assert main(["filter", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    sig, _ = read_csv(demo / "signals.csv")
    out, _ = read_csv(tmp_path / "filtered.csv")
    np.testing.assert_allclose(out, sig, atol=1e-12)


def test_learn_knn_concentrates_at_small_k(demo, tmp_path):
    code, out = run(demo, tmp_path, "learn.cfg")
    assert code == 0
    w, _ = read_csv(out / "weights.csv")
    ks = w[:, 1]
    assert ks[np.argmax(w[:, 3])] <= np.median(ks)


def test_unknown_key_exit_1(demo, tmp_path):
    cfg = demo / "typo.cfg"
    cfg.write_text("space = discrete.manifest\nsignal = signals.csv\n")
    assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_missing_file_exit_1(demo, tmp_path):
    cfg = demo / "missing.cfg"
    cfg.write_text("space = nowhere.manifest\nsignals = signals.csv\n")
    assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_degenerate_band_exit_2(demo, tmp_path):
    cfg = demo / "flat.cfg"
    cfg.write_text("space = discrete.manifest\nband_j = 12\nj = 4\ntrials = 1\nseed = 0\n")
    assert main(["sample", "--config", str(cfg), "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("name", ["spectrum.cfg", "filter.cfg", "sample.cfg", "learn_mh.cfg", "infect.cfg", "denoise.cfg", "basechange.cfg"])
def test_rerun_byte_identical(demo, tmp_path, name):
    _, a = run(demo, tmp_path / "a", name)
    _, b = run(demo, tmp_path / "b", name)
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    match, mismatch, errors = filecmp.cmpfiles(a, b, files, shallow=False)
    assert not mismatch and not errors


def test_seed_flag_overrides(demo, tmp_path):
    _, a = run(demo, tmp_path / "a", "sample.cfg", "--seed", "1")
    _, b = run(demo, tmp_path / "b", "sample.cfg", "--seed", "2")
    assert (a / "summary.csv").read_bytes() != (b / "summary.csv").read_bytes()
    assert "seed = 1" in (a / "config.resolved").read_text()


def test_module_entry_point(demo, tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "probgsp", "spectrum", "--config", str(demo / "spectrum.cfg"), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and res.stdout


def test_plot_option(demo, tmp_path):
    pytest.importorskip("matplotlib")
    code, out = run(demo, tmp_path, "spectrum.cfg", "--plot")
    assert code == 0 and list(out.glob("*.png"))
