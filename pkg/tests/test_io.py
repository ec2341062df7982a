import numpy as np
import pytest

from probgsp.graphs import grid_2d
from probgsp.io import (
    REQUIRED,
    ConfigError,
    as_bool,
    as_floats,
    format_number,
    load_basechange,
    load_space,
    parse_config,
    read_csv,
    read_edge_list,
    write_csv,
    write_edge_list,
)

SCHEMA = {"alpha": (float, REQUIRED), "beta": (as_floats, (1.0,)), "flag": (as_bool, False)}


def write(tmp_path, text, name="c.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_config(tmp_path):
    p = write(tmp_path, "# comment\nalpha = 2.5\nbeta = 1, 2\n")
    cfg = parse_config(p, SCHEMA)
    assert cfg == {"alpha": 2.5, "beta": (1.0, 2.0), "flag": False}
    assert parse_config(p, SCHEMA, {"alpha": 9.0})["alpha"] == 9.0


@pytest.mark.parametrize(
    "text, match",
    [
        ("alpha = 1\nbetta = 2\n", "unknown key 'betta'"),
        ("alpha = 1\nalpha = 2\n", "duplicate"),
        ("beta = 1\n", "missing required key 'alpha'"),
        ("alpha = x\n", "bad value"),
        ("alpha = 1\nflag = maybe\n", "bad value"),
    ],
)
def test_config_errors(tmp_path, text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(write(tmp_path, text), SCHEMA)


def test_prefixed_family(tmp_path):
    p = write(tmp_path, "alpha = 1\nmask.2 = 3\nmask.0 = 4\n")
    cfg = parse_config(p, SCHEMA, prefixed={"mask": int})
    assert cfg["mask."] == {"2": 3, "0": 4}
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, "alpha = 1\nother.2 = 3\n"), SCHEMA, prefixed={"mask": int})


def test_csv_round_trip(tmp_path):
    x = np.random.default_rng(0).standard_normal((4, 3))
    write_csv(tmp_path / "a.csv", x, header="space=s id=1", columns=["a", "b", "c"])
    back, header = read_csv(tmp_path / "a.csv", expect_header=True)
    np.testing.assert_array_equal(back, x)
    assert header == "space=s id=1"
    assert float(format_number(0.1 + 0.2)) == 0.1 + 0.2


def test_edge_list_round_trip(tmp_path):
    g = grid_2d(3, 2)
    write_edge_list(tmp_path / "g.edges", g)
    assert read_edge_list(tmp_path / "g.edges", 6).edge_set() == g.edge_set()
    (tmp_path / "bad.edges").write_text("0 9 1\n")
    with pytest.raises(ValueError):
        read_edge_list(tmp_path / "bad.edges", 6)


def test_load_space_kinds(tmp_path):
    g = grid_2d(2, 3)
    write_edge_list(tmp_path / "g.edges", g)
    L = np.diag([1.0, 2.0, 3.0])
    write_csv(tmp_path / "L.csv", L)
    write_csv(tmp_path / "M.csv", 2 * L)
    write(tmp_path, "kind = discrete\nmatrices = L.csv, M.csv\nweights = 0.25, 0.75\n", "d.manifest")
    sp = load_space(tmp_path / "d.manifest").space
    np.testing.assert_allclose(sp.weights, [0.25, 0.75])
    write(tmp_path, "kind = convex-pair\nedges0 = g.edges\nedges1 = g.edges\nnodes = 6\nquadrature = 3\n", "c.manifest")
    loaded = load_space(tmp_path / "c.manifest")
    assert loaded.space.size == 3 and loaded.endpoints is not None
    write(tmp_path, "kind = discrete\nmatrices = L.csv\nweights = 1\ncolour = red\n", "x.manifest")
    with pytest.raises(ValueError):
        load_space(tmp_path / "x.manifest")


def test_load_basechange(tmp_path):
    p = write(tmp_path, "0 -> 1\n1 -> 0\n2 -> 1\nfiber 1 = 0.4 0.6\ntargets = 3\n", "m.map")
    h = load_basechange(p)
    np.testing.assert_array_equal(h.target_of, [1, 0, 1])
    assert h.n_targets == 3 and h.fiber_weights[2] is None
    np.testing.assert_allclose(h.fiber_weights[1], [0.4, 0.6])
