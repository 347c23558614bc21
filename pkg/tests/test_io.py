import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nematic_or.errors import ConfigError
from nematic_or.grid import Grid
from nematic_or.io import (
    MANIFEST,
    RunConfig,
    format_table,
    load_config,
    loads_config,
    parse_config,
    prepare_output,
    read_manifest,
    read_profile,
    read_table,
    write_manifest,
    write_profile,
)
from nematic_or.model import ModelParams
from nematic_or.seeds import SeedSpec

finite = st.floats(-1e6, 1e6, allow_nan=False)

configs = st.builds(
    dict,
    model=st.fixed_dictionaries(
        {},
        optional={
            "l_star": st.floats(1e-6, 10),
            "l2": st.floats(0, 1),
            "p_x": finite,
            "omega": st.floats(-0.5, 0.5),
            "gamma_act": st.floats(0, 10),
            "regime": st.sampled_from(["passive", "active", "constant_flow"]),
            "bulk_off": st.booleans(),
        },
    ),
    solver=st.fixed_dictionaries({}, optional={"dt": st.floats(1e-6, 1), "max_iter": st.integers(0, 500)}),
    grid=st.fixed_dictionaries({"n_cells": st.integers(2, 1024)}),
    seed=st.lists(
        st.builds(
            dict,
            kind=st.sampled_from(["uniform", "twist", "linear", "passive_or", "active_or"]),
            k=st.integers(-3, 3),
            s_min=st.floats(0, 1),
        ),
        min_size=1,
        max_size=3,
    ),
    sweep=st.builds(
        dict,
        points=st.lists(st.fixed_dictionaries({"gamma_act": st.floats(0, 5)}), max_size=4),
        strategy=st.sampled_from(["continuation", "cold"]),
    ),
    stability=st.booleans(),
    label=st.text(max_size=20),
)


@given(configs)
def test_config_round_trip(raw):
    cfg = parse_config(raw)
    text = cfg.to_json()
    again = loads_config(text)
    assert again == cfg
    assert again.to_json() == text


def test_defaults_and_sections():
    cfg = parse_config({})
    assert cfg == RunConfig()
    assert cfg.grid.n_cells == 256 and cfg.seeds == (SeedSpec(),)
    cfg = parse_config({"seed": {"kind": "passive_or", "k": 2}, "sweep": {"parameter": "l_star", "values": [1e-3, 1e-4]}})
    assert cfg.seeds == (SeedSpec("passive_or", 2),)
    assert cfg.sweep.points == ({"l_star": 1e-3}, {"l_star": 1e-4})
    sched = cfg.sweep.schedule(ModelParams())
    assert [p.l_star for p in sched] == [1e-3, 1e-4]


@pytest.mark.parametrize(
    "raw",
    [
        {"modle": {}},
        {"model": {"lstar": 1.0}},
        {"solver": {"tolerance": 1.0}},
        {"grid": {"n_cells": 64, "n": 3}},
        {"grid": {"n_cells": 1}},
        {"grid": {"n_cells": 2.5}},
        {"seed": {"kind": "passive_or", "j": 1}},
        {"seed": []},
        {"sweep": {"points": [{"gama": 1}]}},
        {"sweep": {"parameter": "p_x"}},
        {"sweep": {"parameter": "p_x", "values": [1], "points": []}},
        {"asymptotic": {"mode": "exact"}},
        {"model": {"omega": 2.0}},
        {"stability": "yes"},
        [],
    ],
)
def test_bad_configs_rejected(raw):
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_bad_json(tmp_path):
    with pytest.raises(ConfigError):
        loads_config("{not json")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"model": {"p_x": -1.0}}))
    assert load_config(path).model.p_x == -1.0


def test_overrides():
    cfg = RunConfig().with_overrides("model", p_x=-3.0).with_overrides("grid", n_cells=64)
    assert cfg.model.p_x == -3.0 and cfg.n_cells == 64
    cfg = cfg.with_overrides("stability", stability=False)
    assert cfg.stability is False
    with pytest.raises(ConfigError):
        cfg.with_overrides("model", bogus=1)


@given(n=st.integers(2, 64), seed=st.integers(0, 2**32 - 1))
def test_profile_round_trip_is_exact(n, seed, tmp_path_factory):
    rng = np.random.default_rng(seed)
    g = Grid(n)
    cols = [rng.standard_normal(n + 1) * 10.0 ** rng.integers(-12, 3) for _ in range(5)]
    path = tmp_path_factory.mktemp("p") / "profile.csv"
    write_profile(path, g.y, *cols)
    st_ = read_profile(path)
    assert np.array_equal(st_.q11, cols[0]) and np.array_equal(st_.q12, cols[1])
    assert np.array_equal(st_.u, cols[4])
    table = read_table(path)
    assert np.array_equal(table["theta"], cols[3])


def test_table_format():
    text = format_table(("a", "b"), ([-0.0, 1.0 / 3.0], [math.pi, 1e-300]))
    assert text.splitlines() == ["a,b", "0,3.1415926535897931", "0.33333333333333331,1e-300"]


def test_read_profile_validation(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("y,q11\n0,1\n")
    with pytest.raises(ConfigError):
        read_profile(p)
    g = Grid(4)
    write_profile(p, g.y * 0.9, *(np.zeros(5),) * 5)
    with pytest.raises(ConfigError):
        read_profile(p)
    with pytest.raises(ConfigError):
        read_profile(tmp_path / "nothing.csv")


def test_manifest(tmp_path):
    (tmp_path / "a.csv").write_text("x\n")
    write_manifest(tmp_path, {"files": ["a.csv"], "value": np.float64(1.5), "arr": np.arange(2), "bad": math.nan})
    man = read_manifest(tmp_path / MANIFEST)
    assert man == {"files": ["a.csv"], "value": 1.5, "arr": [0, 1], "bad": "nan"}
    with pytest.raises(FileNotFoundError):
        write_manifest(tmp_path, {"files": ["missing.csv"]})
    with pytest.raises(FileExistsError):
        prepare_output(tmp_path)
    assert prepare_output(tmp_path, force=True) == tmp_path
    assert prepare_output(tmp_path / "new" / "dir").is_dir()
