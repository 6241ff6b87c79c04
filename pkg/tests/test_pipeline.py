import dataclasses
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from cycgrowth.pipeline.config import ConfigError, RunConfig, dump_config, load_config, parse_config
from cycgrowth.pipeline.data import (COUNTY_SAMPLES, STATE_SAMPLES, DataError, SampleDefinition,
                                     load_and_validate)
from cycgrowth.pipeline.simulate import DGPError, SyntheticDGP, simulate_dgp
from cycgrowth.pipeline.tables import fmt, run_tables, stars


def _copy_world(world, tmp_path):
    """Writable copy of the synthetic inputs; returns the copied config path."""
    for f in Path(world).parent.iterdir():
        if f.is_file():
            (tmp_path / f.name).write_bytes(f.read_bytes())
    return tmp_path / "config.txt"


def test_config_roundtrip_and_overrides(tmp_path):
    cfg = RunConfig(state_income="s.csv", seed=3, appendix_orders=((2, 0, 1), (1, 0, 0), (0, 0, 1)),
                    tables=("3", "8"), conley_km=750.0)
    back = parse_config(dump_config(cfg), base_dir=tmp_path)
    assert dataclasses.replace(back, base_dir=cfg.base_dir) == cfg
    assert cfg.override(seed=None, max_lag=10).max_lag == 10
    assert cfg.override(seed=None).seed == 3
    text = "state_income = a.csv   # quarterly\nmystery = 1\nseed = 5\n"
    c = parse_config(text, tmp_path)
    assert c.state_income == "a.csv" and c.seed == 5 and c.extra == {"mystery": "1"}
    assert c.path("state_income") == tmp_path / "a.csv"
    assert c.path("county_income") is None
    with pytest.raises(ConfigError, match="seed"):
        parse_config("seed = many\n")
    with pytest.raises(ConfigError):
        parse_config("conley_km = 0\n")
    with pytest.raises(ConfigError, match="appendix_orders"):
        parse_config("appendix_regions = NC,LA\n")


def test_missing_input_files_are_listed(tmp_path):
    cfg = parse_config("state_income = nope.csv\n", tmp_path)
    with pytest.raises(ConfigError, match="nope.csv"):
        load_and_validate(cfg)


def test_world_loads_with_expected_shape(world):
    data, report = load_and_validate(load_config(world))
    st, co = data["state"], data["county"]
    assert st.log_income.shape == (48, 124) and st.frequency == "quarterly"
    assert co.log_income.shape == (288, 31) and co.frequency == "annual"
    assert [len(s.resolve(st)) for s in STATE_SAMPLES] == [48, 37, 19]
    for lvl in ("state", "county"):
        rep = report[lvl]
        assert rep["event_count_raw"] == rep["event_count_merged"]
        assert rep["adjacency_pairs_dropped"] == 0
    # County samples nest: shoreline within NOAA coastal within exposed.
    sizes = {s.name: set(s.resolve(co)) for s in COUNTY_SAMPLES}
    assert sizes["Shoreline counties (NOAA)"] <= sizes["Coastal counties (NOAA)"] \
        <= sizes["Exposed counties"] <= sizes["All counties"]


def test_unbalanced_income_names_region_and_quarter(world, tmp_path):
    cfg_path = _copy_world(world, tmp_path)
    inc = pd.read_csv(tmp_path / "state_income.csv")
    drop = (inc.region_id == "GA") & (inc.year == 2001) & (inc.quarter == 3)
    inc[~drop].to_csv(tmp_path / "state_income.csv", index=False)
    with pytest.raises(DataError, match=r"region GA has no row for 2001Q3"):
        load_and_validate(load_config(cfg_path))


def test_zero_fill_count(world, tmp_path):
    cfg_path = _copy_world(world, tmp_path)
    ind = pd.read_csv(tmp_path / "state_indicator.csv", keep_default_na=False)
    zero = ind.cyc_kmh == 0
    ind[~zero].to_csv(tmp_path / "state_indicator.csv", index=False)
    data, report = load_and_validate(load_config(cfg_path))
    assert report["state"]["zero_filled"] == int(zero.sum())
    assert report["state"]["indicator_rows"] == int((~zero).sum())
    full, _ = load_and_validate(load_config(world))
    assert_allclose(data["state"].indicators["cyc_kmh"], full["state"].indicators["cyc_kmh"])


def test_indicator_keys_outside_panel_are_reported(world, tmp_path):
    cfg_path = _copy_world(world, tmp_path)
    ind = pd.read_csv(tmp_path / "state_indicator.csv", keep_default_na=False)
    extra = pd.DataFrame({"region_id": [f"Z{i:02d}" for i in range(12)], "year": 2000,
                          "quarter": 1, "cyc_kmh": 0.0, "pop_share": 0.0, "event_count": 0})
    pd.concat([ind, extra]).to_csv(tmp_path / "state_indicator.csv", index=False)
    with pytest.raises(DataError) as info:
        load_and_validate(load_config(cfg_path))
    msg = str(info.value)
    assert "12 indicator keys" in msg
    assert "Z09/2000Q1" in msg and "Z10" not in msg


def test_tag_nesting_is_enforced(world, tmp_path):
    cfg_path = _copy_world(world, tmp_path)
    tags = pd.read_csv(tmp_path / "county_tags.csv")
    i = tags.index[tags.exposed == 0][0]
    tags.loc[i, "noaa_coastal"] = 1
    tags.to_csv(tmp_path / "county_tags.csv", index=False)
    with pytest.raises(DataError, match="noaa_coastal regions not exposed"):
        load_and_validate(load_config(cfg_path))


def test_sample_definitions(world):
    data, _ = load_and_validate(load_config(world))
    co = data["county"]
    fl = SampleDefinition("FL", tag="exposed", state="FL").resolve(co)
    assert fl and all(r.startswith("FL") for r in fl)
    with pytest.raises(DataError):
        SampleDefinition("x", tag="inland")
    with pytest.raises(DataError, match="unknown regions"):
        SampleDefinition("x", ids=("QQ",)).resolve(co)


def test_dgp_is_pure_function_of_seed():
    a = simulate_dgp(SyntheticDGP("SAC", {"rho": 0.1, "lam": 0.2}, N=10, T=5, seed=4))
    b = simulate_dgp(SyntheticDGP("SAC", {"rho": 0.1, "lam": 0.2}, N=10, T=5, seed=4))
    assert np.array_equal(a.panel.y, b.panel.y)
    with pytest.raises(DGPError):
        SyntheticDGP("SEM", {"lam": 1.2})
    with pytest.raises(DGPError):
        SyntheticDGP("VAR")


def test_stars_and_format():
    assert [stars(p) for p in (0.2, 0.08, 0.03, 0.001)] == ["", "*", "**", "***"]
    assert fmt(0.000123456) == "0.000123"


def test_tables_run_and_are_deterministic(world, tmp_path):
    cfg = load_config(world)
    out = []
    for run in ("a", "b"):
        c = cfg.override(output=str(tmp_path / run))
        written = run_tables(c, tables=("summary", "3", "7", "figures"))
        out.append({f: (tmp_path / run / f).read_bytes() for f in written})
    assert out[0] == out[1]
    summary = json.loads(out[0]["table_summary.json"])
    obs = {(r["level"], r["variable"], r["sample"]): r["obs"] for r in summary["rows"]}
    assert obs[("state", "growth", "All states")] == 48 * 123
    t3 = out[0]["table_3.csv"].decode()
    assert "ERROR" not in t3 and "lambda" in t3.lower()
    with pytest.raises(KeyError):
        run_tables(cfg.override(output=str(tmp_path / "c")), tables=("99",))
