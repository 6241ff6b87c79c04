import json
from pathlib import Path

import pandas as pd
import pytest

from cycgrowth.cli import main


def _run(*args):
    assert main([str(a) for a in args]) == 0


def test_exposure_build_quarterly_and_annual(world, tmp_path):
    d = Path(world).parent
    _run("exposure", "build", "--pixels", d / "state_pixels.csv",
         "--population", d / "state_population.csv", "--out", tmp_path / "q.csv")
    q = pd.read_csv(tmp_path / "q.csv")
    ref = pd.read_csv(d / "state_indicator.csv")
    pd.testing.assert_frame_equal(q, ref)
    _run("exposure", "build", "--pixels", d / "county_pixels.csv", "--frequency", "annual",
         "--population", d / "county_population.csv", "--no-temporal-weighting",
         "--out", tmp_path / "a.csv")
    a = pd.read_csv(tmp_path / "a.csv")
    w = pd.read_csv(d / "county_indicator.csv")
    assert (a.cyc_kmh >= w.cyc_kmh - 1e-12).all() and (a.cyc_kmh > w.cyc_kmh).any()


def test_exposure_windfield(tmp_path):
    (tmp_path / "t.csv").write_text(
        "storm_id,timestamp,lat,lon,vmax_kmh,pmin_hpa,rmax_km\n"
        "S,2004-09-01T00:00Z,25.0,-80.0,180,,40\nS,2004-09-01T06:00Z,26.0,-80.5,170,,40\n")
    (tmp_path / "g.csv").write_text(
        "cell_lat,cell_lon,region_id,population\n25.5,-80.2,FL,100\n30.0,-90.0,LA,50\n")
    _run("exposure", "windfield", "--tracks", tmp_path / "t.csv", "--grid", tmp_path / "g.csv",
         "--out", tmp_path / "e.csv")
    e = pd.read_csv(tmp_path / "e.csv")
    assert list(e.region_id) == ["FL"] and e.wind_kmh[0] > 63


def test_time_series_commands(world, tmp_path):
    d = Path(world).parent
    _run("ts", "test-unitroot", "--input", d / "state_income.csv", "--column", "income_pc",
         "--region", "FL", "--test", "adf", "--out", tmp_path / "u.json")
    assert json.loads((tmp_path / "u.json").read_text())["adf"]["test_name"] == "ADF"
    _run("ts", "test-unitroot", "--config", world, "--input", d / "state_income.csv",
         "--column", "income_pc", "--transform", "log-diff", "--deseasonalize",
         "--out", tmp_path / "p.json")
    rep = json.loads((tmp_path / "p.json").read_text())
    assert set(rep) == {"adf", "pp", "llc", "ips"} and rep["llc"]["lags"] == 3
    _run("ts", "deseasonalize", "--input", d / "state_income.csv", "--column", "income_pc",
         "--region", "FL", "--log", "--out", tmp_path / "d.csv")
    ds = pd.read_csv(tmp_path / "d.csv")
    assert abs(ds.groupby("quarter").factor.first().sum()) < 1e-12


def test_arimax_and_lag_selection(tmp_path):
    _run("simulate", "--dgp", "ARMAX", "--params", "ar=0.5,exog=0.5;-0.3", "--T", "150",
         "--out", tmp_path)
    series = tmp_path / "series.csv"
    _run("ts", "select-lags", "--input", series, "--max-lag", "6", "--out", tmp_path / "l.csv")
    assert len(pd.read_csv(tmp_path / "l.csv")) == 7
    _run("ts", "arimax", "--input", series, "--p", "1", "--q", "0", "1", "--exog-lags", "1",
         "--out", tmp_path / "a.json", "--table", tmp_path / "cmp.csv")
    out = json.loads((tmp_path / "a.json").read_text())
    assert len(out["fits"]) == 2 and len(out["ranking"]) == 2
    assert "ARIMAX (1,0,1)" in pd.read_csv(tmp_path / "cmp.csv").columns


@pytest.mark.parametrize("model", ["sar", "sem", "sdm", "sac", "fe-conley"])
def test_panel_fit(tmp_path, model):
    _run("simulate", "--dgp", "SEM", "--params", "lam=0.3", "--N", "20", "--T", "10",
         "--out", tmp_path)
    _run("panel", "fit", "--model", model, "--panel", tmp_path / "panel.csv", "--y", "y",
         "--x", "x1,cyc", "--adjacency", tmp_path / "adjacency.csv",
         "--centroids", tmp_path / "centroids.csv", "--conley-km", "800",
         "--out", tmp_path / "fit.json")
    fit = json.loads((tmp_path / "fit.json").read_text())
    assert [c["name"] for c in fit["coefficients"]] == ["x1", "cyc"]
    if model == "sdm":
        assert {w["test"] for w in fit["wald"]} == {"theta_zero", "common_factor"}
    if model == "fe-conley":
        assert fit["covariance_type"] == "conley"


def test_replicate_flags_override_config(world, tmp_path):
    _run("replicate", "--config", world, "--table", "summary", "--out", tmp_path / "r")
    assert sorted(p.name for p in (tmp_path / "r").iterdir()) == \
        ["table_summary.csv", "table_summary.json", "validation_report.json"]


def test_errors_return_nonzero(tmp_path, capsys):
    assert main(["exposure", "build", "--pixels", str(tmp_path / "none.csv"),
                 "--population", str(tmp_path / "none.csv"), "--out", str(tmp_path / "x")]) == 1
    with pytest.raises(SystemExit):
        main(["replicate", "--table", "3"])
    with pytest.raises(SystemExit):
        main(["panel", "fit", "--model", "ols"])
