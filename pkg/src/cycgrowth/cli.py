"""Command-line interface: ``cycgrowth <group> <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .exposure import (build_annual_indicator, build_quarterly_indicator, read_population_csv,
                       write_indicator_csv)
from .gridwind import (WIND_THRESHOLD_KMH, WindModelParams, ingest_gridded_exposure,
                       read_grid_csv, read_track_csv, simulate_windfield, write_exposure_csv)
from .pipeline.config import RunConfig, load_config

log = logging.getLogger("cycgrowth")


def _config(args):
    return load_config(args.config) if getattr(args, "config", None) else RunConfig()


def _pick(flag, default):
    return default if flag is None else flag


def _write_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _json_default(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialise {type(v).__name__}")


def _read_series(path, column, region=None):
    """Long CSV (region_id, year, quarter, <column>) -> {region: Series}."""
    from .tseries import Series

    df = pd.read_csv(path, dtype={"region_id": str})
    for c in ("region_id", "year", column):
        if c not in df.columns:
            raise SystemExit(f"{path}: missing column {c!r}")
    if region is not None:
        df = df[df["region_id"] == region]
        if df.empty:
            raise SystemExit(f"{path}: no rows for region {region!r}")
    quarterly = "quarter" in df.columns and df["quarter"].notna().all()
    out = {}
    for rid, g in df.groupby("region_id", sort=True):
        if quarterly:
            g = g.sort_values(["year", "quarter"])
            periods = [(int(y), int(q)) for y, q in zip(g["year"], g["quarter"])]
            out[rid] = Series(rid, g[column].to_numpy(float), periods)
        else:
            g = g.sort_values("year")
            out[rid] = Series(rid, g[column].to_numpy(float),
                              [(int(y), 0) for y in g["year"]], "annual")
    return out


# ---------------------------------------------------------------- exposure

def cmd_exposure_build(args):
    footprints = ingest_gridded_exposure(args.pixels, args.threshold)
    pops = read_population_csv(args.population)
    if args.frequency == "quarterly":
        series = build_quarterly_indicator(footprints, pops)
    else:
        series = build_annual_indicator(footprints, pops,
                                        temporal_weighting=not args.no_temporal_weighting)
    write_indicator_csv(series, args.out)
    log.info("wrote %d region-periods to %s", len(series), args.out)


def cmd_exposure_windfield(args):
    tracks = read_track_csv(args.tracks)
    grid = read_grid_csv(args.grid)
    params = WindModelParams(B=args.holland_b, rmax_default=args.rmax,
                             step_minutes=args.step_minutes, threshold=args.threshold)
    footprints = []
    for sid in sorted(tracks):
        footprints += simulate_windfield(tracks[sid], grid, params)
    write_exposure_csv(footprints, args.out)
    log.info("wrote %d storm-region footprints to %s", len(footprints), args.out)


# ---------------------------------------------------------------- time series

def _transform(series, how, deseason):
    from .tseries import deseasonalize, growth

    out = {}
    for rid, s in series.items():
        if how in ("log", "log-diff"):
            s = s.replace(np.log(s.values))
        if deseason:
            s = deseasonalize(s)
        if how in ("diff", "log-diff"):
            s = growth(s, log_first=False)
        out[rid] = s
    return out


def cmd_ts_unitroot(args):
    from .tseries import adf_test, ips_test, llc_test, pp_test, rejection_fraction

    cfg = _config(args)
    series = _transform(_read_series(args.input, args.column, args.region), args.transform,
                        args.deseasonalize)
    lags = _pick(args.lags, cfg.unitroot_lags)
    panel_lags = _pick(args.panel_lags, cfg.panel_unitroot_lags)
    trend = not args.no_trend
    tests = ["adf", "pp", "llc", "ips"] if args.test == "all" else [args.test]
    result = {}
    for t in tests:
        if t in ("adf", "pp"):
            if len(series) == 1:
                fn = adf_test if t == "adf" else pp_test
                result[t] = fn(next(iter(series.values())), lags, trend).to_dict()
            else:
                result[t] = rejection_fraction(series, t.upper(), lags, trend).to_dict()
        elif len(series) > 1:
            fn = llc_test if t == "llc" else ips_test
            result[t] = fn(list(series.values()), panel_lags, trend).to_dict()
    _write_json(result, args.out)


def cmd_ts_deseasonalize(args):
    from .tseries import seasonal_factors

    series = _read_series(args.input, args.column, args.region)
    rows = []
    for rid, s in series.items():
        v = np.log(s.values) if args.log else s.values
        ls = s.replace(v)
        f = seasonal_factors(ls)
        adj = v - f[ls.quarters - 1]
        for (y, q), a, b in zip(s.periods, v, adj):
            rows.append((rid, y, q, repr(float(a)), repr(float(b)), repr(float(f[q - 1]))))
    out = pd.DataFrame(rows, columns=["region_id", "year", "quarter", "value", "adjusted",
                                      "factor"])
    out.to_csv(args.out if args.out else sys.stdout, index=False, lineterminator="\n")


def _gx(args):
    data = pd.read_csv(args.input, dtype={"region_id": str})
    if args.region is None and data["region_id"].nunique() > 1:
        raise SystemExit("several regions in input; choose one with --region")
    g = _read_series(args.input, args.g_column, args.region)
    x = _read_series(args.input, args.x_column, args.region)
    (rid,) = g
    return g[rid], x[rid]


def cmd_ts_select_lags(args):
    from .arimax import select_lags

    cfg = _config(args)
    g, x = _gx(args)
    rep = select_lags(g, x, _pick(args.max_lag, cfg.max_lag))
    frame = rep.to_frame()
    frame.to_csv(args.out if args.out else sys.stdout, index=False, lineterminator="\n")
    log.info("selected lags: %s", rep.selected)


def cmd_ts_arimax(args):
    from .arimax import ArimaxSpec, compare_fits, fit_arimax

    cfg = _config(args)
    g, x = _gx(args)
    p = _pick(args.p, cfg.arimax_p)
    qs = args.q if args.q else [0]
    fits = [fit_arimax(g, x, ArimaxSpec(p, 0, q, args.exog_lags, not args.no_constant),
                       seed=_pick(args.seed, cfg.seed)) for q in qs]
    cmp = compare_fits(fits)
    _write_json({"fits": [f.to_dict() for f in fits],
                 "ranking": [cmp.labels[i] for i in cmp.ranking]}, args.out)
    if args.table:
        cmp.table.to_csv(args.table, lineterminator="\n")


# ---------------------------------------------------------------- panel

def cmd_panel_fit(args):
    from .spatial import (FITTERS, PanelDataset, build_contiguity_weights, fit_fe_conley,
                          read_adjacency_csv, read_centroid_csv)

    cfg = _config(args)
    df = pd.read_csv(args.panel, dtype={"region_id": str})
    x = [c.strip() for c in args.x.split(",")]
    panel = PanelDataset.from_frame(df, args.y, x, region="region_id", period=args.period)
    centroids = read_centroid_csv(args.centroids) if args.centroids else {}
    if args.model == "fe-conley":
        if not centroids:
            raise SystemExit("fe-conley needs --centroids")
        fit = fit_fe_conley(panel, centroids, _pick(args.conley_km, cfg.conley_km),
                            _pick(args.conley_lags, cfg.conley_lags))
    else:
        if not args.adjacency:
            raise SystemExit(f"{args.model} needs --adjacency")
        W = build_contiguity_weights(panel.region_ids, read_adjacency_csv(args.adjacency),
                                     centroids)
        fit = FITTERS[args.model](panel, W)
    out = fit.to_dict()
    if args.model == "sdm":
        from .spatial import wald_specification

        out["wald"] = [wald_specification(fit, t).to_dict()
                       for t in ("theta_zero", "common_factor")]
    _write_json(out, args.out)


# ---------------------------------------------------------------- simulate / replicate

def _parse_params(text):
    params = {}
    for item in filter(None, (t.strip() for t in (text or "").split(","))):
        key, _, value = item.partition("=")
        vals = [float(v) for v in value.split(";")]
        params[key.strip()] = vals if ";" in value or key.strip() in (
            "beta", "theta", "ar", "ma", "exog", "pattern") else vals[0]
    return params


def cmd_simulate(args):
    from .pipeline.simulate import SyntheticDGP, simulate_dgp
    from .pipeline.world import generate_world

    cfg = _config(args)
    seed = _pick(args.seed, cfg.seed)
    out = Path(args.out)
    if args.dgp is None:
        path = generate_world(out, seed=seed, first_year=args.first_year,
                              last_year=args.last_year)
        log.info("synthetic inputs and config written to %s", path)
        return
    out.mkdir(parents=True, exist_ok=True)
    d = simulate_dgp(SyntheticDGP(args.dgp, _parse_params(args.params), args.N, args.T, seed))
    if d.panel is not None:
        p = d.panel
        rows = {"region_id": np.repeat(p.region_ids, p.n_periods),
                "period": np.tile(p.periods, p.n_regions), "y": p.y.ravel()}
        for j, n in enumerate(p.names):
            rows[n] = p.X[:, :, j].ravel()
        pd.DataFrame(rows).to_csv(out / "panel.csv", index=False, lineterminator="\n")
        ids = list(d.weights.ids)
        pairs = sorted({tuple(sorted((ids[i], ids[j])))
                        for i, j in zip(*np.nonzero(d.weights.matrix))})
        pd.DataFrame(pairs, columns=["region_a", "region_b"]).to_csv(
            out / "adjacency.csv", index=False, lineterminator="\n")
        pd.DataFrame([(r, *d.centroids[r]) for r in ids], columns=["region_id", "lat", "lon"]
                     ).to_csv(out / "centroids.csv", index=False, lineterminator="\n")
    elif d.g is not None:
        pd.DataFrame({"region_id": d.g.region_id, "year": [y for y, _ in d.g.periods],
                      "quarter": [q for _, q in d.g.periods], "g": d.g.values,
                      "x": d.x.values}).to_csv(out / "series.csv", index=False,
                                               lineterminator="\n")
    else:
        periods = d.truth["periods"]
        pd.DataFrame([(f"R{i:03d}", y, q, float(np.exp(v)))
                      for i, row in enumerate(d.levels) for (y, q), v in zip(periods, row)],
                     columns=["region_id", "year", "quarter", "income_pc"]
                     ).to_csv(out / "levels.csv", index=False, lineterminator="\n")
    _write_json({k: v for k, v in d.truth.items() if k != "periods"}, out / "truth.json")


def cmd_replicate(args):
    from .pipeline.tables import run_tables

    cfg = _config(args)
    tables = None
    if args.table:
        tables = tuple(t.strip() for item in args.table for t in item.split(",") if t.strip())
    cfg = cfg.override(output=args.out, seed=args.seed, tables=tables)
    written = run_tables(cfg)
    log.info("wrote %d files to %s", len(written), cfg.output_dir())


# ---------------------------------------------------------------- parser

def build_parser():
    ap = argparse.ArgumentParser(prog="cycgrowth", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="group", required=True)

    def with_config(p):
        p.add_argument("--config", help="key = value run configuration; flags override it")
        return p

    # exposure
    exp = sub.add_parser("exposure", help="storm footprints and exposure indicators")
    esub = exp.add_subparsers(dest="command", required=True)
    p = esub.add_parser("build", help="indicators from a gridded exposure CSV")
    p.add_argument("--pixels", required=True)
    p.add_argument("--population", required=True)
    p.add_argument("--frequency", choices=["quarterly", "annual"], default="quarterly")
    p.add_argument("--no-temporal-weighting", action="store_true")
    p.add_argument("--threshold", type=float, default=WIND_THRESHOLD_KMH)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_exposure_build)
    p = esub.add_parser("windfield", help="parametric footprints from storm tracks")
    p.add_argument("--tracks", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--holland-b", type=float, default=1.5)
    p.add_argument("--rmax", type=float, default=50.0)
    p.add_argument("--step-minutes", type=float, default=15.0)
    p.add_argument("--threshold", type=float, default=WIND_THRESHOLD_KMH)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_exposure_windfield)

    # time series
    ts = sub.add_parser("ts", help="single-region and panel time-series tools")
    tsub = ts.add_subparsers(dest="command", required=True)
    p = with_config(tsub.add_parser("test-unitroot", help="ADF / PP / LLC / IPS"))
    p.add_argument("--input", required=True)
    p.add_argument("--column", required=True)
    p.add_argument("--region")
    p.add_argument("--test", choices=["adf", "pp", "llc", "ips", "all"], default="all")
    p.add_argument("--lags", type=int)
    p.add_argument("--panel-lags", type=int)
    p.add_argument("--no-trend", action="store_true")
    p.add_argument("--transform", choices=["level", "log", "diff", "log-diff"], default="log")
    p.add_argument("--deseasonalize", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ts_unitroot)
    p = tsub.add_parser("deseasonalize", help="remove quarterly effects")
    p.add_argument("--input", required=True)
    p.add_argument("--column", required=True)
    p.add_argument("--region")
    p.add_argument("--log", action="store_true", help="adjust the log of the column")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ts_deseasonalize)
    for name, func, helptext in (("select-lags", cmd_ts_select_lags, "FPE/AIC/HQIC/SIC"),
                                 ("arimax", cmd_ts_arimax, "ARIMAX fits and comparison")):
        p = with_config(tsub.add_parser(name, help=helptext))
        p.add_argument("--input", required=True)
        p.add_argument("--region")
        p.add_argument("--g-column", default="g")
        p.add_argument("--x-column", default="x")
        p.add_argument("--out")
        p.set_defaults(func=func)
        if name == "select-lags":
            p.add_argument("--max-lag", type=int)
        else:
            p.add_argument("--p", type=int)
            p.add_argument("--q", type=int, nargs="+", help="one fit per MA order")
            p.add_argument("--exog-lags", type=int)
            p.add_argument("--no-constant", action="store_true")
            p.add_argument("--seed", type=int)
            p.add_argument("--table", help="comparison CSV path")

    # panel
    pan = sub.add_parser("panel", help="spatial panel estimation")
    psub = pan.add_subparsers(dest="command", required=True)
    p = with_config(psub.add_parser("fit", help="two-way FE spatial model"))
    p.add_argument("--model", choices=["sar", "sem", "sdm", "sac", "fe-conley"], required=True)
    p.add_argument("--panel", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--x", required=True, help="comma-separated regressors")
    p.add_argument("--period", default="period")
    p.add_argument("--adjacency")
    p.add_argument("--centroids")
    p.add_argument("--conley-km", type=float)
    p.add_argument("--conley-lags", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_panel_fit)

    # simulate / replicate
    p = with_config(sub.add_parser("simulate", help="synthetic inputs or DGP draws"))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--dgp", choices=["SEM", "SAC", "SDM", "ARMAX", "seasonal-panel"])
    p.add_argument("--params", help="e.g. 'lam=0.4,beta=1;-0.02'")
    p.add_argument("--N", type=int, default=48)
    p.add_argument("--T", type=int, default=100)
    p.add_argument("--first-year", type=int, default=1990)
    p.add_argument("--last-year", type=int, default=2020)
    p.set_defaults(func=cmd_simulate)
    p = with_config(sub.add_parser("replicate", help="result tables from a run config"))
    p.add_argument("--table", action="append", help="table id(s), or 'all'")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_replicate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.group == "replicate" and not args.config:
        raise SystemExit("replicate needs --config")
    try:
        args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
