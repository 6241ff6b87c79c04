"""
Result tables as CSV + JSON pairs, plus plot-ready figure CSVs.

Each table runner returns a :class:`Table`. Estimation failures are caught
per column and shown as ``ERROR`` cells (message in the JSON) so that one
bad sample never aborts a run.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from ..arimax import ArimaxSpec, compare_fits, fit_arimax, select_lags
from ..gridwind import ingest_gridded_exposure
from ..spatial import (FITTERS, PanelDataset, fit_fe_conley, wald_specification)
from ..tseries import (Series, acf_pacf, deseasonalize, ips_test, llc_test, rejection_fraction)
from .data import COUNTY_SAMPLES, STATE_SAMPLES, SampleDefinition

log = logging.getLogger(__name__)

TABLE_IDS = ("1", "2", "summary", "3", "4", "5", "6", "7", "8", "9", "A1", "B1", "C1", "C2",
             "figures")
LABELS = {"ln_income_lag": "ln(income pc) t-1", "cyc_kmh": "Cyc", "pop_share": "Pop. exposed",
          "event_count": "Nb. Cyc", "rho": "rho", "lambda": "lambda"}
INDICATOR_NAMES = ("cyc_kmh", "pop_share", "event_count", "x")


@dataclass
class Table:
    table_id: str
    title: str
    columns: list
    rows: list = field(default_factory=list)  # (label, [cell strings])
    data: dict = field(default_factory=dict)  # JSON payload

    def write(self, out_dir):
        out = Path(out_dir)
        with open(out / f"table_{self.table_id}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([""] + list(self.columns))
            for label, cells in self.rows:
                w.writerow([label] + list(cells))
        payload = {"table": self.table_id, "title": self.title, "columns": list(self.columns),
                   **self.data}
        with open(out / f"table_{self.table_id}.json", "w") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return float(v) if np.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def stars(p):
    if p is None or not np.isfinite(p):
        return ""
    return "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.10 else ""


def fmt(v, digits=3):
    if v is None or not np.isfinite(v):
        return ""
    return f"{v:.{digits}g}"


# ---------------------------------------------------------------- panels

def growth_panel(level, ids, x_name="cyc_kmh", x_lags=0, deseason=None):
    """Growth regressed on lagged log income and lags 0..x_lags of an indicator.

    Quarterly log income is deseasonalised region by region first unless
    ``deseason`` is False.
    """
    idx = level.index(ids)
    z = level.log_income[idx]
    if deseason is None:
        deseason = level.frequency == "quarterly"
    if deseason:
        z = np.vstack([deseasonalize(Series(r, row, level.periods)).values
                       for r, row in zip(ids, z)])
    x = level.indicators[x_name][idx]
    T = z.shape[1]
    t0 = max(1, x_lags)
    cols = [z[:, t0 - 1:T - 1]] + [x[:, t0 - j:T - j] for j in range(x_lags + 1)]
    names = ["ln_income_lag"] + [x_name if j == 0 else f"{x_name}.L{j}"
                                  for j in range(x_lags + 1)]
    y = z[:, t0:] - z[:, t0 - 1:T - 1]
    return PanelDataset(tuple(ids), level.periods[t0:], y, np.stack(cols, axis=2), tuple(names))


def _label(name):
    if name.startswith("W."):
        return "W " + _label(name[2:])
    base, _, lag = name.partition(".L")
    text = LABELS.get(base, base)
    if lag:
        return f"{text} t-{lag}"
    return text + " t" if base in INDICATOR_NAMES else text


def _fit_column(fn):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return fn(), None
    except Exception as exc:  # noqa: BLE001 - reported per cell
        log.warning("estimation failed: %s", exc)
        return None, f"{type(exc).__name__}: {exc}"


def regression_table(table_id, title, columns, fits, terms, notes=""):
    """Coefficient (stars) / (SE) rows per term, then fit statistics."""
    rows, payload = [], []
    for term in terms:
        est_row, se_row = [], []
        for fit, err in fits:
            if err is not None:
                est_row.append("ERROR")
                se_row.append("")
                continue
            if term not in fit.param_names:
                est_row.append("")
                se_row.append("")
                continue
            b, s = fit.estimate(term), fit.std_error(term)
            p = 2 * stats.norm.sf(abs(b / s)) if s > 0 else np.nan
            est_row.append(fmt(b) + stars(p))
            se_row.append(f"({fmt(s)})")
        rows += [(_label(term), est_row), ("", se_row)]
    stat_rows = {"Overall R2": [], "Observations": [], "Number of regions": []}
    for fit, err in fits:
        ok = err is None
        r2 = fit.r2_within if ok and fit.covariance_type == "conley" else (fit.r2_overall if ok else None)
        stat_rows["Overall R2"].append(f"{r2:.2f}" if ok else "ERROR")
        stat_rows["Observations"].append(str(fit.n_obs) if ok else "ERROR")
        stat_rows["Number of regions"].append(str(fit.n_regions) if ok else "ERROR")
    rows += list(stat_rows.items())
    for col, (fit, err) in zip(columns, fits):
        payload.append({"column": col, "error": err,
                        "fit": fit.to_dict() if fit is not None else None})
    return Table(table_id, title, list(columns), rows, {"fits": payload, "notes": notes})


def _spatial_fits(level, samples, model, x_name="cyc_kmh", x_lags=0, conley=None):
    fits = []
    for sample in samples:
        def run(sample=sample):
            ids = sample.resolve(level)
            panel = growth_panel(level, ids, x_name, x_lags)
            if model == "fe-conley":
                return fit_fe_conley(panel, level.centroids, *conley)
            return FITTERS[model.lower()](panel, level.weights.subset(ids))
        fits.append(_fit_column(run))
    return fits


def _terms(x_name, x_lags, extra):
    return (["ln_income_lag"] + [x_name if j == 0 else f"{x_name}.L{j}" for j in range(x_lags + 1)]
            + list(extra))


# ---------------------------------------------------------------- tables

def unitroot_table(table_id, level, cfg, adjusted):
    sample = SampleDefinition("unit-root sample", tag=cfg.unitroot_sample) \
        if cfg.unitroot_sample != "all" else SampleDefinition("all")
    ids = sample.resolve(level)
    z = level.log_income[level.index(ids)]
    if adjusted:
        z = np.vstack([deseasonalize(Series(r, row, level.periods)).values
                       for r, row in zip(ids, z)])
    rows, data = [], {}
    for name, Y in (("levels", z), ("first difference", np.diff(z, axis=1))):
        panel = {r: row for r, row in zip(ids, Y)}
        res = {}
        for test in ("ADF", "PP"):
            rep = rejection_fraction(panel, test, cfg.unitroot_lags, True, 0.10)
            k = int(round(rep.per_region_rejections * len(ids)))
            res[test] = {"rejected": k, "regions": len(ids),
                         "share": rep.per_region_rejections}
            rows.append((f"{name}: {test} (rejected at 10%)", [f"{k}/{len(ids)}"]))
        for test, fn in (("LLC", llc_test), ("IPS", ips_test)):
            rep = fn(panel, cfg.panel_unitroot_lags, True)
            res[test] = {"statistic": rep.statistic, "p_value": rep.p_value}
            rows.append((f"{name}: {test} p-value", [f"{rep.p_value:.4f}"]))
        data[name] = res
    title = "Unit-root tests, " + ("deseasonalised series" if adjusted else "raw series")
    return Table(table_id, title, ["value"], rows,
                 {"results": data, "lags_individual": cfg.unitroot_lags,
                  "lags_panel": cfg.panel_unitroot_lags, "trend": True})


def summary_table(data):
    rows, payload = [], []
    for level_name, samples in (("state", STATE_SAMPLES), ("county", COUNTY_SAMPLES)):
        if level_name not in data:
            continue
        level = data[level_name]
        for sample in samples:
            try:
                ids = sample.resolve(level)
            except ValueError:
                continue
            panel = growth_panel(level, ids, "cyc_kmh", 0, deseason=False)
            idx = level.index(ids)
            cyc = level.indicators["cyc_kmh"][idx][:, 1:]
            for var, v in (("growth", panel.y), ("cyc_kmh", cyc)):
                v = v.ravel()
                vals = [len(v), v.mean(), v.std(ddof=1), v.min(), v.max()]
                rows.append((f"{level_name} {var} | {sample.name}",
                             [str(vals[0])] + [fmt(x) for x in vals[1:]]))
                payload.append({"level": level_name, "variable": var, "sample": sample.name,
                                "obs": vals[0], "mean": vals[1], "sd": vals[2],
                                "min": vals[3], "max": vals[4]})
            j = int(np.argmax(cyc))
            i, t = divmod(j, cyc.shape[1])
            payload[-1]["argmax"] = {"region": ids[i], "period": list(level.periods[t + 1])}
    return Table("summary", "Summary statistics", ["Obs", "Mean", "Std. Dev.", "Min", "Max"],
                 rows, {"rows": payload})


def _focus_series(level, region):
    idx = level.index([region])[0]
    z = deseasonalize(Series(region, level.log_income[idx], level.periods))
    g = Series(region, np.diff(z.values), level.periods[1:])
    x = Series(region, level.indicators["cyc_kmh"][idx][1:], level.periods[1:])
    return g, x


def lag_table(level, cfg):
    g, x = _focus_series(level, cfg.focus_region)
    rep = select_lags(g, x, cfg.max_lag)
    sel = rep.selected
    rows = []
    for i, lag in enumerate(rep.lags):
        cells = []
        for c in ("fpe", "aic", "hqic", "sic"):
            v = getattr(rep, c)[i]
            cells.append(f"{v:.6g}" + ("*" if sel[c] == lag else ""))
        rows.append((str(lag), cells))
    return Table("7", f"Lag-order criteria, {cfg.focus_region}", ["FPE", "AIC", "HQIC", "SIC"],
                 rows, {"selected": sel, "criteria": rep.to_frame().to_dict(orient="list"),
                        "nobs": rep.nobs})


def _arimax_table(table_id, title, fits, labels):
    ok = [(lab, f) for lab, (f, err) in zip(labels, fits) if err is None]
    names = []
    for _, f in ok:
        names += [n for n in f.param_names if n.startswith("x.") and n not in names]
    rows = []
    for n in names:
        est, se = [], []
        for f, err in fits:
            if err is not None:
                est.append("ERROR")
                se.append("")
            elif n in f.param_names:
                i = f.param_names.index(n)
                p = 2 * stats.norm.sf(abs(f.params[i] / f.se[i]))
                est.append(fmt(f.params[i]) + stars(p))
                se.append(f"({fmt(f.se[i])})")
            else:
                est.append("")
                se.append("")
        lag = n.split(".L")[1]
        rows += [("Cyc t" if lag == "0" else f"Cyc t-{lag}", est), ("", se)]
    for stat in ("aic", "bic"):
        rows.append((stat.upper(), [f"{getattr(f, stat):.3f}" if err is None else "ERROR"
                                    for f, err in fits]))
    payload = [{"column": lab, "error": err, "fit": f.to_dict() if f is not None else None}
               for lab, (f, err) in zip(labels, fits)]
    return Table(table_id, title, list(labels), rows, {"fits": payload})


def arimax_table(level, cfg):
    g, x = _focus_series(level, cfg.focus_region)
    specs = [ArimaxSpec(cfg.arimax_p, 0, q) for q in range(cfg.arimax_q_max + 1)]
    fits = [_fit_column(lambda s=s: fit_arimax(g, x, s, seed=cfg.seed)) for s in specs]
    table = _arimax_table("8", f"ARIMAX fits, {cfg.focus_region}", fits, [s.label for s in specs])
    good = [f for f, err in fits if err is None]
    if good:
        cmp = compare_fits(good)
        table.data["ranking"] = [cmp.labels[i] for i in cmp.ranking]
    return table


def appendix_arimax_table(level, cfg):
    fits, labels = [], []
    for region, (p, d, q) in zip(cfg.appendix_regions, cfg.appendix_orders):
        spec = ArimaxSpec(p, d, q)

        def run(region=region, spec=spec):
            g, x = _focus_series(level, region)
            return fit_arimax(g, x, spec, seed=cfg.seed)
        fits.append(_fit_column(run))
        labels.append(f"{region} {spec.label}")
    return _arimax_table("C1", "ARIMAX fits, other exposed states", fits, labels)


def sdm_table(level):
    fits = _spatial_fits(level, STATE_SAMPLES, "SDM")
    table = regression_table("A1", "Spatial Durbin model, states", [s.name for s in STATE_SAMPLES],
                             fits, ["rho", "ln_income_lag", "cyc_kmh", "W.cyc_kmh"])
    wald = []
    for fit, err in fits:
        if err is not None:
            wald.append(("ERROR", None))
            continue
        try:
            rep = wald_specification(fit, "common_factor")
            wald.append((f"{rep.p_value:.3f}", rep.to_dict()))
        except (ValueError, np.linalg.LinAlgError) as exc:
            wald.append(("ERROR", {"error": str(exc)}))
    table.rows.append(("Wald p (theta = -rho beta)", [w[0] for w in wald]))
    table.data["wald_common_factor"] = [w[1] for w in wald]
    return table


def run_table(table_id, data, cfg):
    """Build one table; raises ``KeyError`` when its inputs are not configured."""
    st, co = data.get("state"), data.get("county")
    conley = (cfg.conley_km, cfg.conley_lags)
    if table_id in ("1", "2"):
        return unitroot_table(table_id, st, cfg, adjusted=table_id == "2")
    if table_id == "summary":
        return summary_table(data)
    if table_id == "3":
        return regression_table("3", "SEM, quarterly state growth",
                                [s.name for s in STATE_SAMPLES],
                                _spatial_fits(st, STATE_SAMPLES, "SEM"),
                                _terms("cyc_kmh", 0, ["lambda"]))
    if table_id == "4":
        return regression_table("4", "SAC, annual county growth",
                                [s.name for s in COUNTY_SAMPLES],
                                _spatial_fits(co, COUNTY_SAMPLES, "SAC"),
                                _terms("cyc_kmh", 0, ["rho", "lambda"]))
    if table_id in ("5", "6"):
        level, samples, model = (st, STATE_SAMPLES, "SEM") if table_id == "5" \
            else (co, COUNTY_SAMPLES, "SAC")
        sp = ["lambda"] if model == "SEM" else ["rho", "lambda"]
        parts = []
        for x_name in ("pop_share", "event_count"):
            parts.append(regression_table(table_id, "", [s.name for s in samples],
                                          _spatial_fits(level, samples, model, x_name),
                                          _terms(x_name, 0, sp)))
        parts.append(regression_table(table_id, "", [s.name for s in samples],
                                      _spatial_fits(level, samples, "fe-conley", conley=conley),
                                      _terms("cyc_kmh", 0, [])))
        heads = ["Alternative indicator: exposed population share",
                 "Alternative indicator: number of events",
                 f"Fixed effects, Conley SE ({cfg.conley_km:g} km, {cfg.conley_lags} lags)"]
        rows, sections = [], {}
        for head, part in zip(heads, parts):
            rows.append((head, [""] * len(samples)))
            rows += part.rows
            sections[head] = part.data["fits"]
        level_name = "state" if table_id == "5" else "county"
        return Table(table_id, f"Robustness checks, {level_name} growth",
                     [s.name for s in samples], rows, {"sections": sections})
    if table_id == "7":
        return lag_table(st, cfg)
    if table_id == "8":
        return arimax_table(st, cfg)
    if table_id == "9":
        sample = SampleDefinition(cfg.focus_region, tag="exposed", state=cfg.focus_region)
        cols, fits, terms = [], [], ["ln_income_lag"]
        for x_name in ("cyc_kmh", "pop_share", "event_count"):
            cols.append(f"x = {LABELS[x_name]}")
            fits += _spatial_fits(co, [sample], "SAC", x_name, cfg.cyc_lags)
        table = regression_table("9", f"SAC with indicator lags, {cfg.focus_region} counties",
                                 cols, [_rename_x(f) for f in fits],
                                 terms + ["x"] + [f"x.L{j}" for j in range(1, cfg.cyc_lags + 1)]
                                 + ["rho", "lambda"])
        return table
    if table_id == "A1":
        return sdm_table(st)
    if table_id == "B1":
        return regression_table("B1", "SEM with indicator lags, states",
                                [s.name for s in STATE_SAMPLES],
                                _spatial_fits(st, STATE_SAMPLES, "SEM", "cyc_kmh", cfg.cyc_lags),
                                _terms("cyc_kmh", cfg.cyc_lags, ["lambda"]))
    if table_id == "C1":
        return appendix_arimax_table(st, cfg)
    if table_id == "C2":
        samples = [SampleDefinition(r, tag="exposed", state=r) for r in cfg.appendix_regions]
        return regression_table("C2", "SAC with indicator lags, other states' counties",
                                list(cfg.appendix_regions),
                                _spatial_fits(co, samples, "SAC", "cyc_kmh", cfg.cyc_lags),
                                _terms("cyc_kmh", cfg.cyc_lags, ["rho", "lambda"]))
    raise KeyError(f"unknown table {table_id!r}; expected one of {TABLE_IDS}")


def _rename_x(pair):
    """Relabel indicator-specific names to a common ``x`` for side-by-side columns."""
    fit, err = pair
    if fit is None:
        return pair
    names = []
    for n in fit.param_names:
        base, _, lag = n.partition(".L")
        names.append(("x" + (f".L{lag}" if lag else "")) if base in
                     INDICATOR_NAMES else n)
    return dataclasses.replace(fit, param_names=tuple(names)), err


def write_figures(data, cfg, out_dir):
    """Plot-ready CSVs: storm counts per state and the focus-region correlograms."""
    out = Path(out_dir)
    written = []
    if cfg.path("state_pixels") is not None:
        fps = ingest_gridded_exposure(cfg.path("state_pixels"))
        counts = {}
        for fp in fps:
            counts.setdefault(fp.region_id, set()).add(fp.storm_id)
        rows = sorted((r, len(s)) for r, s in counts.items())
        _write(out / "figure_storm_counts.csv", ["region_id", "storms"], rows)
        written.append("figure_storm_counts.csv")
    st = data.get("state")
    if st is not None and cfg.focus_region in st.region_ids:
        idx = st.index([cfg.focus_region])[0]
        raw = Series(cfg.focus_region, st.log_income[idx], st.periods)
        adj = deseasonalize(raw)
        _write(out / "figure_deseasonalized.csv",
               ["year", "quarter", "log_income", "log_income_adjusted"],
               [(y, q, repr(float(a)), repr(float(b)))
                for (y, q), a, b in zip(raw.periods, raw.values, adj.values)])
        max_lag = min(20, (len(raw) - 2) // 2 - 1)
        for name, values in (("raw", np.diff(raw.values)), ("adjusted", np.diff(adj.values))):
            c = acf_pacf(values, max_lag)
            _write(out / f"figure_acf_{name}.csv", ["lag", "acf", "pacf", "band"],
                   [(k, repr(float(a)), repr(float(p)), repr(float(c.band)))
                    for k, (a, p) in enumerate(zip(c.acf, c.pacf))])
            written.append(f"figure_acf_{name}.csv")
        written.append("figure_deseasonalized.csv")
    return written


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def run_tables(cfg, data=None, tables=None):
    """Run the requested tables and write them under ``cfg.output_dir()``.

    Returns the list of file names written. Tables whose inputs are absent
    are skipped with a log message.
    """
    from .data import load_and_validate

    report = None
    if data is None:
        data, report = load_and_validate(cfg)
    out = cfg.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    wanted = tables or cfg.tables
    if "all" in wanted:
        wanted = TABLE_IDS
    needs = {"1": "state", "2": "state", "3": "state", "5": "state", "7": "state",
             "8": "state", "A1": "state", "B1": "state", "C1": "state",
             "4": "county", "6": "county", "9": "county", "C2": "county"}
    written = []
    if report is not None:
        with open(out / "validation_report.json", "w") as fh:
            json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append("validation_report.json")
    for tid in wanted:
        if tid not in TABLE_IDS:
            raise KeyError(f"unknown table {tid!r}; expected one of {TABLE_IDS}")
        if tid == "figures":
            written += write_figures(data, cfg, out)
            continue
        if needs.get(tid) and needs[tid] not in data:
            log.info("table %s skipped: no %s inputs", tid, needs[tid])
            continue
        log.info("table %s", tid)
        run_table(tid, data, cfg).write(out)
        written += [f"table_{tid}.csv", f"table_{tid}.json"]
    return written
