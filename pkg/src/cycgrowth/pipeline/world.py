"""
Synthetic replication inputs: a fictional country of states and counties.

Writes every file a run configuration refers to (income panels, pixel
exposure, populations, indicators built with :mod:`cycgrowth.exposure`,
adjacency, centroids, tags) plus ``config.txt``. Storms have no effect on
income, so the estimated cyclone coefficients should be insignificant.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..exposure import (RegionPeriodKey, RegionPopulation,
                        build_robustness_indicators, write_indicator_csv)
from ..gridwind import EXPOSURE_COLUMNS, WIND_THRESHOLD_KMH, ingest_gridded_exposure
from ..tseries.transforms import make_periods
from .config import RunConfig, dump_config
from .simulate import grid_geography

STATES = ("AL AZ AR CA CO CT DE FL GA ID IL IN IA KS KY LA ME MD MA MI MN MS MO MT NE NV "
          "NH NJ NM NY NC ND OH OK OR PA RI SC SD TN TX UT VT VA WA WV WI WY").split()
COASTAL = set("AL CT DE FL GA LA ME MD MA MS NH NJ NY NC PA RI SC TX VA".split())
INLAND_EXPOSED = set("AR KY TN OH WV VT IN IL MO OK KS IA MI WI NM AZ CA NE".split())
# Relative landfall frequency; the focus state is hit most often.
HIT_WEIGHT = {"FL": 8.0, "NC": 5.0, "LA": 4.0, "TX": 4.0}


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _county_layout(states, centroids, per_state):
    """County ids, parent state, centroid and 3x3 pixel block per county."""
    ncol = 3
    counties = []
    for s in states:
        lat0, lon0 = centroids[s]
        for j in range(per_state):
            r, c = divmod(j, ncol)
            lat = round(lat0 + (r - 0.5) * 0.4, 1)
            lon = round(lon0 + (c - 1) * 0.4, 1)
            pixels = [(round(lat + 0.1 * a, 1), round(lon + 0.1 * b, 1))
                      for a in (-1, 0, 1) for b in (-1, 0, 1)]
            counties.append((f"{s}{j + 1:03d}", s, (lat, lon), (r, c), pixels))
    return counties


def _county_adjacency(counties, state_pairs):
    by_state = {}
    for cid, s, cen, rc, _ in counties:
        by_state.setdefault(s, []).append((cid, cen, rc))
    pairs = []
    for members in by_state.values():
        pos = {rc: cid for cid, _, rc in members}
        for cid, _, (r, c) in members:
            for nb in ((r + 1, c), (r, c + 1)):
                if nb in pos:
                    pairs.append((cid, pos[nb]))
    for a, b in state_pairs:
        best = min(((np.hypot(ca[0] - cb[0], ca[1] - cb[1]), ia, ib)
                    for ia, ca, _ in by_state[a] for ib, cb, _ in by_state[b]))
        pairs.append((best[1], best[2]))
    return pairs


def _income_paths(rng, W, T, ar_kappa, drift, lam, rho, sigma, season=None, start_q=1,
                  growth_phi=0.0):
    """Log income with spatially correlated shocks.

    ``ar_kappa > 0`` pulls the level back to a linear trend; with
    ``ar_kappa = 0`` the level is integrated and its growth follows an AR(1)
    with coefficient ``growth_phi``.
    """
    N = W.shape[0]
    I = np.eye(N)
    A = np.linalg.inv(I - rho * W) @ np.linalg.inv(I - lam * W)
    base = rng.normal(10.3, 0.15, N)
    z = np.empty((N, T))
    prev = base.copy()
    shock = np.zeros(N)
    for t in range(T):
        trend = base + drift * t
        shock = growth_phi * shock + A @ (sigma * rng.standard_normal(N))
        prev = prev + drift - ar_kappa * (prev - trend) + shock
        z[:, t] = prev
    if season is not None:
        q = (np.arange(T) + start_q - 1) % 4
        z = z + np.asarray(season)[q][None, :]
    return z


def generate_world(out_dir, seed=0, first_year=1990, last_year=2020, counties_per_state=6,
                   storms_per_year=6.0):
    """Write a complete synthetic input set into ``out_dir``; returns its config path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    years = list(range(first_year, last_year + 1))

    _, grid_pairs, grid_cent = grid_geography(len(STATES), seed=seed)
    order = sorted(grid_cent)
    state_cent = {s: grid_cent[g] for s, g in zip(STATES, order)}
    rename = dict(zip(order, STATES))
    state_pairs = [(rename[a], rename[b]) for a, b in grid_pairs]
    counties = _county_layout(STATES, state_cent, counties_per_state)
    county_pairs = _county_adjacency(counties, state_pairs)

    exposed_state = {s: int(s in COASTAL or s in INLAND_EXPOSED) for s in STATES}
    tags_c = []
    for cid, s, _, _, _ in counties:
        exp = int(exposed_state[s] and rng.random() < 0.75)
        coastal = int(exp and s in COASTAL and rng.random() < 0.6)
        shore = int(coastal and rng.random() < 0.55)
        tags_c.append((cid, exp, int(s in COASTAL), coastal, shore, s))

    # Population: county totals per year, split evenly over its pixels.
    cpop = {cid: rng.lognormal(11.0, 1.0) * np.exp(0.01 * np.arange(len(years)))
            for cid, *_ in counties}
    spop = {s: sum(cpop[c[0]] for c in counties if c[1] == s) for s in STATES}

    # Storms: landfall state drawn by weight, then neighbouring exposed states.
    exposed_list = [s for s in STATES if exposed_state[s]]
    w = np.array([HIT_WEIGHT.get(s, 3.0 if s in COASTAL else 0.5) for s in exposed_list])
    w /= w.sum()
    neighbours = {s: set() for s in STATES}
    for a, b in state_pairs:
        neighbours[a].add(b)
        neighbours[b].add(a)
    county_exposed = {t[0]: t[1] for t in tags_c}
    rows = []
    n_storm = 0
    for yi, year in enumerate(years):
        for _ in range(rng.poisson(storms_per_year)):
            n_storm += 1
            sid = f"{year}S{n_storm:04d}"
            month = int(rng.integers(6, 12))
            land = exposed_list[rng.choice(len(exposed_list), p=w)]
            hit = [land] + [s for s in sorted(neighbours[land])
                            if exposed_state[s] and rng.random() < 0.3]
            peak = rng.uniform(80.0, 200.0)
            for s in hit:
                scale = 1.0 if s == land else rng.uniform(0.4, 0.8)
                for cid, cs, _, _, pixels in counties:
                    if cs != s or not county_exposed[cid] or rng.random() > 0.6:
                        continue
                    for lat, lon in pixels:
                        if rng.random() > 0.7:
                            continue
                        wind = round(float(peak * scale * rng.uniform(0.5, 1.0)), 3)
                        if wind < WIND_THRESHOLD_KMH:
                            continue
                        pop = round(float(cpop[cid][yi] / len(pixels)), 3)
                        rows.append([sid, year, month, f"{lat:.1f}", f"{lon:.1f}", cid, wind, pop])
    _write_rows(out / "county_pixels.csv", EXPOSURE_COLUMNS, rows)
    parent = {cid: s for cid, s, *_ in counties}
    _write_rows(out / "state_pixels.csv", EXPOSURE_COLUMNS,
                [r[:5] + [parent[r[5]]] + r[6:] for r in rows])
    _write_rows(out / "county_population.csv", ["region_id", "year", "quarter", "population"],
                [(c, y, "", round(float(cpop[c][i]), 3)) for c in sorted(cpop)
                 for i, y in enumerate(years)])
    _write_rows(out / "state_population.csv", ["region_id", "year", "quarter", "population"],
                [(s, y, "", round(float(spop[s][i]), 3)) for s in sorted(spop)
                 for i, y in enumerate(years)])

    state_pops = [RegionPopulation(RegionPeriodKey(s, y), float(round(spop[s][i], 3)))
                  for s in sorted(spop) for i, y in enumerate(years)]
    county_pops = [RegionPopulation(RegionPeriodKey(c, y), float(round(cpop[c][i], 3)))
                   for c in sorted(cpop) for i, y in enumerate(years)]
    write_indicator_csv(
        build_robustness_indicators(ingest_gridded_exposure(out / "state_pixels.csv"),
                                    state_pops, "quarterly"), out / "state_indicator.csv")
    write_indicator_csv(
        build_robustness_indicators(ingest_gridded_exposure(out / "county_pixels.csv"),
                                    county_pops, "annual"), out / "county_indicator.csv")

    # Income: quarterly states with a seasonal pattern, annual counties.
    sid = {s: i for i, s in enumerate(STATES)}
    Ws = np.zeros((len(STATES), len(STATES)))
    for a, b in state_pairs:
        Ws[sid[a], sid[b]] = Ws[sid[b], sid[a]] = 1.0
    Ws /= np.maximum(Ws.sum(1, keepdims=True), 1.0)
    Tq = 4 * len(years)
    zs = _income_paths(rng, Ws, Tq, 0.0, 0.004, 0.4, 0.0, 0.006,
                       season=(0.006, -0.01, -0.002, 0.006), growth_phi=0.3)
    quarters = make_periods((first_year, 1), Tq)
    _write_rows(out / "state_income.csv", ["region_id", "year", "quarter", "income_pc"],
                [(s, y, q, repr(float(np.exp(zs[i, t]))))
                 for i, s in enumerate(STATES) for t, (y, q) in enumerate(quarters)])
    cid_list = [c[0] for c in counties]
    cpos = {c: i for i, c in enumerate(cid_list)}
    Wc = np.zeros((len(cid_list), len(cid_list)))
    for a, b in county_pairs:
        Wc[cpos[a], cpos[b]] = Wc[cpos[b], cpos[a]] = 1.0
    Wc /= np.maximum(Wc.sum(1, keepdims=True), 1.0)
    zc = _income_paths(rng, Wc, len(years), 0.15, 0.015, 0.14, -0.09, 0.04)
    _write_rows(out / "county_income.csv", ["region_id", "year", "income_pc"],
                [(c, y, repr(float(np.exp(zc[i, t]))))
                 for i, c in enumerate(cid_list) for t, y in enumerate(years)])

    _write_rows(out / "state_adjacency.csv", ["region_a", "region_b"], sorted(state_pairs))
    _write_rows(out / "county_adjacency.csv", ["region_a", "region_b"], sorted(county_pairs))
    _write_rows(out / "state_centroids.csv", ["region_id", "lat", "lon"],
                [(s, round(state_cent[s][0], 4), round(state_cent[s][1], 4)) for s in STATES])
    _write_rows(out / "county_centroids.csv", ["region_id", "lat", "lon"],
                [(c, cen[0], cen[1]) for c, _, cen, _, _ in counties])
    _write_rows(out / "state_tags.csv",
                ["region_id", "exposed", "coastal_state", "noaa_coastal", "noaa_shoreline"],
                [(s, exposed_state[s], int(s in COASTAL), 0, 0) for s in STATES])
    _write_rows(out / "county_tags.csv",
                ["region_id", "exposed", "coastal_state", "noaa_coastal", "noaa_shoreline",
                 "state"], tags_c)

    cfg = RunConfig(
        state_income="state_income.csv", state_indicator="state_indicator.csv",
        state_adjacency="state_adjacency.csv", state_centroids="state_centroids.csv",
        state_tags="state_tags.csv", state_pixels="state_pixels.csv",
        county_income="county_income.csv", county_indicator="county_indicator.csv",
        county_adjacency="county_adjacency.csv", county_centroids="county_centroids.csv",
        county_tags="county_tags.csv", seed=seed, max_lag=20)
    path = out / "config.txt"
    path.write_text("# synthetic replication inputs\n" + dump_config(cfg))
    return path
