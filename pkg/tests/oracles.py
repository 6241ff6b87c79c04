"""Brute-force reference implementations and random instance generators."""

from __future__ import annotations

import math
from datetime import datetime, timedelta, timezone

import numpy as np

from cycgrowth.exposure import ANNUAL, RegionPeriodKey, RegionPopulation
from cycgrowth.gridwind import Pixel, StormFootprint, TrackPoint

R_EARTH = 6371.0


# ---------------------------------------------------------------- exposure

def random_exposure_instance(rng, max_pixels=100, max_storms=5):
    """Footprints and annual populations for a few regions over two years."""
    n_regions = int(rng.integers(1, 4))
    regions = [f"R{i}" for i in range(n_regions)]
    years = (2000, 2001)
    n_pix = int(rng.integers(1, max_pixels + 1))
    cells = set()
    while len(cells) < n_pix:
        cells.add((int(rng.integers(0, 40)), int(rng.integers(0, 40))))
    pixels = [Pixel(a / 10, b / 10, regions[int(rng.integers(n_regions))],
                    float(rng.uniform(0, 1000))) for a, b in sorted(cells)]
    footprints = []
    for s in range(int(rng.integers(1, max_storms + 1))):
        year, month = years[int(rng.integers(2))], int(rng.integers(1, 13))
        hit = [p for p in pixels if rng.random() < 0.5]
        for region in regions:
            mine = [(p, float(rng.uniform(63, 250))) for p in hit if p.region_id == region]
            if mine:
                footprints.append(StormFootprint(f"S{s}", region, year, month, tuple(mine)))
    totals = {r: sum(p.population for p in pixels if p.region_id == r) for r in regions}
    pops = [RegionPopulation(RegionPeriodKey(r, y), totals[r] * rng.uniform(1.0, 3.0) + 1.0)
            for r in regions for y in years]
    return footprints, pops


def exposure_oracle(footprints, populations, quarterly, weighted):
    """Enumerate every pixel of every region-period and scan all storms for it."""
    pop = {(p.key.region_id, p.key.year): p.total_population for p in populations}
    periods = {}
    for r, y in pop:
        for sub in ((1, 2, 3, 4) if quarterly else (ANNUAL,)):
            periods[(r, y, sub)] = None
    out = {}
    for (r, y, sub) in periods:
        pixels = {}
        for fp in footprints:
            for pix, _ in fp.cells:
                if fp.region_id == r and fp.year == y:
                    pixels[pix.key] = pix
        cyc, share, storms = 0.0, 0.0, set()
        for key, pix in sorted(pixels.items()):
            best, best_pop = None, 0.0
            for fp in footprints:
                if fp.region_id != r or fp.year != y:
                    continue
                if quarterly and (fp.month - 1) // 3 + 1 != sub:
                    continue
                w = (12 - fp.month) / 12 if weighted else 1.0
                for p2, wind in fp.cells:
                    if p2.key == key:
                        storms.add(fp.storm_id)
                        if best is None or wind * w > best:
                            best, best_pop = wind * w, p2.population
            if best is not None:
                cyc += best * best_pop
                share += best_pop
        total = pop[(r, y)]
        out[(r, y, sub)] = (cyc / total, min(share / total, 1.0), len(storms))
    return out


# ---------------------------------------------------------------- wind field

def random_track(rng, storm_id="S"):
    n = int(rng.integers(2, 6))
    t0 = datetime(2005, int(rng.integers(1, 13)), int(rng.integers(1, 28)),
                  tzinfo=timezone.utc)
    lat, lon = rng.uniform(20, 35), rng.uniform(-95, -75)
    pts = []
    for i in range(n):
        rmax = None if rng.random() < 0.3 else float(rng.uniform(20, 80))
        pts.append(TrackPoint(storm_id, t0 + timedelta(hours=6 * i), lat, lon,
                              float(rng.uniform(80, 250)), None, rmax))
        lat += rng.uniform(-0.5, 1.5)
        lon += rng.uniform(-1.5, 0.5)
    return pts


def random_grid(rng, track, n=40):
    lat0 = np.mean([p.lat for p in track])
    lon0 = np.mean([p.lon for p in track])
    cells = set()
    while len(cells) < n:
        cells.add((round(lat0 + rng.uniform(-3, 3), 1), round(lon0 + rng.uniform(-3, 3), 1)))
    return [Pixel(a, b, f"G{i % 3}", 100.0) for i, (a, b) in enumerate(sorted(cells))]


def _haversine(lat1, lon1, lat2, lon2):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dphi, dlmb = p2 - p1, math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlmb / 2) ** 2
    return 2 * R_EARTH * math.asin(math.sqrt(min(1.0, a)))


def _holland(r, vmax, rmax, B):
    if r <= 0:
        return 0.0
    x = (rmax / r) ** B
    return vmax * math.sqrt(x * math.exp(1 - x))


def windfield_oracle(track, grid, B=1.5, rmax_default=50.0, cutoff=500.0, step=1.0):
    """Peak wind per pixel from a plain time-stepped sweep."""
    t0 = track[0].timestamp
    fix = [(p.timestamp - t0).total_seconds() / 60 for p in track]
    peak = [0.0] * len(grid)
    m = 0.0
    instants = []
    while m < fix[-1]:
        instants.append(m)
        m += step
    instants = sorted(set(instants) | set(fix))
    for m in instants:
        i = max(j for j in range(len(fix)) if fix[j] <= m)
        i = min(i, len(fix) - 2)
        w = (m - fix[i]) / (fix[i + 1] - fix[i])
        a, b = track[i], track[i + 1]
        ra = a.rmax if a.rmax is not None else rmax_default
        rb = b.rmax if b.rmax is not None else rmax_default
        lat = a.lat + w * (b.lat - a.lat)
        lon = a.lon + w * (b.lon - a.lon)
        vmax = a.vmax + w * (b.vmax - a.vmax)
        rmax = ra + w * (rb - ra)
        for k, pix in enumerate(grid):
            d = _haversine(lat, lon, pix.cell_lat, pix.cell_lon)
            if d <= cutoff:
                peak[k] = max(peak[k], _holland(d, vmax, rmax, B))
    return peak
