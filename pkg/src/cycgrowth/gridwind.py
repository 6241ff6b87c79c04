"""
Per-pixel storm wind footprints on a 0.1 degree grid.

Footprints come either from a parametric reconstruction (Holland radial
profile swept along a linearly interpolated 6-hourly track) or directly from
a gridded exposure CSV in the TCE-DAT layout.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0
#: 34 knots in km/h, the exposure floor.
WIND_THRESHOLD_KMH = 63.0

EXPOSURE_COLUMNS = ("storm_id", "year", "month", "cell_lat", "cell_lon",
                    "region_id", "wind_kmh", "exposed_pop")
TRACK_COLUMNS = ("storm_id", "timestamp", "lat", "lon", "vmax_kmh",
                 "pmin_hpa", "rmax_km")


class InputError(ValueError):
    """Raised for malformed track, grid or exposure input."""


@dataclass(frozen=True)
class TrackPoint:
    storm_id: str
    timestamp: datetime
    lat: float
    lon: float
    vmax: float
    pmin: float | None = None
    rmax: float | None = None

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise InputError(f"latitude {self.lat} out of range")
        if not -180.0 < self.lon <= 180.0:
            raise InputError(f"longitude {self.lon} out of range")
        if not self.vmax >= 0.0:
            raise InputError(f"negative vmax {self.vmax}")
        if self.timestamp.tzinfo is None:
            object.__setattr__(self, "timestamp",
                               self.timestamp.replace(tzinfo=timezone.utc))


@dataclass(frozen=True)
class Pixel:
    cell_lat: float
    cell_lon: float
    region_id: str
    population: float

    def __post_init__(self):
        if self.population < 0:
            raise InputError(f"negative population at ({self.cell_lat}, {self.cell_lon})")

    @property
    def key(self) -> tuple[int, int]:
        """Integer grid index, robust to float noise in the coordinates."""
        return (int(round(self.cell_lat * 10)), int(round(self.cell_lon * 10)))


@dataclass(frozen=True)
class StormFootprint:
    """Cells of one region swept by one storm, with the storm's month there."""

    storm_id: str
    region_id: str
    year: int
    month: int
    cells: tuple[tuple[Pixel, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise InputError(f"{self.storm_id}: month {self.month} outside 1-12")


@dataclass(frozen=True)
class WindModelParams:
    """Holland profile shape and track sampling settings.

    Attributes
    ----------
    B : float
        Holland shape parameter.
    rmax_default : float
        Radius of maximum winds (km) used where the track carries none.
    step_minutes : float
        Spacing of the interpolated instants between track fixes.
    cutoff_radius : float
        Distance (km) beyond which the wind is taken as zero.
    threshold : float
        Cells below this wind (km/h) are dropped.
    """

    B: float = 1.5
    rmax_default: float = 50.0
    step_minutes: float = 15.0
    cutoff_radius: float = 500.0
    threshold: float = WIND_THRESHOLD_KMH


def haversine_km(lat1, lon1, lat2, lon2):
    """Great-circle distance in km; broadcasts over array arguments."""
    lat1, lon1, lat2, lon2 = (np.radians(np.asarray(a, dtype=float))
                              for a in (lat1, lon1, lat2, lon2))
    a = (np.sin((lat2 - lat1) / 2.0) ** 2
         + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2.0) ** 2)
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def holland_profile(r, vmax, rmax, B):
    """Holland gradient wind V(r) = vmax * sqrt((R/r)^B exp(1 - (R/r)^B)).

    Peaks at exactly ``vmax`` when ``r == rmax`` and vanishes at the centre.
    """
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        x = (rmax / r) ** B
        v = vmax * np.sqrt(x * np.exp(1.0 - x))
    return np.where(r > 0.0, np.nan_to_num(v, nan=0.0, posinf=0.0), 0.0)


def _interpolate_track(track, params):
    """Instants, positions, vmax and rmax along the track at the step spacing."""
    t0 = track[0].timestamp
    fix_min = np.array([(p.timestamp - t0).total_seconds() / 60.0 for p in track])
    if np.any(np.diff(fix_min) <= 0):
        raise InputError(f"{track[0].storm_id}: timestamps not strictly increasing")
    grid = np.arange(0.0, fix_min[-1], params.step_minutes)
    minutes = np.union1d(grid, fix_min)
    lat = np.array([p.lat for p in track])
    lon = np.degrees(np.unwrap(np.radians([p.lon for p in track])))
    vmax = np.array([p.vmax for p in track])
    rmax = np.array([p.rmax if p.rmax is not None else params.rmax_default for p in track])
    return (minutes,
            np.interp(minutes, fix_min, lat),
            np.interp(minutes, fix_min, lon),
            np.interp(minutes, fix_min, vmax),
            np.interp(minutes, fix_min, rmax))


def simulate_windfield(track, grid, params=WindModelParams()):
    """Sweep a Holland vortex along a storm track over a pixel grid.

    Parameters
    ----------
    track : sequence of TrackPoint
        Fixes of a single storm, at least two, strictly increasing in time.
    grid : sequence of Pixel
    params : WindModelParams

    Returns
    -------
    list of StormFootprint
        One footprint per region with at least one cell at or above the
        threshold. The footprint month (and year) is that of the first
        instant at which any of the region's pixels reaches the threshold.
    """
    track = list(track)
    grid = list(grid)
    if len(track) < 2:
        raise InputError("track needs at least two fixes")
    if not grid:
        raise InputError("empty pixel grid")
    if params.B <= 0 or params.rmax_default <= 0:
        raise InputError("Holland B and default Rmax must be positive")
    if len({p.storm_id for p in track}) != 1:
        raise InputError("track mixes several storm ids")

    minutes, lat, lon, vmax, rmax = _interpolate_track(track, params)
    plat = np.array([p.cell_lat for p in grid])
    plon = np.array([p.cell_lon for p in grid])
    # instants x pixels
    dist = haversine_km(lat[:, None], lon[:, None], plat[None, :], plon[None, :])
    wind = holland_profile(dist, vmax[:, None], rmax[:, None], params.B)
    wind[dist > params.cutoff_radius] = 0.0
    peak = wind.max(axis=0)
    hit = wind >= params.threshold

    t0 = track[0].timestamp
    regions = sorted({p.region_id for p in grid})
    region_of = np.array([p.region_id for p in grid])
    footprints = []
    for region in regions:
        cols = np.flatnonzero((region_of == region) & (peak >= params.threshold))
        if cols.size == 0:
            continue
        first = int(np.argmax(hit[:, cols].any(axis=1)))
        when = t0 + timedelta(minutes=float(minutes[first]))
        cells = tuple((grid[j], float(peak[j])) for j in cols)
        footprints.append(StormFootprint(track[0].storm_id, region, when.year,
                                         when.month, cells))
    return footprints


def _parse_time(text):
    ts = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _optional_float(text):
    text = text.strip()
    return float(text) if text else None


def read_track_csv(path):
    """Read a track CSV into ``{storm_id: [TrackPoint, ...]}`` ordered by time."""
    tracks: dict[str, list[TrackPoint]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(TRACK_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise InputError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                pt = TrackPoint(row["storm_id"], _parse_time(row["timestamp"]),
                                float(row["lat"]), float(row["lon"]),
                                float(row["vmax_kmh"]),
                                _optional_float(row["pmin_hpa"]),
                                _optional_float(row["rmax_km"]))
            except (ValueError, TypeError) as exc:
                raise InputError(f"{path}: row {lineno}: {exc}") from exc
            tracks.setdefault(pt.storm_id, []).append(pt)
    for pts in tracks.values():
        pts.sort(key=lambda p: p.timestamp)
    return tracks


GRID_COLUMNS = ("cell_lat", "cell_lon", "region_id", "population")


def read_grid_csv(path):
    """Pixel grid CSV: cell_lat, cell_lon, region_id, population."""
    grid = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(GRID_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise InputError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                grid.append(Pixel(float(row["cell_lat"]), float(row["cell_lon"]),
                                  row["region_id"].strip(), float(row["population"])))
            except (ValueError, TypeError) as exc:
                raise InputError(f"{path}: row {lineno}: {exc}") from exc
    return grid


def ingest_gridded_exposure(path, threshold=WIND_THRESHOLD_KMH):
    """Load a TCE-DAT style per-pixel exposure CSV.

    Rows are grouped into one footprint per (storm, region). Rows with wind
    below ``threshold`` are dropped and counted in a logged warning.

    Raises
    ------
    InputError
        On a missing column, an unparseable row, or a duplicated
        (storm, pixel) pair; the message carries the CSV row number.
    """
    groups: dict[tuple[str, str], dict] = {}
    seen: dict[tuple[str, int, int], int] = {}
    dropped = 0
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(EXPOSURE_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise InputError(f"{path}: missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                storm = row["storm_id"].strip()
                region = row["region_id"].strip()
                year, month = int(row["year"]), int(row["month"])
                pix = Pixel(float(row["cell_lat"]), float(row["cell_lon"]),
                            region, float(row["exposed_pop"]))
                wind = float(row["wind_kmh"])
            except (ValueError, TypeError, AttributeError) as exc:
                raise InputError(f"{path}: row {lineno}: {exc}") from exc
            if not storm or not region or not math.isfinite(wind):
                raise InputError(f"{path}: row {lineno}: blank id or non-finite wind")
            if not 1 <= month <= 12:
                raise InputError(f"{path}: row {lineno}: month {month} outside 1-12")
            key = (storm, *pix.key)
            if key in seen:
                raise InputError(
                    f"{path}: row {lineno}: duplicate (storm, pixel) "
                    f"({storm}, {pix.cell_lat}, {pix.cell_lon}); first seen on row {seen[key]}")
            seen[key] = lineno
            if wind < threshold:
                dropped += 1
                continue
            g = groups.setdefault((storm, region), {"year": year, "month": month, "cells": []})
            if (g["year"], g["month"]) != (year, month):
                raise InputError(f"{path}: row {lineno}: storm {storm} changes month "
                                 f"within region {region}")
            g["cells"].append((pix, wind))
    if dropped:
        log.warning("%s: dropped %d rows below %.0f km/h", path, dropped, threshold)
    return [StormFootprint(s, r, g["year"], g["month"], tuple(g["cells"]))
            for (s, r), g in sorted(groups.items())]


def write_exposure_csv(footprints, path):
    """Write footprints back out in the gridded exposure layout."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EXPOSURE_COLUMNS)
        for fp in footprints:
            for pix, wind in fp.cells:
                w.writerow([fp.storm_id, fp.year, fp.month, f"{pix.cell_lat:.1f}",
                            f"{pix.cell_lon:.1f}", fp.region_id, repr(float(wind)),
                            repr(float(pix.population))])
