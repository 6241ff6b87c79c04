"""
Population-weighted cyclone intensity indicators per region and period.

For each (region, period) the quarterly indicator is

    cyc = sum_p max_s wind[p, s] * exposed_pop[p] / total_pop

and the annual one discounts each storm by (12 - month) / 12 before the max
over storms is taken. Alongside ``cyc`` every record carries the share of
the population living in hit pixels and the number of distinct storms.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass

ANNUAL = 0


class ExposureError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class RegionPeriodKey:
    """``subperiod`` is a quarter 1-4, or ``ANNUAL`` (0) for yearly series."""

    region_id: str
    year: int
    subperiod: int = ANNUAL

    @property
    def is_annual(self):
        return self.subperiod == ANNUAL


@dataclass(frozen=True)
class RegionPopulation:
    key: RegionPeriodKey
    total_population: float

    def __post_init__(self):
        if not self.total_population > 0:
            raise ExposureError(f"non-positive population for {self.key}")


@dataclass(frozen=True)
class ExposureSeries:
    key: RegionPeriodKey
    cyc: float = 0.0
    pop_share: float = 0.0
    event_count: int = 0


def quarter_of(month):
    return (month - 1) // 3 + 1


def temporal_weight(month):
    """Within-year discount (12 - m) / 12 for a storm striking in month m."""
    if not 1 <= month <= 12:
        raise ExposureError(f"month {month} outside 1-12")
    return (12 - month) / 12.0


def _population_lookup(populations, quarterly):
    table = {}
    for rec in populations:
        table[rec.key] = rec.total_population

    def lookup(key):
        if key in table:
            return table[key]
        # Census totals are annual; a quarter inherits its year's value.
        if quarterly:
            annual = RegionPeriodKey(key.region_id, key.year, ANNUAL)
            if annual in table:
                return table[annual]
        raise ExposureError(f"no population record for region {key.region_id}, "
                            f"period {key.year}" + (f"Q{key.subperiod}" if quarterly else ""))

    return table, lookup


def _period_keys(populations, quarterly):
    keys = set()
    for rec in populations:
        k = rec.key
        if quarterly:
            if k.is_annual:
                keys.update(RegionPeriodKey(k.region_id, k.year, q) for q in range(1, 5))
            else:
                keys.add(k)
        elif k.is_annual:
            keys.add(k)
    return keys


def _aggregate(footprints, populations, quarterly, weighted):
    _, lookup = _population_lookup(populations, quarterly)
    # (period key) -> pixel -> [max weighted wind, exposed pop]
    best = defaultdict(dict)
    storms = defaultdict(set)
    for fp in footprints:
        w = temporal_weight(fp.month) if weighted else 1.0
        sub = quarter_of(fp.month) if quarterly else ANNUAL
        key = RegionPeriodKey(fp.region_id, fp.year, sub)
        lookup(key)
        storms[key].add(fp.storm_id)
        cells = best[key]
        for pix, wind in fp.cells:
            value = wind * w
            prev = cells.get(pix.key)
            if prev is None or value > prev[0]:
                cells[pix.key] = (value, pix.population)

    keys = _period_keys(populations, quarterly) | set(best)
    out = []
    for key in sorted(keys):
        cells = best.get(key)
        if not cells:
            out.append(ExposureSeries(key))
            continue
        total = lookup(key)
        cyc = sum(v * pop for v, pop in cells.values()) / total
        share = sum(pop for _, pop in cells.values()) / total
        out.append(ExposureSeries(key, cyc, min(share, 1.0), len(storms[key])))
    return out


def build_quarterly_indicator(footprints, populations):
    """Quarterly population-weighted maximum wind per region.

    ``populations`` may hold quarterly or annual records; an annual record is
    used for all four quarters of its year. Every region-quarter implied by
    the population records is returned, zero where no storm hit.
    """
    return _aggregate(footprints, populations, quarterly=True, weighted=False)


def build_annual_indicator(footprints, populations, temporal_weighting=True):
    """Annual indicator with each storm's wind scaled by (12 - month) / 12.

    The maximum over storms is taken on the weighted values. Passing
    ``temporal_weighting=False`` drops the discount.
    """
    return _aggregate(footprints, populations, quarterly=False,
                      weighted=temporal_weighting)


def build_robustness_indicators(footprints, populations, frequency="quarterly"):
    """Exposed-population share and storm counts, at the given frequency.

    Each hit pixel counts once per period however many storms reach it,
    so ``pop_share`` stays in [0, 1]. ``cyc`` is filled with the matching
    baseline indicator.
    """
    if frequency == "quarterly":
        return build_quarterly_indicator(footprints, populations)
    if frequency == "annual":
        return build_annual_indicator(footprints, populations)
    raise ExposureError(f"unknown frequency {frequency!r}")


def write_indicator_csv(series, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["region_id", "year", "quarter", "cyc_kmh", "pop_share", "event_count"])
        for s in series:
            k = s.key
            w.writerow([k.region_id, k.year, "" if k.is_annual else k.subperiod,
                        repr(float(s.cyc)), repr(float(s.pop_share)), s.event_count])


def read_indicator_csv(path):
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            q = row["quarter"].strip()
            key = RegionPeriodKey(row["region_id"], int(row["year"]), int(q) if q else ANNUAL)
            out.append(ExposureSeries(key, float(row["cyc_kmh"]), float(row["pop_share"]),
                                      int(row["event_count"])))
    return out


def read_population_csv(path):
    """Population CSV: region_id, year, quarter (optional/blank), population."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            try:
                q = (row.get("quarter") or "").strip()
                key = RegionPeriodKey(row["region_id"], int(row["year"]), int(q) if q else ANNUAL)
                out.append(RegionPopulation(key, float(row["population"])))
            except (KeyError, ValueError) as exc:
                raise ExposureError(f"{path}: row {lineno}: {exc}") from exc
    return out
