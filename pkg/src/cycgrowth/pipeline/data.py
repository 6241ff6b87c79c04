"""Input loading, balance checks, exposure merge and sample definitions."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..exposure import read_indicator_csv
from ..spatial.weights import build_contiguity_weights, read_adjacency_csv, read_centroid_csv
from ..tseries.transforms import ANNUAL, QUARTERLY, make_periods

log = logging.getLogger(__name__)

TAG_COLUMNS = ("exposed", "coastal_state", "noaa_coastal", "noaa_shoreline")
INDICATORS = ("cyc_kmh", "pop_share", "event_count")


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class SampleDefinition:
    """Named region filter: explicit ids, a 0/1 tag, and/or a parent state."""

    name: str
    ids: tuple | None = None
    tag: str | None = None
    state: str | None = None

    def __post_init__(self):
        if self.tag is not None and self.tag not in TAG_COLUMNS:
            raise DataError(f"unknown tag {self.tag!r}; expected one of {TAG_COLUMNS}")

    def resolve(self, level):
        ids = list(level.region_ids)
        if self.ids is not None:
            unknown = [r for r in self.ids if r not in set(ids)]
            if unknown:
                raise DataError(f"sample {self.name}: unknown regions {unknown[:10]}")
            ids = [r for r in ids if r in set(self.ids)]
        tags = level.tags
        if self.tag is not None:
            ids = [r for r in ids if tags.at[r, self.tag] == 1]
        if self.state is not None:
            if "state" not in tags.columns:
                raise DataError(f"sample {self.name}: tag file has no state column")
            ids = [r for r in ids if tags.at[r, "state"] == self.state]
        if not ids:
            raise DataError(f"sample {self.name} resolves to no regions")
        return tuple(ids)


STATE_SAMPLES = (
    SampleDefinition("All states"),
    SampleDefinition("Exposed states", tag="exposed"),
    SampleDefinition("Coastal states", tag="coastal_state"),
)
COUNTY_SAMPLES = (
    SampleDefinition("All counties"),
    SampleDefinition("Exposed counties", tag="exposed"),
    SampleDefinition("Coastal states' counties", tag="coastal_state"),
    SampleDefinition("Coastal counties (NOAA)", tag="noaa_coastal"),
    SampleDefinition("Shoreline counties (NOAA)", tag="noaa_shoreline"),
)


@dataclass
class LevelData:
    """Balanced regional panel of log income with merged exposure indicators.

    Arrays are (N, T) over ``region_ids`` x ``periods``.
    """

    frequency: str
    region_ids: tuple
    periods: tuple
    log_income: np.ndarray
    indicators: dict
    weights: object
    centroids: dict
    tags: pd.DataFrame
    report: dict = field(default_factory=dict)

    def index(self, ids):
        pos = {r: i for i, r in enumerate(self.region_ids)}
        return [pos[r] for r in ids]


def read_income_csv(path, frequency):
    df = pd.read_csv(path, dtype={"region_id": str})
    need = {"region_id", "year", "income_pc"} | ({"quarter"} if frequency == QUARTERLY else set())
    missing = need - set(df.columns)
    if missing:
        raise DataError(f"{path}: missing columns {sorted(missing)}")
    df["region_id"] = df["region_id"].str.strip()
    if frequency == QUARTERLY:
        df["sub"] = df["quarter"].astype(int)
    else:
        df["sub"] = 0
    bad = df.index[~(df["income_pc"] > 0)]
    if len(bad):
        r = df.loc[bad[0]]
        raise DataError(f"{path}: non-positive income for {r.region_id} in {r.year}")
    return df


def _period_range(first, last, frequency):
    if frequency == QUARTERLY:
        n = (last[0] - first[0]) * 4 + last[1] - first[1] + 1
    else:
        n = last[0] - first[0] + 1
    return tuple(make_periods(tuple(int(v) for v in first), n, frequency))


def balanced_matrix(df, frequency, value="income_pc"):
    """(ids, periods, matrix) or an error naming the first missing cell."""
    dup = df.duplicated(["region_id", "year", "sub"])
    if dup.any():
        r = df.loc[dup].iloc[0]
        raise DataError(f"duplicate row for region {r.region_id}, period {_label(r.year, r['sub'])}")
    keys = sorted(zip(df["year"], df["sub"]))
    periods = _period_range(keys[0], keys[-1], frequency)
    ids = tuple(sorted(df["region_id"].unique()))
    table = df.set_index(["region_id", "year", "sub"])[value]
    full = pd.MultiIndex.from_tuples([(r, y, s) for r in ids for (y, s) in periods])
    missing = full.difference(table.index)
    if len(missing):
        r, y, s = sorted(missing)[0]
        raise DataError(f"unbalanced panel: region {r} has no row for {_label(y, s)} "
                        f"({len(missing)} missing cells)")
    return ids, periods, table.reindex(full).to_numpy(float).reshape(len(ids), len(periods))


def _label(year, sub):
    return f"{int(year)}Q{int(sub)}" if int(sub) else f"{int(year)}"


def merge_indicators(path, ids, periods, frequency):
    """Indicator arrays on the panel keys, zero-filling absent cells.

    Raises ``DataError`` listing the first 10 indicator keys that are not
    panel keys.
    """
    rows = read_indicator_csv(path)
    pos_r = {r: i for i, r in enumerate(ids)}
    pos_p = {p: j for j, p in enumerate(periods)}
    out = {k: np.zeros((len(ids), len(periods))) for k in INDICATORS}
    seen = np.zeros((len(ids), len(periods)), dtype=bool)
    bad, raw_events = [], 0
    for s in rows:
        k = s.key
        if (frequency == ANNUAL) != k.is_annual:
            raise DataError(f"{path}: indicator frequency does not match the {frequency} panel")
        i, j = pos_r.get(k.region_id), pos_p.get((k.year, k.subperiod))
        raw_events += s.event_count
        if i is None or j is None:
            bad.append(f"{k.region_id}/{_label(k.year, k.subperiod)}")
            continue
        if seen[i, j]:
            raise DataError(f"{path}: duplicate indicator for {k.region_id} "
                            f"{_label(k.year, k.subperiod)}")
        seen[i, j] = True
        out["cyc_kmh"][i, j] = s.cyc
        out["pop_share"][i, j] = s.pop_share
        out["event_count"][i, j] = s.event_count
    if bad:
        raise DataError(f"{path}: {len(bad)} indicator keys not in the income panel, "
                        f"first: {', '.join(bad[:10])}")
    report = {"indicator_rows": len(rows), "zero_filled": int((~seen).sum()),
              "event_count_raw": int(raw_events),
              "event_count_merged": int(out["event_count"].sum())}
    return out, report


def read_tags(path, ids):
    tags = pd.read_csv(path, dtype={"region_id": str})
    missing = {"region_id", *TAG_COLUMNS} - set(tags.columns)
    if missing:
        raise DataError(f"{path}: missing columns {sorted(missing)}")
    tags["region_id"] = tags["region_id"].str.strip()
    if tags["region_id"].duplicated().any():
        raise DataError(f"{path}: duplicate region {tags.loc[tags.region_id.duplicated(), 'region_id'].iloc[0]}")
    for c in TAG_COLUMNS:
        if not tags[c].isin([0, 1]).all():
            raise DataError(f"{path}: column {c} must be 0/1")
    tags = tags.set_index("region_id")
    absent = [r for r in ids if r not in tags.index]
    if absent:
        raise DataError(f"{path}: no tags for regions {absent[:10]}")
    extra = [r for r in tags.index if r not in set(ids)]
    tags = tags.loc[list(ids)]
    for inner, outer in (("noaa_shoreline", "noaa_coastal"), ("noaa_coastal", "exposed")):
        viol = tags.index[(tags[inner] == 1) & (tags[outer] == 0)]
        if len(viol):
            raise DataError(f"{path}: {inner} regions not {outer}: {list(viol[:10])}")
    return tags, len(extra)


def load_level(cfg, level):
    """Load and validate one geographic level ('state' or 'county')."""
    frequency = QUARTERLY if level == "state" else ANNUAL
    income = read_income_csv(cfg.path(f"{level}_income"), frequency)
    ids, periods, levels = balanced_matrix(income, frequency)
    report = {"n_regions": len(ids), "n_periods": len(periods),
              "first_period": _label(*periods[0]), "last_period": _label(*periods[-1]),
              "income_rows": int(len(income))}
    if cfg.path(f"{level}_indicator") is not None:
        ind, rep = merge_indicators(cfg.path(f"{level}_indicator"), ids, periods, frequency)
        report.update(rep)
    else:
        ind = {k: np.zeros((len(ids), len(periods))) for k in INDICATORS}
        report["zero_filled"] = len(ids) * len(periods)
    centroids = read_centroid_csv(cfg.path(f"{level}_centroids")) \
        if cfg.path(f"{level}_centroids") is not None else {}
    W = None
    if cfg.path(f"{level}_adjacency") is not None:
        pairs = read_adjacency_csv(cfg.path(f"{level}_adjacency"))
        known = set(ids)
        kept = [(a, b) for a, b in pairs if a in known and b in known]
        report["adjacency_pairs_dropped"] = len(pairs) - len(kept)
        W = build_contiguity_weights(ids, kept, centroids)
    if cfg.path(f"{level}_tags") is not None:
        tags, dropped = read_tags(cfg.path(f"{level}_tags"), ids)
        report["tag_rows_dropped"] = dropped
    else:
        tags = pd.DataFrame(0, index=list(ids), columns=list(TAG_COLUMNS))
    return LevelData(frequency, ids, periods, np.log(levels), ind, W, centroids, tags, report)


def load_and_validate(cfg):
    """Assemble every configured level; returns ``({level: LevelData}, report)``."""
    cfg.check_files()
    data, report = {}, {}
    for level in ("state", "county"):
        if cfg.path(f"{level}_income") is None:
            continue
        data[level] = load_level(cfg, level)
        report[level] = data[level].report
    if not data:
        raise DataError("no income panel configured")
    return data, report
