"""Run configuration read from a ``key = value`` text file."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

PATH_KEYS = (
    "state_income", "state_indicator", "state_adjacency", "state_centroids", "state_tags",
    "state_pixels", "county_income", "county_indicator", "county_adjacency",
    "county_centroids", "county_tags",
)


class ConfigError(ValueError):
    pass


def _orders(text):
    out = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        p, d, q = (int(v) for v in part.split(","))
        out.append((p, d, q))
    return tuple(out)


@dataclass(frozen=True)
class RunConfig:
    """Input paths, model choices and numeric settings for a replication run.

    Paths are resolved against ``base_dir`` (the config file's directory).
    Inputs that are left empty disable the tables that need them.
    """

    base_dir: Path = Path(".")
    state_income: str = ""
    state_indicator: str = ""
    state_adjacency: str = ""
    state_centroids: str = ""
    state_tags: str = ""
    state_pixels: str = ""
    county_income: str = ""
    county_indicator: str = ""
    county_adjacency: str = ""
    county_centroids: str = ""
    county_tags: str = ""
    output: str = "results"
    tables: tuple = ("all",)
    seed: int = 0
    focus_region: str = "FL"
    appendix_regions: tuple = ("NC", "LA", "TX")
    appendix_orders: tuple = ((4, 0, 0), (1, 0, 2), (1, 0, 0))
    unitroot_sample: str = "exposed"
    unitroot_lags: int = 5
    panel_unitroot_lags: int = 3
    arimax_p: int = 5
    arimax_q_max: int = 4
    max_lag: int = 30
    cyc_lags: int = 3
    conley_km: float = 1000.0
    conley_lags: int = 3
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.conley_km > 0:
            raise ConfigError("conley_km must be positive")
        if self.conley_lags < 0 or self.cyc_lags < 0 or self.max_lag < 0:
            raise ConfigError("lag settings must be non-negative")
        if len(self.appendix_orders) != len(self.appendix_regions):
            raise ConfigError("appendix_orders needs one (p,d,q) per appendix region")

    def path(self, key):
        """Absolute path for an input key, or ``None`` when unset."""
        value = getattr(self, key)
        if not value:
            return None
        p = Path(value)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def check_files(self):
        missing = [f"{k}={self.path(k)}" for k in PATH_KEYS
                   if self.path(k) is not None and not self.path(k).exists()]
        if missing:
            raise ConfigError("missing input files: " + ", ".join(missing))

    def output_dir(self):
        p = Path(self.output)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def override(self, **values):
        """Copy with non-``None`` values replaced (command-line flags win)."""
        return dataclasses.replace(self, **{k: v for k, v in values.items() if v is not None})


def _convert(name, raw, ftype):
    if name == "tables":
        return tuple(t.strip() for t in raw.split(",") if t.strip())
    if name == "appendix_regions":
        return tuple(t.strip() for t in raw.split(",") if t.strip())
    if name == "appendix_orders":
        return _orders(raw)
    if ftype in ("int", int):
        return int(raw)
    if ftype in ("float", float):
        return float(raw)
    return raw


def parse_config(text, base_dir="."):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    values, extra = {}, {}
    for key, raw in parser["run"].items():
        if key in fields and key not in ("base_dir", "extra"):
            try:
                values[key] = _convert(key, raw.strip(), fields[key].type)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        else:
            extra[key] = raw.strip()
    return RunConfig(base_dir=Path(base_dir), extra=extra, **values)


def load_config(path):
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


def dump_config(cfg):
    """Inverse of :func:`parse_config` for the declared fields."""
    lines = []
    for f in dataclasses.fields(cfg):
        if f.name in ("base_dir", "extra"):
            continue
        v = getattr(cfg, f.name)
        if f.name == "appendix_orders":
            v = ";".join(",".join(str(i) for i in o) for o in v)
        elif isinstance(v, tuple):
            v = ",".join(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
