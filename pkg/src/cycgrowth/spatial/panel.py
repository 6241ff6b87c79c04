"""Balanced region x period panels and the two-way within transformation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd


class PanelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PanelDataset:
    """Balanced panel. ``y`` is (N, T); ``X`` is (N, T, k)."""

    region_ids: tuple
    periods: tuple
    y: np.ndarray
    X: np.ndarray
    names: tuple

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 2:
            X = X[:, :, None]
        N, T = len(self.region_ids), len(self.periods)
        if y.shape != (N, T) or X.shape[:2] != (N, T) or X.shape[2] != len(self.names):
            raise PanelError(f"shape mismatch: y {y.shape}, X {X.shape}, "
                             f"{N} regions, {T} periods, {len(self.names)} names")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise PanelError("non-finite values in panel")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "region_ids", tuple(self.region_ids))
        object.__setattr__(self, "periods", tuple(self.periods))
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n_regions(self):
        return len(self.region_ids)

    @property
    def n_periods(self):
        return len(self.periods)

    @property
    def n_obs(self):
        return self.n_regions * self.n_periods

    @property
    def k(self):
        return len(self.names)

    def subset(self, region_ids):
        pos = {r: i for i, r in enumerate(self.region_ids)}
        missing = [r for r in region_ids if r not in pos]
        if missing:
            raise PanelError(f"regions not in panel: {missing[:10]}")
        idx = [pos[r] for r in region_ids]
        return PanelDataset(tuple(region_ids), self.periods, self.y[idx], self.X[idx], self.names)

    def permute(self, order):
        return PanelDataset(tuple(self.region_ids[i] for i in order), self.periods,
                            self.y[order], self.X[order], self.names)

    def select(self, names):
        idx = [self.names.index(n) for n in names]
        return PanelDataset(self.region_ids, self.periods, self.y, self.X[:, :, idx], tuple(names))

    @classmethod
    def from_frame(cls, df, y, x, region="region_id", period="period"):
        """Build from a long frame with one row per (region, period).

        Raises ``PanelError`` naming the first missing (region, period) cell
        when the frame is not balanced.
        """
        x = list(x)
        dup = df.duplicated([region, period])
        if dup.any():
            r = df.loc[dup].iloc[0]
            raise PanelError(f"duplicate row for region {r[region]}, period {r[period]}")
        regions = sorted(df[region].unique())
        periods = sorted(df[period].unique())
        full = pd.MultiIndex.from_product([regions, periods], names=[region, period])
        indexed = df.set_index([region, period])
        missing = full.difference(indexed.index)
        if len(missing):
            r, p = missing[0]
            raise PanelError(f"unbalanced panel: region {r} has no row for period {p} "
                             f"({len(missing)} missing cells)")
        indexed = indexed.reindex(full)
        N, T = len(regions), len(periods)
        Y = indexed[y].to_numpy(float).reshape(N, T)
        X = indexed[x].to_numpy(float).reshape(N, T, len(x))
        return cls(tuple(regions), tuple(periods), Y, X, tuple(x))


def within(a):
    """Two-way demeaning over regions (axis 0) and periods (axis 1)."""
    a = np.asarray(a, dtype=float)
    return (a - a.mean(axis=1, keepdims=True) - a.mean(axis=0, keepdims=True)
            + a.mean(axis=(0, 1), keepdims=True))


def spatial_lag(W, a):
    """Apply W along the region axis of a (N, T) or (N, T, k) array."""
    return np.einsum("ij,j...->i...", W, a)
