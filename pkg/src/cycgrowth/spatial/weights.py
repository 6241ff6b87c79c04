"""Contiguity weights, centroid distances and log-determinants."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..gridwind import haversine_km

log = logging.getLogger(__name__)


class WeightsError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpatialWeights:
    """Row-normalised N x N contiguity matrix over ordered region ids.

    Attributes
    ----------
    ids : tuple of str
    matrix : ndarray
        Non-negative, zero diagonal; each row sums to one, or is all zero for
        an island.
    centroids : dict
        ``region_id -> (lat, lon)``, optional, used for Conley distances.
    """

    ids: tuple
    matrix: np.ndarray
    centroids: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (len(self.ids), len(self.ids)):
            raise WeightsError(f"matrix shape {m.shape} does not match {len(self.ids)} ids")
        if np.any(m < 0) or np.any(np.diag(m) != 0):
            raise WeightsError("weights must be non-negative with a zero diagonal")
        rs = m.sum(axis=1)
        if not np.all(np.isclose(rs, 1.0, atol=1e-10) | (rs == 0)):
            raise WeightsError("rows must sum to one (or zero for islands)")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "ids", tuple(self.ids))

    @property
    def n(self):
        return len(self.ids)

    @property
    def islands(self):
        return [i for i, s in zip(self.ids, self.matrix.sum(axis=1)) if s == 0]

    @cached_property
    def eigenvalues(self):
        """Real eigenvalues of W (W is similar to a symmetric matrix)."""
        ev = np.linalg.eigvals(self.matrix)
        if np.max(np.abs(ev.imag), initial=0.0) > 1e-8:
            log.warning("W has complex eigenvalues; log-determinant uses their real parts")
        return np.sort(ev.real)

    def logdet(self, coef):
        """ln|I - coef * W| from the eigenvalues."""
        return float(np.sum(np.log(np.abs(1.0 - coef * self.eigenvalues))))

    def logdet_lu(self, coef):
        sign, val = np.linalg.slogdet(np.eye(self.n) - coef * self.matrix)
        return float(val)

    def subset(self, ids):
        """Restrict to ``ids`` (in that order) and row-normalise again."""
        pos = {r: k for k, r in enumerate(self.ids)}
        try:
            idx = [pos[r] for r in ids]
        except KeyError as exc:
            raise WeightsError(f"unknown region {exc.args[0]!r}") from None
        binary = (self.matrix[np.ix_(idx, idx)] > 0).astype(float)
        return SpatialWeights(tuple(ids), _row_normalise(binary),
                              {r: self.centroids[r] for r in ids if r in self.centroids})

    def permute(self, order):
        return SpatialWeights(tuple(self.ids[k] for k in order),
                              self.matrix[np.ix_(order, order)], self.centroids)

    def distance_matrix(self, ids=None):
        ids = self.ids if ids is None else ids
        return centroid_distances(self.centroids, ids)


def _row_normalise(binary):
    rs = binary.sum(axis=1, keepdims=True)
    return np.divide(binary, rs, out=np.zeros_like(binary), where=rs > 0)


def build_contiguity_weights(ids, adjacency, centroids=None):
    """Symmetric binary contiguity from undirected pairs, then row-normalised.

    Parameters
    ----------
    ids : sequence of str
        Region order of the resulting matrix.
    adjacency : iterable of (str, str)
    centroids : dict, optional
        ``region_id -> (lat, lon)``.
    """
    ids = tuple(ids)
    if len(set(ids)) != len(ids):
        raise WeightsError("region ids are not unique")
    pos = {r: k for k, r in enumerate(ids)}
    A = np.zeros((len(ids), len(ids)))
    for a, b in adjacency:
        if a == b:
            raise WeightsError(f"self-neighbour pair ({a}, {b})")
        for r in (a, b):
            if r not in pos:
                raise WeightsError(f"adjacency references unknown region {r!r}")
        A[pos[a], pos[b]] = A[pos[b], pos[a]] = 1.0
    W = SpatialWeights(ids, _row_normalise(A), dict(centroids or {}))
    if W.islands:
        log.warning("%d island region(s) without neighbours: %s", len(W.islands),
                    ", ".join(W.islands[:10]))
    return W


def centroid_distances(centroids, ids):
    try:
        lat = np.array([centroids[r][0] for r in ids])
        lon = np.array([centroids[r][1] for r in ids])
    except KeyError as exc:
        raise WeightsError(f"no centroid for region {exc.args[0]!r}") from None
    return haversine_km(lat[:, None], lon[:, None], lat[None, :], lon[None, :])


def read_adjacency_csv(path):
    with open(path, newline="") as fh:
        return [(row["region_a"].strip(), row["region_b"].strip())
                for row in csv.DictReader(fh)]


def read_centroid_csv(path):
    with open(path, newline="") as fh:
        return {row["region_id"].strip(): (float(row["lat"]), float(row["lon"]))
                for row in csv.DictReader(fh)}
