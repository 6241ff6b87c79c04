"""Spatial weights and fixed-effects spatial panel estimators."""

from .conley import conley_meat, fit_fe_conley
from .models import (FITTERS, BoundaryWarning, EstimationError, FitResult, fit_fe_ols,
                     fit_sac, fit_sar, fit_sdm, fit_sem)
from .panel import PanelDataset, PanelError, spatial_lag, within
from .wald import WaldReport, wald_specification
from .weights import (SpatialWeights, WeightsError, build_contiguity_weights,
                      centroid_distances, read_adjacency_csv, read_centroid_csv)

__all__ = [
    "conley_meat", "fit_fe_conley", "FITTERS", "BoundaryWarning", "EstimationError",
    "FitResult", "fit_fe_ols", "fit_sac", "fit_sar", "fit_sdm", "fit_sem", "PanelDataset",
    "PanelError", "spatial_lag", "within", "WaldReport", "wald_specification",
    "SpatialWeights", "WeightsError", "build_contiguity_weights", "centroid_distances",
    "read_adjacency_csv", "read_centroid_csv",
]
