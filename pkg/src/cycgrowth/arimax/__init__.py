"""ARIMAX estimation, lag selection and model comparison."""

from .model import (ArimaxError, ArimaxFit, ArimaxSpec, FitComparison, compare_fits, design,
                    fit_arimax)
from .selection import CRITERIA, LagSelectionReport, select_lags
from .statespace import (constrain, exact_loglik, innovations, lag_polynomial_roots,
                         profile_loglik, unconstrain)

__all__ = [
    "ArimaxError", "ArimaxFit", "ArimaxSpec", "FitComparison", "compare_fits", "design",
    "fit_arimax", "CRITERIA", "LagSelectionReport", "select_lags", "constrain",
    "exact_loglik", "innovations", "lag_polynomial_roots", "profile_loglik", "unconstrain",
]
