"""Series preparation and unit-root testing."""

from .transforms import (ANNUAL, QUARTERLY, Correlogram, Series, SeriesError, acf,
                         acf_pacf, centered_ma_2x4, deseasonalize, growth, make_periods,
                         pacf_from_acf, seasonal_factors)
from .unitroot import (UnitRootReport, adf_null, adf_test, ips_test, llc_adjustment,
                       llc_test, pp_null, pp_test, rejection_fraction)

__all__ = [
    "ANNUAL", "QUARTERLY", "Correlogram", "Series", "SeriesError", "acf", "acf_pacf",
    "centered_ma_2x4", "deseasonalize", "growth", "make_periods", "pacf_from_acf",
    "seasonal_factors", "UnitRootReport", "adf_null", "adf_test", "ips_test",
    "llc_adjustment", "llc_test", "pp_null", "pp_test", "rejection_fraction",
]
