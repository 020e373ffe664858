"""windfeas: can an off-grid wind turbine directly power fast EV charging?

Ingests tower wind data, builds interval-averaged hub-height series,
converts them to turbine power, finds stable non-overlapping charging
windows, and reports daily energy and EV-charging capacity with supporting
statistics.
"""

__version__ = "0.1.0"

from ._kernels import USING_NUMBA
from .config import ConfigError, DatasetConfig, RunConfig, load_run_config
from .ev import (ChargingProfile, charge_time_minutes,
                 charge_time_minutes_exact, default_profile_path,
                 energy_per_charge, load_charging_profile)
from .ingest import (ParseError, TowerSchema, WindSample, WindSeries,
                     circular_mean_deg, detect_long_gaps, impute_short_gaps,
                     missing_fraction_by_month, parse_tower_file,
                     read_series_csv, resample_average, write_gap_manifest,
                     write_series_csv)
from .report import FeasibilityReport, emit_heatmap_matrix, run
from .shear import ShearParams, extrapolate, extrapolate_series
from .stability import (CandidateWindows, DailyResult, StableWindow,
                        WindowParams, analyze_day, daily_energy,
                        enumerate_windows, ev_count, filter_stable,
                        select_nonoverlapping)
from .stats import (SummaryStats, WeibullFit, WindroseTable, fit_weibull,
                    summary_stats, windrose)
from .turbine import (PowerSeries, TurbineLibrary, TurbineSpec,
                      bundled_library_path, load_turbine_library, power_at,
                      power_series, rebin_curve)

__all__ = [
    "__version__",
    "USING_NUMBA",
    "ConfigError",
    "DatasetConfig",
    "RunConfig",
    "load_run_config",
    "ChargingProfile",
    "charge_time_minutes",
    "charge_time_minutes_exact",
    "default_profile_path",
    "energy_per_charge",
    "load_charging_profile",
    "ParseError",
    "TowerSchema",
    "WindSample",
    "WindSeries",
    "circular_mean_deg",
    "detect_long_gaps",
    "impute_short_gaps",
    "missing_fraction_by_month",
    "parse_tower_file",
    "read_series_csv",
    "resample_average",
    "write_gap_manifest",
    "write_series_csv",
    "FeasibilityReport",
    "emit_heatmap_matrix",
    "run",
    "ShearParams",
    "extrapolate",
    "extrapolate_series",
    "CandidateWindows",
    "DailyResult",
    "StableWindow",
    "WindowParams",
    "analyze_day",
    "daily_energy",
    "enumerate_windows",
    "ev_count",
    "filter_stable",
    "select_nonoverlapping",
    "SummaryStats",
    "WeibullFit",
    "WindroseTable",
    "fit_weibull",
    "summary_stats",
    "windrose",
    "PowerSeries",
    "TurbineLibrary",
    "TurbineSpec",
    "bundled_library_path",
    "load_turbine_library",
    "power_at",
    "power_series",
    "rebin_curve",
]
