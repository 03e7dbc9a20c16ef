"""Decomposition-based forecasting of hourly CO2 intensity and day-ahead
scheduling of flexible electricity consumption."""

__version__ = "0.1.0"

from .composite import (Method1Forecaster, Method2Forecaster, forecast_method1, forecast_method2,
                        select_component_models)
from .decomposition import ClassicalDecomposer, EEMDDecomposer
from .evaluation import friedman_test, improvement_table, run_benchmark
from .models import (ArimaForecaster, DPSFForecaster, FFNNForecaster, PerfectForesight,
                     PSFForecaster, Strategy, multi_step_forecast)
from .scheduler import annual_savings, ratio_stats, schedule_flexible
from .series import HourlySeries, compute_errors, fill_gaps, load_csv, write_csv

__all__ = [
    "ArimaForecaster", "ClassicalDecomposer", "DPSFForecaster", "EEMDDecomposer",
    "FFNNForecaster", "HourlySeries", "Method1Forecaster", "Method2Forecaster", "PSFForecaster",
    "PerfectForesight", "Strategy", "annual_savings", "compute_errors", "fill_gaps",
    "forecast_method1", "forecast_method2", "friedman_test", "improvement_table", "load_csv",
    "multi_step_forecast", "ratio_stats", "run_benchmark", "schedule_flexible",
    "select_component_models", "write_csv",
]
