from .arima import (ArimaFit, ArimaForecaster, ArimaSpec, auto_arima_order, fit_arima,
                    forecast_arima)
from .base import BaseForecaster, Forecast, PerfectForesight, Strategy, multi_step_forecast
from .ffnn import FFNNForecaster, FfnnSpec, fit_forecast_ffnn
from .psf import DPSFForecaster, PSFForecaster, PsfSpec, fit_forecast_psf, forecast_dpsf

__all__ = [
    "ArimaFit", "ArimaForecaster", "ArimaSpec", "auto_arima_order", "fit_arima", "forecast_arima",
    "BaseForecaster", "Forecast", "PerfectForesight", "Strategy", "multi_step_forecast",
    "FFNNForecaster", "FfnnSpec", "fit_forecast_ffnn",
    "DPSFForecaster", "PSFForecaster", "PsfSpec", "fit_forecast_psf", "forecast_dpsf",
]
