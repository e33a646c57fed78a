"""Inference and operations HTTP service."""

from .app import ServeSettings, UnauthorizedError, UnsupportedFormatError, create_app
from .predictor import (
    LoadedModel,
    ModelCache,
    NoModelDeployedError,
    load_model,
    predict,
    predict_pv,
    predict_retrofit,
    render_report_csv,
)

__all__ = [
    "LoadedModel",
    "ModelCache",
    "NoModelDeployedError",
    "ServeSettings",
    "UnauthorizedError",
    "UnsupportedFormatError",
    "create_app",
    "load_model",
    "predict",
    "predict_pv",
    "predict_retrofit",
    "render_report_csv",
]
