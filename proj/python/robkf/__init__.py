"""Robust Kalman filtering: rLS.AO, rLS.IO and the hybrid rLS.IOAO."""

from ._robkf import (
    Error,
    Model,
    NumericalError,
    benchmark,
    calibrate_radius_scalar,
    chi_square_quantile,
    clipping_heights,
    huberize,
    least_favorable_radius_scalar,
    run_filter,
    saddle_check,
    simulate,
    steady_state_model,
)

__all__ = [
    "Error",
    "Model",
    "NumericalError",
    "benchmark",
    "calibrate_radius_scalar",
    "chi_square_quantile",
    "clipping_heights",
    "huberize",
    "least_favorable_radius_scalar",
    "run_filter",
    "saddle_check",
    "simulate",
    "steady_state_model",
]
