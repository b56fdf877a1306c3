"""Python bindings for the sfio C++ library."""

from ._core import (
    config_hash,
    correct_bias,
    estimate_nominal,
    exp_autocov,
    fit_power_curve,
    p_value,
    reference_config_json,
    simulate_fd,
    solve_fio,
    solve_fio_stochastic,
    wave_speeds,
)

__all__ = [
    "config_hash",
    "correct_bias",
    "estimate_nominal",
    "exp_autocov",
    "fit_power_curve",
    "p_value",
    "reference_config_json",
    "simulate_fd",
    "solve_fio",
    "solve_fio_stochastic",
    "wave_speeds",
]
