"""Python bindings for the anisolab solver laboratory."""

from anisolab._core import (
    Config,
    ConfigError,
    Problem,
    __version__,
    bea_margin,
    derive_exponents,
    lambda_for,
    phi_lambda,
    run,
    run_checks,
    run_ladder,
    truncate,
    validate_exponents,
    young_constant,
)

__all__ = [
    "Config",
    "ConfigError",
    "Problem",
    "__version__",
    "bea_margin",
    "derive_exponents",
    "lambda_for",
    "phi_lambda",
    "run",
    "run_checks",
    "run_ladder",
    "truncate",
    "validate_exponents",
    "young_constant",
]
