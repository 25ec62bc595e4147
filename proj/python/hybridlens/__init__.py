"""Hybrid lens design: refractive surfaces with metasurface phase."""

from ._core import (
    ConfigError,
    Error,
    InvalidArgument,
    OpticalConstants,
    TargetMap,
    admissibility,
    deviation_lower_bound,
    existence_verdict,
    lemma_residual,
    refract,
    refract_metasurface,
    run_cli,
    solve_rho,
    trace_dilation,
)

__all__ = [
    "ConfigError",
    "Error",
    "InvalidArgument",
    "OpticalConstants",
    "TargetMap",
    "admissibility",
    "deviation_lower_bound",
    "existence_verdict",
    "lemma_residual",
    "refract",
    "refract_metasurface",
    "run_cli",
    "solve_rho",
    "trace_dilation",
]
