"""Proximal descent and baselines for weakly convex problems."""

from ._core import (
    BaselineReport,
    ConfigError,
    InnerBudgetExhausted,
    MoreauResult,
    Oracle,
    ProxDescentConfig,
    ReferenceBudgetExhausted,
    SolveReport,
    WeakConvexityViolation,
    blind_deconv,
    convexify,
    is_to_ms_bound,
    moreau_envelope,
    ms_to_is_bound,
    pgsg,
    phase_retrieval,
    ppm,
    prox_descent,
    run_config,
    subgradient_method,
    toy,
)

__all__ = [
    "BaselineReport",
    "ConfigError",
    "InnerBudgetExhausted",
    "MoreauResult",
    "Oracle",
    "ProxDescentConfig",
    "ReferenceBudgetExhausted",
    "SolveReport",
    "WeakConvexityViolation",
    "blind_deconv",
    "convexify",
    "is_to_ms_bound",
    "moreau_envelope",
    "ms_to_is_bound",
    "pgsg",
    "phase_retrieval",
    "ppm",
    "prox_descent",
    "run_config",
    "subgradient_method",
    "toy",
]
