"""Priced power-control game and its best-response equilibrium solver."""

from .kernels import BACKEND, available_backends
from .model import (
    BISECTION_STEPS,
    DEFAULT_EPS,
    DEFAULT_MAX_ITER,
    LAMBDA_HI_LIMIT,
    LAMBDA_HI_START,
    LAMBDA_LO,
    CapUnsatisfiable,
    EquilibriumResult,
    GameConfig,
    LambdaTuning,
    NashCheck,
    UnboundedGame,
    best_response,
    find_equilibrium,
    initial_profile,
    interference,
    random_gains,
    rate,
    sinr,
    sinr_unchecked,
    tune_lambda,
    utilities,
    utility,
    verify_nash,
)

__all__ = [
    "BACKEND", "available_backends", "BISECTION_STEPS", "DEFAULT_EPS", "DEFAULT_MAX_ITER",
    "LAMBDA_HI_LIMIT", "LAMBDA_HI_START", "LAMBDA_LO", "CapUnsatisfiable", "EquilibriumResult",
    "GameConfig", "LambdaTuning", "NashCheck", "UnboundedGame", "best_response", "find_equilibrium",
    "initial_profile", "interference", "random_gains", "rate", "sinr", "sinr_unchecked",
    "tune_lambda", "utilities", "utility", "verify_nash",
]
