"""Priced non-cooperative power-control game.

Each service l picks a transmit power p_l in [0, p_max] to maximize

    u_l(p) = w_l * B * log2(1 + SINR_l(p)) - lam * p_l,
    SINR_l(p) = g[l, l] p_l / (sigma2 + sum_{k != l} g[l, k] p_k).

Bandwidth is in MHz, so rates come out in Mbps. u_l is strictly concave in
p_l, and setting its derivative to zero gives the best response

    p_l* = clip(w_l B / (lam ln 2) - (sigma2 + I_l) / g[l, l], 0, p_max).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels

LN2 = math.log(2.0)
DEFAULT_EPS = 1e-6
DEFAULT_MAX_ITER = 200
LAMBDA_LO = 1e-6
LAMBDA_HI_START = 1.0
LAMBDA_HI_LIMIT = 2.0**60
BISECTION_STEPS = 60


class UnboundedGame(ValueError):
    """Zero price with no power cap: utilities grow without bound."""


class CapUnsatisfiable(RuntimeError):
    """Even the largest price tried leaves the total rate above the cap."""


@dataclass(frozen=True)
class GameConfig:
    gains: np.ndarray
    bandwidth: float = 5.0  # MHz
    sigma2: float = 0.005  # W
    p_max: float = 1.0  # W
    lam: float = 1.0  # utility per W
    eps: float = DEFAULT_EPS
    weights: np.ndarray | None = None

    def __post_init__(self):
        g = np.array(self.gains, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"gain matrix must be square, got shape {g.shape}")
        n = g.shape[0]
        if np.any(g < 0) or np.any(np.diag(g) <= 0):
            raise ValueError("gains must be nonnegative with positive direct links")
        w = np.ones(n) if self.weights is None else np.array(self.weights, dtype=float).reshape(-1)
        if w.shape != (n,) or np.any(w <= 0):
            raise ValueError("need one positive weight per service")
        if not self.sigma2 > 0:
            raise ValueError("noise power must be positive")
        if not self.p_max > 0:
            raise ValueError("power cap must be positive")
        if not self.lam >= 0:
            raise ValueError("pricing factor must be nonnegative")
        if not self.eps > 0:
            raise ValueError("convergence tolerance must be positive")
        g.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "weights", w)

    @property
    def n_services(self) -> int:
        return self.gains.shape[0]

    def with_lambda(self, lam: float) -> "GameConfig":
        return replace(self, lam=lam)

    def subgame(self, services) -> "GameConfig":
        """Game restricted to the given service indices."""
        idx = np.asarray(services, dtype=int)
        return replace(self, gains=self.gains[np.ix_(idx, idx)], weights=self.weights[idx])


def _check_profile(p, cfg: GameConfig) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape != (cfg.n_services,):
        raise ValueError(f"profile has {p.size} entries, game has {cfg.n_services} services")
    if np.any(p < 0) or np.any(p > cfg.p_max):
        raise ValueError("powers must lie in [0, p_max]")
    return p


def interference(p, cfg: GameConfig) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return cfg.gains @ p - np.diag(cfg.gains) * p


def sinr(p, cfg: GameConfig) -> np.ndarray:
    p = _check_profile(p, cfg)
    return np.diag(cfg.gains) * p / (cfg.sigma2 + interference(p, cfg))


def rate(sinr_values, cfg: GameConfig) -> np.ndarray:
    s = np.asarray(sinr_values, dtype=float)
    if np.any(s < 0):
        raise ValueError("SINR must be nonnegative")
    return cfg.bandwidth * np.log2(1.0 + s)


def utilities(p, cfg: GameConfig) -> np.ndarray:
    p = _check_profile(p, cfg)
    return cfg.weights * rate(sinr(p, cfg), cfg) - cfg.lam * p


def utility(l: int, p, cfg: GameConfig) -> float:
    if not 0 <= l < cfg.n_services:
        raise IndexError(f"service {l} out of range for {cfg.n_services} services")
    return float(utilities(p, cfg)[l])


def best_response(l: int, p, cfg: GameConfig) -> float:
    """Utility-maximizing power of service ``l`` against the others in ``p``.

    The entry ``p[l]`` is ignored.
    """
    if not 0 <= l < cfg.n_services:
        raise IndexError(f"service {l} out of range for {cfg.n_services} services")
    if cfg.lam == 0:
        if math.isinf(cfg.p_max):
            raise UnboundedGame("zero price and infinite power cap")
        return float(cfg.p_max)
    p = np.asarray(p, dtype=float)
    g = cfg.gains
    i_l = sum(g[l, k] * p[k] for k in range(cfg.n_services) if k != l)
    target = cfg.weights[l] * cfg.bandwidth / (cfg.lam * LN2) - (cfg.sigma2 + i_l) / g[l, l]
    return float(min(max(target, 0.0), cfg.p_max))


@dataclass(frozen=True)
class EquilibriumResult:
    powers: np.ndarray
    rates: np.ndarray
    utilities: np.ndarray
    iterations: int
    converged: bool
    trace: np.ndarray  # Frobenius norm of the rate change after each sweep
    power_trace: np.ndarray  # (iterations + 1, L); row 0 is the initial profile
    rate_trace: np.ndarray
    utility_trace: np.ndarray

    @property
    def total_rate(self) -> float:
        return float(self.rates.sum())

    @property
    def sweeps_to_settle(self) -> int:
        """Sweeps that changed the profile; the final sweep only confirms it."""
        return self.iterations - 1 if self.converged else self.iterations


def initial_profile(cfg: GameConfig, seed: int | np.random.Generator = 0) -> np.ndarray:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    top = cfg.p_max if math.isfinite(cfg.p_max) else 1.0
    return rng.uniform(0.0, top, cfg.n_services)


def find_equilibrium(cfg: GameConfig, p_init=None, max_iter: int = DEFAULT_MAX_ITER,
                     seed: int = 0, backend: str | None = None) -> EquilibriumResult:
    """Best-response iteration: ascending-index Gauss-Seidel sweeps.

    Stops once the rate vector moves by less than ``cfg.eps`` in one sweep.
    Hitting ``max_iter`` first yields ``converged=False``; no exception.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if cfg.lam == 0 and math.isinf(cfg.p_max):
        raise UnboundedGame("zero price and infinite power cap")
    p0 = initial_profile(cfg, seed) if p_init is None else _check_profile(p_init, cfg)
    powers, iters, converged, diffs, ptrace, rtrace = kernels.solve(
        cfg.gains, cfg.weights, cfg.bandwidth, cfg.sigma2, cfg.p_max, cfg.lam,
        p0, cfg.eps, max_iter, backend=backend)
    utrace = cfg.weights * rtrace - cfg.lam * ptrace
    return EquilibriumResult(powers, rtrace[-1].copy(), utrace[-1].copy(), int(iters), bool(converged),
                             diffs, ptrace, rtrace, utrace)


@dataclass(frozen=True)
class NashCheck:
    ok: bool
    worst_gain: float
    worst_service: int
    gains: np.ndarray  # best grid deviation gain per service


def verify_nash(p, cfg: GameConfig, grid_points: int = 10_000, tol: float = 1e-6) -> NashCheck:
    """Grid search over unilateral deviations on [0, p_max] for every service."""
    p = np.asarray(p, dtype=float)
    top = cfg.p_max if math.isfinite(cfg.p_max) else 10.0 * max(float(p.max()), 1.0)
    grid = np.linspace(0.0, top, grid_points)
    base = cfg.weights * cfg.bandwidth * np.log2(1.0 + sinr_unchecked(p, cfg)) - cfg.lam * p
    noise_plus_i = cfg.sigma2 + interference(p, cfg)
    diag = np.diag(cfg.gains)
    gains = np.empty(cfg.n_services)
    for l in range(cfg.n_services):
        u = cfg.weights[l] * cfg.bandwidth * np.log2(1.0 + diag[l] * grid / noise_plus_i[l]) - cfg.lam * grid
        gains[l] = float(u.max() - base[l])
    worst = int(np.argmax(gains)) if cfg.n_services else -1
    worst_gain = float(gains[worst]) if cfg.n_services else 0.0
    return NashCheck(worst_gain < tol, worst_gain, worst, gains)


def sinr_unchecked(p, cfg: GameConfig) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return np.diag(cfg.gains) * p / (cfg.sigma2 + interference(p, cfg))


@dataclass(frozen=True)
class LambdaTuning:
    lam: float
    result: EquilibriumResult
    binding: bool
    r_hat: float
    lattice: list[tuple[float, float]] = field(default_factory=list)  # (lambda, total rate) probes

    @property
    def slack(self) -> float:
        """Unused fraction of the cap."""
        return (self.r_hat - self.result.total_rate) / self.r_hat


def tune_lambda(cfg: GameConfig, r_hat: float, p_init=None, seed: int = 0,
                max_iter: int = DEFAULT_MAX_ITER, lam_lo: float = LAMBDA_LO,
                lam_hi: float = LAMBDA_HI_START, lam_limit: float = LAMBDA_HI_LIMIT,
                steps: int = BISECTION_STEPS, backend: str | None = None) -> LambdaTuning:
    """Smallest price on the bisection lattice whose equilibrium fits under ``r_hat``.

    The upper end of the bracket is always feasible, so the result respects
    the cap. With equal weights the total equilibrium rate falls as the price
    rises and the feasible prices form an interval. With unequal weights and
    services pinned at ``p_max`` a higher price can raise the total (one
    service backs off and the others see less interference); the result is
    then a feasible crossing point, not necessarily the global minimum.
    """
    if not r_hat > 0:
        raise ValueError("throughput cap must be positive")
    p0 = initial_profile(cfg, seed) if p_init is None else np.asarray(p_init, dtype=float)
    lattice: list[tuple[float, float]] = []

    def solve(lam: float) -> EquilibriumResult:
        res = find_equilibrium(cfg.with_lambda(lam), p0, max_iter, backend=backend)
        lattice.append((lam, res.total_rate))
        return res

    res = solve(lam_lo)
    if res.total_rate <= r_hat:
        return LambdaTuning(lam_lo, res, False, r_hat, lattice)
    hi = max(lam_hi, 2.0 * lam_lo)
    best = solve(hi)
    while best.total_rate > r_hat:
        hi *= 2.0
        if hi > lam_limit:
            raise CapUnsatisfiable(f"total rate {best.total_rate!r} still above cap {r_hat!r} "
                                   f"at price {hi / 2.0!r}")
        best = solve(hi)
    lo = lam_lo
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        res = solve(mid)
        if res.total_rate > r_hat:
            lo = mid
        else:
            hi, best = mid, res
    return LambdaTuning(hi, best, True, r_hat, lattice)


def random_gains(n: int, seed: int | np.random.Generator, dominance: float = 10.0,
                 direct: tuple[float, float] = (0.5, 1.0)) -> np.ndarray:
    """Gain matrix whose cross gains in each row sum to ``g[l, l] / dominance``."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    d = rng.uniform(*direct, n)
    g = np.zeros((n, n))
    if n > 1:
        cross = rng.uniform(0.0, 1.0, (n, n))
        np.fill_diagonal(cross, 0.0)
        g = cross / cross.sum(axis=1, keepdims=True) * (d / dominance)[:, None]
    g[np.diag_indices(n)] = d
    return g
