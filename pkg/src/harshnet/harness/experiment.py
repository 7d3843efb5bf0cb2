"""Prediction -> pricing -> equilibrium pipeline and the static-power baseline."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..envgen import Dataset, generate_dataset, split
from ..game import CapUnsatisfiable, EquilibriumResult, GameConfig, sinr, tune_lambda
from ..predictor import Metrics, Model, evaluate, predict_batch, train
from ..servicemgmt import Event, ServiceGroup, form_groups, reorganize
from .scenario import ScenarioConfig

log = logging.getLogger(__name__)

PAPER_POWER_REDUCTION_PCT = 22.6
PAPER_SINR_GAIN_PCT = 18.5


@dataclass(frozen=True)
class BaselineOutcome:
    powers: np.ndarray
    rates: np.ndarray
    sinr: np.ndarray
    admitted: list[int]
    rejected: list[int]

    @property
    def total_rate(self) -> float:
        return float(self.rates.sum())


def static_baseline(cfg: GameConfig, r_hat: float, p_static: float) -> BaselineOutcome:
    """Fixed-power admission control.

    Requests are taken by descending weight, then ascending index. Each one
    is admitted at ``p_static`` if the admitted set's total rate (interference
    included) stays within ``r_hat``. The first refusal rejects it and every
    request after it.
    """
    if not 0 < p_static <= cfg.p_max:
        raise ValueError("p_static must lie in (0, p_max]")
    n = cfg.n_services
    order = sorted(range(n), key=lambda l: (-cfg.weights[l], l))
    admitted: list[int] = []
    powers = np.zeros(n)
    for pos, l in enumerate(order):
        trial = powers.copy()
        trial[l] = p_static
        total = float(cfg.bandwidth * np.log2(1.0 + sinr(trial, cfg)).sum())
        if total > r_hat:
            break
        powers = trial
        admitted.append(l)
    s = sinr(powers, cfg)
    rates = cfg.bandwidth * np.log2(1.0 + s)
    rejected = [l for l in order if l not in admitted]
    return BaselineOutcome(powers, rates, s, admitted, rejected)


def db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else -math.inf


@dataclass(frozen=True)
class SampleOutcome:
    sample_id: int
    r_true: float
    r_hat: float
    lam: float
    binding: bool
    converged: bool
    iterations: int
    proposed_avg_power: float
    proposed_avg_sinr: float
    proposed_total_rate: float
    baseline_avg_power: float
    baseline_avg_sinr: float
    baseline_total_rate: float
    baseline_admitted: int
    result: EquilibriumResult | None = field(default=None, compare=False, repr=False)


@dataclass
class ComparisonReport:
    samples: list[SampleOutcome]
    prediction: Metrics
    test_ids: np.ndarray
    test_truth: np.ndarray
    test_pred: np.ndarray
    events: list[Event] = field(default_factory=list)
    groups: list[ServiceGroup] = field(default_factory=list)
    training_loss: list[float] = field(default_factory=list)

    @property
    def included(self) -> list[SampleOutcome]:
        return [s for s in self.samples if s.converged]

    @property
    def excluded_count(self) -> int:
        return len(self.samples) - len(self.included)

    @property
    def excluded_fraction(self) -> float:
        return self.excluded_count / len(self.samples) if self.samples else 0.0

    def _mean(self, attr: str) -> float:
        rows = self.included
        return float(np.mean([getattr(s, attr) for s in rows])) if rows else math.nan

    def summary(self) -> dict:
        pp, bp = self._mean("proposed_avg_power"), self._mean("baseline_avg_power")
        ps, bs = self._mean("proposed_avg_sinr"), self._mean("baseline_avg_sinr")
        iters = [s.iterations for s in self.included]
        return {
            "samples": len(self.samples),
            "included": len(self.included),
            "excluded_nonconverged": self.excluded_count,
            "proposed": {"avg_power_w": pp, "avg_sinr": ps, "avg_sinr_db": db(ps),
                         "avg_total_rate_mbps": self._mean("proposed_total_rate")},
            "baseline": {"avg_power_w": bp, "avg_sinr": bs, "avg_sinr_db": db(bs),
                         "avg_total_rate_mbps": self._mean("baseline_total_rate")},
            "power_reduction_pct": 100.0 * (bp - pp) / bp if bp else math.nan,
            "sinr_gain_pct": 100.0 * (ps - bs) / bs if bs else math.nan,
            "sinr_gain_db": db(ps) - db(bs),
            "paper_reference": {"power_reduction_pct": PAPER_POWER_REDUCTION_PCT,
                                "sinr_gain_pct": PAPER_SINR_GAIN_PCT},
            "convergence": {"mean_iterations": float(np.mean(iters)) if iters else math.nan,
                            "max_iterations": int(max(iters)) if iters else 0,
                            "binding_samples": sum(s.binding for s in self.included)},
            "prediction": self.prediction.to_dict(),
        }


def allocate(cfg: GameConfig, r_hat: float, scenario: ScenarioConfig):
    """Proposed scheme for one cap: tune the price, then solve the game."""
    return tune_lambda(cfg, r_hat, seed=scenario.init_seed, max_iter=scenario.max_iter,
                       lam_lo=scenario.lambda_lo, lam_hi=scenario.lambda_hi_start,
                       lam_limit=scenario.lambda_hi_limit, steps=scenario.lambda_steps)


def compare_sample(cfg: GameConfig, scenario: ScenarioConfig, sample_id: int,
                   r_true: float, r_hat: float) -> SampleOutcome:
    base = static_baseline(cfg, r_hat, scenario.p_static)
    b_avg_p, b_avg_s = float(base.powers.mean()), float(base.sinr.mean())
    if r_hat <= 0:
        # zero predicted capacity: nothing may transmit under either scheme
        return SampleOutcome(sample_id, r_true, r_hat, math.inf, True, True, 0, 0.0, 0.0, 0.0,
                             b_avg_p, b_avg_s, base.total_rate, len(base.admitted), None)
    try:
        tuning = allocate(cfg, r_hat, scenario)
    except CapUnsatisfiable as exc:
        log.warning("sample %d: %s", sample_id, exc)
        return SampleOutcome(sample_id, r_true, r_hat, math.nan, True, False, 0, math.nan, math.nan,
                             math.nan, b_avg_p, b_avg_s, base.total_rate, len(base.admitted), None)
    res = tuning.result
    s = sinr(res.powers, cfg)
    return SampleOutcome(sample_id, r_true, r_hat, tuning.lam, tuning.binding, res.converged,
                         res.iterations, float(res.powers.mean()), float(s.mean()), res.total_rate,
                         b_avg_p, b_avg_s, base.total_rate, len(base.admitted), res)


def service_rounds(scenario: ScenarioConfig, cfg: GameConfig, caps, start_groups=None):
    """Run one game round per cap among the active services and reorganize after each."""
    groups = start_groups if start_groups is not None else form_groups(scenario.roster)
    index = {s.id: i for i, s in enumerate(scenario.roster)}
    events: list[Event] = []
    for step, r_hat in enumerate(caps):
        players = [g.active for g in groups if not g.suspended and g.active is not None]
        rates: dict[int, float] = {}
        if players and r_hat > 0:
            sub = cfg.subgame([index[p.id] for p in players])
            try:
                res = allocate(sub, r_hat, scenario).result
                rates = {p.id: float(a) for p, a in zip(players, res.rates)}
            except CapUnsatisfiable:
                rates = {p.id: 0.0 for p in players}
        elif players:
            rates = {p.id: 0.0 for p in players}
        reorg = reorganize(groups, r_hat, rates, step)
        groups = reorg.groups
        events.extend(reorg.events)
    return groups, events


def prepare_model(scenario: ScenarioConfig, model: Model | None = None):
    ds = generate_dataset(scenario.dataset_size, scenario.dataset_seed)
    train_set, test_set = split(ds, scenario.train_fraction, scenario.split_seed)
    history: list[float] = []
    if model is None:
        model, history = train(train_set, scenario.hyper, scenario.train_seed)
    return model, train_set, test_set, history


def run_comparison(scenario: ScenarioConfig, model: Model | None = None) -> ComparisonReport:
    model, _, test_set, history = prepare_model(scenario, model)
    return compare_on(scenario, model, test_set, history)


def compare_on(scenario: ScenarioConfig, model: Model, test_set: Dataset,
               history: list[float] | None = None) -> ComparisonReport:
    r_hat = predict_batch(model, test_set.features)
    metrics = evaluate(model, test_set)
    cfg = scenario.game_config()
    samples = [compare_sample(cfg, scenario, int(i), float(t), float(r))
               for i, t, r in zip(test_set.ids, test_set.labels, r_hat)]
    groups, events = service_rounds(scenario, cfg, r_hat)
    return ComparisonReport(samples, metrics, test_set.ids.copy(), test_set.labels.copy(), r_hat,
                            events, groups, list(history or []))
