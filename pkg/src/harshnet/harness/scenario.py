"""Scenario configuration: one JSON file drives a full experiment."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..game import GameConfig, random_gains
from ..predictor import Hyper
from ..servicemgmt import ServiceDescriptor, roster_from_json, roster_to_json


class ScenarioError(ValueError):
    """Invalid scenario file or override."""


DEFAULT_ROSTER = [
    {"id": 0, "function_tag": "monitoring", "weight": 1.0, "min_rate": 1.0},
    {"id": 1, "function_tag": "monitoring", "weight": 1.0, "min_rate": 1.0},
    {"id": 2, "function_tag": "control", "weight": 1.0, "min_rate": 0.5},
    {"id": 3, "function_tag": "control", "weight": 1.0, "min_rate": 0.5},
    {"id": 4, "function_tag": "control", "weight": 1.0, "min_rate": 0.5},
    {"id": 5, "function_tag": "telemetry", "weight": 1.0, "min_rate": 0.2},
]


@dataclass
class ScenarioConfig:
    dataset_size: int = 416
    dataset_seed: int = 7
    train_fraction: float = 0.75
    split_seed: int = 7
    hyper: Hyper = field(default_factory=Hyper)
    train_seed: int = 7
    bandwidth: float = 3.5  # MHz
    sigma2: float = 0.001  # W
    p_max: float = 1.0  # W
    gain_seed: int = 7
    dominance: float = 3.0
    eps: float = 1e-6
    max_iter: int = 200
    init_seed: int = 7
    roster: list[ServiceDescriptor] = field(default_factory=lambda: roster_from_json(DEFAULT_ROSTER))
    p_static: float | None = None  # defaults to p_max
    lambda_lo: float = 1e-6
    lambda_hi_start: float = 1.0
    lambda_hi_limit: float = 2.0**60
    lambda_steps: int = 60
    nonconvergence_tolerance: float = 0.05
    output_dir: str = "results"

    def __post_init__(self):
        if self.dataset_size < 1:
            raise ScenarioError("dataset size must be at least 1")
        if not 0 < self.train_fraction < 1:
            raise ScenarioError("train_fraction must lie strictly between 0 and 1")
        if not self.roster:
            raise ScenarioError("roster must list at least one service")
        if self.p_static is None:
            self.p_static = self.p_max
        if not 0 < self.p_static <= self.p_max:
            raise ScenarioError("p_static must lie in (0, p_max]")
        if self.dominance <= 0:
            raise ScenarioError("dominance ratio must be positive")
        if not 0 <= self.nonconvergence_tolerance <= 1:
            raise ScenarioError("nonconvergence_tolerance must be a fraction")

    @property
    def n_services(self) -> int:
        return len(self.roster)

    def game_config(self) -> GameConfig:
        return GameConfig(random_gains(self.n_services, self.gain_seed, self.dominance),
                          bandwidth=self.bandwidth, sigma2=self.sigma2, p_max=self.p_max,
                          lam=1.0, eps=self.eps, weights=[s.weight for s in self.roster])

    def with_seed(self, seed: int) -> "ScenarioConfig":
        """Copy with every seed replaced by ``seed``."""
        out = copy.deepcopy(self)
        out.dataset_seed = out.split_seed = out.train_seed = out.gain_seed = out.init_seed = seed
        return out

    def to_dict(self) -> dict:
        h = self.hyper
        return {
            "dataset": {"n": self.dataset_size, "seed": self.dataset_seed},
            "split": {"train_fraction": self.train_fraction, "seed": self.split_seed},
            "training": {"epochs": h.epochs, "batch_size": h.batch_size, "lr": h.lr,
                         "beta1": h.beta1, "beta2": h.beta2, "seed": self.train_seed},
            "game": {"bandwidth_mhz": self.bandwidth, "sigma2": self.sigma2, "p_max": self.p_max,
                     "gain_seed": self.gain_seed, "dominance": self.dominance, "eps": self.eps,
                     "max_iter": self.max_iter, "init_seed": self.init_seed},
            "roster": roster_to_json(self.roster),
            "baseline": {"p_static": self.p_static},
            "lambda": {"lo": self.lambda_lo, "hi_start": self.lambda_hi_start,
                       "hi_limit": self.lambda_hi_limit, "steps": self.lambda_steps},
            "nonconvergence_tolerance": self.nonconvergence_tolerance,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        try:
            ds, sp, tr = d.get("dataset", {}), d.get("split", {}), d.get("training", {})
            gm, bl, lm = d.get("game", {}), d.get("baseline", {}), d.get("lambda", {})
            base = cls()
            hyper = Hyper(epochs=int(tr.get("epochs", base.hyper.epochs)),
                          batch_size=int(tr.get("batch_size", base.hyper.batch_size)),
                          lr=float(tr.get("lr", base.hyper.lr)),
                          beta1=float(tr.get("beta1", base.hyper.beta1)),
                          beta2=float(tr.get("beta2", base.hyper.beta2)))
            return cls(
                dataset_size=int(ds.get("n", base.dataset_size)),
                dataset_seed=int(ds.get("seed", base.dataset_seed)),
                train_fraction=float(sp.get("train_fraction", base.train_fraction)),
                split_seed=int(sp.get("seed", base.split_seed)),
                hyper=hyper,
                train_seed=int(tr.get("seed", base.train_seed)),
                bandwidth=float(gm.get("bandwidth_mhz", base.bandwidth)),
                sigma2=float(gm.get("sigma2", base.sigma2)),
                p_max=float(gm.get("p_max", base.p_max)),
                gain_seed=int(gm.get("gain_seed", base.gain_seed)),
                dominance=float(gm.get("dominance", base.dominance)),
                eps=float(gm.get("eps", base.eps)),
                max_iter=int(gm.get("max_iter", base.max_iter)),
                init_seed=int(gm.get("init_seed", base.init_seed)),
                roster=roster_from_json(d["roster"]) if "roster" in d else base.roster,
                p_static=bl.get("p_static"),
                lambda_lo=float(lm.get("lo", base.lambda_lo)),
                lambda_hi_start=float(lm.get("hi_start", base.lambda_hi_start)),
                lambda_hi_limit=float(lm.get("hi_limit", base.lambda_hi_limit)),
                lambda_steps=int(lm.get("steps", base.lambda_steps)),
                nonconvergence_tolerance=float(d.get("nonconvergence_tolerance",
                                                     base.nonconvergence_tolerance)),
                output_dir=str(d.get("output_dir", base.output_dir)),
            )
        except (TypeError, KeyError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"invalid scenario: {exc}") from exc


def default_scenario() -> ScenarioConfig:
    text = resources.files("harshnet.harness").joinpath("default_scenario.json").read_text(encoding="utf-8")
    return ScenarioConfig.from_dict(json.loads(text))


def load_scenario(path: str | Path | None) -> ScenarioConfig:
    if path is None:
        return default_scenario()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return ScenarioConfig.from_dict(data)
