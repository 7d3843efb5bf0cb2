"""Mini-batch Adam training, evaluation metrics and clamped prediction."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from ..envgen import Dataset, Normalization
from .network import PAPER_SPEC, NetworkParams, NetworkSpec, backward, forward, xavier_init

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Hyper:
    epochs: int = 50
    batch_size: int = 8
    lr: float = 4e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class AdamState:
    lr: float = 4e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: NetworkParams, hyper: Hyper) -> "AdamState":
        zeros = {k: np.zeros_like(a) for k, a in params.arrays.items()}
        return cls(hyper.lr, hyper.beta1, hyper.beta2, hyper.eps, 0,
                   zeros, {k: z.copy() for k, z in zeros.items()})

    def update(self, params: NetworkParams, grads: dict[str, np.ndarray]) -> None:
        self.step += 1
        c1 = 1.0 - self.beta1**self.step
        c2 = 1.0 - self.beta2**self.step
        for name, g in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params.arrays[name] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class Model:
    params: NetworkParams
    stats: Normalization
    manifest: dict = field(default_factory=dict)


def _rngs(seed: int):
    return np.random.default_rng([seed, 0]), np.random.default_rng([seed, 1])


def train(train_set: Dataset, hyper: Hyper = Hyper(), seed: int = 0,
          spec: NetworkSpec = PAPER_SPEC) -> tuple[Model, list[float]]:
    """Fit the network on z-scored features and labels.

    Returns the model and the mean per-sample squared error of each epoch,
    measured on normalized labels.
    """
    if len(train_set) == 0:
        raise ValueError("training set is empty")
    stats = train_set.stats or Normalization.fit(train_set.features, train_set.labels)
    x = stats.features(train_set.features)
    y = stats.labels(train_set.labels)
    init_rng, shuffle_rng = _rngs(seed)
    params = xavier_init(spec, init_rng)
    adam = AdamState.for_params(params, hyper)
    history = []
    n = len(y)
    for epoch in range(hyper.epochs):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, hyper.batch_size):
            idx = order[start:start + hyper.batch_size]
            out, cache = forward(params, x[idx])
            total += float(np.sum((out - y[idx]) ** 2))
            adam.update(params, backward(params, cache, y[idx]))
        history.append(total / n)
        log.debug("epoch %d loss %.6f", epoch + 1, history[-1])
    manifest = {"seed": seed, "hyper": asdict(hyper), "spec": asdict(spec),
                "train_size": n, "steps": adam.step}
    return Model(params, stats, manifest), history


def batches_per_epoch(n: int, batch_size: int) -> int:
    return -(-n // batch_size)


def raw_output(model: Model, features) -> np.ndarray:
    out, _ = forward(model.params, model.stats.features(np.atleast_2d(features)))
    return model.stats.restore_labels(out)


def predict(model: Model, e) -> float:
    x = np.asarray(e, dtype=float)
    if x.ndim != 1:
        raise ValueError("predict takes one feature vector; use predict_batch for many")
    return float(max(raw_output(model, x)[0], 0.0))


def predict_batch(model: Model, features) -> np.ndarray:
    return np.maximum(raw_output(model, features), 0.0)


@dataclass(frozen=True)
class Metrics:
    r_squared: float
    rmse: float
    relative_error: float  # percent
    rmse_normalized: float

    def to_dict(self) -> dict:
        return asdict(self)


def regression_metrics(pred, truth, label_std: float = 1.0) -> Metrics:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if truth.size == 0:
        raise ValueError("cannot evaluate on an empty set")
    ss_tot = float(np.sum((truth - truth.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("labels have zero variance; R-squared is undefined")
    resid = pred - truth
    rmse = float(np.sqrt(np.mean(resid**2)))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(resid) / truth
    return Metrics(1.0 - float(np.sum(resid**2)) / ss_tot, rmse,
                   100.0 * float(np.mean(rel)), rmse / label_std)


def evaluate(model: Model, test: Dataset) -> Metrics:
    if len(test) == 0:
        raise ValueError("test set is empty")
    return regression_metrics(predict_batch(model, test.features), test.labels, model.stats.label_std)
