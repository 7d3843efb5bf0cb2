"""Synthetic harsh-environment measurements and their throughput labels.

Each sample carries 30 EMI readings (radiation power density at positions
spread evenly around a power station), the ambient temperature and the
relative humidity. Labels come from an analytic log-rate oracle so that the
learning task follows the EMI -> SINR -> throughput chain, with 1 % Gaussian
observation noise on top.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

N_EMI = 30
N_FEATURES = N_EMI + 2
EMI_COLUMNS = [f"emi_{j:02d}" for j in range(N_EMI)]
CSV_HEADER = EMI_COLUMNS + ["temperature", "humidity", "throughput"]
DEFAULT_SIZE = 416
SAMPLES_PER_DAY = 3
CAMPAIGN_DAYS = 304  # January through October


@dataclass(frozen=True)
class OracleConstants:
    """Constants of the analytic throughput oracle.

    throughput = bandwidth * log2(1 + signal / (noise + kappa * mean(emi)))
                 * temp_factor(T) * humidity_factor(H)

    Temperatures above ``temp_knee`` decay the rate by
    ``exp(-temp_decay * (T - temp_knee))``; humidity above ``humidity_knee``
    scales it by ``1 - humidity_slope * (H - humidity_knee)``.
    """

    bandwidth: float = 20.0  # MHz, so labels are in Mbps
    signal: float = 31.0
    noise: float = 1.0
    kappa: float = 1.0
    temp_knee: float = 35.0
    temp_decay: float = 0.03
    humidity_knee: float = 60.0
    humidity_slope: float = 0.0075

    @property
    def ceiling(self) -> float:
        return self.bandwidth * math.log2(1.0 + self.signal / self.noise)


ORACLE = OracleConstants()


@dataclass(frozen=True)
class GeneratorParams:
    emi_log_level: float = math.log(12.0)
    emi_level_sd: float = 0.6
    diurnal_amplitude: float = 0.5
    seasonal_amplitude: float = 0.3
    spatial_profile: float = 0.4
    spatial_rho: float = 0.8
    spatial_sd: float = 0.5
    temp_mean: float = 13.0
    temp_seasonal: float = 15.0
    temp_noise: float = 3.0
    humidity_mean: float = 62.0
    humidity_seasonal: float = 15.0
    humidity_noise: float = 12.0
    label_noise: float = 0.01


GENERATOR = GeneratorParams()
_SLOT_TEMP_OFFSET = (-3.0, 5.0, 1.0)  # 00:00, 08:00, 16:00 readings


def temperature_factor(temperature, c: OracleConstants = ORACLE):
    t = np.asarray(temperature, dtype=float)
    return np.where(t > c.temp_knee, np.exp(-c.temp_decay * (t - c.temp_knee)), 1.0)


def humidity_factor(humidity, c: OracleConstants = ORACLE):
    h = np.asarray(humidity, dtype=float)
    return np.where(h > c.humidity_knee, 1.0 - c.humidity_slope * (h - c.humidity_knee), 1.0)


def oracle_throughput(features, constants: OracleConstants = ORACLE):
    """Noise-free throughput in Mbps for one sample or a batch of samples."""
    x = np.asarray(features, dtype=float)
    if x.shape[-1] != N_FEATURES:
        raise ValueError(f"expected {N_FEATURES} features, got {x.shape[-1]}")
    emi = x[..., :N_EMI]
    c = constants
    rate = c.bandwidth * np.log2(1.0 + c.signal / (c.noise + c.kappa * emi.mean(axis=-1)))
    out = rate * temperature_factor(x[..., N_EMI], c) * humidity_factor(x[..., N_EMI + 1], c)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Normalization:
    feature_mean: np.ndarray
    feature_std: np.ndarray
    label_mean: float
    label_std: float

    @classmethod
    def fit(cls, features: np.ndarray, labels: np.ndarray) -> "Normalization":
        std = features.std(axis=0)
        label_std = float(labels.std())
        return cls(features.mean(axis=0), np.where(std > 0, std, 1.0),
                   float(labels.mean()), label_std if label_std > 0 else 1.0)

    def features(self, x):
        return (np.asarray(x, dtype=float) - self.feature_mean) / self.feature_std

    def labels(self, y):
        return (np.asarray(y, dtype=float) - self.label_mean) / self.label_std

    def restore_labels(self, z):
        return np.asarray(z, dtype=float) * self.label_std + self.label_mean

    def to_dict(self) -> dict:
        return {"feature_mean": self.feature_mean.tolist(), "feature_std": self.feature_std.tolist(),
                "label_mean": self.label_mean, "label_std": self.label_std}

    @classmethod
    def from_dict(cls, d: dict) -> "Normalization":
        return cls(np.array(d["feature_mean"], dtype=float), np.array(d["feature_std"], dtype=float),
                   float(d["label_mean"]), float(d["label_std"]))


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (n, 32)
    labels: np.ndarray  # (n,)
    ids: np.ndarray  # original row index, chronological
    seed: int | None = None
    stats: Normalization | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[1] != N_FEATURES:
            raise ValueError(f"features must have shape (n, {N_FEATURES})")
        if len(self.labels) != len(self.features) or len(self.ids) != len(self.features):
            raise ValueError("features, labels and ids differ in length")
        if np.any(self.features[:, :N_EMI] < 0):
            raise ValueError("EMI readings must be nonnegative")
        hum = self.features[:, N_EMI + 1]
        if np.any((hum < 0) | (hum > 100)):
            raise ValueError("humidity must lie in [0, 100]")
        if np.any(self.labels < 0):
            raise ValueError("throughput labels must be nonnegative")

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.features[idx], self.labels[idx], self.ids[idx], self.seed, self.stats)


def _campaign_days(n_days: int, rng: np.random.Generator) -> np.ndarray:
    span = max(CAMPAIGN_DAYS, n_days)
    return np.sort(rng.choice(span, size=n_days, replace=False))


def _spatial_field(n: int, rng: np.random.Generator, p: GeneratorParams) -> np.ndarray:
    """Stationary AR(1) Gaussian field along the 30 positions, unit variance."""
    eps = rng.standard_normal((n, N_EMI))
    z = np.empty_like(eps)
    z[:, 0] = eps[:, 0]
    innov = math.sqrt(1.0 - p.spatial_rho**2)
    for j in range(1, N_EMI):
        z[:, j] = p.spatial_rho * z[:, j - 1] + innov * eps[:, j]
    return z


def generate_features(n: int, rng: np.random.Generator, p: GeneratorParams = GENERATOR) -> np.ndarray:
    n_days = -(-n // SAMPLES_PER_DAY)
    days = np.repeat(_campaign_days(n_days, rng), SAMPLES_PER_DAY)[:n]
    slot = np.tile(np.arange(SAMPLES_PER_DAY), n_days)[:n]
    season = 2 * np.pi * days / 365.0
    diurnal = 2 * np.pi * slot / SAMPLES_PER_DAY

    level = (p.emi_log_level + p.diurnal_amplitude * np.sin(diurnal + 0.5)
             + p.seasonal_amplitude * np.sin(season) + p.emi_level_sd * rng.standard_normal(n))
    profile = p.spatial_profile * np.cos(2 * np.pi * np.arange(N_EMI) / N_EMI)
    emi = np.exp(level[:, None] + profile[None, :] + p.spatial_sd * _spatial_field(n, rng, p))

    temp = (p.temp_mean - p.temp_seasonal * np.cos(2 * np.pi * (days + 10) / 365.0)
            + np.asarray(_SLOT_TEMP_OFFSET)[slot] + p.temp_noise * rng.standard_normal(n))
    humidity = np.clip(p.humidity_mean + p.humidity_seasonal * np.sin(season - 1.0)
                       + p.humidity_noise * rng.standard_normal(n), 0.0, 100.0)
    return np.column_stack([emi, temp, humidity])


def generate_dataset(n: int = DEFAULT_SIZE, seed: int = 0,
                     constants: OracleConstants = ORACLE,
                     params: GeneratorParams = GENERATOR) -> Dataset:
    if n < 1:
        raise ValueError("dataset size must be at least 1")
    rng = np.random.default_rng(seed)
    x = generate_features(n, rng, params)
    clean = oracle_throughput(x, constants)
    y = np.maximum(clean * (1.0 + params.label_noise * rng.standard_normal(n)), 0.0)
    return Dataset(x, y, np.arange(n), seed)


def split(ds: Dataset, train_fraction: float = 0.75, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Random disjoint train/test partition; both parts keep chronological order.

    Normalization statistics are fitted on the training part and attached
    to both parts.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = len(ds)
    n_train = math.floor(n * train_fraction)
    if n_train == 0 or n_train == n:
        raise ValueError(f"fraction {train_fraction} leaves an empty partition for n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    train_idx, test_idx = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    stats = Normalization.fit(ds.features[train_idx], ds.labels[train_idx])
    train = Dataset(ds.features[train_idx], ds.labels[train_idx], ds.ids[train_idx], ds.seed, stats)
    test = Dataset(ds.features[test_idx], ds.labels[test_idx], ds.ids[test_idx], ds.seed, stats)
    return train, test


def to_csv(ds: Dataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row, label in zip(ds.features, ds.labels):
        writer.writerow([repr(float(v)) for v in row] + [repr(float(label))])
    return buf.getvalue()


def manifest(ds: Dataset, constants: OracleConstants = ORACLE,
             params: GeneratorParams = GENERATOR) -> dict:
    return {"format": "harshnet-dataset/1", "n": len(ds), "seed": ds.seed,
            "oracle": asdict(constants), "generator": asdict(params)}


def manifest_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix(".manifest.json")


def save_csv(ds: Dataset, path: str | Path, constants: OracleConstants = ORACLE,
             params: GeneratorParams = GENERATOR) -> Path:
    path = Path(path)
    path.write_bytes(to_csv(ds).encode("utf-8"))
    manifest_path(path).write_text(
        json.dumps(manifest(ds, constants, params), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_csv(path: str | Path) -> Dataset:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header")
        rows = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, N_FEATURES + 1)
    seed = None
    mpath = manifest_path(path)
    if mpath.exists():
        seed = json.loads(mpath.read_text(encoding="utf-8")).get("seed")
    return Dataset(rows[:, :N_FEATURES], rows[:, N_FEATURES], np.arange(len(rows)), seed)
