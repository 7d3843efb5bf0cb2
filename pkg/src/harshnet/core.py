"""Attention, allocation and resource objects shared by the other modules.

An allocation problem is the triple (W, A, r): ``W`` holds each service's
preference weights over the resource types (rows sum to one), ``A`` holds
the allocated quantities and ``r`` the available budget per resource type.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

ROW_SUM_TOL = 1e-9
BUDGET_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when matrices or vectors do not share the required shape."""


@dataclass(frozen=True)
class Validation:
    ok: bool
    message: str = ""
    row: int | None = None
    column: int | None = None
    value: float | None = None

    def __bool__(self) -> bool:
        return self.ok


def _as_matrix(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AttentionMatrix:
    """Row-normalized preference weights, L services by D resource types."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_matrix(self.values, "attention matrix"))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @classmethod
    def from_positive(cls, rows) -> "AttentionMatrix":
        """Normalize each row of a positive matrix to sum to one."""
        raw = np.asarray(rows, dtype=float)
        return cls(raw / raw.sum(axis=1, keepdims=True))


@dataclass(frozen=True)
class AllocationMatrix:
    values: np.ndarray
    units: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "values", _as_matrix(self.values, "allocation matrix"))
        if np.any(self.values < 0):
            raise ValueError("allocation entries must be nonnegative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class ResourceVector:
    values: np.ndarray
    units: tuple[str, ...] = field(default=())

    def __post_init__(self):
        arr = np.array(self.values, dtype=float).reshape(-1)
        if np.any(arr < 0):
            raise ValueError("resource budgets must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


class ShapeKind(str, Enum):
    IDENTITY = "identity"
    LOG_RATE = "log-rate"
    STEP = "step"


@dataclass(frozen=True)
class UtilityShape:
    """Mapping f from allocated quantity to QoS value.

    ``log-rate`` is ``scale * log2(1 + x)``; ``step`` returns ``low`` below
    ``threshold`` and ``high`` at or above it (``high >= low``).
    """

    kind: ShapeKind = ShapeKind.IDENTITY
    scale: float = 1.0
    threshold: float = 0.0
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ShapeKind(self.kind))
        if self.kind is ShapeKind.LOG_RATE and self.scale < 0:
            raise ValueError("log-rate scale must be nonnegative")
        if self.kind is ShapeKind.STEP and self.high < self.low:
            raise ValueError("step shape needs high >= low to stay non-decreasing")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is ShapeKind.IDENTITY:
            return x
        if self.kind is ShapeKind.LOG_RATE:
            return self.scale * np.log2(1.0 + x)
        return np.where(x >= self.threshold, self.high, self.low)


def validate_attention(matrix: AttentionMatrix, tol: float = ROW_SUM_TOL) -> Validation:
    w = matrix.values
    L, D = w.shape
    if L < 1 or D < 1:
        raise DimensionError("attention matrix needs at least one row and one column")
    for l in range(L):
        row_sum = float(w[l].sum())
        for d in range(D):
            if w[l, d] < 0:
                return Validation(False, f"row {l} has negative entry {w[l, d]!r} at column {d} "
                                  f"(row sum {row_sum!r})", l, d, float(w[l, d]))
        if abs(row_sum - 1.0) > tol:
            worst = int(np.argmax(w[l]))
            return Validation(False, f"row {l} sums to {row_sum!r}, not 1", l, worst, row_sum)
    return Validation(True)


def total_utility(A: AllocationMatrix, W: AttentionMatrix, shape: UtilityShape | None = None) -> float:
    """Sum over services and resources of ``w[l, d] * f(a[l, d])``."""
    if A.shape != W.shape:
        raise DimensionError(f"allocation {A.shape} and attention {W.shape} differ")
    f = shape or UtilityShape()
    return float(np.sum(W.values * f(A.values)))


def check_feasibility(A: AllocationMatrix, r: ResourceVector, tol: float = BUDGET_TOL) -> Validation:
    a = A.values
    # an empty roster has no columns to compare, so any budget holds
    if a.shape[0] == 0:
        return Validation(True)
    if a.shape[1] != len(r):
        raise DimensionError(f"allocation has {a.shape[1]} columns, budget has {len(r)} entries")
    used = a.sum(axis=0)
    for d in range(len(r)):
        excess = used[d] - r.values[d]
        if excess > tol:
            return Validation(False, f"column {d} exceeds budget by {excess!r}", None, d, float(excess))
    return Validation(True)

