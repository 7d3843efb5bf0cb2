"""Three-branch 1-D CNN: forward pass, analytic backward pass, Xavier init.

Activations are laid out as (batch, positions, channels). Convolution
weights are stored as (out_channels, in_channels, kernel).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


@dataclass(frozen=True)
class NetworkSpec:
    input_length: int = 32
    branch_kernels: tuple[int, ...] = (1, 3, 5)
    channels: tuple[int, ...] = (64, 64, 16, 16, 4)
    pool: int = 4
    fused_channels: int = 3

    def __post_init__(self):
        for k in self.branch_kernels:
            if k % 2 == 0:
                raise ValueError(f"kernel size {k} cannot preserve length with symmetric padding")
        if self.input_length % self.pool:
            raise ValueError(f"pool {self.pool} does not divide length {self.input_length}")

    @property
    def pooled_length(self) -> int:
        return self.input_length // self.pool

    @property
    def concat_channels(self) -> int:
        return self.channels[-1] * len(self.branch_kernels)

    @property
    def fc_inputs(self) -> int:
        return self.pooled_length * self.fused_channels

    def layer_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {}
        for b, k in enumerate(self.branch_kernels):
            c_in = 1
            for i, c_out in enumerate(self.channels):
                shapes[f"b{b}.conv{i}.W"] = (c_out, c_in, k)
                shapes[f"b{b}.conv{i}.b"] = (c_out,)
                c_in = c_out
        shapes["fuse.W"] = (self.fused_channels, self.concat_channels, 1)
        shapes["fuse.b"] = (self.fused_channels,)
        shapes["fc.W"] = (1, self.fc_inputs)
        shapes["fc.b"] = (1,)
        return shapes


PAPER_SPEC = NetworkSpec()


@dataclass
class NetworkParams:
    spec: NetworkSpec
    arrays: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        expected = self.spec.layer_shapes()
        if list(self.arrays) != list(expected):
            raise ValueError("parameter names do not match the network spec")
        for name, shape in expected.items():
            arr = self.arrays[name]
            if arr.shape != shape:
                raise ValueError(f"{name}: shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name}: non-finite values")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.spec, {k: v.copy() for k, v in self.arrays.items()})

    @property
    def size(self) -> int:
        return sum(a.size for a in self.arrays.values())

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays.values()])


def xavier_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def fans(shape: tuple[int, ...]) -> tuple[int, int]:
    if len(shape) == 3:
        c_out, c_in, k = shape
        return c_in * k, c_out * k
    c_out, c_in = shape
    return c_in, c_out


def xavier_init(spec: NetworkSpec = PAPER_SPEC, seed: int | np.random.Generator = 0) -> NetworkParams:
    """Glorot-uniform weights, zero biases. Layers draw in declaration order."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    arrays = {}
    for name, shape in spec.layer_shapes().items():
        if name.endswith(".b"):
            arrays[name] = np.zeros(shape)
        else:
            bound = xavier_bound(*fans(shape))
            arrays[name] = rng.uniform(-bound, bound, size=shape)
    return NetworkParams(spec, arrays)


def conv1d_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray):
    """Stride-1 convolution with 'same' padding; returns output and im2col buffer."""
    n, length, c_in = x.shape
    c_out, _, k = W.shape
    pad = (k - 1) // 2
    xp = np.pad(x, ((0, 0), (pad, pad), (0, 0))) if pad else x
    cols = sliding_window_view(xp, k, axis=1).reshape(n * length, c_in * k)
    out = cols @ W.reshape(c_out, c_in * k).T + b
    return out.reshape(n, length, c_out), cols


def conv1d_backward(dout: np.ndarray, cols: np.ndarray, W: np.ndarray):
    n, length, c_out = dout.shape
    _, c_in, k = W.shape
    pad = (k - 1) // 2
    d2 = dout.reshape(n * length, c_out)
    dW = (d2.T @ cols).reshape(W.shape)
    db = d2.sum(axis=0)
    dcols = (d2 @ W.reshape(c_out, c_in * k)).reshape(n, length, c_in, k)
    dxp = np.zeros((n, length + 2 * pad, c_in))
    for j in range(k):
        dxp[:, j:j + length, :] += dcols[:, :, :, j]
    return dxp[:, pad:pad + length, :], dW, db


def maxpool_forward(x: np.ndarray, size: int):
    n, length, c = x.shape
    windows = x.reshape(n, length // size, size, c)
    arg = windows.argmax(axis=2)
    out = np.take_along_axis(windows, arg[:, :, None, :], axis=2)[:, :, 0, :]
    return out, arg


def maxpool_backward(dout: np.ndarray, arg: np.ndarray, size: int) -> np.ndarray:
    n, pooled, c = dout.shape
    dx = np.zeros((n, pooled, size, c))
    np.put_along_axis(dx, arg[:, :, None, :], dout[:, :, None, :], axis=2)
    return dx.reshape(n, pooled * size, c)


@dataclass
class ForwardCache:
    spec: NetworkSpec
    inputs: np.ndarray
    branch_cols: list[list[np.ndarray]]
    branch_acts: list[list[np.ndarray]]
    pool_args: list[np.ndarray]
    concat: np.ndarray
    fuse_cols: np.ndarray
    flat: np.ndarray
    shapes: dict[str, tuple[int, ...]]


def forward(params: NetworkParams, e) -> tuple[np.ndarray, ForwardCache]:
    """Predict for a single vector (returns a 0-d array) or a batch (returns (n,))."""
    spec = params.spec
    x = np.asarray(e, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != spec.input_length:
        raise ValueError(f"expected input length {spec.input_length}, got shape {np.shape(e)}")
    n = x.shape[0]
    h0 = x[:, :, None]
    shapes: dict[str, tuple[int, ...]] = {}
    branch_cols, branch_acts, pool_args, pooled = [], [], [], []
    for b in range(len(spec.branch_kernels)):
        h = h0
        cols_b, acts_b = [], []
        for i in range(len(spec.channels)):
            z, cols = conv1d_forward(h, params[f"b{b}.conv{i}.W"], params[f"b{b}.conv{i}.b"])
            h = np.maximum(z, 0.0)
            if h.shape[1] != spec.input_length:
                raise AssertionError("convolution changed the sequence length")
            cols_b.append(cols)
            acts_b.append(h)
            shapes[f"b{b}.conv{i}"] = h.shape[1:]
        p, arg = maxpool_forward(h, spec.pool)
        shapes[f"b{b}.pool"] = p.shape[1:]
        branch_cols.append(cols_b)
        branch_acts.append(acts_b)
        pool_args.append(arg)
        pooled.append(p)
    concat = np.concatenate(pooled, axis=2)
    shapes["concat"] = concat.shape[1:]
    fused, fuse_cols = conv1d_forward(concat, params["fuse.W"], params["fuse.b"])
    shapes["fuse"] = fused.shape[1:]
    flat = fused.reshape(n, -1)
    out = (flat @ params["fc.W"].T + params["fc.b"])[:, 0]
    shapes["output"] = ()
    cache = ForwardCache(spec, x, branch_cols, branch_acts, pool_args, concat, fuse_cols, flat, shapes)
    return (out[0] if single else out), cache


def backward_from_output(params: NetworkParams, cache: ForwardCache, dout) -> dict[str, np.ndarray]:
    """Back-propagate d(loss)/d(output) (shape (n,)) to every parameter."""
    spec = params.spec
    if cache.spec != spec:
        raise ValueError("cache was produced by a different network spec")
    dout = np.atleast_1d(np.asarray(dout, dtype=float))
    n = cache.flat.shape[0]
    if dout.shape != (n,):
        raise ValueError("output gradient does not match the cached batch")
    grads: dict[str, np.ndarray] = {}
    grads["fc.W"] = (dout @ cache.flat)[None, :]
    grads["fc.b"] = np.array([dout.sum()])
    dfused = (dout[:, None] * params["fc.W"]).reshape(n, spec.pooled_length, spec.fused_channels)
    dconcat, grads["fuse.W"], grads["fuse.b"] = conv1d_backward(dfused, cache.fuse_cols, params["fuse.W"])
    c_last = spec.channels[-1]
    for b in range(len(spec.branch_kernels)):
        dpool = dconcat[:, :, b * c_last:(b + 1) * c_last]
        dh = maxpool_backward(dpool, cache.pool_args[b], spec.pool)
        for i in reversed(range(len(spec.channels))):
            dz = dh * (cache.branch_acts[b][i] > 0)
            dh, grads[f"b{b}.conv{i}.W"], grads[f"b{b}.conv{i}.b"] = conv1d_backward(
                dz, cache.branch_cols[b][i], params[f"b{b}.conv{i}.W"])
    return {name: grads[name] for name in spec.layer_shapes()}


def backward(params: NetworkParams, cache: ForwardCache, target) -> dict[str, np.ndarray]:
    """Gradient of the squared error, averaged over the cached batch."""
    y = np.atleast_1d(np.asarray(target, dtype=float))
    out = (cache.flat @ params["fc.W"].T + params["fc.b"])[:, 0]
    if y.shape != out.shape:
        raise ValueError("target does not match the cached batch")
    return backward_from_output(params, cache, 2.0 * (out - y) / out.size)


def squared_error(params: NetworkParams, e, target) -> float:
    out, _ = forward(params, e)
    return float(np.mean((np.atleast_1d(out) - np.atleast_1d(target)) ** 2))
