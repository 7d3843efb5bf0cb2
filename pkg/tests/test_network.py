import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harshnet.predictor.network import (PAPER_SPEC, NetworkParams, NetworkSpec, backward,
                                        backward_from_output, conv1d_forward, fans, forward,
                                        squared_error, xavier_bound, xavier_init)

from oracles import conv1d_loop, fd_floor, finite_difference, relative_error

TINY = NetworkSpec(input_length=8, channels=(3, 3, 2, 2, 2), pool=4)


def test_shape_chain_matches_architecture():
    params = xavier_init(PAPER_SPEC, 0)
    out, cache = forward(params, np.random.default_rng(0).standard_normal(32))
    s = cache.shapes
    for b in range(3):
        assert [s[f"b{b}.conv{i}"] for i in range(5)] == [(32, 64), (32, 64), (32, 16), (32, 16), (32, 4)]
        assert s[f"b{b}.pool"] == (8, 4)
    assert s["concat"] == (8, 12)
    assert s["fuse"] == (8, 3)
    assert cache.flat.shape == (1, 24)
    assert np.ndim(out) == 0


def test_layer_shapes():
    shapes = PAPER_SPEC.layer_shapes()
    assert shapes["b2.conv0.W"] == (64, 1, 5)
    assert shapes["b1.conv1.W"] == (64, 64, 3)
    assert shapes["fuse.W"] == (3, 12, 1)
    assert shapes["fc.W"] == (1, 24)


def test_invalid_specs():
    with pytest.raises(ValueError):
        NetworkSpec(branch_kernels=(2,))
    with pytest.raises(ValueError):
        NetworkSpec(input_length=30)


def test_xavier_bound_fuse_layer():
    assert xavier_bound(*fans((3, 12, 1))) == pytest.approx(np.sqrt(6 / 15))


def test_init_deterministic_and_bounded():
    a, b = xavier_init(PAPER_SPEC, 3), xavier_init(PAPER_SPEC, 3)
    for name, arr in a.arrays.items():
        np.testing.assert_array_equal(arr, b[name])
        if name.endswith(".b"):
            assert not arr.any()
        else:
            bound = xavier_bound(*fans(arr.shape))
            assert np.abs(arr).max() <= bound
            if arr.size >= 1000:
                assert abs(arr.mean()) < bound / 10


def test_zero_input_gives_fc_bias():
    p = xavier_init(PAPER_SPEC, 1)
    p.arrays["fc.b"][:] = 0.37
    out, _ = forward(p, np.zeros(32))
    assert float(out) == 0.37


def test_forward_pure():
    p = xavier_init(PAPER_SPEC, 2)
    e = np.linspace(-1, 1, 32)
    assert float(forward(p, e)[0]) == float(forward(p, e)[0])


def test_batch_equals_single():
    p = xavier_init(PAPER_SPEC, 4)
    x = np.random.default_rng(4).standard_normal((5, 32))
    batch, _ = forward(p, x)
    singles = [float(forward(p, r)[0]) for r in x]
    np.testing.assert_allclose(batch, singles, rtol=1e-12, atol=1e-14)


def test_wrong_input_length():
    with pytest.raises(ValueError):
        forward(xavier_init(PAPER_SPEC, 0), np.zeros(31))


def test_params_validation():
    p = xavier_init(TINY, 0)
    bad = dict(p.arrays)
    bad["fc.b"] = np.zeros(2)
    with pytest.raises(ValueError):
        NetworkParams(TINY, bad)
    assert p.size == p.flat().size


@pytest.mark.parametrize("k", [1, 3, 5])
def test_conv_matches_loop(k):
    rng = np.random.default_rng(k)
    x = rng.standard_normal((7, 3))  # (T, C_in)
    W = rng.standard_normal((4, 3, k))
    b = rng.standard_normal(4)
    y, _ = conv1d_forward(x[None], W, b)
    np.testing.assert_allclose(y[0].T, conv1d_loop(x.T, W, b), rtol=1e-12, atol=1e-12)


def _fd_check(seed, batch=3):
    rng = np.random.default_rng(seed)
    p = xavier_init(TINY, rng)
    for name in p.arrays:
        if name.endswith(".b"):
            p.arrays[name][:] = rng.uniform(-0.1, 0.1, p.arrays[name].shape)
    x = rng.standard_normal((batch, TINY.input_length))
    y = rng.standard_normal(batch)
    _, cache = forward(p, x)
    analytic = backward(p, cache, y)
    numeric = finite_difference(lambda: squared_error(p, x, y), p.arrays, h=1e-5)
    floor = fd_floor(squared_error(p, x, y))
    return max(float(relative_error(analytic[n], numeric[n], floor).max()) for n in p.arrays)


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    assert _fd_check(seed) < 1e-4


def test_zero_residual_zero_gradient():
    p = xavier_init(TINY, 0)
    x = np.random.default_rng(0).standard_normal((2, 8))
    out, cache = forward(p, x)
    for g in backward(p, cache, out).values():
        assert not g.any()


def test_swapped_residual_same_gradient():
    p = xavier_init(TINY, 1)
    x = np.random.default_rng(1).standard_normal((2, 8))
    out, cache = forward(p, x)
    y = out + np.array([0.3, -0.7])
    g1 = backward(p, cache, y)
    # d/dtheta of mean((y - out)^2) written out with the residual negated
    g_swap = backward_from_output(p, cache, -2.0 * (y - out) / 2)
    for n in g1:
        np.testing.assert_array_equal(g1[n], g_swap[n])
    # reflecting the target about the output flips the sign only
    y = out + 0.3
    g1 = backward(p, cache, y)
    g2 = backward(p, cache, out - 0.3)
    for n in g1:
        np.testing.assert_allclose(g1[n], -g2[n], rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(np.abs(g1[n]), np.abs(g2[n]), rtol=1e-12, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_forward_finite(seed):
    p = xavier_init(PAPER_SPEC, seed)
    out, _ = forward(p, np.random.default_rng(seed).standard_normal((2, 32)) * 3)
    assert np.all(np.isfinite(out))
