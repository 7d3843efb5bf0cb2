import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harshnet.game import (CapUnsatisfiable, GameConfig, UnboundedGame, best_response, find_equilibrium,
                           initial_profile, random_gains, rate, sinr, tune_lambda, utilities, utility,
                           verify_nash)

from oracles import best_response_grid, sinr_loop, utility_loop


def cfg_for(seed, n=6, dominance=10.0, **kw):
    rng = np.random.default_rng(seed)
    kw.setdefault("lam", float(np.exp(rng.uniform(np.log(5), np.log(50)))))
    return GameConfig(random_gains(n, rng, dominance), bandwidth=kw.pop("bandwidth", 3.5),
                      sigma2=kw.pop("sigma2", 0.001), **kw)


def test_zero_power_zero_sinr():
    cfg = cfg_for(0)
    assert not sinr(np.zeros(6), cfg).any()


def test_single_link_sinr():
    assert sinr([3.0], GameConfig([[2.0]], sigma2=1.0, p_max=5.0))[0] == 6.0


def test_two_link_sinr_hand_value():
    cfg = GameConfig([[1, 0.5], [0.5, 1]], sigma2=0.1)
    np.testing.assert_allclose(sinr([1, 1], cfg), [1 / 0.6, 1 / 0.6], rtol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 8))
def test_sinr_matches_loop(seed, n):
    cfg = cfg_for(seed, n)
    p = initial_profile(cfg, seed)
    s = sinr(p, cfg)
    np.testing.assert_allclose(s, sinr_loop(cfg.gains, p, cfg.sigma2), rtol=1e-12)
    assert np.all(s >= 0) and np.all(rate(s, cfg) >= 0)


def test_rate_values():
    one = GameConfig([[1.0]], bandwidth=1.0)
    assert rate([0.0], one)[0] == 0.0
    assert rate([1.0], one)[0] == 1.0
    assert rate([3.0], GameConfig([[1.0]], bandwidth=10.0))[0] == 20.0
    with pytest.raises(ValueError):
        rate([-0.1], one)


def test_utility_hand_value():
    cfg = GameConfig([[1.0]], sigma2=1.0, bandwidth=1.0, lam=0.1)
    assert utility(0, [1.0], cfg) == pytest.approx(0.9)
    assert utility(0, [1.0], cfg) == pytest.approx(utility_loop(0, [[1.0]], [1.0], 1.0, 1.0, 1.0, 0.1))


def test_utility_zero_power_and_no_price():
    cfg = cfg_for(1, lam=0.0)
    p = initial_profile(cfg, 1)
    assert utilities(np.where(np.arange(6) == 2, 0.0, p), cfg)[2] == 0.0
    lo, hi = p.copy(), p.copy()
    lo[0], hi[0] = 0.2, 0.4
    assert utility(0, hi, cfg) > utility(0, lo, cfg)
    np.testing.assert_allclose(utilities(p, cfg), rate(sinr(p, cfg), cfg))


def test_utility_index_out_of_range():
    with pytest.raises(IndexError):
        utility(6, np.zeros(6), cfg_for(0))


def test_best_response_clamps_to_zero():
    cfg = GameConfig([[1.0, 1.0], [1.0, 1.0]], sigma2=0.01, lam=10.0, bandwidth=1.0)
    assert best_response(0, [0.0, 1.0], cfg) == 0.0


def test_best_response_vanishing_price():
    cfg = cfg_for(2, lam=1e-12)
    assert best_response(3, initial_profile(cfg, 2), cfg) == cfg.p_max
    assert best_response(3, initial_profile(cfg, 2), cfg.with_lambda(0.0)) == cfg.p_max
    with pytest.raises(UnboundedGame):
        best_response(0, [0.0], GameConfig([[1.0]], lam=0.0, p_max=math.inf))


@pytest.mark.parametrize("seed", range(10))
def test_best_response_grid_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(1, 7))
    cfg = GameConfig(random_gains(n, rng, rng.uniform(1, 10)), bandwidth=rng.uniform(1, 10),
                     sigma2=rng.uniform(1e-3, 0.1), p_max=rng.uniform(0.5, 2), lam=rng.uniform(1, 40),
                     weights=rng.uniform(0.5, 2, n))
    p = rng.uniform(0, cfg.p_max, n)
    l = int(rng.integers(n))
    star = best_response(l, p, cfg)
    arg, u_max, step = best_response_grid(l, cfg.gains, p, cfg.sigma2, cfg.bandwidth, cfg.weights[l],
                                          cfg.lam, cfg.p_max)
    assert abs(star - arg) <= step
    q = p.copy()
    q[l] = star
    assert utility(l, q, cfg) >= u_max - 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.1, 10.0))
def test_best_response_scale_invariant(seed, c):
    cfg = cfg_for(seed, weights=np.linspace(0.5, 1.5, 6))
    p = initial_profile(cfg, seed)
    scaled = GameConfig(cfg.gains, cfg.bandwidth, cfg.sigma2, cfg.p_max, cfg.lam * c, weights=cfg.weights * c)
    for l in range(6):
        assert best_response(l, p, scaled) == pytest.approx(best_response(l, p, cfg), rel=1e-12, abs=1e-15)


def test_single_player_one_sweep():
    cfg = GameConfig([[0.8]], bandwidth=2.0, sigma2=0.01, lam=3.0)
    res = find_equilibrium(cfg, [0.9])
    assert res.converged
    assert res.sweeps_to_settle == 1
    assert res.powers[0] == pytest.approx(best_response(0, [0.0], cfg), abs=0)


@pytest.mark.parametrize("seed", range(5))
def test_equilibrium_converges_and_is_nash(seed):
    cfg = cfg_for(seed)
    res = find_equilibrium(cfg, seed=seed)
    assert res.converged and res.iterations <= 50
    assert verify_nash(res.powers, cfg, tol=1e-6).ok
    assert res.trace[-1] < cfg.eps
    assert res.power_trace.shape == (res.iterations + 1, 6)


@pytest.mark.parametrize("seed", range(5))
def test_equilibrium_unique_from_two_starts(seed):
    cfg = cfg_for(seed)
    a = find_equilibrium(cfg, seed=1)
    b = find_equilibrium(cfg, seed=2)
    np.testing.assert_allclose(a.powers, b.powers, atol=1e-6, rtol=0)


def test_perturbed_profile_fails_verification():
    cfg = cfg_for(3, lam=20.0)
    res = find_equilibrium(cfg, seed=0)
    interior = [l for l in range(6) if 0.15 < res.powers[l] < 0.85]
    assert interior
    p = res.powers.copy()
    p[interior[0]] += 0.1 * cfg.p_max
    chk = verify_nash(p, cfg, tol=1e-6)
    assert not chk.ok and chk.worst_service == interior[0]


def test_single_player_verified_at_optimum():
    cfg = GameConfig([[0.8]], bandwidth=2.0, sigma2=0.01, lam=3.0)
    star = best_response(0, [0.0], cfg)
    step = cfg.p_max / (10_000 - 1)
    assert verify_nash([star], cfg, tol=1e-9).ok
    assert verify_nash([star], cfg, tol=step).ok


def test_nonconvergence_reported():
    cfg = cfg_for(4)
    res = find_equilibrium(cfg, max_iter=1, seed=0)
    assert not res.converged and res.iterations == 1


def test_tune_lambda_nonbinding():
    cfg = cfg_for(5)
    t = tune_lambda(cfg, 1e4)
    assert t.lam == 1e-6 and not t.binding and t.slack > 0


@pytest.mark.parametrize("seed", range(5))
def test_tune_lambda_cap_and_monotone(seed):
    cfg = cfg_for(seed)
    full = find_equilibrium(cfg.with_lambda(1e-6), seed=0).total_rate
    t = tune_lambda(cfg, 0.5 * full)
    assert t.binding
    assert t.result.total_rate <= 0.5 * full
    assert t.slack <= 0.01
    half = tune_lambda(cfg, 0.25 * full)
    assert half.lam > t.lam
    lat = sorted(t.lattice)
    assert all(b[1] <= a[1] + cfg.eps for a, b in zip(lat, lat[1:]))


def test_tune_lambda_tiny_cap():
    cfg = cfg_for(6)
    t = tune_lambda(cfg, 1e-6)
    assert t.result.total_rate <= 1e-6
    assert t.result.powers.max() < 1e-6


def test_tune_lambda_rejects_nonpositive_cap():
    with pytest.raises(ValueError):
        tune_lambda(cfg_for(0), 0.0)


def test_tune_lambda_unsatisfiable():
    with pytest.raises(CapUnsatisfiable):
        tune_lambda(cfg_for(0), 1e-3, lam_limit=4.0)


def test_config_validation():
    with pytest.raises(ValueError):
        GameConfig([[1.0, 0.1]])
    with pytest.raises(ValueError):
        GameConfig([[0.0]])
    with pytest.raises(ValueError):
        GameConfig([[1.0]], sigma2=0.0)
    with pytest.raises(ValueError):
        GameConfig([[1.0]], lam=-1.0)
    with pytest.raises(ValueError):
        sinr([2.0], GameConfig([[1.0]], p_max=1.0))


def test_random_gains_dominance():
    g = random_gains(6, 0, dominance=10)
    off = g.sum(axis=1) - np.diag(g)
    np.testing.assert_allclose(np.diag(g), 10 * off, rtol=1e-12)
    assert random_gains(1, 0).shape == (1, 1)


def test_subgame():
    cfg = cfg_for(0, weights=np.arange(1, 7, dtype=float))
    sub = cfg.subgame([1, 4])
    assert sub.gains[0, 1] == cfg.gains[1, 4]
    assert list(sub.weights) == [2.0, 5.0]


def test_unequal_weights_can_break_rate_monotonicity():
    # with everyone at p_max, raising the price makes two services back off
    # and the others gain more than they lose; the cap is still respected
    rng = np.random.default_rng(0)
    cfg = GameConfig(random_gains(6, rng, 3.0), bandwidth=3.5, sigma2=0.001, weights=rng.uniform(0.5, 2, 6))
    p0 = initial_profile(cfg, 0)
    low = find_equilibrium(cfg.with_lambda(2.0), p0)
    high = find_equilibrium(cfg.with_lambda(4.0), p0)
    assert np.all(low.powers == cfg.p_max)
    assert high.total_rate > low.total_rate
    cap = 0.9 * low.total_rate
    t = tune_lambda(cfg, cap, seed=0)
    assert t.result.total_rate <= cap and t.slack <= 0.01
