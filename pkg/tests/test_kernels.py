import os
import subprocess
import sys

import numpy as np
import pytest

from harshnet.game import GameConfig, find_equilibrium, initial_profile, random_gains
from harshnet.game import kernels

needs_ext = pytest.mark.skipif("cython" not in kernels.available_backends(),
                               reason="compiled extension not built")


def _args(seed, n=6):
    rng = np.random.default_rng(seed)
    cfg = GameConfig(random_gains(n, rng, rng.uniform(1, 10)), bandwidth=3.5, sigma2=0.001,
                     lam=float(rng.uniform(2, 60)), weights=rng.uniform(0.5, 2, n))
    return cfg, (cfg.gains, cfg.weights, cfg.bandwidth, cfg.sigma2, cfg.p_max, cfg.lam,
                 initial_profile(cfg, seed), cfg.eps, 200)


def test_python_backend_always_present():
    assert "python" in kernels.available_backends()
    with pytest.raises(ValueError):
        kernels.get_solver("fortran")


@needs_ext
@pytest.mark.parametrize("seed", range(30))
def test_backends_bit_identical(seed):
    _, args = _args(seed, n=1 + seed % 9)
    a = kernels.get_solver("python")(*args)
    b = kernels.get_solver("cython")(*args)
    assert a[1:3] == b[1:3]
    for x, y in zip((a[0], a[3], a[4], a[5]), (b[0], b[3], b[4], b[5])):
        np.testing.assert_array_equal(np.asarray(x), np.asarray(y))


@needs_ext
def test_find_equilibrium_backend_switch():
    cfg, _ = _args(3)
    a = find_equilibrium(cfg, seed=0, backend="python")
    b = find_equilibrium(cfg, seed=0, backend="cython")
    np.testing.assert_array_equal(a.power_trace, b.power_trace)


def test_env_var_forces_fallback():
    env = dict(os.environ, HARSHNET_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from harshnet.game import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
