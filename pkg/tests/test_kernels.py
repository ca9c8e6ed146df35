import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qwitness import kernels, optimizer

BACKENDS = kernels.backends()
compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


@compiled
@pytest.mark.parametrize("step, a2_max", [(1e-3, 1.0), (0.01, 1.0), (0.005, 0.05), (0.01, 0.0)])
def test_scan_reduced_parity(step, a2_max):
    a1 = optimizer._a1_grid(step)
    c = BACKENDS["cython"].scan_reduced(a1, step, a2_max)
    p = BACKENDS["python"].scan_reduced(a1, step, a2_max)
    assert c == p


@compiled
@pytest.mark.parametrize("step, fix_b", [(0.05, None), (0.02, None), (0.02, 1.0), (0.05, 0.3)])
def test_scan_full_parity(step, fix_b):
    grid = optimizer.full_grid(step)
    b = grid if fix_b is None else np.array([fix_b])
    c = BACKENDS["cython"].scan_full(grid, b, optimizer.FEAS_TOL)
    p = BACKENDS["python"].scan_full(grid, b, optimizer.FEAS_TOL)
    assert c == p


@compiled
@settings(max_examples=50)
@given(arrays(np.float64, st.integers(1, 3000), elements=st.sampled_from([0.0, 0.3094, 0.809, 1.0])))
def test_batch_moments_parity(x):
    c = BACKENDS["cython"].batch_moments(x)
    p = BACKENDS["python"].batch_moments(x)
    assert c[0] == p[0]
    # pairwise (numpy) and compensated (compiled) sums agree to rounding
    np.testing.assert_allclose(c[1:], p[1:], rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_batch_moments_against_numpy(name):
    x = np.random.default_rng(7).choice([0.0, 0.809], size=10_001)
    n, mean, m2, mean_sq, m2_sq = BACKENDS[name].batch_moments(x)
    assert n == x.size
    assert mean == pytest.approx(x.mean(), rel=1e-14)
    assert m2 == pytest.approx(((x - x.mean()) ** 2).sum(), rel=1e-12)
    assert mean_sq == pytest.approx((x * x).mean(), rel=1e-14)
    assert m2_sq == pytest.approx(((x * x - (x * x).mean()) ** 2).sum(), rel=1e-12)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_batch_moments_accuracy_large(name):
    x = np.random.default_rng(0).choice([0.0, 0.809], size=10**6)
    q = x * x
    mean, mean_sq = math.fsum(x) / x.size, math.fsum(q) / x.size
    exact = (mean, math.fsum((x - mean) ** 2), mean_sq, math.fsum((q - mean_sq) ** 2))
    np.testing.assert_allclose(BACKENDS[name].batch_moments(x)[1:], exact, rtol=1e-12)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_batch_moments_constant(name):
    n, mean, m2, mean_sq, m2_sq = BACKENDS[name].batch_moments(np.full(1000, 0.3))
    assert (n, mean, m2, m2_sq) == (1000, 0.3, 0.0, 0.0)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_scan_counts_match_grid_size(name):
    step = 0.01
    a1 = optimizer._a1_grid(step)
    *_, count = BACKENDS[name].scan_reduced(a1, step, 1.0)
    a2 = np.arange(200) * step
    expected = int((a2[None, :] <= 1.0 - a1[:, None]).sum())
    assert count == expected


def test_env_var_forces_fallback():
    env = dict(os.environ, QWITNESS_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from qwitness import kernels; print(kernels.BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"


def test_fallback_gives_same_optimum():
    code = (
        "from qwitness import optimizer as o;"
        "r=o.optimize(1e-3,1e-8);f=o.full_search(0.05);"
        "print(repr(r.objective), repr(f.objective), f.params)"
    )
    runs = []
    for flag in ("1", ""):
        env = dict(os.environ, QWITNESS_PURE_PYTHON=flag)
        runs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout)
    assert runs[0] == runs[1]
