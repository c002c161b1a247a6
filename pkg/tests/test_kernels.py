import os
import subprocess
import sys

import numpy as np
import pytest

from sta_anneal import _pykernels, kernels
from sta_anneal.quantum import coherent_plus_x_state

ckernels = pytest.importorskip("sta_anneal._ckernels") if kernels.BACKEND == "cython" else None


def _coeffs(N, steps, seed=0, jitter=0.01):
    rng = np.random.default_rng(seed)
    g = 2 * steps + 1
    s = np.linspace(0, 1, g)
    a = -2.0 * s / N + jitter * rng.standard_normal(g) / N
    b = -0.2 * s
    cx = -2.0 * (1 - s)
    cy = 0.5 * np.sin(np.pi * s)
    return a, b, cx, cy


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled core not built")
@pytest.mark.parametrize("N", [1, 2, 7, 64])
@pytest.mark.parametrize("shift", [False, True])
def test_dicke_backends_agree(N, shift):
    steps = 400
    a, b, cx, cy = _coeffs(N, steps)
    p1 = coherent_plus_x_state(N)
    p2 = p1.copy()
    m1 = ckernels.dicke_rk4(p1, a, b, cx, cy, 5.0 / steps, steps, 20, shift)
    m2 = _pykernels.dicke_rk4(p2, a, b, cx, cy, 5.0 / steps, steps, 20, shift)
    assert m1.shape == m2.shape == (steps // 20 + 1, 5)
    np.testing.assert_allclose(p1, p2, atol=1e-12)
    np.testing.assert_allclose(m1, m2, atol=1e-10)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled core not built")
def test_bloch_backends_agree():
    steps = 2000
    s = np.linspace(0, 1, 2 * steps + 1)
    args = (-2 * (1 - s), 0.3 * s, -0.2 * s, -2 * s)
    n0 = np.array([1.0, 0.0, 0.0])
    for renorm in (False, True):
        n1 = ckernels.bloch_rk4(n0, *args, 10.0 / steps, steps, renorm)
        n2 = _pykernels.bloch_rk4(n0, *args, 10.0 / steps, steps, renorm)
        np.testing.assert_allclose(n1, n2, atol=1e-12)


def test_fallback_selected_by_env():
    env = dict(os.environ, STA_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import sta_anneal; print(sta_anneal.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_python_kernel_norm_preserved_with_shift():
    N, steps = 50, 5000
    a, b, cx, cy = _coeffs(N, steps, jitter=0.0)
    psi = coherent_plus_x_state(N)
    mom = _pykernels.dicke_rk4(psi, a, b, cx, cy, 5.0 / steps, steps, 500, True)
    assert np.max(np.abs(mom[:, 0] - 1)) < 1e-8
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled core not built")
def test_flush_to_zero_mode_restored():
    N, steps = 8, 10
    a, b, cx, cy = _coeffs(N, steps)
    ckernels.dicke_rk4(coherent_plus_x_state(N), a, b, cx, cy, 0.01, steps, steps, True)
    tiny = np.array([1e-300]) * np.array([1e-10])
    assert tiny[0] > 0.0  # subnormals survive outside the kernel
