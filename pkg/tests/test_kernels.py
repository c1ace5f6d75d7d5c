import os
import subprocess
import sys

import numpy as np
import pytest

from paralab import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def _spectra(rng, N):
    c = lambda: rng.standard_normal(N) + 1j * rng.standard_normal(N)
    table = (rng.random((N, N)) < 0.4).astype(np.float64)
    return table, c(), c()


@pytest.mark.parametrize("N", [8, 32, 64])
def test_bilinear_kernels_agree(rng, N):
    table, A, B = _spectra(rng, N)
    for name in ("bilinear_forward", "bilinear_adjoint_f", "bilinear_adjoint_g"):
        a = getattr(kernels, name + "_np")(table, A, B)
        b = getattr(kernels, name + "_nb")(table, A, B)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12), name


def test_forward_matches_explicit_sum(rng):
    N = 16
    table, F, G = _spectra(rng, N)
    h = N // 2
    C = np.zeros(N, dtype=complex)
    for i in range(N):
        for j in range(N):
            k = i + j - h
            if 0 <= k < N:
                C[k] += table[i, j] * F[i] * G[j]
    assert np.allclose(kernels.bilinear_forward_np(table, F, G), C, rtol=1e-13)


@pytest.mark.parametrize("n", [1, 2, 7, 64])
def test_variation_and_maximal_kernels_agree(rng, n):
    vals = rng.standard_normal((5, n)) + 1j * rng.standard_normal((5, n))
    for r in (1.0, 2.5):
        assert np.allclose(kernels.variation_dp_np(vals, r), kernels.variation_dp_nb(vals, r), rtol=1e-12)
    a = np.abs(rng.standard_normal(n))
    assert np.allclose(kernels.maximal_np(a), kernels.maximal_nb(a), rtol=1e-13)


def test_disable_flag_selects_numpy():
    code = "import paralab, paralab.kernels as k; print(paralab.USE_NUMBA, k.variation_dp is k.variation_dp_np)"
    env = dict(os.environ, PARALAB_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]
    env["PARALAB_DISABLE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["True", "False"]
