"""Inner loops shared by the variation, signal and symbol modules.

Every kernel exists twice: a ``*_nb`` version compiled with numba and a
``*_np`` version in plain numpy. The public names (without suffix) point at
the numba version unless ``PARALAB_DISABLE_NUMBA`` is set. Both versions are
importable directly so tests and benchmarks can compare them.

Spectral kernels work on *centered* arrays: index ``i`` holds frequency bin
``i - N // 2``, so output bin ``k = xi + eta`` sits at index ``i + l - N // 2``.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


# ---------------------------------------------------------------------------
# r-variation dynamic program
# ---------------------------------------------------------------------------

def variation_dp_np(values, r):
    """Largest ``sum |h(x_n) - h(x_{n-1})|**r`` over increasing chains, per row.

    ``values`` has shape ``(M, n)``; returns shape ``(M,)``.
    """
    values = np.atleast_2d(np.asarray(values, dtype=np.complex128))
    m, n = values.shape
    best = np.zeros((m, n))
    for j in range(1, n):
        cand = best[:, :j] + np.abs(values[:, :j] - values[:, j:j + 1]) ** r
        best[:, j] = np.maximum(cand.max(axis=1), 0.0)
    return best.max(axis=1)


@njit(cache=True)
def variation_dp_nb(values, r):
    m, n = values.shape
    out = np.zeros(m)
    best = np.zeros(n)
    half = 0.5 * r
    re = values.real.copy()
    im = values.imag.copy()
    for row in range(m):
        top = 0.0
        for j in range(n):
            b = 0.0
            for i in range(j):
                dr = re[row, j] - re[row, i]
                di = im[row, j] - im[row, i]
                d2 = dr * dr + di * di
                # |d|**r as exp((r/2) log |d|^2): no sqrt, cheaper than pow
                c = best[i] + (np.exp(half * np.log(d2)) if d2 > 0.0 else 0.0)
                if c > b:
                    b = c
            best[j] = b
            if b > top:
                top = b
        out[row] = top
    return out


# ---------------------------------------------------------------------------
# direct O(N^2) bilinear sums on a centered frequency grid
# ---------------------------------------------------------------------------

def _active_rows(table):
    return np.flatnonzero(np.any(table != 0, axis=1))


def bilinear_forward_np(table, F, G):
    """``C[k] = sum_xi m(xi, k - xi) F(xi) G(k - xi)``."""
    n = F.shape[0]
    h = n // 2
    out = np.zeros(n, dtype=np.complex128)
    for i in _active_rows(table):
        if F[i] == 0:
            continue
        lo, hi = max(0, h - i), min(n, n + h - i)
        out[i + lo - h:i + hi - h] += table[i, lo:hi] * G[lo:hi] * F[i]
    return out


def bilinear_adjoint_f_np(table, G, Hc):
    """``K[xi] = sum_k m(xi, k - xi) G(k - xi) Hc(k)``."""
    n = G.shape[0]
    h = n // 2
    out = np.zeros(n, dtype=np.complex128)
    for i in _active_rows(table):
        lo, hi = max(0, h - i), min(n, n + h - i)
        out[i] = np.sum(table[i, lo:hi] * G[lo:hi] * Hc[i + lo - h:i + hi - h])
    return out


def bilinear_adjoint_g_np(table, F, Hc):
    """``K[eta] = sum_k m(k - eta, eta) F(k - eta) Hc(k)``."""
    n = F.shape[0]
    h = n // 2
    out = np.zeros(n, dtype=np.complex128)
    for i in _active_rows(table):
        if F[i] == 0:
            continue
        lo, hi = max(0, h - i), min(n, n + h - i)
        out[lo:hi] += table[i, lo:hi] * Hc[i + lo - h:i + hi - h] * F[i]
    return out


@njit(cache=True)
def bilinear_forward_nb(table, F, G):
    n = F.shape[0]
    h = n // 2
    out = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        fi = F[i]
        if fi == 0:
            continue
        for l in range(max(0, h - i), min(n, n + h - i)):
            w = table[i, l]
            if w != 0.0:
                out[i + l - h] += w * fi * G[l]
    return out


@njit(cache=True)
def bilinear_adjoint_f_nb(table, G, Hc):
    n = G.shape[0]
    h = n // 2
    out = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        acc = 0j
        for l in range(max(0, h - i), min(n, n + h - i)):
            w = table[i, l]
            if w != 0.0:
                acc += w * G[l] * Hc[i + l - h]
        out[i] = acc
    return out


@njit(cache=True)
def bilinear_adjoint_g_nb(table, F, Hc):
    n = F.shape[0]
    h = n // 2
    out = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        fi = F[i]
        if fi == 0:
            continue
        for l in range(max(0, h - i), min(n, n + h - i)):
            w = table[i, l]
            if w != 0.0:
                out[l] += w * fi * Hc[i + l - h]
    return out


# ---------------------------------------------------------------------------
# centered dyadic maximal function on a periodic sequence
# ---------------------------------------------------------------------------

def dyadic_radii(n):
    radii = [0]
    r = 1
    while 2 * r + 1 <= n:
        radii.append(r)
        r *= 2
    return radii


def maximal_np(a):
    """``max_R mean(a[x-R..x+R])`` over dyadic radii, circular; then the full mean."""
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    ext = np.concatenate((a, a, a))
    s = np.concatenate(([0.0], np.cumsum(ext)))
    idx = np.arange(n) + n
    out = a.copy()
    for r in dyadic_radii(n)[1:]:
        avg = (s[idx + r + 1] - s[idx - r]) / (2 * r + 1)
        np.maximum(out, avg, out=out)
    return np.maximum(out, a.mean())


@njit(cache=True)
def maximal_nb(a):
    n = a.shape[0]
    s = np.zeros(3 * n + 1)
    for t in range(3 * n):
        s[t + 1] = s[t] + a[t % n]
    mean = s[n] / n
    out = np.empty(n)
    for x in range(n):
        best = a[x]
        if mean > best:
            best = mean
        r = 1
        while 2 * r + 1 <= n:
            c = x + n
            avg = (s[c + r + 1] - s[c - r]) / (2 * r + 1)
            if avg > best:
                best = avg
            r *= 2
        out[x] = best
    return out


if USE_NUMBA:
    def variation_dp(values, r):
        return variation_dp_nb(np.atleast_2d(np.ascontiguousarray(values, dtype=np.complex128)), float(r))

    def bilinear_forward(table, F, G):
        return bilinear_forward_nb(np.ascontiguousarray(table, dtype=np.float64), F, G)

    def bilinear_adjoint_f(table, G, Hc):
        return bilinear_adjoint_f_nb(np.ascontiguousarray(table, dtype=np.float64), G, Hc)

    def bilinear_adjoint_g(table, F, Hc):
        return bilinear_adjoint_g_nb(np.ascontiguousarray(table, dtype=np.float64), F, Hc)

    def maximal(a):
        return maximal_nb(np.ascontiguousarray(a, dtype=np.float64))
else:
    variation_dp = variation_dp_np
    bilinear_forward = bilinear_forward_np
    bilinear_adjoint_f = bilinear_adjoint_f_np
    bilinear_adjoint_g = bilinear_adjoint_g_np
    maximal = maximal_np
