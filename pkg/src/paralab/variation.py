"""r-variation norms of finite sequences and dyadic frequency averages.

The ``V^r`` norm of a finite sequence is ``sup|h|`` plus the largest
``(sum |h(n_k) - h(n_{k-1})|^r)^(1/r)`` over increasing index chains.
The chain maximum is found by a dynamic program kept in the r-th power
domain; :func:`v_norm_oracle` enumerates chains directly and serves as its
reference.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .signal import DiscreteSignal, Grid, lp_norm, _lp

__all__ = [
    "FiniteSequence",
    "v_norm",
    "v_norm_rows",
    "v_norm_oracle",
    "smooth_window",
    "averages",
    "average_table",
    "default_j_range",
    "lepingle_ratio",
    "DEFAULT_EPSILON",
    "check_epsilon",
]

ORACLE_MAX_LEN = 16
DEFAULT_EPSILON = 0.5


@dataclass(frozen=True)
class FiniteSequence:
    values: tuple
    index_labels: tuple | None = None

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        if not vals:
            raise ValueError("a sequence needs at least one value")
        object.__setattr__(self, "values", vals)
        if self.index_labels is not None:
            labels = tuple(float(t) for t in self.index_labels)
            if len(labels) != len(vals):
                raise ValueError("index_labels must match values in length")
            if any(b <= a for a, b in zip(labels, labels[1:])):
                raise ValueError("index_labels must be increasing")
            object.__setattr__(self, "index_labels", labels)

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.complex128)


def _values(h) -> np.ndarray:
    if isinstance(h, FiniteSequence):
        return h.as_array()
    arr = np.asarray(h, dtype=np.complex128).ravel()
    if arr.size == 0:
        raise ValueError("a sequence needs at least one value")
    return arr


def _check_r(r: float) -> float:
    r = float(r)
    if not r >= 1:
        raise ValueError(f"r={r} < 1 is not a norm exponent")
    return r


def v_norm(h, r: float) -> float:
    """``sup|h| + (max over chains sum |increments|^r)^(1/r)``."""
    return float(v_norm_rows(_values(h)[None, :], r)[0])


def v_norm_rows(values: np.ndarray, r: float) -> np.ndarray:
    """:func:`v_norm` of every row of a 2-d array."""
    r = _check_r(r)
    values = np.atleast_2d(np.asarray(values, dtype=np.complex128))
    # scale rows so large inputs do not overflow in the r-th power
    top = np.abs(values).max(axis=1)
    # power-of-two exponents: ldexp stays exact even for subnormal rows
    e = np.frexp(np.where(top > 0, top, 1.0))[1][:, None]
    scaled = np.ldexp(values.real, -e) + 1j * np.ldexp(values.imag, -e)
    best = kernels.variation_dp(scaled, r)
    return top + np.ldexp(best ** (1.0 / r), e[:, 0])


def v_norm_oracle(h, r: float) -> float:
    """Brute force over every increasing index chain (length at most 16)."""
    r = _check_r(r)
    vals = _values(h)
    n = vals.size
    if n > ORACLE_MAX_LEN:
        raise ValueError(f"oracle is limited to {ORACLE_MAX_LEN} values, got {n}")
    best = 0.0
    for size in range(2, n + 1):
        for chain in combinations(range(n), size):
            s = sum(abs(vals[b] - vals[a]) ** r for a, b in zip(chain, chain[1:]))
            best = max(best, s)
    return float(np.abs(vals).max() + best ** (1.0 / r))


# ---------------------------------------------------------------------------
# dyadic averages
# ---------------------------------------------------------------------------

def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity transition from 0 (t <= 0) to 1 (t >= 1)."""
    t = np.clip(t, 0.0, 1.0)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def smooth_window(t) -> np.ndarray:
    """Smooth even profile, 1 on ``[-1, 1]`` and 0 outside ``(-2, 2)``."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    return _smooth_step(2.0 - t)


def default_j_range(grid: Grid) -> range:
    """Scales from a window plateau covering the input band down to one bin."""
    top = int(np.log2(float(grid.half_band)))
    low = int(np.floor(np.log2(grid.L)))
    return range(-top, low + 1)


def _check_scales(grid: Grid, j_range) -> list[int]:
    js = list(j_range)
    if not js:
        raise ValueError("empty j_range")
    for j in js:
        if 2.0 ** (-j) * grid.L < 1:
            raise ValueError(f"window at j={j} is narrower than one frequency bin (L={grid.L})")
    return js


def average_table(g: DiscreteSignal, phi: Callable = smooth_window, j_range=None) -> np.ndarray:
    """``A g(x_n)(j)`` for every grid point, shape ``(N, len(j_range))``."""
    grid = g.grid
    js = _check_scales(grid, default_j_range(grid) if j_range is None else j_range)
    out = np.empty((grid.N, len(js)), dtype=np.complex128)
    for col, j in enumerate(js):
        w = phi(2.0 ** j * grid.freqs)
        out[:, col] = np.fft.ifft(g.spectrum * w) * (grid.N / grid.L)
    return out


def averages(g: DiscreteSignal, phi: Callable = smooth_window, r: float = 0.0, j_range=None) -> FiniteSequence:
    """``j -> sum_nu g_hat(nu/L) phi(2^j nu/L) e^(2 pi i nu r / L) / L`` at one shift ``r``."""
    grid = g.grid
    js = _check_scales(grid, default_j_range(grid) if j_range is None else j_range)
    phase = np.exp(2j * np.pi * grid.freqs * r)
    vals = [np.sum(g.spectrum * phi(2.0 ** j * grid.freqs) * phase) / grid.L for j in js]
    return FiniteSequence(tuple(vals), tuple(float(j) for j in js))


def check_epsilon(p1: float, eps: float = DEFAULT_EPSILON) -> None:
    """Require ``|1/2 - 1/p1| < 1/(2 + eps)``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not abs(0.5 - 1.0 / p1) < 1.0 / (2.0 + eps):
        raise ValueError(f"eps={eps} is too large for p1={p1}")


def lepingle_ratio(g: DiscreteSignal, p: float, r: float, phi: Callable = smooth_window, j_range=None) -> float:
    """``|| x -> v_norm(A g(x)(.), r) ||_p / ||g||_p``."""
    if not 1 < p < np.inf:
        raise ValueError(f"p={p} must lie in (1, inf)")
    if not 2 < r < np.inf:
        raise ValueError(f"r={r} must lie in (2, inf)")
    denom = lp_norm(g, p)
    if denom == 0:
        raise ValueError("zero signal")
    table = average_table(g, phi, j_range)
    return _lp(v_norm_rows(table, r), p, g.grid.dx) / denom
