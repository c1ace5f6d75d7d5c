"""Periodic signals on a uniform grid and the linear operators used around them.

Conventions
-----------
A :class:`Grid` has ``N`` samples at ``x_n = n L / N``. Frequency bins are the
integers ``nu`` in ``[-N/2, N/2)``; bin ``nu`` stands for the physical
frequency ``nu / L``. The transform imitates the continuum one::

    f_hat(nu / L) = (L / N) * sum_n f(x_n) exp(-2 pi i nu n / N)
    f(x_n)        = (1 / L) * sum_nu f_hat(nu / L) exp(2 pi i nu n / N)

so frequency sums carry the weight ``1 / L`` and space sums ``L / N``.
Arrays of spectral values are kept in numpy FFT order.

Frequency intervals are half-open ``[a, b)`` with exact (Fraction)
endpoints; ``None`` stands for an infinite end. ``L`` must be a dyadic
rational so that interval membership is decided exactly.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import ceil
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels

__all__ = [
    "Grid",
    "DiscreteSignal",
    "lp_norm",
    "interval_mask",
    "linear_multiplier",
    "interval_multiplier",
    "maximal_function",
    "square_function_ratio",
    "fefferman_stein_ratio",
    "generate",
    "project_band",
    "band_limit",
    "write_csv",
    "read_csv",
    "write_binary",
    "read_binary",
]


@dataclass(frozen=True)
class Grid:
    N: int
    L: float = 1.0

    def __post_init__(self):
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError(f"N={self.N} is not a power of two >= 2")
        if not self.L > 0:
            raise ValueError("L must be positive")
        q = Fraction(self.L)
        if q.denominator & (q.denominator - 1):
            raise ValueError(f"L={self.L} is not a dyadic rational")

    @property
    def L_exact(self) -> Fraction:
        return Fraction(self.L)

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N) * self.dx

    @property
    def bins(self) -> np.ndarray:
        """Integer frequency bins in FFT order."""
        return np.rint(np.fft.fftfreq(self.N, 1.0 / self.N)).astype(np.int64)

    @property
    def freqs(self) -> np.ndarray:
        return self.bins / self.L

    @property
    def half_band(self) -> Fraction:
        """Inputs must live in ``[-half_band, half_band)`` for products to stay on the grid."""
        return Fraction(self.N, 4) / self.L_exact

    def to_json(self) -> dict:
        return {"N": self.N, "L": self.L}


def interval_mask(grid: Grid, a=None, b=None) -> np.ndarray:
    """Boolean mask (FFT order) of bins with ``a <= nu / L < b``."""
    nu = grid.bins
    mask = np.ones(grid.N, dtype=bool)
    L = grid.L_exact
    if a is not None:
        mask &= nu >= ceil(Fraction(a) * L)
    if b is not None:
        mask &= nu < ceil(Fraction(b) * L)
    return mask


class DiscreteSignal:
    """Immutable samples on a :class:`Grid` with a cached spectrum."""

    __slots__ = ("grid", "samples", "__dict__")

    def __init__(self, grid: Grid, samples):
        samples = np.array(samples, dtype=np.complex128)
        if samples.shape != (grid.N,):
            raise ValueError(f"expected {grid.N} samples, got shape {samples.shape}")
        samples.flags.writeable = False
        self.grid = grid
        self.samples = samples

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum) -> "DiscreteSignal":
        spectrum = np.asarray(spectrum, dtype=np.complex128)
        sig = cls(grid, np.fft.ifft(spectrum) * (grid.N / grid.L))
        spec = spectrum.copy()
        spec.flags.writeable = False
        sig.__dict__["spectrum"] = spec
        return sig

    @cached_property
    def spectrum(self) -> np.ndarray:
        spec = np.fft.fft(self.samples) * (self.grid.L / self.grid.N)
        spec.flags.writeable = False
        return spec

    def __add__(self, other: "DiscreteSignal") -> "DiscreteSignal":
        _same_grid(self, other)
        return DiscreteSignal(self.grid, self.samples + other.samples)

    def __sub__(self, other: "DiscreteSignal") -> "DiscreteSignal":
        _same_grid(self, other)
        return DiscreteSignal(self.grid, self.samples - other.samples)

    def __mul__(self, other):
        if isinstance(other, DiscreteSignal):
            _same_grid(self, other)
            return DiscreteSignal(self.grid, self.samples * other.samples)
        return DiscreteSignal(self.grid, self.samples * other)

    __rmul__ = __mul__

    def conj(self) -> "DiscreteSignal":
        return DiscreteSignal(self.grid, np.conj(self.samples))

    def __repr__(self) -> str:
        return f"DiscreteSignal(N={self.grid.N}, L={self.grid.L})"


def _same_grid(*signals: DiscreteSignal) -> Grid:
    grid = signals[0].grid
    for s in signals[1:]:
        if s.grid != grid:
            raise ValueError(f"grid mismatch: {grid} vs {s.grid}")
    return grid


def _lp(values: np.ndarray, p: float, dx: float) -> float:
    a = np.abs(values)
    if p == np.inf:
        return float(a.max(initial=0.0))
    if p < 1:
        raise ValueError(f"p={p} < 1 is not a norm")
    top = a.max(initial=0.0)
    if top == 0:
        return 0.0
    # scaled to avoid overflow for large p
    return float(top * (np.sum((a / top) ** p) * dx) ** (1.0 / p))


def lp_norm(f: DiscreteSignal, p: float) -> float:
    """Riemann-sum L^p norm ``(sum |f|^p L/N)^(1/p)``; ``p = inf`` gives the max."""
    return _lp(f.samples, p, f.grid.dx)


def linear_multiplier(f: DiscreteSignal, n) -> DiscreteSignal:
    """Multiply the spectrum by ``n`` (array in FFT order or callable on physical frequencies)."""
    weights = n(f.grid.freqs) if callable(n) else np.asarray(n)
    return DiscreteSignal.from_spectrum(f.grid, f.spectrum * weights)


def interval_multiplier(f: DiscreteSignal, a=None, b=None) -> DiscreteSignal:
    """``M_[a,b) f``."""
    return DiscreteSignal.from_spectrum(f.grid, np.where(interval_mask(f.grid, a, b), f.spectrum, 0))


def band_limit(grid: Grid) -> np.ndarray:
    """Mask of the admissible input band ``[-N/(4L), N/(4L))``."""
    hb = grid.half_band
    return interval_mask(grid, -hb, hb)


def project_band(f: DiscreteSignal) -> DiscreteSignal:
    return DiscreteSignal.from_spectrum(f.grid, np.where(band_limit(f.grid), f.spectrum, 0))


def maximal_function(f: DiscreteSignal) -> DiscreteSignal:
    """Centered maximal function of ``|f|`` over dyadic radii (in samples), periodic."""
    return DiscreteSignal(f.grid, kernels.maximal(np.abs(f.samples)))


def _check_disjoint(grid: Grid, intervals) -> list[np.ndarray]:
    masks = [interval_mask(grid, a, b) for a, b in intervals]
    seen = np.zeros(grid.N, dtype=bool)
    for (a, b), m in zip(intervals, masks):
        if np.any(seen & m):
            raise ValueError(f"interval [{a}, {b}) overlaps an earlier one on the grid")
        seen |= m
    return masks


def square_function_ratio(f: DiscreteSignal, intervals: Sequence[tuple], p: float) -> float:
    """``|| (sum_I |M_I f|^2)^(1/2) ||_p / ||f||_p`` for frequency-disjoint intervals."""
    masks = _check_disjoint(f.grid, intervals)
    denom = lp_norm(f, p)
    if denom == 0:
        raise ValueError("zero signal")
    spec = f.spectrum
    scale = f.grid.N / f.grid.L
    total = np.zeros(f.grid.N)
    for m in masks:
        if m.any():
            total += np.abs(np.fft.ifft(np.where(m, spec, 0)) * scale) ** 2
    return _lp(np.sqrt(total), p, f.grid.dx) / denom


def fefferman_stein_ratio(fs: Sequence[DiscreteSignal], p: float) -> float:
    """``|| (sum (M f_k)^2)^(1/2) ||_p / || (sum |f_k|^2)^(1/2) ||_p``."""
    grid = _same_grid(*fs)
    num = np.sqrt(sum(maximal_function(f).samples.real ** 2 for f in fs))
    den = np.sqrt(sum(np.abs(f.samples) ** 2 for f in fs))
    d = _lp(den, p, grid.dx)
    if d == 0:
        raise ValueError("zero family")
    return _lp(num, p, grid.dx) / d


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

BOUNDARY_DECAY = 1e-10


def _periodic_offset(grid: Grid, center: float) -> np.ndarray:
    t = grid.x - center
    return (t + grid.L / 2) % grid.L - grid.L / 2


def generate(kind: str, grid: Grid, seed: int = 0, **params) -> DiscreteSignal:
    """Deterministic test functions.

    kinds and parameters:

    - ``gaussian``: ``center`` (default L/2), ``width`` (default L/16)
    - ``modulated_bump``: as gaussian plus ``freq`` (physical frequency)
    - ``random_trig``: ``band=(lo, hi)`` physical frequencies, half-open;
      i.i.d. complex Gaussian coefficients on the bins in the band
    - ``spike``: ``index`` (default N/2), unit height
    """
    if kind in ("gaussian", "modulated_bump"):
        center = params.get("center", grid.L / 2)
        width = params.get("width", grid.L / 16)
        t = _periodic_offset(grid, center)
        env = np.exp(-0.5 * (t / width) ** 2)
        edge = np.exp(-0.5 * (grid.L / 2 / width) ** 2)
        if edge > BOUNDARY_DECAY and width < grid.L:
            warnings.warn(f"{kind} of width {width} is {edge:.1e} at the period boundary", RuntimeWarning)
        if kind == "modulated_bump":
            env = env * np.exp(2j * np.pi * params["freq"] * grid.x)
        return DiscreteSignal(grid, env)
    if kind == "random_trig":
        lo, hi = params.get("band", (-grid.half_band, grid.half_band))
        mask = interval_mask(grid, lo, hi)
        if not mask.any():
            raise ValueError(f"band [{lo}, {hi}) contains no grid frequency")
        if Fraction(lo) < -Fraction(grid.N, 2) / grid.L_exact or Fraction(hi) > Fraction(grid.N, 2) / grid.L_exact:
            raise ValueError(f"band [{lo}, {hi}) leaves the grid")
        rng = np.random.default_rng(seed)
        coef = rng.standard_normal(grid.N) + 1j * rng.standard_normal(grid.N)
        return DiscreteSignal.from_spectrum(grid, np.where(mask, coef, 0))
    if kind == "spike":
        out = np.zeros(grid.N)
        out[int(params.get("index", grid.N // 2)) % grid.N] = 1.0
        return DiscreteSignal(grid, out)
    raise ValueError(f"unknown generator {kind!r}")


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def write_csv(f: DiscreteSignal, path) -> None:
    rows = np.column_stack((np.arange(f.grid.N), f.samples.real, f.samples.imag))
    np.savetxt(path, rows, delimiter=",", header="index,re,im", comments="", fmt=["%d", "%.17g", "%.17g"])


def read_csv(path, L: float = 1.0) -> DiscreteSignal:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    order = np.argsort(data[:, 0])
    data = data[order]
    if not np.array_equal(data[:, 0], np.arange(data.shape[0])):
        raise ValueError("CSV indices must be 0..N-1")
    return DiscreteSignal(Grid(data.shape[0], L), data[:, 1] + 1j * data[:, 2])


_HEADER = struct.Struct("<Id")


def write_binary(f: DiscreteSignal, path) -> None:
    """Little-endian ``u32 N``, ``f64 L``, then ``N`` interleaved ``(re, im)`` f64 pairs."""
    body = np.empty(2 * f.grid.N, dtype="<f8")
    body[0::2] = f.samples.real
    body[1::2] = f.samples.imag
    Path(path).write_bytes(_HEADER.pack(f.grid.N, f.grid.L) + body.tobytes())


def read_binary(path) -> DiscreteSignal:
    raw = Path(path).read_bytes()
    N, L = _HEADER.unpack_from(raw)
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != 2 * N:
        raise ValueError(f"binary dump holds {body.size} floats, expected {2 * N}")
    return DiscreteSignal(Grid(N, L), body[0::2] + 1j * body[1::2])
