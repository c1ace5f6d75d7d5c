"""Bilinear symbols ``m(xi, eta)`` and the discrete operator ``B_m(f, g)``.

Two evaluation paths exist and are checked against each other:

* ``rect``: ``B_m(f, g) = sum over rectangles of (M_I f)(M_J g)``, cost
  ``O(R N log N)``;
* ``direct``: for every output bin ``k``,
  ``C(k) = (1/L) sum_xi m(xi, k - xi) f_hat(xi) g_hat(k - xi)``, cost
  ``O(N^2)``, then one inverse transform.

Inputs must be band-limited to ``[-N/(4L), N/(4L))`` so that the output band
fits on the grid. Out-of-band content is an error rather than being wrapped.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import floor, log2
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .dyadic import as_dyadic, format_dyadic, parse_dyadic, pow2
from .lacunary import AdmissibleSequences
from .signal import DiscreteSignal, Grid, band_limit, interval_mask, lp_norm

__all__ = [
    "Rectangle",
    "StaircaseSymbol",
    "GridSymbol",
    "exp_staircase",
    "exp_convex",
    "multilac_staircase",
    "half_plane",
    "unit_symbol",
    "fit_grid",
    "resolving_grid",
    "visible_rectangles",
    "apply_bilinear",
    "regrouping_terms",
    "regrouping_check",
    "symbol_from_json",
    "BAND_TOL",
]

# relative size of out-of-band spectrum tolerated as round-off
BAND_TOL = 1e-10

Endpoint = Fraction | None
Interval = tuple[Endpoint, Endpoint]


def _interval(a, b) -> Interval:
    a = None if a is None else as_dyadic(a)
    b = None if b is None else as_dyadic(b)
    return a, b


def _is_empty(iv: Interval) -> bool:
    a, b = iv
    return a is not None and b is not None and a >= b


def _meet(u: Interval, v: Interval) -> bool:
    if _is_empty(u) or _is_empty(v):
        return False
    lo = [x for x in (u[0], v[0]) if x is not None]
    hi = [x for x in (u[1], v[1]) if x is not None]
    return not lo or not hi or max(lo) < min(hi)


def _in(x: Fraction, iv: Interval) -> bool:
    a, b = iv
    return (a is None or a <= x) and (b is None or x < b)


def _fmt(x: Endpoint):
    return None if x is None else format_dyadic(x)


def _parse(x) -> Endpoint:
    return None if x is None else parse_dyadic(str(x))


@dataclass(frozen=True)
class Rectangle:
    xi: Interval
    eta: Interval

    def __post_init__(self):
        object.__setattr__(self, "xi", _interval(*self.xi))
        object.__setattr__(self, "eta", _interval(*self.eta))

    @property
    def empty(self) -> bool:
        return _is_empty(self.xi) or _is_empty(self.eta)

    def contains(self, xi, eta) -> bool:
        return _in(Fraction(xi), self.xi) and _in(Fraction(eta), self.eta)

    def meets(self, other: "Rectangle") -> bool:
        return _meet(self.xi, other.xi) and _meet(self.eta, other.eta)

    def area(self):
        if self.empty:
            return Fraction(0)
        if None in self.xi or None in self.eta:
            return float("inf")
        return (self.xi[1] - self.xi[0]) * (self.eta[1] - self.eta[0])

    def scaled(self, factor) -> "Rectangle":
        s = as_dyadic(factor)
        if s <= 0:
            raise ValueError("dilation factor must be positive")

        def sc(iv):
            return tuple(None if x is None else x * s for x in iv)

        return Rectangle(sc(self.xi), sc(self.eta))

    def to_json(self) -> list:
        return [[_fmt(x) for x in self.xi], [_fmt(x) for x in self.eta]]


@dataclass(frozen=True)
class StaircaseSymbol:
    """Indicator of a finite union of pairwise disjoint half-open rectangles."""

    rectangles: tuple[Rectangle, ...]

    def __post_init__(self):
        rects = tuple(r if isinstance(r, Rectangle) else Rectangle(*r) for r in self.rectangles)
        object.__setattr__(self, "rectangles", rects)
        for i, r in enumerate(rects):
            for s in rects[i + 1:]:
                if r.meets(s):
                    raise ValueError(f"rectangles {r.to_json()} and {s.to_json()} overlap")

    def __len__(self) -> int:
        return len(self.rectangles)

    def __call__(self, xi, eta) -> int:
        return int(any(r.contains(xi, eta) for r in self.rectangles))

    def area(self):
        return sum((r.area() for r in self.rectangles), Fraction(0))

    def dilate(self, factor) -> "StaircaseSymbol":
        """``(xi, eta) -> m(xi / factor, eta / factor)``."""
        return StaircaseSymbol(tuple(r.scaled(factor) for r in self.rectangles))

    def __add__(self, other: "StaircaseSymbol") -> "StaircaseSymbol":
        return StaircaseSymbol(self.rectangles + other.rectangles)

    def max_abs_endpoint(self) -> Fraction:
        ends = [abs(x) for r in self.rectangles if not r.empty for x in (*r.xi, *r.eta) if x is not None]
        return max(ends, default=Fraction(0))

    def to_grid(self, grid: Grid) -> "GridSymbol":
        table = np.zeros((grid.N, grid.N))
        for r in self.rectangles:
            if r.empty:
                continue
            rows = interval_mask(grid, *r.xi)
            cols = interval_mask(grid, *r.eta)
            table[np.ix_(rows, cols)] = 1.0
        return GridSymbol(grid, table)

    def to_json(self) -> dict:
        return {"type": "staircase", "rectangles": [r.to_json() for r in self.rectangles]}

    @classmethod
    def from_json(cls, obj: dict) -> "StaircaseSymbol":
        rects = tuple(Rectangle(tuple(map(_parse, x)), tuple(map(_parse, e))) for x, e in obj["rectangles"])
        return cls(rects)


class GridSymbol:
    """Symbol sampled on the bin lattice, ``table[xi_bin, eta_bin]`` in FFT order."""

    def __init__(self, grid: Grid, table):
        table = np.array(table, dtype=np.float64)
        if table.shape != (grid.N, grid.N):
            raise ValueError(f"table must be {grid.N}x{grid.N}, got {table.shape}")
        if not np.isfinite(table).all() or table.min(initial=0) < 0 or table.max(initial=0) > 1:
            raise ValueError("symbol values must lie in [0, 1]")
        table.flags.writeable = False
        self.grid = grid
        self.table = table

    @cached_property
    def centered(self) -> np.ndarray:
        return np.ascontiguousarray(np.fft.fftshift(self.table))

    def __eq__(self, other) -> bool:
        return isinstance(other, GridSymbol) and self.grid == other.grid and np.array_equal(self.table, other.table)

    def __sub__(self, other: "GridSymbol") -> np.ndarray:
        return self.table - other.table

    def to_json(self) -> dict:
        flat = self.table.ravel()
        cuts = np.flatnonzero(np.diff(flat)) + 1
        starts = np.concatenate(([0], cuts))
        counts = np.diff(np.concatenate((starts, [flat.size])))
        return {
            "type": "grid",
            "grid": self.grid.to_json(),
            "rle": [[float(flat[s]), int(c)] for s, c in zip(starts, counts)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GridSymbol":
        grid = Grid(int(obj["grid"]["N"]), obj["grid"]["L"])
        flat = np.concatenate([np.full(int(c), float(v)) for v, c in obj["rle"]])
        return cls(grid, flat.reshape(grid.N, grid.N))


def symbol_from_json(obj: dict):
    kind = obj.get("type")
    if kind == "staircase":
        return StaircaseSymbol.from_json(obj)
    if kind == "grid":
        return GridSymbol.from_json(obj)
    raise ValueError(f"unknown symbol type {kind!r}")


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def exp_staircase(J: int) -> StaircaseSymbol:
    """Rectangles ``[-(j+1), -j) x [2^-j, 1)`` for ``j = 0..J-1`` (the first is empty)."""
    if J < 1:
        raise ValueError("J must be at least 1")
    return StaircaseSymbol(tuple(
        Rectangle((-(j + 1), -j), (pow2(-j), 1)) for j in range(J)
    ))


def exp_convex(J: int, grid: Grid) -> GridSymbol:
    """Indicator of ``{-J <= xi < 0, 2^xi <= eta < 1}`` at the lattice points."""
    if J < 1:
        raise ValueError("J must be at least 1")
    if Fraction(grid.N, 2) / grid.L_exact < J:
        raise ValueError(f"grid reaches only |xi| < {grid.N / 2 / grid.L}, needs {J}")
    L = grid.L_exact
    nu = grid.bins
    xi_rows = np.flatnonzero((nu < 0) & (nu >= -J * L))
    table = np.zeros((grid.N, grid.N))
    eta_long = nu.astype(np.longdouble) / np.longdouble(grid.L)
    below_one = nu < L
    for row in xi_rows:
        xi = Fraction(int(nu[row])) / L
        if xi.denominator == 1:
            # 2^xi = 1 / 2^|xi| exactly, and eta = mu / L
            thresh = pow2(int(xi)) * L
            member = nu >= thresh
        else:
            member = eta_long >= np.exp2(np.longdouble(xi.numerator) / np.longdouble(xi.denominator))
        table[row] = member & below_one
    return GridSymbol(grid, table)


def multilac_staircase(seqs: AdmissibleSequences) -> StaircaseSymbol:
    """Rectangles ``[0, xi_j) x [eta_j, zeta_j)``; empty (refined) pieces are dropped."""
    rects = []
    ivs = []
    for x, (e, z) in zip(seqs.xi, seqs.eta_intervals()):
        if e >= z:
            continue
        for a, c in ivs:
            if a < z and e < c:
                raise ValueError(f"eta-intervals [{a}, {c}) and [{e}, {z}) overlap")
        ivs.append((e, z))
        rects.append(Rectangle((0, x), (e, z)))
    return StaircaseSymbol(tuple(rects))


def half_plane(slope, offset, grid: Grid) -> GridSymbol:
    """Indicator of ``{eta >= slope * xi + offset}``; ``offset=None`` means the whole plane."""
    if offset is None:
        return GridSymbol(grid, np.ones((grid.N, grid.N)))
    s, o, L = Fraction(slope), Fraction(offset), grid.L_exact
    # mu / L >= s nu / L + o  <=>  q mu >= p nu + q o L with everything scaled to integers
    q = s.denominator * (o * L).denominator
    p_num = int(s * q)
    c = int(o * L * q)
    nu = [int(v) for v in grid.bins]
    rhs = np.array([p_num * v + c for v in nu], dtype=object)
    lhs = np.array([q * v for v in nu], dtype=object)
    table = (lhs[None, :] >= rhs[:, None]).astype(np.float64)
    return GridSymbol(grid, table)


def unit_symbol() -> StaircaseSymbol:
    """``m = 1`` everywhere; ``B_m(f, g) = f g``."""
    return StaircaseSymbol((Rectangle((None, None), (None, None)),))


def fit_grid(symbol: StaircaseSymbol, N: int) -> Grid:
    """Grid with the largest dyadic ``L`` whose input band still holds every endpoint."""
    top = symbol.max_abs_endpoint()
    if top == 0:
        return Grid(N, 1)
    L = pow2(floor(log2(Fraction(N, 4) / top)))
    while Fraction(N, 4) / L < top:
        L /= 2
    while Fraction(N, 4) / (2 * L) >= top:
        L *= 2
    return Grid(N, float(L))


def visible_rectangles(symbol: StaircaseSymbol, grid: Grid) -> int:
    """Rectangles that keep at least one lattice point inside the input band on both axes."""
    band = band_limit(grid)
    return sum(
        1 for r in symbol.rectangles
        if not r.empty and (interval_mask(grid, *r.xi) & band).any() and (interval_mask(grid, *r.eta) & band).any()
    )


def resolving_grid(symbol: StaircaseSymbol, N: int, max_N: int = 16384) -> Grid:
    """:func:`fit_grid` at ``N``, doubled until some rectangle is visible (up to ``max_N``)."""
    grid = fit_grid(symbol, N)
    while not visible_rectangles(symbol, grid) and grid.N < max_N:
        grid = fit_grid(symbol, 2 * grid.N)
    return grid


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _check_band(f: DiscreteSignal, name: str) -> np.ndarray:
    spec = f.spectrum
    inside = band_limit(f.grid)
    scale = np.abs(spec).max(initial=0.0)
    if scale and np.abs(spec[~inside]).max(initial=0.0) > BAND_TOL * scale:
        raise ValueError(f"{name} is not band-limited to half the grid; products would alias")
    return np.where(inside, spec, 0)


def _spectra(m, f: DiscreteSignal, g: DiscreteSignal):
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")
    if isinstance(m, GridSymbol) and m.grid != f.grid:
        raise ValueError(f"symbol grid {m.grid} differs from signal grid {f.grid}")
    return _check_band(f, "f"), _check_band(g, "g")


def _apply_rect(m: StaircaseSymbol, F, G, grid: Grid) -> np.ndarray:
    scale = grid.N / grid.L
    out = np.zeros(grid.N, dtype=np.complex128)
    for r in m.rectangles:
        if r.empty:
            continue
        a = np.fft.ifft(np.where(interval_mask(grid, *r.xi), F, 0))
        b = np.fft.ifft(np.where(interval_mask(grid, *r.eta), G, 0))
        out += a * b
    return out * scale * scale


def _apply_direct(table_centered: np.ndarray, F, G, grid: Grid) -> np.ndarray:
    C = kernels.bilinear_forward(table_centered, np.fft.fftshift(F), np.fft.fftshift(G)) / grid.L
    return np.fft.ifft(np.fft.ifftshift(C)) * (grid.N / grid.L)


def apply_bilinear(m, f: DiscreteSignal, g: DiscreteSignal, method: str = "auto") -> DiscreteSignal:
    """``B_m(f, g)`` by the rectangle path or the direct ``O(N^2)`` sum."""
    F, G = _spectra(m, f, g)
    if method == "auto":
        method = "rect" if isinstance(m, StaircaseSymbol) else "direct"
    if method == "rect":
        if not isinstance(m, StaircaseSymbol):
            raise ValueError("the rectangle path needs a StaircaseSymbol")
        return DiscreteSignal(f.grid, _apply_rect(m, F, G, f.grid))
    if method == "direct":
        gs = m if isinstance(m, GridSymbol) else m.to_grid(f.grid)
        return DiscreteSignal(f.grid, _apply_direct(gs.centered, F, G, f.grid))
    raise ValueError(f"unknown method {method!r}")


def regrouping_terms(J: int) -> StaircaseSymbol:
    """``sum_{k=0}^{J-2} 1_[-J, -k-1)(xi) 1_[2^-k-1, 2^-k)(eta)``, the regrouped staircase."""
    if J < 1:
        raise ValueError("J must be at least 1")
    return StaircaseSymbol(tuple(
        Rectangle((-J, -k - 1), (pow2(-k - 1), pow2(-k))) for k in range(J - 1)
    ))


def regrouping_check(J: int, f: DiscreteSignal, g: DiscreteSignal) -> float:
    """``|| B_staircase(f, g) - sum_k (M f)(M g) ||_2`` for the regrouped form."""
    lhs = apply_bilinear(exp_staircase(J), f, g, method="rect")
    rhs = apply_bilinear(regrouping_terms(J), f, g, method="rect")
    return lp_norm(lhs - rhs, 2)
