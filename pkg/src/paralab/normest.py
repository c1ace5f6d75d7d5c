"""Lower bounds for the trilinear Hölder constant by adversarial search.

For a symbol ``m`` and exponents ``(p1, p2, p3)`` the quantity

    ratio(f, g, h) = |<B_m(f, g), h>| / (||f||_p1 ||g||_p2 ||h||_p3)

is maximized by block coordinate ascent. With two slots frozen the pairing
is linear in the third, ``<B, h> = (L/N) sum f(x) k_f(x)``, and the best unit
vector is the Hölder dual element ``conj(k) |k|^(p'-2)``. The f and g
updates must stay in the admissible input band, where the dual element is
no longer exact: it is projected onto the band and then polished by L-BFGS
on the band coefficients. Nothing that lowers the ratio is accepted, so
every trace is nondecreasing.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import optimize

from . import kernels
from .signal import DiscreteSignal, Grid, band_limit, interval_mask, _lp
from .symbols import GridSymbol, StaircaseSymbol

__all__ = [
    "ExponentTriple",
    "Budget",
    "TrilinearForm",
    "TrilinearProbe",
    "NormEstimateReport",
    "ratio",
    "ascend",
    "sweep",
    "loglog_slope",
]

RECIPROCAL_TOL = 1e-12
MONOTONE_SLACK = 1e-12
# L-BFGS steps spent on each band-limited block
INNER_ITERATIONS = 5
# joint L-BFGS steps after the block ascent stalls
POLISH_ITERATIONS = 500


@dataclass(frozen=True)
class ExponentTriple:
    p1: float
    p2: float
    p3: float
    unsafe: bool = False

    def __post_init__(self):
        ps = (self.p1, self.p2, self.p3)
        if not all(1 < p < math.inf for p in ps):
            raise ValueError(f"exponents {ps} must be finite and larger than 1")
        if abs(sum(1.0 / p for p in ps) - 1.0) > RECIPROCAL_TOL:
            raise ValueError(f"reciprocals of {ps} do not sum to 1")
        if not self.unsafe and not all(p > 2 for p in ps):
            raise ValueError(f"{ps} leaves the local L^2 range (pass unsafe=True to explore)")

    @property
    def values(self) -> tuple[float, float, float]:
        return self.p1, self.p2, self.p3

    @staticmethod
    def dual(p: float) -> float:
        return p / (p - 1.0)

    def to_json(self) -> dict:
        return {"p1": self.p1, "p2": self.p2, "p3": self.p3, "unsafe": self.unsafe}


@dataclass(frozen=True)
class Budget:
    restarts: int = 32
    iterations: int = 200
    tolerance: float = 1e-7

    def __post_init__(self):
        if self.restarts < 1 or self.iterations < 1 or not self.tolerance > 0:
            raise ValueError(f"invalid budget {self}")


def _merge(A: list, B: list) -> tuple[list, list]:
    """Fuse rectangles whose ``B`` masks coincide.

    Equal nonempty masks mean the rectangles share a lattice row, so their
    ``A`` masks are disjoint and the union gives the same operator.
    """
    groups: dict[bytes, int] = {}
    outA, outB = [], []
    for a, b in zip(A, B):
        key = np.packbits(b).tobytes()
        if key in groups:
            outA[groups[key]] = outA[groups[key]] | a
        else:
            groups[key] = len(outA)
            outA.append(a)
            outB.append(b)
    return outA, outB


class TrilinearForm:
    """``(f, g, h) -> <B_m(f, g), h>`` on a fixed grid, with its three partial kernels.

    Staircases use batched rectangle masks; grid symbols use the direct sums.
    """

    def __init__(self, symbol, grid: Grid):
        self.symbol = symbol
        self.grid = grid
        self.band = band_limit(grid)
        if isinstance(symbol, StaircaseSymbol):
            I, J = [], []
            for r in symbol.rectangles:
                if r.empty:
                    continue
                mi = interval_mask(grid, *r.xi) & self.band
                mj = interval_mask(grid, *r.eta) & self.band
                if mi.any() and mj.any():
                    I.append(mi)
                    J.append(mj)
            I, J = _merge(I, J)
            I, J = _merge(J, I)[::-1]
            self.rect = (np.array(I, dtype=bool).reshape(-1, grid.N), np.array(J, dtype=bool).reshape(-1, grid.N))
            self.table = None
        elif isinstance(symbol, GridSymbol):
            if symbol.grid != grid:
                raise ValueError("symbol grid differs from probe grid")
            self.rect = None
            band_c = np.fft.fftshift(self.band)
            self.table = np.ascontiguousarray(symbol.centered * band_c[:, None] * band_c[None, :])
        else:
            raise TypeError(f"unsupported symbol type {type(symbol).__name__}")

    @property
    def is_zero(self) -> bool:
        if self.rect is not None:
            return self.rect[0].shape[0] == 0
        return not self.table.any()

    # spectra <-> samples under the grid conventions
    def _hat(self, u: np.ndarray) -> np.ndarray:
        return np.fft.fft(u) * (self.grid.L / self.grid.N)

    def _inv(self, U: np.ndarray) -> np.ndarray:
        return np.fft.ifft(U, axis=-1) * (self.grid.N / self.grid.L)

    @staticmethod
    def _reflect(masks: np.ndarray) -> np.ndarray:
        # mask of -I in FFT order
        return np.roll(masks[:, ::-1], 1, axis=1)

    def apply(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        F, G = self._hat(f), self._hat(g)
        if self.rect is not None:
            I, J = self.rect
            return np.sum(self._inv(I * F) * self._inv(J * G), axis=0)
        C = kernels.bilinear_forward(self.table, np.fft.fftshift(F), np.fft.fftshift(G)) / self.grid.L
        return self._inv(np.fft.ifftshift(C))

    def pairing(self, f, g, h) -> complex:
        return complex(np.sum(self.apply(f, g) * np.conj(h)) * self.grid.dx)

    def kernel_f(self, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        """``k`` with ``pairing = (L/N) sum f k``."""
        if self.rect is not None:
            I, J = self.rect
            w = self._inv(J * self._hat(g)) * np.conj(h)
            return np.sum(self._inv(self._reflect(I) * self._hat(w)), axis=0)
        G, H = self._hat(g), self._hat(h)
        K = kernels.bilinear_adjoint_f(self.table, np.fft.fftshift(G), np.conj(np.fft.fftshift(H)))
        return np.fft.fft(np.fft.ifftshift(K)) / self.grid.L ** 2

    def kernel_g(self, f: np.ndarray, h: np.ndarray) -> np.ndarray:
        if self.rect is not None:
            I, J = self.rect
            w = self._inv(I * self._hat(f)) * np.conj(h)
            return np.sum(self._inv(self._reflect(J) * self._hat(w)), axis=0)
        F, H = self._hat(f), self._hat(h)
        K = kernels.bilinear_adjoint_g(self.table, np.fft.fftshift(F), np.conj(np.fft.fftshift(H)))
        return np.fft.fft(np.fft.ifftshift(K)) / self.grid.L ** 2

    def project(self, u: np.ndarray) -> np.ndarray:
        return np.fft.ifft(np.where(self.band, np.fft.fft(u), 0))


def _norm(u: np.ndarray, p: float, dx: float) -> float:
    return _lp(u, p, dx)


def ratio(m, f: DiscreteSignal, g: DiscreteSignal, h: DiscreteSignal, exponents: ExponentTriple,
          form: TrilinearForm | None = None) -> float:
    """``|<B_m(f, g), h>| / (||f||_p1 ||g||_p2 ||h||_p3)``."""
    grid = f.grid
    if g.grid != grid or h.grid != grid:
        raise ValueError("f, g and h must share a grid")
    form = form or TrilinearForm(m, grid)
    dx = grid.dx
    norms = [_norm(u.samples, p, dx) for u, p in zip((f, g, h), exponents.values)]
    if min(norms) == 0:
        raise ValueError("ratio needs nonzero f, g and h")
    return abs(form.pairing(f.samples, g.samples, h.samples).real) / (norms[0] * norms[1] * norms[2])


@dataclass(frozen=True)
class TrilinearProbe:
    symbol: object
    exponents: ExponentTriple
    grid: Grid
    budget: Budget = Budget()

    def parameters(self) -> dict:
        return {
            "grid": self.grid.to_json(),
            "exponents": self.exponents.to_json(),
            "budget": asdict(self.budget),
            "rectangles": len(self.symbol) if isinstance(self.symbol, StaircaseSymbol) else None,
        }


@dataclass
class NormEstimateReport:
    best_ratio: float
    witness_seeds: list[int]
    trace: list[list[float]]
    converged: list[bool]
    iterations: list[int]
    parameters: dict = field(default_factory=dict)
    degenerate: bool = False

    @property
    def all_converged(self) -> bool:
        return all(self.converged)

    def to_json(self, verbose: bool = False) -> dict:
        out = {
            "best_ratio": self.best_ratio,
            "witness_seeds": self.witness_seeds,
            "converged": self.converged,
            "iterations": self.iterations,
            "degenerate": self.degenerate,
            "parameters": self.parameters,
        }
        if verbose:
            out["trace"] = self.trace
        return out


def _random_start(rng: np.random.Generator, form: TrilinearForm, banded: bool) -> np.ndarray:
    N = form.grid.N
    spec = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    if banded:
        spec = np.where(form.band, spec, 0)
    return np.fft.ifft(spec)


def _dual(k: np.ndarray, p: float, dx: float, conj: bool) -> np.ndarray | None:
    a = np.abs(k)
    top = a.max(initial=0.0)
    if top == 0:
        return None
    q = ExponentTriple.dual(p)
    u = (k / top) * (a / top) ** (q - 2) if q != 2 else k / top
    u = np.where(a > 0, u, 0)
    if conj:
        u = np.conj(u)
    n = _norm(u, p, dx)
    return u / n if n > 0 else None


def _unit(u: np.ndarray | None, p: float, dx: float) -> np.ndarray | None:
    if u is None:
        return None
    n = _norm(u, p, dx)
    return u / n if n > 0 else None


class _State:
    """Unit-normalized iterates and the current ratio."""

    def __init__(self, form: TrilinearForm, ps, f, g, h):
        self.form, self.ps, self.dx = form, ps, form.grid.dx
        self.f = f / _norm(f, ps[0], self.dx)
        self.g = g / _norm(g, ps[1], self.dx)
        self.h = h / _norm(h, ps[2], self.dx)
        self.value = self.evaluate(self.f, self.g, self.h)

    def evaluate(self, f, g, h) -> float:
        return abs(self.form.pairing(f, g, h).real)

    def _accept(self, slot: str, u: np.ndarray | None, k: np.ndarray) -> bool:
        """Take ``u`` for ``slot`` if it does not lower ``|Re (L/N) sum u k|``."""
        if u is None:
            return False
        v = float(abs(np.sum(u * k).real) * self.dx)
        if v >= self.value:
            setattr(self, slot, u)
            self.value = v
            return True
        return False

    def _banded_block(self, slot: str, k: np.ndarray, p: float) -> None:
        """Maximize ``|Re (L/N) sum u k| / ||u||_p`` over band-limited ``u``.

        Starts from the projected dual element (or the current iterate if that
        is better) and polishes with L-BFGS on the band coefficients.
        """
        form, dx = self.form, self.dx
        cand = _dual(k, p, dx, conj=True)
        if cand is not None:
            cand = form.project(cand)
        self._accept(slot, _unit(cand, p, dx), k)
        band = form.band
        u0 = getattr(self, slot)
        s0 = np.sum(u0 * k).real
        if s0 == 0:
            return
        kk = k * np.sign(s0)
        a = np.fft.ifft(kk)[band] * dx
        n_b = int(band.sum())

        def embed(x):
            spec = np.zeros(form.grid.N, dtype=np.complex128)
            spec[band] = x[:n_b] + 1j * x[n_b:]
            return np.fft.ifft(spec)

        def objective(x):
            u = embed(x)
            s = np.sum(x[:n_b] * a.real - x[n_b:] * a.imag)
            nrm = _norm(u, p, dx)
            if nrm == 0:
                return 0.0, np.zeros_like(x)
            au = np.abs(u)
            w = au ** (p - 2) * np.conj(u) * dx if p != 2 else np.conj(u) * dx
            b = np.fft.ifft(w)[band] * nrm ** (1 - p)
            gs = np.concatenate((a.real, -a.imag))
            gn = np.concatenate((b.real, -b.imag))
            return -s / nrm, -gs / nrm + s * gn / nrm ** 2

        spec0 = np.fft.fft(u0)[band]
        x0 = np.concatenate((spec0.real, spec0.imag))
        res = optimize.minimize(objective, x0, jac=True, method="L-BFGS-B",
                                options={"maxiter": INNER_ITERATIONS, "gtol": 0.0, "ftol": 1e-15})
        self._accept(slot, _unit(embed(res.x), p, dx), k)

    def step(self) -> None:
        form, (p1, p2, p3), dx = self.form, self.ps, self.dx
        self._banded_block("f", form.kernel_f(self.g, self.h), p1)
        self._banded_block("g", form.kernel_g(self.f, self.h), p2)
        B = form.apply(self.f, self.g)
        self._accept("h", _dual(B, p3, dx, conj=False), np.conj(B))


def _polish(st: "_State", maxiter: int) -> None:
    """Joint L-BFGS on ``log |Re <B(f,g),h>| - sum log ||.||`` over all three slots.

    f and g are parametrized by their band coefficients, h by all of them.
    The result is kept only if it does not lower the ratio.
    """
    form, dx, (p1, p2, p3) = st.form, st.dx, st.ps
    band = form.band
    N = form.grid.N
    nb = int(band.sum())
    sizes = (nb, nb, N)
    masks = (band, band, np.ones(N, dtype=bool))
    sign = np.sign(form.pairing(st.f, st.g, st.h).real) or 1.0

    def unpack(x):
        out, pos = [], 0
        for n, m in zip(sizes, masks):
            spec = np.zeros(N, dtype=np.complex128)
            spec[m] = x[pos:pos + n] + 1j * x[pos + n:pos + 2 * n]
            out.append(np.fft.ifft(spec))
            pos += 2 * n
        return out

    def grad_coeffs(k, m):
        a = np.fft.ifft(k)[m] * dx
        return np.concatenate((a.real, -a.imag))

    def norm_grad(u, p, m):
        nrm = _norm(u, p, dx)
        w = np.abs(u) ** (p - 2) * np.conj(u) * dx
        b = np.fft.ifft(w)[m] * nrm ** (-p)
        return nrm, np.concatenate((b.real, -b.imag))

    def objective(x):
        f, g, h = unpack(x)
        B = form.apply(f, g)
        val = sign * np.sum(B * np.conj(h)).real * dx
        norms = [norm_grad(u, p, m) for u, p, m in zip((f, g, h), (p1, p2, p3), masks)]
        if val <= 0 or min(n for n, _ in norms) == 0:
            return 1e300, np.zeros_like(x)
        kf = sign * form.kernel_f(g, h)
        kg = sign * form.kernel_g(f, h)
        kh = sign * np.conj(B)
        gs = np.concatenate([grad_coeffs(k, m) for k, m in zip((kf, kg, kh), masks)])
        gn = np.concatenate([gr for _, gr in norms])
        obj = -np.log(val) + sum(np.log(n) for n, _ in norms)
        return obj, -gs / val + gn

    x0 = np.concatenate([
        np.concatenate((c.real, c.imag))
        for c in (np.fft.fft(u)[m] for u, m in zip((st.f, st.g, st.h), masks))
    ])
    res = optimize.minimize(objective, x0, jac=True, method="L-BFGS-B",
                            options={"maxiter": maxiter, "gtol": 0.0, "ftol": 1e-15})
    f, g, h = (_unit(u, p, dx) for u, p in zip(unpack(res.x), (p1, p2, p3)))
    if f is None or g is None or h is None:
        return
    v = st.evaluate(f, g, h)
    if v >= st.value:
        st.f, st.g, st.h, st.value = f, g, h, v


def ascend(probe: TrilinearProbe, seed: int = 0) -> NormEstimateReport:
    """Best ratio over ``budget.restarts`` independent ascents seeded from ``seed``."""
    form = TrilinearForm(probe.symbol, probe.grid)
    budget = probe.budget
    report = NormEstimateReport(0.0, [], [], [], [], probe.parameters())
    report.parameters["seed"] = seed
    if form.is_zero:
        report.degenerate = True
        report.trace = [[0.0] for _ in range(budget.restarts)]
        report.converged = [True] * budget.restarts
        report.iterations = [0] * budget.restarts
        return report

    children = np.random.SeedSequence(seed).spawn(budget.restarts)
    best = -1.0
    for idx, child in enumerate(children):
        rng = np.random.default_rng(child)
        f = _random_start(rng, form, True)
        g = _random_start(rng, form, True)
        h = _random_start(rng, form, False)
        st = _State(form, probe.exponents.values, f, g, h)
        trace = [st.value]
        converged = False
        for _ in range(budget.iterations):
            before = st.value
            st.step()
            trace.append(st.value)
            if st.value - before <= budget.tolerance * max(st.value, 1e-300):
                converged = True
                break
        if POLISH_ITERATIONS:
            _polish(st, POLISH_ITERATIONS)
            trace.append(st.value)
        report.trace.append(trace)
        report.converged.append(converged)
        report.iterations.append(len(trace) - 1)
        if st.value > best:
            best = st.value
            report.witness_seeds = [idx]
        elif st.value == best:
            report.witness_seeds.append(idx)
    report.best_ratio = best
    return report


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``; nan when any ``y`` is not positive."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 2 or np.any(y <= 0):
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def sweep(
    family: Callable,
    params: Iterable,
    exponents: ExponentTriple,
    grid_for: Callable,
    budget: Budget = Budget(),
    seed: int = 0,
    label: str = "family",
) -> dict:
    """Run :func:`ascend` at every parameter; rows plus the log-log slope against ``J``.

    ``family(param)`` returns ``(J, symbol)``; ``grid_for(symbol)`` returns the grid.
    """
    rows = []
    for param in params:
        row = {"family": label, "param": param, "seed": seed}
        try:
            J, symbol = family(param)
            probe = TrilinearProbe(symbol, exponents, grid_for(symbol), budget)
            rep = ascend(probe, seed)
            row.update(J=J, best_ratio=rep.best_ratio, iterations=max(rep.iterations),
                       converged=rep.all_converged, degenerate=rep.degenerate, error=None)
        except ValueError as exc:
            row.update(J=None, best_ratio=float("nan"), iterations=0, converged=False,
                       degenerate=False, error=str(exc))
        rows.append(row)
    good = [r for r in rows if r["error"] is None]
    ratios = [r["best_ratio"] for r in good]
    return {
        "rows": rows,
        "slope": loglog_slope([r["J"] for r in good], ratios),
        "dispersion": (max(ratios) / min(ratios)) if ratios and min(ratios) > 0 else float("inf"),
    }
