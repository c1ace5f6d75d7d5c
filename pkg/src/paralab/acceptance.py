"""Acceptance gate: one check per criterion, each with its own tolerance and time limit.

Run ``python -m paralab.acceptance`` (optionally followed by criterion
numbers) to print one PASS/FAIL line per criterion. The same checks back
``tests/test_acceptance.py``.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import cli
from .lacunary import generate_admissible, is_lacunary
from .normest import Budget, ExponentTriple, TrilinearProbe, ascend, loglog_slope, sweep
from .oracles import brute_force_lacunary
from .signal import Grid, generate, lp_norm, square_function_ratio
from .symbols import (
    apply_bilinear,
    exp_staircase,
    fit_grid,
    multilac_staircase,
    regrouping_check,
    resolving_grid,
    unit_symbol,
)
from .variation import lepingle_ratio, v_norm, v_norm_oracle


@dataclass
class Outcome:
    number: int
    title: str
    ok: bool
    detail: str
    seconds: float
    limit: float | None = None

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        limit = f" (limit {self.limit:.0f}s)" if self.limit else ""
        return f"{tag} [{self.number}] {self.title}: {self.detail}; {self.seconds:.1f}s{limit}"


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def _pair(grid: Grid, seed: int):
    return generate("random_trig", grid, seed=2 * seed), generate("random_trig", grid, seed=2 * seed + 1)


def crit_pointwise_product() -> tuple[bool, str]:
    worst = 0.0
    for N in (256, 1024):
        grid = Grid(N, 1.0)
        for s in range(50):
            f, g = _pair(grid, s)
            fg = f.samples * g.samples
            for method in ("rect", "direct"):
                worst = max(worst, _rel(apply_bilinear(unit_symbol(), f, g, method).samples, fg))
    return worst <= 1e-10, f"max relative error {worst:.2e} (tol 1e-10) over 2x50 pairs, both paths"


def crit_oracle_equivalence() -> tuple[bool, str]:
    worst = 0.0
    symbols = {"exp_staircase(8)": exp_staircase(8),
               "multilac(2,2,J=8)": multilac_staircase(generate_admissible(8, 2, 2, seed=0))}
    for m in symbols.values():
        grid = fit_grid(m, 512)
        for s in range(20):
            f, g = _pair(grid, s)
            a = apply_bilinear(m, f, g, "rect").samples
            b = apply_bilinear(m, f, g, "direct").samples
            worst = max(worst, _rel(a, b))
    return worst <= 1e-10, f"max relative gap {worst:.2e} (tol 1e-10), 2 symbols x 20 pairs at N=512"


def crit_regrouping() -> tuple[bool, str]:
    worst = 0.0
    for J in (4, 8, 16):
        grid = fit_grid(exp_staircase(J), 512)
        for s in range(20):
            f, g = _pair(grid, s)
            res = regrouping_check(J, f, g)
            worst = max(worst, res / (lp_norm(f, 2) * lp_norm(g, 2)))
    return worst <= 1e-9, f"max residual / (|f|_2 |g|_2) = {worst:.2e} (tol 1e-9)"


def crit_lemmas() -> tuple[bool, str]:
    import contextlib
    import io

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(["verify-lemmas", "--seeds", "100", "--db", "2,2;2,4;3,3", "--J", "20"])
    rows = [r for r in buf.getvalue().splitlines() if r and not r.startswith("#")][1:]
    bad = sum(int(r.rsplit(",", 1)[1]) for r in rows)
    return code == 0 and len(rows) == 300 and bad == 0, f"exit {code}, {len(rows)} cases, {bad} violations"


def _random_point_set(rng: np.random.Generator):
    from fractions import Fraction

    n = int(rng.integers(1, 11))
    kind = int(rng.integers(3))
    if kind == 0:
        pts = {Fraction(int(rng.integers(0, 64)), 2 ** int(rng.integers(0, 4))) for _ in range(n)}
    elif kind == 1:
        pts = {Fraction(int(rng.choice([-1, 1])) * int(rng.integers(1, 4)), 2 ** int(rng.integers(0, 12)))
               for _ in range(n)}
    else:
        c = Fraction(int(rng.integers(0, 1024)))
        pts = {c + Fraction(int(rng.integers(-3, 4)), 2 ** int(rng.integers(0, 10))) for _ in range(n)}
    return sorted(pts)


def crit_lacunary_oracle(cases: int = 2000, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    mismatches, positives = 0, 0
    for _ in range(cases):
        X = _random_point_set(rng)
        d, b = int(rng.integers(0, 4)), int(rng.integers(0, 5))
        expected = brute_force_lacunary(X, d, b)
        got = is_lacunary(X, d, b, mode="exhaustive")
        positives += expected
        if got.status == "undecided" or (got.status == "lacunary") != expected:
            mismatches += 1
    return mismatches == 0, f"{mismatches} mismatches over {cases} sets ({positives} lacunary)"


def crit_variation(cases: int = 500, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(1, 13))
        h = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        for r in (1, 2, 2.5, 3):
            a, b = v_norm(h, r), v_norm_oracle(h, r)
            worst = max(worst, abs(a - b) / b)
    return worst <= 1e-12, f"max relative gap {worst:.2e} (tol 1e-12) over {cases} sequences x 4 r"


def crit_exp_sweep(budget: Budget = Budget()) -> tuple[bool, str]:
    res = sweep(lambda J: (J, exp_staircase(J)), [4, 8, 16, 32, 64], ExponentTriple(3, 3, 3),
                lambda m: fit_grid(m, 1024), budget, label="exp_staircase")
    ratios = [r["best_ratio"] for r in res["rows"]]
    ok = abs(res["slope"]) < 0.05 and res["dispersion"] < 1.5
    shown = ", ".join(f"{r:.4f}" for r in ratios)
    return ok, f"ratios [{shown}], slope {res['slope']:+.4f} (|.|<0.05), max/min {res['dispersion']:.3f} (<1.5)"


MULTILAC_N = 4096
MULTILAC_BUDGET = Budget(restarts=4, iterations=100, tolerance=1e-7)


def crit_multilac_sweep(budget: Budget = MULTILAC_BUDGET) -> tuple[bool, str]:
    params = [(J, s) for s in range(20) for J in (8, 16, 32)]
    res = sweep(lambda p: (p[0], multilac_staircase(generate_admissible(p[0], 2, 2, seed=p[1]))), params,
                ExponentTriple(3, 3, 3), lambda m: resolving_grid(m, MULTILAC_N), budget, label="multilac")
    rows = res["rows"]
    degenerate = sum(r["degenerate"] for r in rows)
    errors = sum(r["error"] is not None for r in rows)
    ok = errors == 0 and res["dispersion"] < 2.0 and abs(res["slope"]) < 0.05
    ratios = [r["best_ratio"] for r in rows]
    return ok, (f"{len(rows)} runs, ratios in [{min(ratios):.4f}, {max(ratios):.4f}], max/min {res['dispersion']:.3f} (<2.0), "
                f"pooled slope {res['slope']:+.4f} (|.|<0.05), {degenerate} degenerate, {errors} errors")


def crit_stability(trials: int = 8) -> tuple[bool, str]:
    Ns = [256, 1024, 4096]
    sq, lep = [], []
    for N in Ns:
        grid = Grid(N, 1.0)
        fam = cli.lp_intervals(grid)
        sq.append(np.mean([square_function_ratio(generate("random_trig", grid, seed=t, band=(-N // 2, N // 2)), fam, 4.0)
                           for t in range(trials)]))
        lep.append(np.mean([lepingle_ratio(generate("random_trig", grid, seed=t), 4.0, 2.5) for t in range(trials)]))
    s1, s2 = loglog_slope(Ns, sq), loglog_slope(Ns, lep)
    ok = abs(s1) < 0.05 and abs(s2) < 0.05
    return ok, f"square function slope {s1:+.4f}, Lepingle slope {s2:+.4f} (|.|<0.05)"


def crit_holder_saturation() -> tuple[bool, str]:
    probe = TrilinearProbe(unit_symbol(), ExponentTriple(3, 3, 3), Grid(1024, 1.0), Budget(restarts=10))
    rep = ascend(probe, seed=0)
    return rep.best_ratio >= 0.999, f"best ratio {rep.best_ratio:.9f} (>= 0.999) from 10 restarts at N=1024"


CRITERIA: list[tuple[int, str, Callable[[], tuple[bool, str]], float | None]] = [
    (1, "pointwise-product fidelity", crit_pointwise_product, 10),
    (2, "rectangle vs direct evaluation", crit_oracle_equivalence, 60),
    (3, "regrouping identity", crit_regrouping, None),
    (4, "interval lemmas exact", crit_lemmas, 120),
    (5, "lacunarity oracle agreement", crit_lacunary_oracle, 120),
    (6, "variation DP vs chain enumeration", crit_variation, None),
    (7, "exp_staircase norm sweep", crit_exp_sweep, 15 * 60),
    (8, "multilac norm sweep", crit_multilac_sweep, 30 * 60),
    (9, "square function and Lepingle stability", crit_stability, None),
    (10, "Holder saturation", crit_holder_saturation, None),
]


def run_one(number: int) -> Outcome:
    for n, title, fn, limit in CRITERIA:
        if n == number:
            t0 = time.perf_counter()
            ok, detail = fn()
            dt = time.perf_counter() - t0
            if limit is not None and dt > limit:
                ok = False
                detail += f"; over time limit"
            return Outcome(n, title, ok, detail, dt, limit)
    raise KeyError(number)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    wanted = [int(a) for a in argv] or [n for n, *_ in CRITERIA]
    failed = 0
    for n in wanted:
        out = run_one(n)
        print(out.line(), flush=True)
        failed += not out.ok
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
