import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paralab import normest
from paralab.normest import (
    Budget,
    ExponentTriple,
    TrilinearForm,
    TrilinearProbe,
    ascend,
    loglog_slope,
    ratio,
    sweep,
)
from paralab.signal import DiscreteSignal, Grid, generate, lp_norm
from paralab.symbols import StaircaseSymbol, exp_convex, exp_staircase, fit_grid, half_plane, unit_symbol

P333 = ExponentTriple(3, 3, 3)


def _triple(grid, seed):
    return tuple(generate("random_trig", grid, 3 * seed + k) for k in range(3))


def test_exponent_validation():
    ExponentTriple(3, 4, 2.4)
    with pytest.raises(ValueError):
        ExponentTriple(2, 4, 4)
    ExponentTriple(2, 4, 4, unsafe=True)
    with pytest.raises(ValueError):
        ExponentTriple(3, 3, 4)
    with pytest.raises(ValueError):
        ExponentTriple(1, float("inf"), 1, unsafe=True)
    with pytest.raises(ValueError):
        Budget(restarts=0)


def test_ratio_examples():
    grid = Grid(64, 1.0)
    c = DiscreteSignal(grid, np.full(64, 1.5 + 0j))
    assert ratio(unit_symbol(), c, c, c, P333) == pytest.approx(1.0, rel=1e-13)
    f, g, _ = _triple(grid, 0)
    b = DiscreteSignal(grid, f.samples * g.samples)
    # i * B is orthogonal to B under the real pairing
    assert ratio(unit_symbol(), f, g, DiscreteSignal(grid, 1j * b.samples), P333) < 1e-14
    with pytest.raises(ValueError):
        ratio(unit_symbol(), f, g, DiscreteSignal(grid, np.zeros(64)), P333)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), *[st.floats(0.01, 100) for _ in range(3)])
def test_ratio_homogeneity(seed, a, b, c):
    m = exp_staircase(4)
    grid = fit_grid(m, 64)
    f, g, h = _triple(grid, seed)
    base = ratio(m, f, g, h, P333)
    assert ratio(m, f * a, g * (-b), h * c, P333) == pytest.approx(base, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("make", [
    lambda: (exp_staircase(6), None),
    lambda: (exp_convex(4, Grid(64, 4.0)), Grid(64, 4.0)),
    lambda: (half_plane(1, 0, Grid(64, 1.0)), Grid(64, 1.0)),
])
def test_kernels_reproduce_pairing(make):
    m, grid = make()
    grid = grid or fit_grid(m, 64)
    form = TrilinearForm(m, grid)
    f, g, h = (u.samples for u in _triple(grid, 5))
    P = form.pairing(f, g, h)
    assert np.sum(f * form.kernel_f(g, h)) * grid.dx == pytest.approx(P, rel=1e-11)
    assert np.sum(g * form.kernel_g(f, h)) * grid.dx == pytest.approx(P, rel=1e-11)


def test_rect_and_grid_forms_agree():
    m = exp_staircase(6)
    grid = fit_grid(m, 64)
    a, b = TrilinearForm(m, grid), TrilinearForm(m.to_grid(grid), grid)
    f, g, h = (u.samples for u in _triple(grid, 2))
    assert a.pairing(f, g, h) == pytest.approx(b.pairing(f, g, h), rel=1e-11)
    assert np.allclose(a.kernel_f(g, h), b.kernel_f(g, h), rtol=1e-10, atol=1e-12)


def test_dual_norm_is_attained():
    # sup over unit-p3 h of <B, h> equals ||B||_{p3'}
    grid = Grid(32, 1.0)
    f, g, _ = _triple(grid, 1)
    B = f.samples * g.samples
    q = ExponentTriple.dual(3)
    h = normest._dual(np.conj(B), 3, grid.dx, conj=True)
    assert lp_norm(DiscreteSignal(grid, h), 3) == pytest.approx(1, rel=1e-12)
    value = np.sum(B * np.conj(h)).real * grid.dx
    target = lp_norm(DiscreteSignal(grid, B), q)
    assert value == pytest.approx(target, rel=1e-8)
    rng = np.random.default_rng(0)
    for _ in range(200):
        r = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        r /= lp_norm(DiscreteSignal(grid, r), 3)
        assert np.sum(B * np.conj(r)).real * grid.dx <= target * (1 + 1e-12)


def test_unit_symbol_saturates_holder():
    probe = TrilinearProbe(unit_symbol(), P333, Grid(128, 1.0), Budget(restarts=2, iterations=50))
    rep = ascend(probe, seed=0)
    assert rep.best_ratio == pytest.approx(1.0, abs=1e-6)
    assert rep.best_ratio <= 1 + 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_traces_are_monotone(seed):
    m = exp_staircase(8)
    probe = TrilinearProbe(m, P333, fit_grid(m, 128), Budget(restarts=2, iterations=20))
    rep = ascend(probe, seed)
    for trace in rep.trace:
        assert all(b >= a - normest.MONOTONE_SLACK for a, b in zip(trace, trace[1:]))
    assert rep.best_ratio == max(t[-1] for t in rep.trace)
    assert rep.best_ratio == rep.trace[rep.witness_seeds[0]][-1]


def test_block_optimality_after_ascent():
    m = exp_staircase(6)
    grid = fit_grid(m, 128)
    form = TrilinearForm(m, grid)
    rng = np.random.default_rng(4)
    st_ = normest._State(form, P333.values, *(normest._random_start(rng, form, b) for b in (True, True, False)))
    for _ in range(200):
        before = st_.value
        st_.step()
        if st_.value - before <= 1e-10 * st_.value:
            break
    normest._polish(st_, normest.POLISH_ITERATIONS)
    base = st_.value

    def r(f, g, h):
        return abs(form.pairing(f, g, h).real) / (
            normest._norm(f, 3, grid.dx) * normest._norm(g, 3, grid.dx) * normest._norm(h, 3, grid.dx))

    for _ in range(8):
        for slot in range(3):
            d = normest._random_start(rng, form, slot < 2)
            d *= 1e-3 * normest._norm([st_.f, st_.g, st_.h][slot], 3, grid.dx) / normest._norm(d, 3, grid.dx)
            args = [st_.f, st_.g, st_.h]
            args[slot] = args[slot] + d
            assert r(*args) <= base + 1e-6


def test_stationarity_by_central_differences():
    m = unit_symbol()
    grid = Grid(64, 1.0)
    probe = TrilinearProbe(m, P333, grid, Budget(restarts=1, iterations=100))
    form = TrilinearForm(m, grid)
    rng = np.random.default_rng(0)
    st_ = normest._State(form, P333.values, *(normest._random_start(rng, form, b) for b in (True, True, False)))
    for _ in range(probe.budget.iterations):
        st_.step()
    normest._polish(st_, normest.POLISH_ITERATIONS)

    def r(f):
        return abs(form.pairing(f, st_.g, st_.h).real) / (
            normest._norm(f, 3, grid.dx) * normest._norm(st_.g, 3, grid.dx) * normest._norm(st_.h, 3, grid.dx))

    eps = 1e-5
    for _ in range(8):
        d = normest._random_start(rng, form, True)
        d /= normest._norm(d, 3, grid.dx)
        deriv = (r(st_.f + eps * d) - r(st_.f - eps * d)) / (2 * eps)
        assert abs(deriv) <= 1e-4 * st_.value


def test_reports_are_reproducible():
    m = exp_staircase(5)
    probe = TrilinearProbe(m, P333, fit_grid(m, 64), Budget(restarts=2, iterations=10))
    a, b = ascend(probe, 11), ascend(probe, 11)
    assert a.to_json(verbose=True) == b.to_json(verbose=True)
    assert ascend(probe, 12).to_json(verbose=True) != a.to_json(verbose=True)


def test_degenerate_symbol():
    probe = TrilinearProbe(StaircaseSymbol(()), P333, Grid(32, 1.0), Budget(restarts=3))
    rep = ascend(probe)
    assert rep.degenerate and rep.best_ratio == 0 and rep.all_converged


def test_loglog_slope():
    assert loglog_slope([1, 2, 4, 8], [3, 3, 3, 3]) == pytest.approx(0, abs=1e-12)
    assert loglog_slope([1, 2, 4], [1, 4, 16]) == pytest.approx(2)
    assert np.isnan(loglog_slope([1, 2], [1, 0]))


def test_unit_sweep_is_flat():
    res = sweep(lambda J: (J, unit_symbol()), [4, 8, 16], P333, lambda m: Grid(64, 1.0),
                Budget(restarts=1, iterations=50))
    for row in res["rows"]:
        assert row["best_ratio"] == pytest.approx(1, abs=1e-6)
    assert abs(res["slope"]) < 1e-6 and res["dispersion"] < 1 + 1e-6


def test_sweep_flags_errors_per_row():
    def family(J):
        if J == 8:
            raise ValueError("broken")
        return J, unit_symbol()

    res = sweep(family, [4, 8], P333, lambda m: Grid(32, 1.0), Budget(restarts=1, iterations=5))
    assert res["rows"][1]["error"] == "broken" and res["rows"][0]["error"] is None
