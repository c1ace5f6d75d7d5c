"""Slow reference implementations, written straight from the definitions.

They share no code with the fast paths and exist only to check them.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations


def _spread_ok(O, L, b: int) -> bool:
    # every pair in O must be at least 2^-b dist(., L) apart, from both ends
    scale = Fraction(1, 2 ** b)
    for x in O:
        dx = min(abs(x - y) for y in L)
        for y in O:
            if x != y and abs(x - y) < scale * dx:
                return False
    return True


def brute_force_lacunary(points, d: int, b: int) -> bool:
    """Is ``points`` a union of a ``(d-1)``-level lacunary ``L`` and a spread set ``O``?

    Depth 0 means a single point. No memoization, no pruning beyond the
    pair test on ``O``.
    """
    X = sorted({Fraction(p) for p in points})
    return _lac(X, d, b)


def _lac(X, d: int, b: int) -> bool:
    if d == 0:
        return len(X) == 1
    n = len(X)
    for size in range(1, n + 1):
        for idx in combinations(range(n), size):
            L = [X[i] for i in idx]
            O = [x for i, x in enumerate(X) if i not in idx]
            if _spread_ok(O, L, b) and _lac(L, d - 1, b):
                return True
    return False


def all_chains_variation(values, r: float) -> float:
    """Largest ``sum |increments|^r`` over every index subset, by enumeration."""
    n = len(values)
    best = 0.0
    for mask in range(1, 2 ** n):
        idx = [i for i in range(n) if mask >> i & 1]
        s = 0.0
        for a, c in zip(idx, idx[1:]):
            s += abs(values[c] - values[a]) ** r
        best = max(best, s)
    return best


def maximal_all_windows(a) -> list[float]:
    """Centered periodic maximal function over the same dyadic radii, one window at a time."""
    n = len(a)
    radii = [0]
    r = 1
    while 2 * r + 1 <= n:
        radii.append(r)
        r *= 2
    mean = sum(a) / n
    out = []
    for x in range(n):
        best = mean
        for r in radii:
            window = [a[(x + t) % n] for t in range(-r, r + 1)]
            best = max(best, sum(window) / len(window))
        out.append(best)
    return out
