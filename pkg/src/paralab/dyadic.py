"""Exact dyadic intervals and the interval collections built around a point set.

Everything here is exact: endpoints are :class:`fractions.Fraction` values
with power-of-two denominators and no floating point is used. Intervals are
half-open ``[a, b)`` throughout.

The collections follow one fixed universe: dyadic intervals contained in a
dyadic ``domain`` with scale exponent at least ``finest``. Intervals at finer
scales are never produced (the true collections contain arbitrarily small
intervals next to the point set).
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "DyadicInterval",
    "IntervalCollection",
    "as_dyadic",
    "format_dyadic",
    "parse_dyadic",
    "pow2",
    "triple",
    "dilate",
    "collect_Z",
    "collect_Yj_Zj",
    "collect_Wi_Vi",
    "level_of",
    "overlap_count",
    "domain_for",
]


@lru_cache(maxsize=4096)
def pow2(m: int) -> Fraction:
    return Fraction(2) ** m


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def as_dyadic(x) -> Fraction:
    """Convert ``x`` to a Fraction, insisting on a power-of-two denominator."""
    if isinstance(x, str):
        return parse_dyadic(x)
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"not a finite number: {x!r}")
    q = Fraction(x)
    if not _is_pow2(q.denominator):
        raise ValueError(f"{q} is not a dyadic rational")
    return q


_DYADIC_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(?:2\s*\^\s*(\d+)|(\d+)))?\s*$")


def parse_dyadic(text: str) -> Fraction:
    """Parse ``"p/2^m"``, ``"p/q"`` (q a power of two) or a plain integer."""
    match = _DYADIC_RE.match(text)
    if match is None:
        raise ValueError(f"malformed dyadic rational: {text!r}")
    num, exp, den = match.groups()
    if exp is not None:
        return Fraction(int(num), 2 ** int(exp))
    if den is not None:
        d = int(den)
        if not _is_pow2(d):
            raise ValueError(f"denominator of {text!r} is not a power of two")
        return Fraction(int(num), d)
    return Fraction(int(num))


def format_dyadic(q) -> str:
    q = as_dyadic(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/2^{q.denominator.bit_length() - 1}"


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """``[k 2^m, (k+1) 2^m)``."""

    k: int
    m: int

    @classmethod
    def containing(cls, x, m: int) -> "DyadicInterval":
        """The interval of scale ``2^m`` that contains ``x``."""
        return cls(int((Fraction(x) / pow2(m)).__floor__()), m)

    @cached_property
    def left(self) -> Fraction:
        return self.k * pow2(self.m)

    @cached_property
    def right(self) -> Fraction:
        return (self.k + 1) * pow2(self.m)

    @property
    def length(self) -> Fraction:
        return pow2(self.m)

    @cached_property
    def center(self) -> Fraction:
        return (self.left + self.right) / 2

    @property
    def parent(self) -> "DyadicInterval":
        return DyadicInterval(self.k >> 1, self.m + 1)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        return DyadicInterval(2 * self.k, self.m - 1), DyadicInterval(2 * self.k + 1, self.m - 1)

    def ancestor(self, m: int) -> "DyadicInterval":
        if m < self.m:
            raise ValueError("ancestor scale must not be finer than the interval")
        return DyadicInterval(self.k >> (m - self.m), m)

    def __contains__(self, x) -> bool:
        return self.left <= x < self.right

    def contains(self, other: "DyadicInterval") -> bool:
        return other.m <= self.m and other.ancestor(self.m) == self

    def intersects(self, other: "DyadicInterval") -> bool:
        return self.contains(other) or other.contains(self)

    def relation(self, other: "DyadicInterval") -> str:
        """One of ``"equal"``, ``"inside"``, ``"contains"``, ``"disjoint"``."""
        if self == other:
            return "equal"
        if other.contains(self):
            return "inside"
        if self.contains(other):
            return "contains"
        return "disjoint"

    def bounds(self) -> tuple[Fraction, Fraction]:
        return self.left, self.right

    def to_json(self) -> dict:
        return {"k": self.k, "m": self.m}

    @classmethod
    def from_json(cls, obj: dict) -> "DyadicInterval":
        return cls(int(obj["k"]), int(obj["m"]))

    def __str__(self) -> str:
        return f"[{format_dyadic(self.left)}, {format_dyadic(self.right)})"


def dilate(interval: DyadicInterval, factor) -> tuple[Fraction, Fraction]:
    """Concentric dilate ``factor * I`` as exact endpoints."""
    half = Fraction(factor) * interval.length / 2
    return interval.center - half, interval.center + half


def triple(interval: DyadicInterval) -> tuple[Fraction, Fraction]:
    return dilate(interval, 3)


_LABEL_RE = re.compile(r"^(Y|Z|Y_\d+|Z_\d+|W_\d+|V_\d+)$")


@dataclass(frozen=True)
class IntervalCollection:
    label: str
    intervals: tuple[DyadicInterval, ...]

    def __post_init__(self):
        if not _LABEL_RE.match(self.label):
            raise ValueError(f"unknown collection label {self.label!r}")
        object.__setattr__(self, "intervals", tuple(sorted(self.intervals, key=lambda I: I.left)))

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def total_length(self) -> Fraction:
        return sum((I.length for I in self.intervals), Fraction(0))

    def pairwise_disjoint(self) -> bool:
        # sorted by left endpoint, so checking neighbours suffices
        return all(a.right <= b.left for a, b in zip(self.intervals, self.intervals[1:]))

    def to_json(self) -> dict:
        return {"label": self.label, "intervals": [I.to_json() for I in self.intervals]}

    @classmethod
    def from_json(cls, obj: dict) -> "IntervalCollection":
        return cls(obj["label"], tuple(DyadicInterval.from_json(i) for i in obj["intervals"]))


class _Points:
    """Sorted point set with half-open range queries."""

    def __init__(self, points: Iterable):
        self.points = sorted({as_dyadic(p) for p in points})

    def count(self, a, b) -> int:
        return bisect.bisect_left(self.points, b) - bisect.bisect_left(self.points, a)

    def hits(self, a, b) -> bool:
        return self.count(a, b) > 0

    def __len__(self):
        return len(self.points)


def domain_for(points: Iterable, upper=None) -> DyadicInterval:
    """Smallest ``[0, 2^K)`` holding every point and covering ``[0, upper)``."""
    pts = [as_dyadic(p) for p in points]
    if not pts or any(p < 0 for p in pts):
        raise ValueError("domain_for expects a nonempty set of non-negative points")
    top = max(pts)
    K = 0
    while pow2(K) <= top:
        K += 1
    while top > 0 and pow2(K - 1) > top:
        K -= 1
    if upper is not None:
        while pow2(K) < as_dyadic(upper):
            K += 1
    return DyadicInterval(0, K)


def collect_Z(points: Iterable, finest: int, domain: DyadicInterval) -> IntervalCollection:
    """Maximal dyadic intervals inside ``domain`` (scale >= 2^finest) whose triple misses the points."""
    X = _Points(points)
    if len(X) == 0:
        raise ValueError("collect_Z needs a nonempty point set")
    if domain.m < finest:
        raise ValueError("domain is finer than the finest admissible scale")
    out = []
    stack = [domain]
    while stack:
        I = stack.pop()
        if not X.hits(*triple(I)):
            out.append(I)
        elif I.m > finest:
            stack.extend(I.children())
    return IntervalCollection("Z", tuple(out))


def collect_Yj_Zj(points: Iterable, xi_j, j: int, Z: IntervalCollection) -> tuple[IntervalCollection, IntervalCollection]:
    """``Y_j`` (length ``2^(4-j)`` intervals in ``[0, xi_j)`` whose triple meets X) and ``Z_j``."""
    xi_j = as_dyadic(xi_j)
    m = 4 - j
    if (xi_j / pow2(m)).denominator != 1:
        raise ValueError(f"xi_{j} = {xi_j} is not a multiple of 2^{m}")
    X = _Points(points)
    ys = set()
    for x in X.points:
        k0 = DyadicInterval.containing(x, m).k
        for k in (k0 - 1, k0, k0 + 1):
            I = DyadicInterval(k, m)
            if I.left >= 0 and I.right <= xi_j and X.hits(*triple(I)):
                ys.add(I)
    zs = []
    for I in Z:
        if I.left < 0 or I.right > xi_j:
            continue
        if I.m < m and I.ancestor(m) in ys:
            continue
        zs.append(I)
    return IntervalCollection(f"Y_{j}", tuple(ys)), IntervalCollection(f"Z_{j}", tuple(zs))


def level_of(interval: DyadicInterval, levels: Sequence[_Points], factor=3):
    """Smallest ``i`` such that ``factor * I`` holds a point of level ``i`` (None if none)."""
    a, b = dilate(interval, factor)
    for i, pts in enumerate(levels):
        if pts.hits(a, b):
            return i
    return None


def _as_levels(levels) -> list[_Points]:
    return [lv if isinstance(lv, _Points) else _Points(lv) for lv in levels]


def collect_Wi_Vi(
    levels: Sequence[Iterable],
    i: int,
    b: int,
    Y_parts: Iterable[IntervalCollection],
    domain: DyadicInterval,
    finest: int,
) -> tuple[IntervalCollection, IntervalCollection]:
    """``W^(i)``, the maximal intervals of ``Y^(i)``, and the refined family ``V^(i)``.

    ``Y^(i)`` holds the intervals whose triple meets level ``i`` but no earlier
    level. ``V^(i)`` holds the intervals ``2^(b+4)`` times shorter than some
    ``J`` in ``W^(i)`` that contain at least one member of some ``Y_j`` lying
    in ``Y^(i)``.
    """
    lv = _as_levels(levels)
    if not 0 <= i < len(lv):
        raise ValueError(f"level index {i} outside 0..{len(lv) - 1}")
    if b < 0:
        raise ValueError("b must be non-negative")

    W = []
    stack = [(domain, None)]
    while stack:
        I, parent_level = stack.pop()
        lvl = level_of(I, lv)
        if lvl is None or lvl > i:
            continue
        if lvl == i:
            if parent_level != i:
                W.append(I)
            continue
        if I.m > finest:
            stack.extend((c, lvl) for c in I.children())
    W_set = set(W)

    V = set()
    for part in Y_parts:
        for Ip in part:
            if level_of(Ip, lv) != i:
                continue
            J = None
            for m in range(Ip.m, domain.m + 1):
                anc = Ip.ancestor(m)
                if anc in W_set:
                    J = anc
                    break
            if J is None:  # pragma: no cover - every Y^(i) member sits under W^(i)
                raise AssertionError(f"{Ip} has no W^({i}) ancestor")
            target = J.m - b - 4
            if Ip.m <= target:
                V.add(Ip.ancestor(target))
    return IntervalCollection(f"W_{i}", tuple(W)), IntervalCollection(f"V_{i}", tuple(V))


def overlap_count(intervals: Iterable[tuple]) -> int:
    """Largest number of half-open intervals ``[a, b)`` sharing a point."""
    events = []
    for a, b in intervals:
        if a < b:
            events.append((a, 1))
            events.append((b, -1))
    # at a shared coordinate closings (-1) sort before openings (+1)
    events.sort()
    depth = best = 0
    for _, step in events:
        depth += step
        best = max(best, depth)
    return best
