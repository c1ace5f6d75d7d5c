"""Multi-lacunary point sets.

A finite set is (0, b)-lacunary when it is a single point. It is
(d+1, b)-lacunary when it splits into ``L`` and ``O`` with ``L``
(d, b)-lacunary and every pair of distinct points of ``O`` at least
``2**-b`` times their distance to ``L`` apart. Unrolled, a certificate is a
list of levels ``O_0, ..., O_d`` with ``O_0`` a singleton and each level
checked against the union of the earlier ones. Levels above 0 may be empty.

All distances are exact (``fractions.Fraction``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .dyadic import pow2

log = logging.getLogger(__name__)

__all__ = [
    "LacunarityCertificate",
    "CertificateCheck",
    "LacunarityResult",
    "AdmissibleSequences",
    "verify_certificate",
    "is_lacunary",
    "decompose",
    "generate_admissible",
    "round_xi",
    "spacing_violations",
    "format_rational",
    "parse_rational",
]

EXHAUSTIVE_LIMIT = 24
VECTORIZED_LIMIT = 12
DEFAULT_BUDGET = 2_000_000


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    if q.denominator & (q.denominator - 1) == 0:
        return f"{q.numerator}/2^{q.denominator.bit_length() - 1}"
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if "/2^" in text.replace(" ", ""):
        num, exp = text.replace(" ", "").split("/2^")
        return Fraction(int(num), 2 ** int(exp))
    return Fraction(text)


@dataclass(frozen=True)
class LacunarityCertificate:
    levels: tuple[tuple[Fraction, ...], ...]
    b: int

    def __post_init__(self):
        object.__setattr__(
            self, "levels", tuple(tuple(sorted(Fraction(x) for x in lv)) for lv in self.levels)
        )

    @property
    def d(self) -> int:
        return len(self.levels) - 1

    @property
    def points(self) -> tuple[Fraction, ...]:
        return tuple(sorted(x for lv in self.levels for x in lv))

    def level_of(self, x) -> int:
        for i, lv in enumerate(self.levels):
            if Fraction(x) in lv:
                return i
        raise KeyError(x)

    def to_json(self) -> dict:
        return {
            "b": self.b,
            "d": self.d,
            "levels": [[format_rational(x) for x in lv] for lv in self.levels],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LacunarityCertificate":
        cert = cls(tuple(tuple(parse_rational(s) for s in lv) for lv in obj["levels"]), int(obj["b"]))
        if "d" in obj and int(obj["d"]) != cert.d:
            raise ValueError(f"d={obj['d']} disagrees with {len(cert.levels)} levels")
        return cert


@dataclass
class CertificateCheck:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _dist(x, pts) -> Fraction:
    return min(abs(x - p) for p in pts)


def _pair_ok(x, y, prefix, b, symmetric) -> tuple[bool, Fraction, Fraction, Fraction]:
    gap = abs(x - y)
    dx, dy = _dist(x, prefix), _dist(y, prefix)
    need = max(dx, dy) if symmetric else min(dx, dy)
    return gap * pow2(b) >= need, gap, dx, dy


def verify_certificate(cert: LacunarityCertificate, symmetric: bool = True) -> CertificateCheck:
    """Check a certificate exactly; violations name the level, pair and distances.

    ``symmetric=False`` accepts a pair when the condition holds for at least
    one ordering of it.
    """
    bad = []
    if cert.b < 0:
        bad.append(f"b={cert.b} is negative")
    if not cert.levels or len(cert.levels[0]) != 1:
        bad.append("level 0 must be a singleton")
    seen: set = set()
    for i, lv in enumerate(cert.levels):
        if len(set(lv)) != len(lv) or seen & set(lv):
            bad.append(f"level {i} repeats a point")
        seen |= set(lv)
    if bad:
        return CertificateCheck(False, bad)
    prefix = list(cert.levels[0])
    for i in range(1, len(cert.levels)):
        lv = cert.levels[i]
        for a in range(len(lv)):
            for c in range(a + 1, len(lv)):
                ok, gap, dx, dy = _pair_ok(lv[a], lv[c], prefix, cert.b, symmetric)
                if not ok:
                    bad.append(
                        f"level {i}: pair ({format_rational(lv[a])}, {format_rational(lv[c])}) "
                        f"distance {format_rational(gap)} < 2^-{cert.b} * "
                        f"{format_rational(max(dx, dy) if symmetric else min(dx, dy))}"
                    )
        prefix.extend(lv)
    return CertificateCheck(not bad, bad)


def decompose(cert: LacunarityCertificate, symmetric: bool = True) -> tuple[tuple[Fraction, ...], ...]:
    """Levels ``O_0..O_d`` of a valid certificate, each prefix union (i, b)-lacunary."""
    check = verify_certificate(cert, symmetric)
    if not check:
        raise ValueError("invalid certificate: " + "; ".join(check.violations))
    return cert.levels


@dataclass
class LacunarityResult:
    status: str  # "lacunary", "not_lacunary" or "undecided"
    certificate: LacunarityCertificate | None = None
    heuristic: bool = False
    explored: int = 0
    reason: str = ""

    def __bool__(self) -> bool:
        return self.status == "lacunary"


class _BudgetExceeded(Exception):
    pass


def _scaled_ints(points: Sequence[Fraction]) -> list[int]:
    den = lcm(*(p.denominator for p in points))
    lo = min(points)
    return [int((p - lo) * den) for p in points]


def _fits_int64(pts, b) -> bool:
    return max(_scaled_ints(pts)) < 2 ** (60 - b)


def _search_vectorized(pts: list[Fraction], d: int, b: int, symmetric: bool):
    """Bottom-up DP over all subsets; returns the level list or None."""
    n = len(pts)
    ints = np.array(_scaled_ints(pts), dtype=np.int64)
    INF = np.int64(1) << 62
    full = (1 << n) - 1
    dist = np.abs(ints[:, None] - ints[None, :])
    # dm[p, mask] = distance from point p to the subset mask
    dm = np.full((n, 1 << n), INF, dtype=np.int64)
    for t in range(n):
        lo = 1 << t
        dm[:, lo:2 * lo] = np.minimum(dm[:, :lo], dist[:, t:t + 1])
    L = np.zeros(1, dtype=np.int64)
    O = np.zeros(1, dtype=np.int64)
    for t in range(n):
        bit = np.int64(1 << t)
        L = np.concatenate((L, L | bit, L))
        O = np.concatenate((O, O, O | bit))
    keep = L != 0
    L, O = L[keep], O[keep]
    ok = np.ones(L.shape[0], dtype=bool)
    scale = np.int64(1) << b
    if symmetric:
        for p in range(n):
            bit = np.int64(1 << p)
            in_o = (O & bit) != 0
            toL = dm[p, L]
            nn = dm[p, O & ~bit]
            rhs = np.where(nn >= INF, INF, nn * scale)
            ok &= ~in_o | (toL <= rhs)
    else:
        for p in range(n):
            for q in range(p + 1, n):
                both = ((O >> p) & 1 & (O >> q) & 1).astype(bool)
                need = np.minimum(dm[p, L], dm[q, L])
                ok &= ~both | (dist[p, q] * scale >= need)
    union = L | O
    popcount = np.array([bin(m).count("1") for m in range(1 << n)])
    lac = popcount == 1
    witness = []
    for _ in range(d):
        valid = ok & lac[L]
        new = lac.copy()
        new[union[valid]] = True
        w = np.full(1 << n, -1, dtype=np.int64)
        w[union[valid]] = L[valid]
        witness.append((lac, w))
        lac = new
    if not lac[full]:
        return None
    levels: list[list[Fraction]] = []
    mask = full
    for t in range(d, 0, -1):
        prev, w = witness[t - 1]
        if prev[mask]:
            levels.append([])
            continue
        lo = int(w[mask])
        levels.append([pts[i] for i in range(n) if (mask ^ lo) >> i & 1])
        mask = lo
    levels.append([pts[i] for i in range(n) if mask >> i & 1])
    return levels[::-1]


def _search_dfs(pts: list[Fraction], d: int, b: int, symmetric: bool, budget: int):
    """Memoized top-down search over subsets; raises _BudgetExceeded."""
    n = len(pts)
    scale = pow2(b)
    dist = [[abs(x - y) for y in pts] for x in pts]
    memo: dict = {}
    counter = [0]

    def members(mask):
        return [i for i in range(n) if mask >> i & 1]

    def ok(Lm, Om):
        Li, Oi = members(Lm), members(Om)
        toL = {p: min(dist[p][q] for q in Li) for p in Oi}
        for a in range(len(Oi)):
            for c in range(a + 1, len(Oi)):
                p, q = Oi[a], Oi[c]
                need = max(toL[p], toL[q]) if symmetric else min(toL[p], toL[q])
                if dist[p][q] * scale < need:
                    return False
        return True

    def lac(mask, t):
        key = (mask, t)
        if key in memo:
            return memo[key]
        if bin(mask).count("1") == 1:
            memo[key] = [[pts[members(mask)[0]]]] + [[] for _ in range(t)]
            return memo[key]
        if t == 0:
            memo[key] = None
            return None
        below = lac(mask, t - 1)
        if below is not None:
            memo[key] = below + [[]]
            return memo[key]
        found = None
        sub = (mask - 1) & mask
        while sub:
            counter[0] += 1
            if counter[0] > budget:
                raise _BudgetExceeded
            if ok(sub, mask ^ sub):
                inner = lac(sub, t - 1)
                if inner is not None:
                    found = inner + [[pts[i] for i in members(mask ^ sub)]]
                    break
            sub = (sub - 1) & mask
        memo[key] = found
        return found

    return lac((1 << n) - 1, d), counter[0]


def _greedy(pts: list[Fraction], d: int, b: int, symmetric: bool):
    """Peel the most isolated points into the top level while the condition holds."""
    if len(pts) == 1:
        return [list(pts)] + [[] for _ in range(d)]
    if d == 0:
        return None
    L, O = list(pts), []

    def valid(Lc, Oc):
        for a in range(len(Oc)):
            for c in range(a + 1, len(Oc)):
                if not _pair_ok(Oc[a], Oc[c], Lc, b, symmetric)[0]:
                    return False
        return True

    moved = True
    while moved and len(L) > 1:
        moved = False
        order = sorted(L, key=lambda x: (-_dist(x, [y for y in L if y != x]), x))
        for x in order:
            Lc = [y for y in L if y != x]
            if valid(Lc, O + [x]):
                L, O = Lc, O + [x]
                moved = True
                break
    inner = _greedy(sorted(L), d - 1, b, symmetric)
    if inner is None:
        return None
    return inner + [sorted(O)]


def is_lacunary(
    points: Iterable,
    d: int,
    b: int,
    mode: str = "auto",
    budget: int = DEFAULT_BUDGET,
    symmetric: bool = True,
) -> LacunarityResult:
    """Search for a (d, b)-lacunarity certificate.

    ``mode="exhaustive"`` is complete: it returns ``not_lacunary`` only after
    ruling out every partition, and ``undecided`` when the set is larger than
    ``EXHAUSTIVE_LIMIT`` or the subset budget runs out. ``mode="heuristic"``
    runs a deterministic greedy peel and never answers ``not_lacunary``.
    ``mode="auto"`` tries exhaustive first and falls back to the heuristic.
    """
    pts = sorted({Fraction(p) for p in points})
    if not pts:
        raise ValueError("empty point set")
    if d < 0 or b < 0:
        raise ValueError("d and b must be non-negative")
    if mode not in {"auto", "exhaustive", "heuristic"}:
        raise ValueError(f"unknown mode {mode!r}")

    def wrap(levels, heuristic, explored=0):
        cert = LacunarityCertificate(tuple(tuple(lv) for lv in levels), b)
        assert verify_certificate(cert, symmetric), "search produced an invalid certificate"
        return LacunarityResult("lacunary", cert, heuristic, explored)

    result = None
    if mode in {"auto", "exhaustive"}:
        n = len(pts)
        if n == 1:
            return wrap([pts] + [[] for _ in range(d)], False)
        if n <= VECTORIZED_LIMIT and _fits_int64(pts, b):
            levels = _search_vectorized(pts, d, b, symmetric)
            result = wrap(levels, False, 3 ** n) if levels else LacunarityResult("not_lacunary", explored=3 ** n)
        elif n <= EXHAUSTIVE_LIMIT or n <= VECTORIZED_LIMIT:
            try:
                levels, explored = _search_dfs(pts, d, b, symmetric, budget)
                result = wrap(levels, False, explored) if levels else LacunarityResult("not_lacunary", explored=explored)
            except _BudgetExceeded:
                result = LacunarityResult("undecided", explored=budget, reason=f"subset budget {budget} exhausted")
        else:
            result = LacunarityResult("undecided", reason=f"|X|={n} exceeds exhaustive limit {EXHAUSTIVE_LIMIT}")
        if mode == "exhaustive" or result.status != "undecided":
            return result
    levels = _greedy(pts, d, b, symmetric)
    if levels is not None:
        return wrap(levels, True)
    reason = "greedy peel found no certificate"
    if result is not None:
        reason = result.reason + "; " + reason
    return LacunarityResult("undecided", heuristic=True, reason=reason)


# ---------------------------------------------------------------------------
# admissible sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibleSequences:
    """Truncated sequences ``xi_j, eta_j, zeta_j`` for ``j = 0..J-1``."""

    xi: tuple[Fraction, ...]
    eta: tuple[Fraction, ...]
    zeta: tuple[Fraction, ...]
    d: int
    b: int
    certificate: LacunarityCertificate | None = None
    beta: int | None = None
    seed: int | None = None

    @property
    def J(self) -> int:
        return len(self.xi)

    def eta_intervals(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.eta, self.zeta))

    def violations(self) -> list[str]:
        out = []
        if not len(self.xi) == len(self.eta) == len(self.zeta):
            return ["sequence lengths differ"]
        for j, (e, z) in enumerate(zip(self.eta, self.zeta)):
            if self.beta is not None:
                lo, hi = pow2(-j) * (1 + self.beta), pow2(-j) * (2 + self.beta)
                if not lo <= e <= z <= hi:
                    out.append(f"beta-refined eta/zeta out of [{lo}, {hi}] at j={j}")
                if e == z:
                    continue
            if not (pow2(-j) <= e <= z < pow2(2 - j)):
                out.append(f"eta spacing fails at j={j}: {e}, {z}")
        out.extend(spacing_violations(self.xi, 6))
        if self.certificate is not None:
            if set(self.certificate.points) != set(self.xi):
                out.append("certificate does not cover the xi image")
            out.extend(verify_certificate(self.certificate).violations)
        ivs = sorted((e, z) for e, z in self.eta_intervals() if e < z)
        for (a, c), (a2, _) in zip(ivs, ivs[1:]):
            if c > a2:
                out.append(f"eta intervals overlap near {a2}")
        return out

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "b": self.b,
            "beta": self.beta,
            "seed": self.seed,
            "xi": [format_rational(x) for x in self.xi],
            "eta": [format_rational(x) for x in self.eta],
            "zeta": [format_rational(x) for x in self.zeta],
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AdmissibleSequences":
        cert = obj.get("certificate")
        return cls(
            xi=tuple(parse_rational(x) for x in obj["xi"]),
            eta=tuple(parse_rational(x) for x in obj["eta"]),
            zeta=tuple(parse_rational(x) for x in obj["zeta"]),
            d=int(obj["d"]),
            b=int(obj["b"]),
            certificate=None if cert is None else LacunarityCertificate.from_json(cert),
            beta=obj.get("beta"),
            seed=obj.get("seed"),
        )

    def refine(self, beta: int) -> "AdmissibleSequences":
        """Intersect each ``[eta_j, zeta_j)`` with ``[(1+beta) 2^-j, (2+beta) 2^-j)``."""
        if beta not in (0, 1, 2, 3):
            raise ValueError("beta must be in {0, 1, 2, 3}")
        eta, zeta = [], []
        for j, (e, z) in enumerate(zip(self.eta, self.zeta)):
            lo, hi = pow2(-j) * (1 + beta), pow2(-j) * (2 + beta)
            a, c = max(e, lo), min(z, hi)
            if a >= c:
                a = c = lo
            eta.append(a)
            zeta.append(c)
        return replace(self, eta=tuple(eta), zeta=tuple(zeta), beta=beta)


def spacing_violations(xi: Sequence[Fraction], gap_exp: int = 6) -> list[str]:
    """Indices where ``0 <= xi_j + 2^(gap_exp - j) <= xi_{j-1}`` fails."""
    out = []
    if xi and xi[-1] < 0:
        out.append(f"xi_{len(xi) - 1} = {xi[-1]} is negative")
    for j in range(1, len(xi)):
        if not 0 <= xi[j] + pow2(gap_exp - j) <= xi[j - 1]:
            out.append(f"xi spacing fails at j={j}")
    return out


def round_xi(xi: Sequence) -> tuple[Fraction, ...]:
    """Round each ``xi_j`` down to a multiple of ``2^(4-j)``."""
    out = []
    for j, x in enumerate(xi):
        step = pow2(4 - j)
        out.append((Fraction(x) / step).__floor__() * step)
    return tuple(out)


def _extend(cert: LacunarityCertificate, x) -> LacunarityCertificate | None:
    # cheap path: drop the new point into an existing upper level
    for i in range(cert.d, 0, -1):
        levels = list(cert.levels)
        levels[i] = levels[i] + (x,)
        cand = LacunarityCertificate(tuple(levels), cert.b)
        if verify_certificate(cand):
            return cand
    return None


def _certify(points, d, b):
    pts = sorted(points)
    levels = _greedy(pts, d, b, True)
    if levels is None and len(pts) <= VECTORIZED_LIMIT and _fits_int64(pts, b):
        levels = _search_vectorized(pts, d, b, True)
    if levels is None:
        return None
    return LacunarityCertificate(tuple(tuple(lv) for lv in levels), b)


def generate_admissible(
    J: int,
    d: int,
    b: int,
    seed: int = 0,
    jump_prob: float = 0.25,
    max_jump: int | None = None,
) -> AdmissibleSequences:
    """Pseudorandom admissible sequences whose xi image is certified (d, b)-lacunary.

    The xi sequence is built from the bottom: gaps start at the minimum
    ``2^(6-j)`` times a random factor in ``[1, 7/4]``; with probability
    ``jump_prob`` a gap is instead stretched by ``2^e``, ``1 <= e <= max_jump``,
    which is what forces deeper lacunarity levels. A stretched gap that breaks
    the certificate is retried at the minimum.
    """
    if d < 2 or b < 2:
        raise ValueError("generate_admissible needs d, b >= 2")
    if J < 1:
        raise ValueError("J must be at least 1")
    max_jump = b + 2 if max_jump is None else max_jump
    rng = np.random.default_rng(seed)

    xi = [Fraction(int(rng.integers(0, 4))) * pow2(6 - J)]
    cert = LacunarityCertificate(((xi[0],),) + ((),) * d, b)
    for j in range(J - 1, 0, -1):
        base = pow2(6 - j)
        tries = []
        if rng.random() < jump_prob:
            tries.append(base * 2 ** int(rng.integers(1, max_jump + 1)))
        tries.append(base * (1 + Fraction(int(rng.integers(0, 4)), 4)))
        tries.append(base)
        for gap in tries:
            cand = xi[-1] + gap
            c = _extend(cert, cand) or _certify(xi + [cand], d, b)
            if c is not None:
                xi.append(cand)
                cert = c
                break
        else:
            raise ValueError(f"cannot extend to a ({d},{b})-lacunary sequence at index j={j - 1}")
    xi = xi[::-1]

    eta, zeta = [], []
    for j in range(J):
        lo = pow2(-j)
        step = pow2(-j - 2)
        if j == 0:
            hi, top = pow2(2), pow2(2) - step
        else:
            hi = min(pow2(2 - j), eta[-1])
            top = hi - step if hi == pow2(2 - j) else hi
        kmax = int((top - lo) / step)
        k1 = int(rng.integers(0, kmax))
        k2 = int(rng.integers(k1 + 1, kmax + 1))
        eta.append(lo + k1 * step)
        zeta.append(lo + k2 * step)

    seqs = AdmissibleSequences(tuple(xi), tuple(eta), tuple(zeta), d, b, cert, None, seed)
    bad = seqs.violations()
    if bad:  # pragma: no cover - construction guarantees these
        raise AssertionError("; ".join(bad))
    return seqs
