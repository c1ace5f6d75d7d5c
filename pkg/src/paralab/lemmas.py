"""Exact verification of the interval lemmas for one admissible sequence.

Given admissible sequences, the xi values are rounded down to multiples of
``2^(4-j)``, the interval collections are built over the rounded set, and
three properties are checked without tolerance:

* ``Y_j`` and ``Z_j`` partition ``[0, xi_j)`` with lengths at least ``2^(4-j)``;
* the families ``I + [0, |I|/4)`` over ``Z`` and over each ``W^(i)`` overlap
  at most twice, and right neighbours inside ``W^(i)`` are at least a quarter
  as long;
* every ``J`` in ``V^(i)`` has exactly one level-``i`` point in ``7J``.

Rounding can shrink distances by a factor 2 and grow them by 3/2, so the
rounded set is certified with ``b + 2``, and ``V^(i)`` uses that value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .dyadic import (
    DyadicInterval,
    collect_Wi_Vi,
    collect_Yj_Zj,
    collect_Z,
    dilate,
    domain_for,
    overlap_count,
    pow2,
)
from .lacunary import (
    AdmissibleSequences,
    LacunarityCertificate,
    round_xi,
    spacing_violations,
    verify_certificate,
)

ROUNDING_B_SHIFT = 2
MAX_OVERLAP = 2


@dataclass
class LemmaReport:
    seed: int | None
    d: int
    b: int
    J: int
    counts: dict = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "d": self.d,
            "b": self.b,
            "J": self.J,
            "ok": self.ok,
            "counts": self.counts,
            "violations": self.violations,
        }


def _right_family(intervals):
    return [(I.left, I.right + I.length / 4) for I in intervals]


def check_partition(Yj, Zj, xi_j: Fraction, j: int) -> list[str]:
    bad = []
    floor = pow2(4 - j)
    members = sorted(list(Yj) + list(Zj), key=lambda I: I.left)
    short = [I for I in members if I.length < floor]
    if short:
        bad.append(f"j={j}: {short[0]} shorter than 2^{4 - j}")
    cursor = Fraction(0)
    for I in members:
        if I.left != cursor:
            kind = "gap" if I.left > cursor else "overlap"
            bad.append(f"j={j}: {kind} at {cursor} before {I}")
            break
        cursor = I.right
    if cursor != xi_j and not bad:
        bad.append(f"j={j}: cover ends at {cursor}, expected {xi_j}")
    total = sum((I.length for I in members), Fraction(0))
    if total != xi_j:
        bad.append(f"j={j}: total length {total} != {xi_j}")
    return bad


def check_right_neighbours(W) -> list[str]:
    bad = []
    ws = list(W)
    for I in ws:
        a, c = I.right, I.right + I.length / 4
        for J in ws:
            if J is I or J == I:
                continue
            if J.left < c and a < J.right and J.length < I.length / 4:
                bad.append(f"{W.label}: {J} meets the right quarter of {I} but is shorter")
    return bad


def check_unique_point(V, level_points) -> list[str]:
    bad = []
    pts = sorted(level_points)
    for J in V:
        a, c = dilate(J, 7)
        n = sum(1 for x in pts if a <= x < c)
        if n != 1:
            bad.append(f"{V.label}: 7J for J={J} holds {n} level points")
    return bad


def rounded_certificate(seqs: AdmissibleSequences) -> tuple[tuple[Fraction, ...], LacunarityCertificate]:
    """Rounded xi and the original certificate moved onto the rounded points."""
    if seqs.certificate is None:
        raise ValueError("sequences carry no lacunarity certificate")
    xr = round_xi(seqs.xi)
    where = {x: xr[j] for j, x in enumerate(seqs.xi)}
    levels = tuple(tuple(where[x] for x in lv) for lv in seqs.certificate.levels)
    return xr, LacunarityCertificate(levels, seqs.b + ROUNDING_B_SHIFT)


def verify_lemmas(seqs: AdmissibleSequences) -> LemmaReport:
    rep = LemmaReport(seqs.seed, seqs.d, seqs.b, seqs.J)
    bad = rep.violations
    bad.extend(seqs.violations())
    xr, cert = rounded_certificate(seqs)
    bad.extend("rounded " + v for v in spacing_violations(xr, 5))
    bad.extend("rounded certificate: " + v for v in verify_certificate(cert).violations)
    if len(set(xr)) != len(xr):
        bad.append("rounding merged two points")
        return rep

    X = set(xr)
    finest = 4 - (seqs.J - 1)
    domain = domain_for(X, upper=xr[0])
    Z = collect_Z(X, finest, domain)
    if not Z.pairwise_disjoint():
        bad.append("Z is not pairwise disjoint")
    ov = overlap_count(_right_family(Z))
    if ov > MAX_OVERLAP:
        bad.append(f"Z right-extended family overlaps {ov} times")

    Y_parts = []
    for j, x in enumerate(xr):
        Yj, Zj = collect_Yj_Zj(X, x, j, Z)
        Y_parts.append(Yj)
        bad.extend(check_partition(Yj, Zj, x, j))

    n_w = n_v = 0
    for i in range(len(cert.levels)):
        W, V = collect_Wi_Vi(cert.levels, i, cert.b, Y_parts, domain, finest)
        n_w += len(W)
        n_v += len(V)
        if not W.pairwise_disjoint():
            bad.append(f"{W.label} is not pairwise disjoint")
        bad.extend(check_right_neighbours(W))
        ov = overlap_count(_right_family(W))
        if ov > MAX_OVERLAP:
            bad.append(f"{W.label} right-extended family overlaps {ov} times")
        bad.extend(check_unique_point(V, cert.levels[i]))

    rep.counts = {
        "Z": len(Z),
        "Y": sum(len(y) for y in Y_parts),
        "W": n_w,
        "V": n_v,
        "domain": str(domain),
        "finest": finest,
    }
    return rep


__all__ = ["LemmaReport", "verify_lemmas", "rounded_certificate", "check_partition",
           "check_right_neighbours", "check_unique_point", "DyadicInterval"]
