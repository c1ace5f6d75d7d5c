from fractions import Fraction

import pytest

from paralab.dyadic import DyadicInterval, IntervalCollection
from paralab.lacunary import generate_admissible, verify_certificate
from paralab.lemmas import (
    check_partition,
    check_right_neighbours,
    check_unique_point,
    rounded_certificate,
    verify_lemmas,
)


@pytest.mark.parametrize("d,b", [(2, 2), (2, 4), (3, 3), (3, 4)])
def test_lemmas_hold_on_generated_sequences(d, b):
    for seed in range(4):
        rep = verify_lemmas(generate_admissible(20, d, b, seed))
        assert rep.ok, rep.violations[:3]
        assert rep.counts["Z"] > 0 and rep.counts["W"] > 0


@pytest.mark.parametrize("seed", range(15))
def test_rounded_certificate_verifies_with_shift(seed):
    xr, cert = rounded_certificate(generate_admissible(16, 2, 2, seed))
    assert verify_certificate(cert)
    assert cert.b == 4
    assert sorted(cert.points) == sorted(xr)


def test_report_json():
    rep = verify_lemmas(generate_admissible(8, 2, 2, 0))
    out = rep.to_json()
    assert out["ok"] and out["J"] == 8 and out["violations"] == []


def test_partition_checker_flags_gap_and_short_interval():
    Y = IntervalCollection("Y_0", (DyadicInterval(0, 4),))
    Z = IntervalCollection("Z_0", (DyadicInterval(2, 4),))
    bad = check_partition(Y, Z, Fraction(48), 0)
    assert any("gap" in v for v in bad)
    Z = IntervalCollection("Z_0", (DyadicInterval(2, 3), DyadicInterval(3, 3)))
    assert any("shorter" in v for v in check_partition(Y, Z, Fraction(32), 0))
    Z = IntervalCollection("Z_0", (DyadicInterval(1, 4),))
    assert check_partition(Y, Z, Fraction(32), 0) == []


def test_right_neighbour_checker():
    W = IntervalCollection("W_1", (DyadicInterval(0, 3), DyadicInterval(8, 0)))
    assert check_right_neighbours(W)
    W = IntervalCollection("W_1", (DyadicInterval(0, 3), DyadicInterval(2, 2)))
    assert check_right_neighbours(W) == []


def test_unique_point_checker():
    V = IntervalCollection("V_0", (DyadicInterval(0, 0),))
    assert check_unique_point(V, [Fraction(1, 2)]) == []
    assert check_unique_point(V, [Fraction(1, 2), Fraction(2)])
    assert check_unique_point(V, [Fraction(10)])
