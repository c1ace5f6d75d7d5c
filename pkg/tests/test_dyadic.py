from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from paralab.dyadic import (
    DyadicInterval,
    IntervalCollection,
    as_dyadic,
    collect_Wi_Vi,
    collect_Yj_Zj,
    collect_Z,
    dilate,
    domain_for,
    format_dyadic,
    overlap_count,
    parse_dyadic,
    triple,
)

intervals = st.builds(DyadicInterval, st.integers(-64, 64), st.integers(-6, 6))


def test_parse_and_format_round_trip():
    assert parse_dyadic("3/2^4") == Fraction(3, 16)
    assert parse_dyadic("-5/8") == Fraction(-5, 8)
    assert parse_dyadic("7") == 7
    assert format_dyadic(Fraction(3, 16)) == "3/2^4"
    for text in ("1/3", "abc", "1/2^", ""):
        with pytest.raises(ValueError):
            parse_dyadic(text)


def test_as_dyadic_rejects_non_dyadic():
    with pytest.raises(ValueError):
        as_dyadic(Fraction(1, 3))
    with pytest.raises(ValueError):
        as_dyadic(float("nan"))
    assert as_dyadic(0.375) == Fraction(3, 8)


def test_interval_basics():
    I = DyadicInterval(3, -2)
    assert (I.left, I.right, I.length) == (Fraction(3, 4), Fraction(1), Fraction(1, 4))
    assert Fraction(3, 4) in I and 1 not in I
    assert I.parent == DyadicInterval(1, -1)
    assert I.children() == (DyadicInterval(6, -3), DyadicInterval(7, -3))
    assert DyadicInterval.containing(Fraction(-1, 8), 0) == DyadicInterval(-1, 0)
    assert triple(DyadicInterval(0, 0)) == (-1, 2)
    assert str(I) == "[3/2^2, 1)"


@given(intervals, intervals)
def test_dyadic_intervals_are_nested_or_disjoint(I, J):
    rel = I.relation(J)
    overlap = max(I.left, J.left) < min(I.right, J.right)
    assert (rel == "disjoint") == (not overlap)
    if rel == "inside":
        assert J.left <= I.left and I.right <= J.right
    assert I.intersects(J) == overlap


@given(intervals, st.integers(1, 9))
def test_dilate_is_concentric(I, factor):
    a, b = dilate(I, factor)
    assert (a + b) / 2 == I.center
    assert b - a == factor * I.length


@given(intervals)
def test_children_partition_parent(I):
    a, b = I.children()
    assert a.left == I.left and a.right == b.left and b.right == I.right
    assert a.parent == I == b.parent


def test_collection_label_and_json():
    c = IntervalCollection("W_3", (DyadicInterval(2, 0), DyadicInterval(0, 0)))
    assert [I.k for I in c] == [0, 2]
    assert IntervalCollection.from_json(c.to_json()) == c
    assert c.pairwise_disjoint()
    with pytest.raises(ValueError):
        IntervalCollection("Q", ())


def test_domain_for():
    assert domain_for([Fraction(3), Fraction(1, 2)]) == DyadicInterval(0, 2)
    assert domain_for([Fraction(1, 8)], upper=5) == DyadicInterval(0, 3)
    with pytest.raises(ValueError):
        domain_for([])


def _brute_Z(points, finest, domain):
    """Maximal intervals by scanning every scale bottom-up."""
    pts = sorted(points)

    def free(I):
        a, b = triple(I)
        return not any(a <= x < b for x in pts)

    out = []
    for m in range(finest, domain.m + 1):
        size = 2 ** (domain.m - m)
        for k in range(size):
            I = DyadicInterval(domain.k * size + k, m)
            if free(I) and (m == domain.m or not free(I.parent)):
                out.append(I)
    return sorted(out)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 63), min_size=1, max_size=6, unique=True), st.integers(-3, 1))
def test_collect_Z_matches_bottom_up_scan(ks, finest):
    points = [Fraction(k, 4) for k in ks]
    domain = DyadicInterval(0, 4)
    Z = collect_Z(points, finest, domain)
    assert sorted(Z.intervals) == _brute_Z(points, finest, domain)
    assert Z.pairwise_disjoint()


def test_Yj_Zj_partition_small_case():
    X = [Fraction(5), Fraction(40)]
    domain = DyadicInterval(0, 6)
    Z = collect_Z(X, -2, domain)
    Y, Zj = collect_Yj_Zj(X, Fraction(48), 1, Z)
    members = sorted(list(Y) + list(Zj), key=lambda I: I.left)
    assert members[0].left == 0 and members[-1].right == 48
    assert all(a.right == b.left for a, b in zip(members, members[1:]))
    with pytest.raises(ValueError):
        collect_Yj_Zj(X, Fraction(47), 1, Z)


def test_Wi_Vi_shapes():
    levels = [[Fraction(0)], [Fraction(16), Fraction(48)]]
    domain = DyadicInterval(0, 6)
    Z = collect_Z([0, 16, 48], 0, domain)
    Y, _ = collect_Yj_Zj([0, 16, 48], Fraction(64), 0, Z)
    W, V = collect_Wi_Vi(levels, 1, 0, [Y], domain, 0)
    assert W.label == "W_1" and V.label == "V_1"
    assert W.pairwise_disjoint()
    with pytest.raises(ValueError):
        collect_Wi_Vi(levels, 2, 0, [Y], domain, 0)


def _overlap_oracle(ivs):
    pts = sorted({a for a, _ in ivs} | {b for _, b in ivs})
    return max((sum(1 for a, b in ivs if a <= x < b) for x in pts), default=0)


@given(st.lists(st.tuples(st.integers(0, 30), st.integers(1, 8)), max_size=12))
def test_overlap_count_matches_point_scan(raw):
    ivs = [(Fraction(a), Fraction(a + w)) for a, w in raw]
    assert overlap_count(ivs) == _overlap_oracle(ivs)


def test_overlap_touching_intervals_do_not_overlap():
    assert overlap_count([(0, 1), (1, 2)]) == 1
