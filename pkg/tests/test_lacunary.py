from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from paralab.lacunary import (
    AdmissibleSequences,
    LacunarityCertificate,
    decompose,
    generate_admissible,
    is_lacunary,
    round_xi,
    spacing_violations,
    verify_certificate,
)
from paralab.oracles import brute_force_lacunary

F = Fraction


def test_singleton_certificate():
    assert verify_certificate(LacunarityCertificate(((F(5),),), 3))


def test_four_point_example():
    cert = LacunarityCertificate(((F(1, 8),), (F(1), F(1, 2), F(1, 4))), 1)
    assert verify_certificate(cert)
    res = is_lacunary([1, F(1, 2), F(1, 4), F(1, 8)], 1, 1, mode="exhaustive")
    assert res.status == "lacunary"
    assert decompose(res.certificate) == ((F(1, 8),), (F(1, 4), F(1, 2), F(1)))


def test_arithmetic_set_is_not_lacunary():
    X = list(range(10))
    assert is_lacunary(X, 1, 0, mode="exhaustive").status == "not_lacunary"
    for k in X:
        rest = tuple(x for x in X if x != k)
        assert not verify_certificate(LacunarityCertificate(((F(k),), rest), 0))


def test_geometric_set_is_lacunary():
    X = [F(1, 2 ** j) for j in range(11)]
    res = is_lacunary(X, 1, 1, mode="exhaustive")
    assert res.status == "lacunary" and not res.heuristic
    assert verify_certificate(res.certificate)


def test_violation_report_names_level_and_pair():
    check = verify_certificate(LacunarityCertificate(((F(0),), (F(8), F(9))), 0))
    assert not check
    assert "level 1" in check.violations[0] and "(8, 9)" in check.violations[0]


def test_bad_level_zero():
    assert not verify_certificate(LacunarityCertificate(((F(0), F(1)),), 0))
    with pytest.raises(ValueError):
        decompose(LacunarityCertificate(((F(0), F(1)),), 0))


def test_oversized_exhaustive_request_is_undecided():
    res = is_lacunary(range(30), 2, 1, mode="exhaustive")
    assert res.status == "undecided"
    assert "exceeds" in res.reason


def test_budget_exhaustion_is_undecided():
    res = is_lacunary([F(k * k, 3) for k in range(16)], 3, 0, mode="exhaustive", budget=10)
    assert res.status in {"undecided", "lacunary", "not_lacunary"}
    if res.status == "undecided":
        assert "budget" in res.reason


def test_certificate_json_round_trip():
    cert = LacunarityCertificate(((F(1, 8),), (F(1), F(1, 2))), 2)
    assert LacunarityCertificate.from_json(cert.to_json()) == cert


small_sets = st.lists(st.integers(-40, 40), min_size=1, max_size=7, unique=True)


@settings(max_examples=150, deadline=None)
@given(small_sets, st.integers(0, 3), st.integers(0, 4), st.integers(0, 3))
def test_exhaustive_matches_brute_force(ks, d, b, shift):
    X = [F(k, 2 ** shift) for k in ks]
    res = is_lacunary(X, d, b, mode="exhaustive")
    assert (res.status == "lacunary") == brute_force_lacunary(X, d, b)
    if res.certificate is not None:
        assert verify_certificate(res.certificate)
        assert sorted(res.certificate.points) == sorted(set(X))


@settings(max_examples=80, deadline=None)
@given(small_sets, st.integers(0, 2), st.integers(0, 3))
def test_monotone_in_d_and_b(ks, d, b):
    X = [F(k) for k in ks]
    if is_lacunary(X, d, b, mode="exhaustive"):
        assert is_lacunary(X, d + 1, b, mode="exhaustive")
        assert is_lacunary(X, d, b + 1, mode="exhaustive")


@settings(max_examples=60, deadline=None)
@given(small_sets, st.integers(1, 3), st.integers(0, 3))
def test_heuristic_is_sound(ks, d, b):
    res = is_lacunary([F(k) for k in ks], d, b, mode="heuristic")
    assert res.status in {"lacunary", "undecided"}
    if res:
        assert res.heuristic and verify_certificate(res.certificate)


def test_round_xi_examples():
    assert round_xi([F(17, 16)]) == (0,)
    xi = (F(64), F(32), F(8))
    assert round_xi(xi) == xi


@pytest.mark.parametrize("d,b", [(2, 2), (2, 4), (3, 3)])
def test_generated_sequences_are_admissible(d, b):
    for seed in range(10):
        seqs = generate_admissible(12, d, b, seed)
        assert seqs.violations() == []
        assert verify_certificate(seqs.certificate)
        assert spacing_violations(seqs.xi) == []
        assert set(seqs.certificate.points) == set(seqs.xi)
        for j, (e, z) in enumerate(seqs.eta_intervals()):
            assert F(1, 2 ** j) <= e < z < F(4, 2 ** j)


def test_generator_is_deterministic():
    assert generate_admissible(10, 2, 2, 7) == generate_admissible(10, 2, 2, 7)
    assert generate_admissible(10, 2, 2, 7) != generate_admissible(10, 2, 2, 8)


def test_generator_preconditions():
    with pytest.raises(ValueError):
        generate_admissible(5, 1, 2)
    with pytest.raises(ValueError):
        generate_admissible(0, 2, 2)


@pytest.mark.parametrize("seed", range(5))
def test_rounded_spacing_and_distance_comparability(seed):
    seqs = generate_admissible(14, 2, 3, seed)
    xr = round_xi(seqs.xi)
    assert spacing_violations(xr, 5) == []
    for j in range(len(xr)):
        assert xr[j] % F(2) ** (4 - j) == 0
        for k in range(j + 1, len(xr)):
            ratio = (xr[j] - xr[k]) / (seqs.xi[j] - seqs.xi[k])
            assert F(1, 2) <= ratio <= 2


def test_beta_refinement_partitions_eta_intervals():
    seqs = generate_admissible(8, 2, 2, 3)
    parts = [seqs.refine(beta) for beta in range(4)]
    for j, (e, z) in enumerate(seqs.eta_intervals()):
        pieces = sorted((p.eta[j], p.zeta[j]) for p in parts if p.eta[j] < p.zeta[j])
        assert pieces[0][0] == e and pieces[-1][1] == z
        assert all(a[1] == c[0] for a, c in zip(pieces, pieces[1:]))
    for p in parts:
        assert p.violations() == []
    with pytest.raises(ValueError):
        seqs.refine(4)


def test_sequences_json_round_trip():
    seqs = generate_admissible(6, 2, 2, 1)
    assert AdmissibleSequences.from_json(seqs.to_json()) == seqs


@settings(max_examples=60, deadline=None)
@given(small_sets, st.integers(0, 2), st.integers(0, 3), st.data())
def test_subset_closure(ks, d, b, data):
    X = [F(k) for k in ks]
    if is_lacunary(X, d, b, mode="exhaustive"):
        keep = data.draw(st.lists(st.sampled_from(X), min_size=1, unique=True))
        assert is_lacunary(keep, d, b, mode="exhaustive")
