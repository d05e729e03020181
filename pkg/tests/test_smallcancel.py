import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import symmetrized_plain, worst_piece_ratio
from profree.errors import InputError
from profree.finquot import cyclic, dihedral, symmetric
from profree.smallcancel import (
    check_metric,
    enumerate_pieces,
    find_exponents,
    order_certificates,
    power_presentation,
    symmetrize,
)
from profree.wordcore import FreeAutomorphism, Word, random_word

SIXTH = Fraction(1, 6)


def W(text, rank=2):
    return Word.parse(text, rank)


def test_symmetrize_examples():
    assert {r.text for r in symmetrize([W("aaaaaaa")]).relators} == {"aaaaaaa", "AAAAAAA"}
    assert len(symmetrize([W("abAB")]).relators) == 8
    assert len(symmetrize([W("ab") ** 7]).relators) == 4


def test_symmetrize_takes_cyclic_core():
    assert symmetrize([W("babAB")]).relators == symmetrize([W("b")]).relators
    with pytest.raises(InputError):
        symmetrize([W("")])


def test_pieces_examples():
    assert enumerate_pieces(symmetrize([W("aaaaaaa")])) == []
    assert {len(p.word) for p in enumerate_pieces(symmetrize([W("abAB")]))} == {1}
    genus2 = Word.parse("abABcdCD", 4)
    assert {len(p.word) for p in enumerate_pieces(symmetrize([genus2]))} == {1}


def test_piece_witnesses_are_maximal():
    rng = random.Random(2)
    for _ in range(100):
        R = symmetrize([random_word(2, rng.randint(2, 9), rng) or W("a")])
        for p in enumerate_pieces(R):
            r, s = p.witnesses
            n = len(p.word)
            assert r != s and r.letters[:n] == s.letters[:n] == p.word.letters
            assert len(r) == n or len(s) == n or r.letters[n] != s.letters[n]


def test_check_metric_examples():
    assert check_metric(symmetrize([W("aaaaaaa")]), SIXTH).passes
    rep = check_metric(symmetrize([W("abAB")]), SIXTH)
    assert not rep.passes and rep.worst[2] == Fraction(1, 4)
    assert rep.to_json()["worst"]["ratio"] == "1/4"
    rep = check_metric(symmetrize([Word.parse("abABcdCD", 4)]), SIXTH)
    assert rep.passes and rep.worst[2] == Fraction(1, 8)
    with pytest.raises(InputError):
        check_metric(symmetrize([W("a")]), Fraction(1))


def random_relators(rng, rank=2):
    out = []
    for _ in range(rng.randint(1, 3)):
        w = random_word(rank, rng.randint(1, 10), rng)
        if w:
            out.append(w)
    return out or [Word.generator(1, rank)]


def test_worst_ratio_matches_brute_force():
    rng = random.Random(3)
    for _ in range(300):
        rels = random_relators(rng, rng.choice([2, 3]))
        R = symmetrize(rels)
        assert {r.letters for r in R.relators} == symmetrized_plain([r.letters for r in rels])
        rep = check_metric(R, Fraction(1, 2))
        expected = worst_piece_ratio([r.letters for r in rels])
        assert (rep.worst[2] if rep.worst else Fraction(0)) == expected
        assert rep.passes == (expected < Fraction(1, 2))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.fractions(min_value=Fraction(1, 20), max_value=Fraction(19, 20)))
def test_monotone_in_lambda(seed, lam):
    rng = random.Random(seed)
    R = symmetrize(random_relators(rng))
    if check_metric(R, lam).passes:
        for bigger in (lam + (1 - lam) / 3, lam + (1 - lam) / 2):
            assert check_metric(R, bigger).passes


def test_signed_permutation_invariance():
    rng = random.Random(4)
    for _ in range(100):
        rels = random_relators(rng, 3)
        targets = [1, 2, 3]
        rng.shuffle(targets)
        phi = FreeAutomorphism.signed_permutation([t * rng.choice([1, -1]) for t in targets])
        A, B = symmetrize(rels), symmetrize([phi(r) for r in rels])

        def profile(R):
            return sorted((len(p.word), len(p.witnesses[0])) for p in enumerate_pieces(R))

        assert profile(A) == profile(B)
        wa, wb = check_metric(A, SIXTH).worst, check_metric(B, SIXTH).worst
        assert (wa and wa[2]) == (wb and wb[2])


def test_find_exponents_examples():
    assert find_exponents([W("a")], SIXTH) == 1
    assert find_exponents([W("ab")], SIXTH) == 1
    n = find_exponents([W("a"), W("b"), W("ab")], SIXTH)
    assert n == 7
    assert check_metric(power_presentation([W("a"), W("b"), W("ab")], n), SIXTH).passes
    assert not check_metric(power_presentation([W("a"), W("b"), W("ab")], n - 1), SIXTH).passes


def test_find_exponents_minimality_on_random_families():
    rng = random.Random(5)
    done = 0
    while done < 25:
        A = list({random_word(2, rng.randint(1, 4), rng) for _ in range(rng.randint(1, 3))})
        try:
            n = find_exponents(A, SIXTH, budget=64)
        except InputError:
            continue
        done += 1
        assert n is not None
        assert check_metric(power_presentation(A, n), SIXTH).passes
        for k in range(1, n):
            assert not check_metric(power_presentation(A, k), SIXTH).passes


def test_find_exponents_budget_and_errors():
    A = [W("a"), W("b"), W("ab")]
    assert find_exponents(A, SIXTH, budget=6) is None
    with pytest.raises(InputError):
        find_exponents([W("aa")], SIXTH)
    with pytest.raises(InputError):
        find_exponents([W("a"), W("baB")], SIXTH)
    with pytest.raises(InputError):
        find_exponents([W("a")], Fraction(0))


def test_order_certificates():
    A = [W("a"), W("b"), W("ab")]
    certs = order_certificates(A, 7, [cyclic(7), symmetric(3)])
    assert all(c.divides for c in certs)
    by = {(c.word.text, c.group): c for c in certs}
    assert by["a", "C7"].exact_order_found and by["ab", "C7"].exact_order_found
    assert not by["a", "S3"].exact_order_found
    assert by["a", "S3"].homs_checked == 1
    certs = order_certificates([W("a")], 4, [dihedral(4)])
    assert certs[0].exact_order_found and certs[0].divides
