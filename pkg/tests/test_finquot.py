import itertools
import json
import random
from fractions import Fraction

import pytest

from oracles import (
    cycle_type,
    cyclic_plain,
    dihedral_plain,
    evaluate_plain,
    frobenius_commutator_s3,
    measure_plain,
    symmetric_plain,
    words_up_to,
)
from profree.errors import BudgetExceeded, InputError
from profree.finquot import (
    DISTINGUISHED,
    INDISTINGUISHABLE,
    FiniteGroup,
    Presentation,
    bprime_test,
    count_epis,
    count_extensions,
    count_homs,
    cyclic,
    dihedral,
    epi_table,
    make_group,
    measures_equal,
    parse_family,
    profinite_equiv_test,
    rigidity_experiment,
    subgroup_lattice,
    symmetric,
    word_measure,
)
from profree.wordcore import Word, is_primitive, random_automorphism, random_word


def P(text, rank=2):
    return Word.parse(text, rank)


def plain_index(G, plain):
    """Map a plain-oracle element to the library's element index."""
    if G.name.startswith("D"):
        n = G.order // 2
        return lambda x: x[0] + n * x[1]
    return lambda x: G.labels.index(x)


PLAIN = {"C2": cyclic_plain(2), "C3": cyclic_plain(3), "S3": symmetric_plain(3), "D4": dihedral_plain(4)}


# ---------------------------------------------------------------- groups


@pytest.mark.parametrize("spec, order, sizes", [("C3", 3, [1, 1, 1]), ("S3", 6, [1, 3, 2]), ("D4", 8, None)])
def test_make_group_examples(spec, order, sizes):
    G = make_group(spec)
    assert G.order == order
    if sizes is not None:
        assert [len(c) for c in G.conjugacy_classes] == sizes
    else:
        assert len(G.conjugacy_classes) == 5


def test_group_tables_match_plain_multiplication():
    for spec, plain in PLAIN.items():
        G = make_group(spec)
        idx = plain_index(G, plain)
        for x, y in itertools.product(plain.elements, repeat=2):
            assert G.mul(idx(x), idx(y)) == idx(plain.mul(x, y))


def test_conjugacy_classes_partition_and_are_closed():
    for spec in ["S4", "A4", "D5", "C2xC2", "C2xS3", "A5"]:
        G = make_group(spec)
        seen = sorted(g for c in G.conjugacy_classes for g in c)
        assert seen == list(range(G.order))
        for c in G.conjugacy_classes:
            for g, h in itertools.product(c[:3], range(G.order)):
                assert G.mul(G.mul(h, g), G.inv(h)) in c


def test_products_and_orders():
    assert make_group("C2xC2").order == 4
    assert make_group("C2xC3").order == 6
    assert make_group("A5").order == 60
    assert sorted(len(c) for c in make_group("S4").conjugacy_classes) == [1, 3, 6, 6, 8]


def test_table_file_round_trip(tmp_path):
    path = tmp_path / "k4.json"
    path.write_text(json.dumps(make_group("C2xC2").to_json()))
    G = make_group(f"@{path}")
    assert G.order == 4 and len(G.conjugacy_classes) == 4


def test_table_axiom_failure_rejected(tmp_path):
    bad = [[0, 1, 2], [1, 0, 2], [2, 2, 0]]
    with pytest.raises(InputError):
        FiniteGroup(bad)
    # a Latin square with identity that is not associative
    loop = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    with pytest.raises(InputError):
        FiniteGroup(loop)


@pytest.mark.parametrize("spec", ["Q8", "S7", "X", "C"])
def test_bad_specs(spec):
    with pytest.raises(InputError):
        make_group(spec)


# ---------------------------------------------------------------- measures


def test_measure_examples():
    S3 = symmetric(3)
    m = word_measure(P("a", 1), S3)
    assert m.counts == (1,) * 6 and m.denominator == 6
    m = word_measure(P("aa", 1), cyclic(3))
    assert m.counts == (1, 1, 1)


def test_commutator_measure_matches_frobenius_oracle():
    S3 = symmetric(3)
    m = word_measure(P("abAB"), S3)
    oracle = frobenius_commutator_s3()  # identity, transpositions, 3-cycles
    by_type = {(1, 1, 1): 0, (1, 2): 1, (3,): 2}
    for g in range(6):
        assert m.counts[g] == oracle[by_type[cycle_type(S3.labels[g])]]
    assert sorted(m.counts, reverse=True) == [18, 9, 9, 0, 0, 0]
    assert m.denominator == 36
    assert m.probability(S3.identity) == Fraction(1, 2)


def test_all_short_words_match_tuple_oracle():
    for spec in ["C2", "C3", "S3"]:
        G, plain = make_group(spec), PLAIN[spec]
        idx = plain_index(G, plain)
        for letters in words_up_to(2, 4):
            m = word_measure(Word(2, letters), G, arity=2)
            oracle = measure_plain(plain, letters, 2)
            assert m.counts == tuple(oracle.get(x, 0) for x in sorted(plain.elements, key=idx))


def test_measures_equal_examples():
    S3 = symmetric(3)
    assert measures_equal(P("a"), P("b"), S3)
    assert not measures_equal(P("a", 1), P("aa", 1), cyclic(2))
    assert measures_equal(P("abAB"), P("baBA"), S3)


def test_measure_budget():
    with pytest.raises(BudgetExceeded):
        word_measure(P("abc", 3), symmetric(4), budget=1000)


def test_measure_aut_invariance():
    rng = random.Random(2024)
    groups = [make_group("S3"), make_group("D4")]
    for _ in range(200):
        w = random_word(2, rng.randint(0, 8), rng)
        phi = random_automorphism(2, rng.randint(1, 6), rng)
        for G in groups:
            assert word_measure(phi(w), G, 2).counts == word_measure(w, G, 2).counts


def test_measure_is_class_function_and_sums():
    rng = random.Random(4)
    G = make_group("A4")
    for _ in range(30):
        m = word_measure(random_word(2, rng.randint(1, 8), rng), G, 2)
        assert m.is_class_function()
        assert sum(m.counts) == m.denominator == 144


def test_measure_json_is_exact_strings():
    data = word_measure(P("abAB"), symmetric(3)).to_json()
    assert data["denominator"] == "36"
    assert all(isinstance(v, str) for v in data["counts"].values())


# ---------------------------------------------------------------- equivalence


def test_equiv_examples():
    fam = parse_family("C2,C3,S3")
    rep = profinite_equiv_test(P("a", 1), P("A", 1), fam)
    assert rep.verdict == INDISTINGUISHABLE
    rep = profinite_equiv_test(P("a", 1), P("aa", 1), fam)
    assert (rep.verdict, rep.group) == (DISTINGUISHED, "C2")
    rep = profinite_equiv_test(P("aa", 1), P("aaa", 1), parse_family("C2"))
    assert (rep.verdict, rep.group) == (DISTINGUISHED, "C2")
    assert word_measure(P("aa", 1), cyclic(2)).counts == (2, 0)
    assert word_measure(P("aaa", 1), cyclic(2)).counts == (1, 1)


def test_equiv_partial_when_over_budget():
    rep = profinite_equiv_test(P("ab"), P("ba"), parse_family("C2,S4"), budget=100)
    assert rep.verdict == INDISTINGUISHABLE and rep.skipped == ("S4",) and rep.partial


# ---------------------------------------------------------------- Hom / Epi


def test_hom_examples():
    S3 = symmetric(3)
    assert count_homs(Presentation(2), S3) == 36
    assert count_homs(Presentation.parse(1, ["aa"]), S3) == 4
    assert count_homs(Presentation.parse(2, ["abAB"]), S3) == 18


@pytest.mark.parametrize("spec, n", [("C4", 3), ("S3", 6), ("C2xC2", 5), ("S4", 30), ("D4", 10), ("A4", 10)])
def test_subgroup_counts(spec, n):
    subs = subgroup_lattice(make_group(spec))
    assert len(subs) == n


def test_subgroups_are_closed():
    G = make_group("D6")
    for H in subgroup_lattice(G):
        assert G.identity in H
        assert all(G.mul(a, b) in H and G.inv(a) in H for a in H for b in H)


def test_lattice_cap():
    with pytest.raises(BudgetExceeded):
        subgroup_lattice(make_group("A5"))


def _direct_epi_count(P, M, N):
    """Tuples in N satisfying the relators and generating all of N."""
    elems = sorted(N)
    total = 0
    for t in itertools.product(elems, repeat=P.generators):
        if all(M.evaluate(r, t) == M.identity for r in P.relators) and M.generated(list(t)) == N:
            total += 1
    return total


def test_epi_examples():
    F2 = Presentation(2)
    assert count_epis(F2, cyclic(2)) == 3
    assert count_epis(Presentation.parse(1, ["aa"]), cyclic(3)) == 0
    # 36 pairs minus the 18 lying in a proper subgroup (trivial, three C2, A3)
    S3 = symmetric(3)
    assert count_epis(F2, S3) == 18 == _direct_epi_count(F2, S3, frozenset(range(6)))


PRESENTATIONS = [
    Presentation(1),
    Presentation.parse(1, ["aa"]),
    Presentation.parse(1, ["aaaaaa"]),
    Presentation(2),
    Presentation.parse(2, ["abAB"]),
    Presentation.parse(2, ["aa", "bb"]),
    Presentation.parse(2, ["aa", "bbb", "abab"]),
    Presentation.parse(2, ["abaB"]),
]
SMALL_GROUPS = ["C1", "C2", "C3", "C4", "C2xC2", "C5", "S3", "C6", "D4", "C2xC4", "D5", "A4", "D6", "C12", "C2xC6"]


@pytest.mark.parametrize("spec", SMALL_GROUPS)
def test_hom_epi_identity(spec):
    M = make_group(spec)
    for P in PRESENTATIONS:
        table = epi_table(P, M)
        for N, e in table.items():
            assert e == _direct_epi_count(P, M, N)
        assert sum(table.values()) == count_homs(P, M)


def test_extension_examples():
    S3 = symmetric(3)
    t = next(g for g in range(6) if cycle_type(S3.labels[g]) == (1, 2))
    c = next(g for g in range(6) if cycle_type(S3.labels[g]) == (3,))
    assert count_extensions(2, P("a"), S3, t) == 6
    assert count_extensions(2, P("abAB"), S3, c) == 9
    assert count_extensions(1, P("aa", 1), cyclic(2), 0) == 2


def test_extensions_sum_to_all_homs():
    rng = random.Random(9)
    for spec in ["S3", "D4", "C5"]:
        M = make_group(spec)
        for _ in range(5):
            a = random_word(2, rng.randint(0, 6), rng)
            assert sum(count_extensions(2, a, M, g) for g in range(M.order)) == M.order**2


def test_bprime_examples():
    fam = parse_family("C2,S3")
    for primes in ([], [2], [3], [2, 3]):
        assert not bprime_test(2, P("a"), primes, fam).deviations
    rep = bprime_test(2, P("abAB"), [2], [symmetric(3)])
    dev = [(d.count, d.expected) for d in rep.deviations if cycle_type(symmetric(3).labels[d.element]) == (3,)]
    assert dev == [(9, 6), (9, 6)]
    rep = bprime_test(1, P("aaa", 1), [3], [cyclic(2)])
    assert rep.checked == 2 and not rep.deviations


def test_bprime_primitive_words_never_deviate():
    fam = parse_family("C2,C3,S3,D4,A4")
    rng = random.Random(31)
    images = [random_automorphism(2, 4, rng)(P("a")) for _ in range(6)]
    for w in [P("a"), P("ab"), P("abA"), P("aab")] + images:
        assert is_primitive(w)
        assert not bprime_test(2, w, [2], fam).deviations
        assert not bprime_test(2, w, [], fam).deviations


# ---------------------------------------------------------------- rigidity


def test_rigidity_rank_one():
    rep = rigidity_experiment(1, 4, parse_family("C2,C3,C4,C5"))
    assert len(rep.orbits) == 4
    assert rep.sanity_ok and not rep.unseparated


def test_rigidity_rank_two_length_two():
    rep = rigidity_experiment(2, 2, parse_family("C2,C3,S3"))
    reps = {o["representative"]: o["size"] for o in rep.orbits}
    assert rep.sanity_ok
    # x1 and x1 x2 share the primitive orbit
    assert "a" in reps and "ab" not in reps


def test_rigidity_rank_two_length_four():
    rep = rigidity_experiment(2, 4, parse_family("S3"))
    assert rep.sanity_ok
    assert rep.separated_by["aa|abAB"] == "S3"
    S3 = symmetric(3)
    assert word_measure(P("aa"), S3).counts[S3.identity] == 24
    assert word_measure(P("abAB"), S3).counts[S3.identity] == 18
