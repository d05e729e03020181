"""Symmetrized presentations, pieces and the metric condition C'(lambda)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .finquot import DEFAULT_TUPLE_BUDGET, FiniteGroup, Presentation, _eval_word, _tuple_chunks
from .wordcore import Word, _cyclic_core, _inv, is_malnormal_family, root

DEFAULT_EXPONENT_BUDGET = 512


@dataclass(frozen=True)
class SymmetrizedPresentation:
    rank: int
    relators: tuple[Word, ...]

    def to_json(self) -> dict:
        return {"rank": self.rank, "relators": [r.text for r in self.relators]}


@dataclass(frozen=True)
class Piece:
    word: Word
    witnesses: tuple[Word, Word]


def _rotations(letters: tuple[int, ...]) -> set[tuple[int, ...]]:
    return {letters[i:] + letters[:i] for i in range(len(letters))}


def symmetrize(relators: Sequence[Word]) -> SymmetrizedPresentation:
    """Close the cyclic cores of the relators under rotation and inversion.

    >>> len(symmetrize([Word.parse("abAB")]).relators)
    8
    """
    if not relators:
        raise InputError("symmetrize needs at least one relator")
    rank = relators[0].rank
    out: set[tuple[int, ...]] = set()
    for r in relators:
        if r.rank != rank:
            raise InputError("relators must share a rank")
        if not r:
            raise InputError("trivial relator")
        start, stop = _cyclic_core(r.letters)
        core = r.letters[start:stop]
        out |= _rotations(core) | _rotations(_inv(core))
    ordered = sorted(out, key=lambda s: (len(s), s))
    return SymmetrizedPresentation(rank, tuple(Word._trusted(rank, s) for s in ordered))


def _common_prefix(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def _piece_table(R: SymmetrizedPresentation) -> dict[tuple[int, ...], tuple[Word, Word]]:
    # only relators with the same first letter can share a prefix
    by_first: dict[int, list[Word]] = {}
    for r in R.relators:
        by_first.setdefault(r.letters[0], []).append(r)
    table: dict[tuple[int, ...], tuple[Word, Word]] = {}
    for group in by_first.values():
        for i, r in enumerate(group):
            for s in group[i + 1 :]:
                n = _common_prefix(r.letters, s.letters)
                if n:
                    table.setdefault(r.letters[:n], (r, s))
    return table


def enumerate_pieces(R: SymmetrizedPresentation) -> list[Piece]:
    table = _piece_table(R)
    return [Piece(Word._trusted(R.rank, p), table[p]) for p in sorted(table, key=lambda s: (len(s), s))]


@dataclass(frozen=True)
class MetricReport:
    passes: bool
    worst: Optional[tuple[Word, Word, Fraction]] = None

    def to_json(self) -> dict:
        if self.worst is None:
            return {"passes": self.passes, "worst": None}
        piece, rel, ratio = self.worst
        return {
            "passes": self.passes,
            "worst": {"piece": piece.text, "relator": rel.text, "ratio": f"{ratio.numerator}/{ratio.denominator}"},
        }


def _check_lambda(lam: Fraction) -> Fraction:
    lam = Fraction(lam)
    if not 0 < lam < 1:
        raise InputError(f"lambda must lie strictly between 0 and 1, got {lam}")
    return lam


def check_metric(R: SymmetrizedPresentation, lam: Fraction) -> MetricReport:
    """Every piece u inside a relator r must satisfy |u| < lam |r|.

    Since R is closed under rotation, a piece occurring anywhere in r occurs
    as a prefix of some rotation of r, so it is enough to look at pieces
    that are prefixes of relators.
    """
    lam = _check_lambda(lam)
    worst = None
    for r in R.relators:
        for n in range(len(r), 0, -1):
            if r.letters[:n] in _pieces_of(R):
                ratio = Fraction(n, len(r))
                if worst is None or ratio > worst[2]:
                    worst = (Word._trusted(R.rank, r.letters[:n]), r, ratio)
                break
    return MetricReport(worst is None or worst[2] < lam, worst)


_PIECE_CACHE: dict = {}


def _pieces_of(R: SymmetrizedPresentation) -> frozenset:
    key = (R.rank, R.relators)
    found = _PIECE_CACHE.get(key)
    if found is None:
        if len(_PIECE_CACHE) > 256:
            _PIECE_CACHE.clear()
        # every prefix of a piece is a common prefix of the same pair
        found = frozenset(p[:i] for p in _piece_table(R) for i in range(1, len(p) + 1))
        _PIECE_CACHE[key] = found
    return found


def power_presentation(A: Sequence[Word], n: int) -> SymmetrizedPresentation:
    return symmetrize([a**n for a in A])


def _check_family(A: Sequence[Word]) -> None:
    if not A:
        raise InputError("the family must be non-empty")
    for a in A:
        if not a:
            raise InputError("trivial word in the family")
        if root(a)[1] > 1:
            raise InputError(f"{a} is a proper power")
    report = is_malnormal_family(A)
    if not report.is_malnormal:
        raise InputError(f"family is not malnormal: {report.to_json()['violations']}")


def find_exponents(A: Sequence[Word], lam: Fraction, budget: int = DEFAULT_EXPONENT_BUDGET) -> Optional[int]:
    """Least uniform n <= budget such that {a^n} satisfies C'(lam)."""
    lam = _check_lambda(lam)
    _check_family(A)
    for n in range(1, budget + 1):
        if check_metric(power_presentation(A, n), lam).passes:
            return n
    return None


@dataclass(frozen=True)
class OrderCertificate:
    word: Word
    n: int
    group: str
    homs_checked: int
    divides: bool
    exact_order_found: bool

    def to_json(self) -> dict:
        return {
            "word": self.word.text,
            "n": self.n,
            "group": self.group,
            "homs_checked": self.homs_checked,
            "order_divides_n": self.divides,
            "order_n_realized": self.exact_order_found,
        }


def order_certificates(
    A: Sequence[Word], n: int, family: Sequence[FiniteGroup], budget: int = DEFAULT_TUPLE_BUDGET
) -> list[OrderCertificate]:
    """For each a and each group M, scan the homomorphisms of <X | a^n>
    into M: the image of a always has order dividing n, and we record
    whether order exactly n is attained."""
    rank = A[0].rank
    P = Presentation(rank, tuple(a**n for a in A))
    out = []
    for M in family:
        orders = [M.element_order(g) for g in range(M.order)]
        hits = {a: [0, True, False] for a in A}
        for digits in _tuple_chunks(M, rank, None, budget):
            ok = np.ones(len(digits[0]), dtype=bool)
            for rel in P.relators:
                ok &= _eval_word(M, rel, digits) == M.identity
            for a in A:
                vals = np.unique(_eval_word(M, a, digits)[ok])
                rec = hits[a]
                rec[0] += int(ok.sum())
                ords = {orders[int(g)] for g in vals}
                rec[1] = rec[1] and all(n % o == 0 for o in ords)
                rec[2] = rec[2] or n in ords
        for a in A:
            c, div, exact = hits[a]
            out.append(OrderCertificate(a, n, M.name, c, div, exact))
    return out
