"""Finite groups as Cayley tables: word measures, Hom/Epi counting, and
profinite-equivalence experiments.

Tuple enumeration is vectorised with numpy and processed in chunks, so the
budget (default 10^8 tuples) bounds time rather than memory.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, InputError
from .wordcore import Word, all_words, orbit_key

DEFAULT_TUPLE_BUDGET = 10**8
DEFAULT_LATTICE_CAP = 48
_CHUNK = 1 << 18


class FiniteGroup:
    """A finite group given by its multiplication table.

    ``table[g, h]`` is the index of g*h.  Group axioms are verified on
    construction unless ``check=False`` (used only by the built-in
    constructors, whose tables are correct by construction).
    """

    def __init__(self, table, name: str = "G", labels: Optional[Sequence] = None, check: bool = True):
        table = np.asarray(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise InputError("Cayley table must be a non-empty square array")
        n = table.shape[0]
        if table.min() < 0 or table.max() >= n:
            raise InputError("Cayley table entries out of range")
        self.order = n
        self.name = name
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        ident = [g for g in range(n) if np.array_equal(table[g], np.arange(n))]
        if not ident or not np.array_equal(table[:, ident[0]], np.arange(n)):
            raise InputError(f"{name}: no two-sided identity")
        self.identity = ident[0]
        if check:
            _check_axioms(table, name)
        inverse = np.argmax(table == self.identity, axis=1)
        if not np.all(table[np.arange(n), inverse] == self.identity):
            raise InputError(f"{name}: missing inverses")
        table.setflags(write=False)
        inverse.setflags(write=False)
        self.table = table
        self.inverse = inverse

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"

    def __len__(self) -> int:
        return self.order

    def mul(self, g: int, h: int) -> int:
        return int(self.table[g, h])

    def inv(self, g: int) -> int:
        return int(self.inverse[g])

    def label(self, g: int) -> str:
        lab = self.labels[g]
        return lab if isinstance(lab, str) else str(lab)

    @cached_property
    def conjugacy_classes(self) -> tuple[tuple[int, ...], ...]:
        n = self.order
        xs = np.arange(n)
        seen = np.zeros(n, dtype=bool)
        classes = []
        for g in range(n):
            if seen[g]:
                continue
            orbit = np.unique(self.table[self.table[xs, g], self.inverse[xs]])
            seen[orbit] = True
            classes.append(tuple(int(x) for x in orbit))
        return tuple(classes)

    @cached_property
    def class_index(self) -> tuple[int, ...]:
        idx = [0] * self.order
        for c, cls in enumerate(self.conjugacy_classes):
            for g in cls:
                idx[g] = c
        return tuple(idx)

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != self.identity:
            x = int(self.table[x, g])
            k += 1
        return k

    def evaluate(self, w: Word, images: Sequence[int]) -> int:
        """Image of w under the homomorphism x_i -> images[i-1]."""
        x = self.identity
        for letter in w.letters:
            if abs(letter) > len(images):
                raise InputError(f"no image given for generator {abs(letter)}")
            g = images[abs(letter) - 1]
            x = int(self.table[x, g if letter > 0 else self.inverse[g]])
        return x

    def generated(self, gens: Sequence[int]) -> frozenset:
        """The subgroup generated by ``gens``."""
        elems = {self.identity}
        frontier = [self.identity]
        gens = list(dict.fromkeys(int(g) for g in gens))
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = int(self.table[x, g])
                    if y not in elems:
                        elems.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(elems)

    def to_json(self) -> dict:
        return {"order": self.order, "table": self.table.tolist()}


def _check_axioms(table: np.ndarray, name: str) -> None:
    n = table.shape[0]
    full = np.arange(n)
    for row in table:
        if not np.array_equal(np.sort(row), full):
            raise InputError(f"{name}: table rows are not permutations")
    for col in table.T:
        if not np.array_equal(np.sort(col), full):
            raise InputError(f"{name}: table columns are not permutations")
    # (ab)c == a(bc), one value of a at a time to bound memory
    for a in range(n):
        left = table[table[a]]  # [b, c] -> (ab)c
        right = table[a][table]  # [b, c] -> a(bc)
        if not np.array_equal(left, right):
            raise InputError(f"{name}: multiplication is not associative")


# ---------------------------------------------------------------- constructors


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise InputError("cyclic group order must be positive")
    idx = np.arange(n)
    return FiniteGroup((idx[:, None] + idx[None, :]) % n, f"C{n}", check=False)


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the n-gon, order 2n; element r^k s^e has index k + n*e."""
    if n < 1:
        raise InputError("dihedral parameter must be positive")
    elems = [(k, e) for e in (0, 1) for k in range(n)]
    index = {el: i for i, el in enumerate(elems)}
    table = [
        [index[((k1 + (k2 if e1 == 0 else -k2)) % n, (e1 + e2) % 2)] for (k2, e2) in elems]
        for (k1, e1) in elems
    ]
    labels = [f"r{k}" + ("s" if e else "") for k, e in elems]
    return FiniteGroup(table, f"D{n}", labels, check=False)


def _perm_group(perms: list[tuple[int, ...]], name: str) -> FiniteGroup:
    index = {p: i for i, p in enumerate(perms)}
    # (g*h)(i) = g(h(i)): apply h first
    table = [[index[tuple(g[h[i]] for i in range(len(g)))] for h in perms] for g in perms]
    return FiniteGroup(table, name, perms, check=False)


def _parity(p: tuple[int, ...]) -> int:
    return sum(1 for i, j in itertools.combinations(range(len(p)), 2) if p[i] > p[j]) % 2


def symmetric(n: int) -> FiniteGroup:
    if not 1 <= n <= 6:
        raise InputError("symmetric groups are built for 1 <= n <= 6")
    return _perm_group(list(itertools.permutations(range(n))), f"S{n}")


def alternating(n: int) -> FiniteGroup:
    if not 1 <= n <= 6:
        raise InputError("alternating groups are built for 1 <= n <= 6")
    perms = [p for p in itertools.permutations(range(n)) if _parity(p) == 0]
    return _perm_group(perms, f"A{n}")


def direct_product(*groups: FiniteGroup) -> FiniteGroup:
    if not groups:
        raise InputError("direct product of no groups")
    out = groups[0]
    for h in groups[1:]:
        n, m = out.order, h.order
        table = (out.table[:, None, :, None] * m + h.table[None, :, None, :]).reshape(n * m, n * m)
        labels = [(a, b) for a in out.labels for b in h.labels]
        out = FiniteGroup(table, f"{out.name}x{h.name}", labels, check=False)
    return out


def load_table(path) -> FiniteGroup:
    data = json.loads(Path(path).read_text())
    return group_from_json(data, name=Path(path).stem)


def group_from_json(data: dict, name: str = "table") -> FiniteGroup:
    try:
        order = int(data["order"])
        table = data["table"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad Cayley table document: {exc}") from None
    if len(table) != order or any(len(row) != order for row in table):
        raise InputError("Cayley table shape does not match the declared order")
    return FiniteGroup(table, data.get("name", name))


def make_group(spec: str) -> FiniteGroup:
    """Build a group from a spec such as ``C3``, ``D4``, ``S3``, ``A4``,
    ``C2xC2`` or ``@table.json``.

    >>> make_group("S3").order, len(make_group("D4").conjugacy_classes)
    (6, 5)
    """
    spec = spec.strip()
    if spec.startswith("@"):
        return load_table(spec[1:])
    parts = spec.split("x")
    if len(parts) > 1:
        return direct_product(*(make_group(p) for p in parts))
    kind, num = spec[:1].upper(), spec[1:]
    if not num.isdigit():
        raise InputError(f"unknown group spec {spec!r}")
    n = int(num)
    builders = {"C": cyclic, "Z": cyclic, "D": dihedral, "S": symmetric, "A": alternating}
    if kind not in builders:
        raise InputError(f"unknown group spec {spec!r}")
    return builders[kind](n)


def parse_family(spec: str) -> list[FiniteGroup]:
    return [make_group(s) for s in spec.split(",") if s.strip()]


# ---------------------------------------------------------------- enumeration engine


def _arity_of(words: Sequence[Word], arity: Optional[int]) -> int:
    need = max((abs(x) for w in words for x in w.letters), default=0)
    if arity is None:
        arity = max(w.rank for w in words)
    if need > arity:
        raise InputError(f"word uses generator {need} but arity is {arity}")
    return arity


def _tuple_chunks(
    G: FiniteGroup, arity: int, pool: Optional[np.ndarray], budget: int
) -> Iterator[list[np.ndarray]]:
    base = G.order if pool is None else len(pool)
    total = base**arity
    if total > budget:
        raise BudgetExceeded(f"{total} tuples over {G.name} exceed the budget of {budget}")
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        digits = []
        for k in range(arity):
            d = (idx // base ** (arity - 1 - k)) % base
            digits.append(d if pool is None else pool[d])
        yield digits


def _eval_word(G: FiniteGroup, w: Word, digits: list[np.ndarray]) -> np.ndarray:
    n = len(digits[0]) if digits else 1
    cur = np.full(n, G.identity, dtype=np.int64)
    for x in w.letters:
        g = digits[abs(x) - 1]
        cur = G.table[cur, g if x > 0 else G.inverse[g]]
    return cur


@dataclass(frozen=True)
class WordMeasure:
    """Exact fibre counts of a word map G^arity -> G."""

    group: FiniteGroup = field(compare=False)
    arity: int
    counts: tuple[int, ...]

    @property
    def denominator(self) -> int:
        return self.group.order**self.arity

    @property
    def by_class(self) -> dict[int, int]:
        return {c: self.counts[cls[0]] for c, cls in enumerate(self.group.conjugacy_classes)}

    def is_class_function(self) -> bool:
        return all(
            len({self.counts[g] for g in cls}) == 1 for cls in self.group.conjugacy_classes
        )

    def probability(self, g: int):
        from fractions import Fraction

        return Fraction(self.counts[g], self.denominator)

    def to_json(self) -> dict:
        return {
            "group": self.group.name,
            "arity": self.arity,
            "denominator": str(self.denominator),
            "counts": {str(g): str(c) for g, c in enumerate(self.counts)},
            "by_class": {
                str(c): {"size": len(cls), "count_each": str(self.counts[cls[0]])}
                for c, cls in enumerate(self.group.conjugacy_classes)
            },
        }


def word_measure(
    w: Word, G: FiniteGroup, arity: Optional[int] = None, budget: int = DEFAULT_TUPLE_BUDGET
) -> WordMeasure:
    arity = _arity_of([w], arity)
    counts = np.zeros(G.order, dtype=np.int64)
    for digits in _tuple_chunks(G, arity, None, budget):
        counts += np.bincount(_eval_word(G, w, digits), minlength=G.order)
    m = WordMeasure(G, arity, tuple(int(c) for c in counts))
    assert sum(m.counts) == m.denominator
    assert m.is_class_function(), "word measure is not a class function"
    return m


def measures_equal(
    w1: Word, w2: Word, G: FiniteGroup, arity: Optional[int] = None, budget: int = DEFAULT_TUPLE_BUDGET
) -> bool:
    arity = _arity_of([w1, w2], arity)
    return word_measure(w1, G, arity, budget).counts == word_measure(w2, G, arity, budget).counts


DISTINGUISHED = "distinguished"
INDISTINGUISHABLE = "indistinguishable-over-family"


@dataclass(frozen=True)
class EquivalenceReport:
    verdict: str
    group: Optional[str] = None
    skipped: tuple[str, ...] = ()

    @property
    def partial(self) -> bool:
        return self.verdict == INDISTINGUISHABLE and bool(self.skipped)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "group": self.group,
            "partial": self.partial,
            "skipped": list(self.skipped),
        }


def profinite_equiv_test(
    w1: Word,
    w2: Word,
    family: Sequence[FiniteGroup],
    arity: Optional[int] = None,
    budget: int = DEFAULT_TUPLE_BUDGET,
) -> EquivalenceReport:
    """Look for a group in ``family`` whose w1- and w2-measures differ.

    A hit certifies the words are in different Aut(F^)-orbits.  Otherwise the
    outcome is only evidence; groups over budget are listed as skipped.
    """
    arity = _arity_of([w1, w2], arity)
    skipped = []
    for G in family:
        try:
            same = measures_equal(w1, w2, G, arity, budget)
        except BudgetExceeded:
            skipped.append(G.name)
            continue
        if not same:
            return EquivalenceReport(DISTINGUISHED, G.name, tuple(skipped))
    return EquivalenceReport(INDISTINGUISHABLE, None, tuple(skipped))


# ---------------------------------------------------------------- Hom / Epi


@dataclass(frozen=True)
class Presentation:
    generators: int
    relators: tuple[Word, ...] = ()

    def __post_init__(self):
        if self.generators < 1:
            raise InputError("a presentation needs at least one generator")
        rels = []
        for r in self.relators:
            if any(abs(x) > self.generators for x in r.letters):
                raise InputError(f"relator {r} uses more than {self.generators} generators")
            rels.append(r.with_rank(self.generators))
        object.__setattr__(self, "relators", tuple(rels))

    @classmethod
    def parse(cls, generators: int, relators: Sequence[str]) -> "Presentation":
        return cls(generators, tuple(Word.parse(r, generators) for r in relators))


def _count_solutions(P: Presentation, G: FiniteGroup, pool, budget: int) -> int:
    total = 0
    for digits in _tuple_chunks(G, P.generators, pool, budget):
        ok = np.ones(len(digits[0]), dtype=bool)
        for r in P.relators:
            ok &= _eval_word(G, r, digits) == G.identity
        total += int(ok.sum())
    return total


def count_homs(P: Presentation, M: FiniteGroup, budget: int = DEFAULT_TUPLE_BUDGET) -> int:
    """|Hom(<X|R>, M)|, by enumerating generator images."""
    return _count_solutions(P, M, None, budget)


def subgroup_lattice(M: FiniteGroup, cap: int = DEFAULT_LATTICE_CAP) -> list[frozenset]:
    """All subgroups of M as element-index sets, ordered by size then content."""
    if M.order > cap:
        raise BudgetExceeded(f"subgroup lattice capped at order {cap}, got {M.order}")
    cyclics = {M.generated([g]) for g in range(M.order)}
    found = set(cyclics)
    frontier = list(found)
    while frontier:
        nxt = []
        for H in frontier:
            for C in cyclics:
                if C <= H:
                    continue
                K = M.generated(list(H | C))
                if K not in found:
                    found.add(K)
                    nxt.append(K)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def epi_table(
    P: Presentation,
    M: FiniteGroup,
    budget: int = DEFAULT_TUPLE_BUDGET,
    cap: int = DEFAULT_LATTICE_CAP,
) -> dict[frozenset, int]:
    """|Epi(P, N)| for every subgroup N of M, by Mobius recursion on the lattice."""
    lattice = subgroup_lattice(M, cap)
    epis: dict[frozenset, int] = {}
    for N in lattice:
        homs = _count_solutions(P, M, np.array(sorted(N), dtype=np.int64), budget)
        epis[N] = homs - sum(e for K, e in epis.items() if K < N)
    return epis


def count_epis(
    P: Presentation,
    M: FiniteGroup,
    budget: int = DEFAULT_TUPLE_BUDGET,
    cap: int = DEFAULT_LATTICE_CAP,
) -> int:
    return epi_table(P, M, budget, cap)[frozenset(range(M.order))]


def count_extensions(
    d: int, a: Word, M: FiniteGroup, g: int, budget: int = DEFAULT_TUPLE_BUDGET
) -> int:
    """#{phi: F_d -> M with phi(a) = g}."""
    return word_measure(a, M, d, budget).counts[g]


@dataclass(frozen=True)
class Deviation:
    group: str
    element: int
    label: str
    count: int
    expected: int

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "element": self.element,
            "label": self.label,
            "count": str(self.count),
            "expected": str(self.expected),
        }


@dataclass(frozen=True)
class BPrimeReport:
    checked: int
    deviations: tuple[Deviation, ...]

    def to_json(self) -> dict:
        return {
            "checked": self.checked,
            "deviations": [d.to_json() for d in self.deviations],
        }


def bprime_test(
    d: int,
    a: Word,
    primes: Sequence[int],
    family: Sequence[FiniteGroup],
    budget: int = DEFAULT_TUPLE_BUDGET,
) -> BPrimeReport:
    """Compare extension counts with |M|^(d-1) for every g whose order is
    prime to ``primes``."""
    checked = 0
    deviations = []
    for M in family:
        m = word_measure(a, M, d, budget)
        expected = M.order ** (d - 1)
        for g in range(M.order):
            o = M.element_order(g)
            if any(o % p == 0 for p in primes):
                continue
            checked += 1
            if m.counts[g] != expected:
                deviations.append(Deviation(M.name, g, M.label(g), m.counts[g], expected))
    return BPrimeReport(checked, tuple(deviations))


# ---------------------------------------------------------------- rigidity experiment


@dataclass
class RigidityReport:
    rank: int
    max_len: int
    family: list[str]
    orbits: list[dict]
    sanity_ok: bool
    sanity_failures: list[dict]
    unseparated: list[tuple[str, str]]
    separated_by: dict

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "max_len": self.max_len,
            "family": self.family,
            "orbits": self.orbits,
            "sanity_ok": self.sanity_ok,
            "sanity_failures": self.sanity_failures,
            "unseparated": [list(p) for p in self.unseparated],
            "separated_by": self.separated_by,
        }


def rigidity_experiment(
    rank: int,
    max_len: int,
    family: Sequence[FiniteGroup],
    budget: int = DEFAULT_TUPLE_BUDGET,
) -> RigidityReport:
    """Partition words of length <= max_len into Aut(F)-orbits and test the
    orbits against word measures over ``family``.

    Reports whether words in a common orbit always share measures, and which
    distinct orbits the family cannot tell apart.
    """
    orbits: dict = {}
    for w in all_words(rank, max_len, min_len=1):
        orbits.setdefault(orbit_key(w), []).append(w)
    keys = sorted(orbits, key=lambda c: (len(c), [2 * abs(x) - (x > 0) for x in c.letters]))

    def signature(w):
        return tuple(word_measure(w, G, rank, budget).counts for G in family)

    sigs = {}
    failures = []
    for key in keys:
        members = orbits[key]
        ref = signature(key.word)
        sigs[key] = ref
        for w in members:
            if signature(w) != ref:
                failures.append({"orbit": str(key), "word": str(w)})
    unseparated = []
    separated_by = {}
    for k1, k2 in itertools.combinations(keys, 2):
        s1, s2 = sigs[k1], sigs[k2]
        diff = next((G.name for G, a, b in zip(family, s1, s2) if a != b), None)
        if diff is None:
            unseparated.append((str(k1), str(k2)))
        else:
            separated_by[f"{k1}|{k2}"] = diff
    orbit_rows = [
        {"representative": str(k), "size": len(orbits[k]), "min_length": len(k)} for k in keys
    ]
    return RigidityReport(
        rank,
        max_len,
        [G.name for G in family],
        orbit_rows,
        not failures,
        failures,
        unseparated,
        separated_by,
    )
