"""Free-group words, conjugacy, roots, Whitehead's algorithm and friends.

Letters are signed generator indices: ``i`` is x_i and ``-i`` its inverse.
The text syntax maps ``a`` to 1, ``b`` to 2, ... and upper case to inverses,
so ``"abA"`` is x1 x2 x1^-1.

>>> w = Word.parse("abBA")
>>> w.letters
()
>>> Word.parse("aab").text
'aab'
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

from .errors import BudgetExceeded, InputError

DEFAULT_BFS_BUDGET = 10**6


def _free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _inv(letters: Sequence[int]) -> tuple[int, ...]:
    return tuple(-x for x in reversed(letters))


def _letter_key(x: int) -> int:
    # 1 < -1 < 2 < -2 < ...
    return 2 * abs(x) - (x > 0)


def _cyclic_core(letters: tuple[int, ...]) -> tuple[int, int]:
    """Return (start, stop) so that letters[start:stop] is the cyclic core."""
    n = len(letters)
    i = 0
    while i < n - 1 - i and letters[i] == -letters[n - 1 - i]:
        i += 1
    return i, n - i


def _least_rotation(letters: tuple[int, ...]) -> int:
    n = len(letters)
    if n == 0:
        return 0
    keys = [_letter_key(x) for x in letters]
    doubled = keys + keys
    best = 0
    for i in range(1, n):
        if doubled[i : i + n] < doubled[best : best + n]:
            best = i
    return best


def _word_text(letters: Sequence[int]) -> str:
    return "".join(
        chr(ord("a") + x - 1) if x > 0 else chr(ord("A") - x - 1) for x in letters
    )


@dataclass(frozen=True)
class Word:
    """A freely reduced word in the free group of the given rank."""

    rank: int
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        if not isinstance(self.rank, int) or self.rank < 1:
            raise InputError(f"rank must be a positive integer, got {self.rank!r}")
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        for x in letters:
            if not isinstance(x, int) or x == 0 or abs(x) > self.rank:
                raise InputError(f"letter {x!r} out of range for rank {self.rank}")
        for x, y in zip(letters, letters[1:]):
            if x == -y:
                raise InputError(f"letters {letters} are not freely reduced")

    @classmethod
    def _trusted(cls, rank: int, letters: tuple[int, ...]) -> "Word":
        w = object.__new__(cls)
        object.__setattr__(w, "rank", rank)
        object.__setattr__(w, "letters", letters)
        return w

    @classmethod
    def identity(cls, rank: int) -> "Word":
        return cls(rank, ())

    @classmethod
    def generator(cls, i: int, rank: int) -> "Word":
        return cls(rank, (i,))

    @classmethod
    def parse(cls, text: str, rank: Optional[int] = None) -> "Word":
        """Parse ``abA``-style text (``""`` or ``"1"`` is the identity)."""
        letters = []
        for ch in text.strip():
            if ch.isspace() or ch in "*.":
                continue
            if "a" <= ch <= "z":
                letters.append(ord(ch) - ord("a") + 1)
            elif "A" <= ch <= "Z":
                letters.append(-(ord(ch) - ord("A") + 1))
            elif ch == "1" and len(text.strip()) == 1:
                continue
            else:
                raise InputError(f"bad character {ch!r} in word {text!r}")
        if rank is None:
            rank = max((abs(x) for x in letters), default=1)
        return reduce_word(letters, rank)

    @property
    def text(self) -> str:
        if self.rank > 26:
            raise InputError("text syntax only covers ranks up to 26")
        return _word_text(self.letters)

    def __str__(self) -> str:
        if self.rank <= 26:
            return self.text or "1"
        return str(list(self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def _check_rank(self, other: "Word") -> None:
        if other.rank != self.rank:
            raise InputError(f"rank mismatch: {self.rank} vs {other.rank}")

    def __mul__(self, other: "Word") -> "Word":
        self._check_rank(other)
        return Word._trusted(self.rank, _free_reduce(self.letters + other.letters))

    def inverse(self) -> "Word":
        return Word._trusted(self.rank, _inv(self.letters))

    __invert__ = inverse

    def __pow__(self, k: int) -> "Word":
        base = self if k >= 0 else self.inverse()
        return Word._trusted(self.rank, _free_reduce(base.letters * abs(k)))

    def conjugate(self, g: "Word") -> "Word":
        """Return g w g^-1."""
        return g * self * g.inverse()

    def with_rank(self, rank: int) -> "Word":
        return Word(rank, self.letters)

    def is_cyclically_reduced(self) -> bool:
        return len(self.letters) < 2 or self.letters[0] != -self.letters[-1]


def reduce_word(letters: Iterable[int], rank: int) -> Word:
    """Freely reduce a raw sequence of signed generator indices.

    >>> reduce_word([1, 2, -2, 1], 2).letters
    (1, 1)
    """
    letters = tuple(letters)
    for x in letters:
        if not isinstance(x, int) or x == 0 or abs(x) > rank:
            raise InputError(f"letter {x!r} out of range for rank {rank}")
    return Word(rank, _free_reduce(letters))


@dataclass(frozen=True)
class CyclicWord:
    """A conjugacy class, stored as the least rotation of its cyclic core."""

    rank: int
    letters: tuple[int, ...]

    def __post_init__(self):
        Word(self.rank, self.letters)
        letters = tuple(self.letters)
        if len(letters) > 1 and letters[0] == -letters[-1]:
            raise InputError(f"{letters} is not cyclically reduced")
        if _least_rotation(letters) != 0:
            raise InputError(f"{letters} is not the canonical rotation")

    @classmethod
    def of(cls, w: Word) -> "CyclicWord":
        return cyclic_reduce(w)[1] if w else cls(w.rank, ())

    @property
    def word(self) -> Word:
        return Word._trusted(self.rank, self.letters)

    def inverse(self) -> "CyclicWord":
        return CyclicWord.of(self.word.inverse())

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return str(self.word)


def cyclic_reduce(w: Word) -> tuple[Word, CyclicWord]:
    """Split w as conjugator * core * conjugator^-1 with a canonical core.

    >>> g, c = cyclic_reduce(Word.parse("abA"))
    >>> g.text, c.word.text
    ('a', 'b')
    """
    if not w:
        raise InputError("cyclic_reduce needs a non-trivial word")
    start, stop = _cyclic_core(w.letters)
    core = w.letters[start:stop]
    shift = _least_rotation(core)
    conj = w.letters[:start] + core[:shift]
    canon = core[shift:] + core[:shift]
    return Word._trusted(w.rank, conj), CyclicWord(w.rank, canon)


def conjugate_equal(w1: Word, w2: Word) -> bool:
    w1._check_rank(w2)
    if not w1 or not w2:
        return not w1 and not w2
    return cyclic_reduce(w1)[1] == cyclic_reduce(w2)[1]


def _period(letters: tuple[int, ...]) -> int:
    n = len(letters)
    for p in range(1, n + 1):
        if n % p == 0 and letters[:p] * (n // p) == letters:
            return p
    return n


def root(w: Word) -> tuple[Word, int]:
    """Return (r, e) with w = r^e and r not a proper power.

    >>> r, e = root(Word.parse("ababab"))
    >>> r.text, e
    ('ab', 3)
    """
    if not w:
        raise InputError("root of the trivial word is undefined")
    g, core = cyclic_reduce(w)
    p = _period(core.letters)
    r = Word._trusted(w.rank, core.letters[:p]).conjugate(g)
    return r, len(core) // p


# ---------------------------------------------------------------- malnormality

PROPER_POWER = "proper-power"
CONJUGATE_PAIR = "conjugate-pair"
INVERSE_CONJUGATE_PAIR = "inverse-conjugate-pair"


@dataclass(frozen=True)
class Violation:
    i: int
    j: int
    reason: str


@dataclass(frozen=True)
class MalnormalityReport:
    violations: tuple[Violation, ...] = ()

    @property
    def is_malnormal(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "is_malnormal": self.is_malnormal,
            "violations": [
                {"pair": [v.i, v.j], "reason": v.reason} for v in self.violations
            ],
        }


def is_malnormal_family(family: Sequence[Word]) -> MalnormalityReport:
    """Decide whether the cyclic subgroups generated by ``family`` form a
    malnormal family.

    In a free group this happens iff no member is a proper power and no two
    distinct members have conjugate roots, up to inversion.  Literally equal
    entries are the same element and are not compared against each other.
    """
    family = list(family)
    if not family:
        return MalnormalityReport()
    rank = family[0].rank
    classes = []
    for a in family:
        if a.rank != rank:
            raise InputError("family members must share a rank")
        if not a:
            raise InputError("trivial word in malnormal family")
        r, e = root(a)
        classes.append((CyclicWord.of(r), e))
    violations = []
    for i, (c, e) in enumerate(classes):
        if e > 1:
            violations.append(Violation(i, i, PROPER_POWER))
    for i, j in itertools.combinations(range(len(family)), 2):
        if family[i] == family[j]:
            continue
        ci, cj = classes[i][0], classes[j][0]
        if ci == cj:
            violations.append(Violation(i, j, CONJUGATE_PAIR))
        elif ci == cj.inverse():
            violations.append(Violation(i, j, INVERSE_CONJUGATE_PAIR))
    return MalnormalityReport(tuple(violations))


# ---------------------------------------------------------------- automorphisms


def _substitute(table: dict, letters: Sequence[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        for y in table[x]:
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
    return tuple(out)


def _letter_table(images: Sequence[tuple[int, ...]]) -> dict:
    table = {}
    for i, img in enumerate(images, start=1):
        table[i] = img
        table[-i] = _inv(img)
    return table


class FreeAutomorphism:
    """An automorphism of F_rank, stored by generator images and their inverse.

    Composition follows function composition: ``(phi @ psi)(w) == phi(psi(w))``.
    When no inverse is supplied it is computed by Nielsen reduction, which
    also certifies that the images form a basis.
    """

    __slots__ = ("rank", "images", "_inverse", "_table")

    def __init__(
        self,
        images: Sequence[Word],
        inverse_images: Optional[Sequence[Word]] = None,
        *,
        check: bool = True,
    ):
        images = tuple(images)
        if not images:
            raise InputError("an automorphism needs at least one generator image")
        rank = len(images)
        for w in images:
            if w.rank != rank:
                raise InputError("generator images must live in the same rank")
        self.rank = rank
        self.images = images
        self._table = _letter_table([w.letters for w in images])
        if inverse_images is None:
            inverse_images = _nielsen_inverse(images)
        inverse_images = tuple(inverse_images)
        if len(inverse_images) != rank:
            raise InputError("inverse has the wrong number of images")
        self._inverse = inverse_images
        if check:
            inv_table = _letter_table([w.letters for w in inverse_images])
            for i in range(1, rank + 1):
                if _substitute(self._table, inv_table[i]) != (i,) or _substitute(
                    inv_table, self._table[i]
                ) != (i,):
                    raise InputError("supplied inverse does not invert the map")

    @classmethod
    def identity(cls, rank: int) -> "FreeAutomorphism":
        gens = [Word.generator(i, rank) for i in range(1, rank + 1)]
        return cls(gens, gens, check=False)

    @classmethod
    def signed_permutation(cls, targets: Sequence[int]) -> "FreeAutomorphism":
        """x_i -> letter targets[i-1]; targets must be a signed permutation."""
        rank = len(targets)
        if sorted(abs(t) for t in targets) != list(range(1, rank + 1)):
            raise InputError(f"{targets} is not a signed permutation")
        images = [Word(rank, (t,)) for t in targets]
        inverse = [None] * rank
        for i, t in enumerate(targets, start=1):
            inverse[abs(t) - 1] = Word(rank, (i if t > 0 else -i,))
        return cls(images, inverse, check=False)

    @classmethod
    def inner(cls, g: Word) -> "FreeAutomorphism":
        """Conjugation x -> g x g^-1."""
        rank = g.rank
        gens = [Word.generator(i, rank) for i in range(1, rank + 1)]
        return cls(
            [x.conjugate(g) for x in gens],
            [x.conjugate(g.inverse()) for x in gens],
            check=False,
        )

    @classmethod
    def whitehead(cls, rank: int, subset: frozenset, a: int) -> "FreeAutomorphism":
        """Type II Whitehead automorphism (subset, a).

        ``subset`` contains the letter ``a`` but not ``-a``.  Each generator
        x other than a^{+-1} maps to x a, a^-1 x, a^-1 x a or x according to
        which of x, x^-1 lie in the subset.
        """
        if a not in subset or -a in subset:
            raise InputError("Whitehead subset must contain a but not a^-1")

        def images(m: int) -> list[Word]:
            out = []
            for i in range(1, rank + 1):
                if i == abs(a):
                    out.append(Word(rank, (i,)))
                    continue
                pre = (-m,) if -i in subset else ()
                post = (m,) if i in subset else ()
                out.append(Word(rank, pre + (i,) + post))
            return out

        return cls(images(a), images(-a), check=False)

    @classmethod
    def from_json(cls, data: Sequence) -> "FreeAutomorphism":
        """Accept a list of generator images, either text words or int lists."""
        rank = len(data)
        words = []
        for item in data:
            if isinstance(item, str):
                words.append(Word.parse(item, rank))
            else:
                words.append(reduce_word(item, rank))
        return cls(words)

    def to_json(self) -> list:
        return [list(w.letters) for w in self.images]

    @property
    def inverse(self) -> "FreeAutomorphism":
        return FreeAutomorphism(self._inverse, self.images, check=False)

    def __call__(self, w: Word) -> Word:
        return apply_automorphism(self, w)

    def __matmul__(self, other: "FreeAutomorphism") -> "FreeAutomorphism":
        if other.rank != self.rank:
            raise InputError("rank mismatch in composition")
        images = [self(w) for w in other.images]
        inv = other.inverse
        inverse = [inv(w) for w in self._inverse]
        return FreeAutomorphism(images, inverse, check=False)

    def __eq__(self, other) -> bool:
        return isinstance(other, FreeAutomorphism) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        return f"FreeAutomorphism([{', '.join(map(str, self.images))}])"

    def is_identity(self) -> bool:
        return all(w.letters == (i,) for i, w in enumerate(self.images, start=1))


def apply_automorphism(phi: FreeAutomorphism, w: Word) -> Word:
    if phi.rank != w.rank:
        raise InputError(f"rank mismatch: automorphism {phi.rank}, word {w.rank}")
    return Word._trusted(w.rank, _substitute(phi._table, w.letters))


def _abelian_det(images: Sequence[Word]) -> int:
    from sympy import Matrix

    rows = []
    for w in images:
        row = [0] * w.rank
        for x in w.letters:
            row[abs(x) - 1] += 1 if x > 0 else -1
        rows.append(row)
    return int(Matrix(rows).det())


def _nielsen_inverse(images: Sequence[Word], budget: int = 200_000) -> list[Word]:
    """Invert a basis by Nielsen reduction, tracking the moves made.

    Moves u_i <- u_i u_j^e or u_j^e u_i never increase total length; when no
    strict decrease is available a breadth-first search over the current
    length level looks for one.  A basis always reduces to a signed
    permutation this way.
    """
    rank = images[0].rank
    if abs(_abelian_det(images)) != 1:
        raise InputError("images do not form a basis (abelianization is singular)")
    state = tuple(w.letters for w in images)
    track = tuple((i,) for i in range(1, rank + 1))

    def moves(us):
        for i, j in itertools.permutations(range(rank), 2):
            for e in (1, -1):
                uj = us[j] if e == 1 else _inv(us[j])
                yield i, j, e, "R", _free_reduce(us[i] + uj)
                yield i, j, e, "L", _free_reduce(uj + us[i])

    def act(ts, i, j, e, side):
        tj = ts[j] if e == 1 else _inv(ts[j])
        new = _free_reduce(ts[i] + tj) if side == "R" else _free_reduce(tj + ts[i])
        return ts[:i] + (new,) + ts[i + 1 :]

    def total(us):
        return sum(map(len, us))

    def done(us):
        return all(len(u) == 1 for u in us) and sorted(abs(u[0]) for u in us) == list(
            range(1, rank + 1)
        )

    visited_total = 0
    while not done(state):
        step = None
        for i, j, e, side, new in moves(state):
            if len(new) < len(state[i]):
                step = (i, j, e, side)
                break
        if step is not None:
            i, j, e, side = step
            state = act(state, *step)
            track = act(track, *step)
            continue
        # plateau search for a configuration admitting a strict decrease
        level = total(state)
        parents = {state: None}
        queue = deque([state])
        found = None
        while queue and found is None:
            cur = queue.popleft()
            for i, j, e, side, new in moves(cur):
                if len(new) < len(cur[i]):
                    found = cur
                    break
                if len(new) == len(cur[i]):
                    nxt = cur[:i] + (new,) + cur[i + 1 :]
                    if nxt not in parents:
                        parents[nxt] = (cur, (i, j, e, side))
                        queue.append(nxt)
                        visited_total += 1
                        if visited_total > budget:
                            raise BudgetExceeded("Nielsen reduction budget exhausted")
        if found is None:
            raise InputError("images do not form a basis")
        path = []
        node = found
        while parents[node] is not None:
            prev, mv = parents[node]
            path.append(mv)
            node = prev
        for mv in reversed(path):
            state = act(state, *mv)
            track = act(track, *mv)
        assert total(state) == level
    # state = phi(track) is a signed permutation sigma; phi^-1 = track o sigma^-1
    inverse = [None] * rank
    for i, u in enumerate(state):
        k = abs(u[0])
        t = track[i] if u[0] > 0 else _inv(track[i])
        inverse[k - 1] = Word._trusted(rank, t)
    return inverse


# ---------------------------------------------------------------- Whitehead


@lru_cache(maxsize=None)
def whitehead_type2(rank: int) -> tuple[FreeAutomorphism, ...]:
    """All non-trivial type II Whitehead automorphisms, in a fixed order."""
    out = []
    letters = [x for i in range(1, rank + 1) for x in (i, -i)]
    for a in letters:
        others = [x for x in letters if abs(x) != abs(a)]
        for bits in itertools.product((0, 1), repeat=len(others)):
            if not any(bits):
                continue
            subset = frozenset([a] + [x for x, b in zip(others, bits) if b])
            out.append(FreeAutomorphism.whitehead(rank, subset, a))
    return tuple(out)


@lru_cache(maxsize=None)
def whitehead_type1(rank: int) -> tuple[FreeAutomorphism, ...]:
    """All non-identity signed permutations of the generators."""
    out = []
    for perm in itertools.permutations(range(1, rank + 1)):
        for signs in itertools.product((1, -1), repeat=rank):
            targets = [p * s for p, s in zip(perm, signs)]
            if targets != list(range(1, rank + 1)):
                out.append(FreeAutomorphism.signed_permutation(targets))
    return tuple(out)


def _cyclic_image(phi: FreeAutomorphism, letters: tuple[int, ...]) -> tuple[int, ...]:
    img = _substitute(phi._table, letters)
    start, stop = _cyclic_core(img)
    return img[start:stop]


def _canonical(letters: tuple[int, ...]) -> tuple[int, ...]:
    s = _least_rotation(letters)
    return letters[s:] + letters[:s]


def _to_core(w: Word) -> tuple[Word, FreeAutomorphism]:
    g, core = cyclic_reduce(w)
    return core.word, FreeAutomorphism.inner(g.inverse())


@lru_cache(maxsize=4096)
def _minimize_cached(rank: int, letters: tuple[int, ...]):
    w = Word._trusted(rank, letters)
    cur, phi = _to_core(w)
    moves = whitehead_type2(rank)
    while True:
        best = None
        for mv in moves:
            n = len(_cyclic_image(mv, cur.letters))
            if n < len(cur) and (best is None or n < best[0]):
                best = (n, mv)
        if best is None:
            return cur, phi
        img = apply_automorphism(best[1], cur)
        cur, inner = _to_core(img)
        phi = inner @ best[1] @ phi


def whitehead_minimize(w: Word) -> tuple[Word, FreeAutomorphism]:
    """Return (w_min, phi) with phi(w) = w_min of least length in the Aut(F)-orbit.

    The minimum is taken over the whole orbit, which contains the cyclic core
    of w, so w_min is cyclically reduced and in canonical rotation.
    """
    if not w:
        raise InputError("whitehead_minimize needs a non-trivial word")
    return _minimize_cached(w.rank, w.letters)


def _level_moves(rank: int) -> tuple[FreeAutomorphism, ...]:
    return whitehead_type1(rank) + whitehead_type2(rank)


def _level_search(
    rank: int, start: tuple[int, ...], target: Optional[tuple[int, ...]], budget: int
):
    """BFS among cyclic words of len(start) connected by Whitehead moves.

    Returns the parent map; stops early once ``target`` is reached.
    """
    moves = _level_moves(rank)
    n = len(start)
    parents = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == target:
            break
        for k, mv in enumerate(moves):
            img = _cyclic_image(mv, cur)
            if len(img) != n:
                continue
            img = _canonical(img)
            if img not in parents:
                parents[img] = (cur, k)
                if len(parents) > budget:
                    raise BudgetExceeded(
                        f"Whitehead level search exceeded {budget} visited words"
                    )
                queue.append(img)
                if img == target:
                    queue.clear()
                    break
    return parents


def aut_orbit_equal(
    w1: Word, w2: Word, budget: int = DEFAULT_BFS_BUDGET
) -> Optional[FreeAutomorphism]:
    """Return phi with phi(w1) == w2 when one exists, otherwise None."""
    w1._check_rank(w2)
    rank = w1.rank
    if not w1 or not w2:
        return FreeAutomorphism.identity(rank) if not w1 and not w2 else None
    u1, phi1 = whitehead_minimize(w1)
    u2, phi2 = whitehead_minimize(w2)
    if len(u1) != len(u2):
        return None
    parents = _level_search(rank, u1.letters, u2.letters, budget)
    if u2.letters not in parents:
        return None
    path = []
    node = u2.letters
    while parents[node] is not None:
        node, k = parents[node]
        path.append(k)
    moves = _level_moves(rank)
    psi = FreeAutomorphism.identity(rank)
    for k in reversed(path):
        psi = moves[k] @ psi
    v = psi(u1)
    gv, core = cyclic_reduce(v)
    assert core.letters == u2.letters
    fix = FreeAutomorphism.inner(gv.inverse())
    witness = phi2.inverse @ fix @ psi @ phi1
    assert witness(w1) == w2
    return witness


@lru_cache(maxsize=None)
def _orbit_component(rank: int, start: tuple[int, ...], budget: int) -> tuple:
    return tuple(_level_search(rank, start, None, budget))


def orbit_key(w: Word, budget: int = DEFAULT_BFS_BUDGET) -> CyclicWord:
    """A canonical representative of the Aut(F)-orbit of w.

    Two words share a key iff they lie in the same Aut(F)-orbit: the key is
    the least (under the letter order) minimal-length cyclic word reachable
    from w.
    """
    if not w:
        return CyclicWord(w.rank, ())
    u, _ = whitehead_minimize(w)
    comp = _orbit_component(w.rank, u.letters, budget)
    best = min(comp, key=lambda c: [_letter_key(x) for x in c])
    return CyclicWord(w.rank, best)


def is_primitive(w: Word) -> bool:
    if not w:
        raise InputError("primitivity of the trivial word is undefined")
    return len(whitehead_minimize(w)[0]) == 1


def algebraic_closure(w: Word) -> tuple[list[Word], FreeAutomorphism]:
    """Basis of the smallest free factor containing w, plus a witness.

    The witness maps each coordinate generator x_s used by the minimal form
    of w onto the corresponding basis element.
    """
    if not w:
        raise InputError("algebraic closure of the trivial word is undefined")
    u, phi = whitehead_minimize(w)
    used = sorted({abs(x) for x in u.letters})
    back = phi.inverse
    basis = [back(Word.generator(s, w.rank)) for s in used]
    return basis, back


# ---------------------------------------------------------------- enumeration


def all_words(rank: int, max_len: int, min_len: int = 0) -> Iterator[Word]:
    """Every reduced word of length in [min_len, max_len], shortlex order."""
    letters = [x for i in range(1, rank + 1) for x in (i, -i)]
    layer = [()]
    for n in range(max_len + 1):
        if n >= min_len:
            for t in layer:
                yield Word._trusted(rank, t)
        layer = [t + (x,) for t in layer for x in letters if not t or t[-1] != -x]


def random_word(rank: int, length: int, rng: random.Random) -> Word:
    """A uniformly random reduced word of exactly the given length."""
    letters: list[int] = []
    while len(letters) < length:
        x = rng.choice([i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)])
        if letters and letters[-1] == -x:
            continue
        letters.append(x)
    return Word._trusted(rank, tuple(letters))


def random_automorphism(rank: int, steps: int, rng: random.Random) -> FreeAutomorphism:
    moves = _level_moves(rank)
    phi = FreeAutomorphism.identity(rank)
    for _ in range(steps):
        phi = rng.choice(moves) @ phi
    return phi
