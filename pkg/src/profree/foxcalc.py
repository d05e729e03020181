"""Integer group rings of free groups, Fox derivatives, the tau map of the
small-cancellation resolution, and their images in F_p[M] for finite M.

Identities are checked exactly: over Z[F] with unbounded integer
coefficients, or after evaluation into a finite group algebra.
"""

from __future__ import annotations

import math
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError
from .finquot import FiniteGroup, cyclic
from .wordcore import Word, _free_reduce


class GroupRingElement:
    """A finite Z-linear combination of reduced words of one rank."""

    __slots__ = ("rank", "_terms")

    def __init__(self, rank: int, terms: Mapping[Word, int] | None = None):
        self.rank = rank
        clean = {}
        for w, c in (terms or {}).items():
            if w.rank != rank:
                raise InputError("group ring term of the wrong rank")
            if c:
                clean[w] = clean.get(w, 0) + int(c)
        self._terms = {w: c for w, c in clean.items() if c}

    @classmethod
    def _raw(cls, rank: int, terms: dict) -> "GroupRingElement":
        e = object.__new__(cls)
        e.rank = rank
        e._terms = {w: c for w, c in terms.items() if c}
        return e

    @classmethod
    def of(cls, w: Word, coeff: int = 1) -> "GroupRingElement":
        return cls._raw(w.rank, {w: coeff})

    @classmethod
    def scalar(cls, rank: int, n: int) -> "GroupRingElement":
        return cls._raw(rank, {Word.identity(rank): n})

    @classmethod
    def from_json(cls, rank: int, data: Mapping[str, int]) -> "GroupRingElement":
        return cls(rank, {Word.parse(k, rank): int(v) for k, v in data.items()})

    @property
    def terms(self) -> Mapping[Word, int]:
        return MappingProxyType(self._terms)

    def to_json(self) -> dict:
        items = sorted(self._terms.items(), key=lambda kv: (len(kv[0]), kv[0].letters))
        return {(w.text or "1"): c for w, c in items}

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for w, c in sorted(self._terms.items(), key=lambda kv: (len(kv[0]), kv[0].letters)):
            parts.append(f"{c}*{w}" if c != 1 else str(w))
        return " + ".join(parts)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = GroupRingElement.scalar(self.rank, other)
        return isinstance(other, GroupRingElement) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def _coerce(self, other) -> "GroupRingElement":
        if isinstance(other, int):
            return GroupRingElement.scalar(self.rank, other)
        if isinstance(other, Word):
            return GroupRingElement.of(other)
        if other.rank != self.rank:
            raise InputError("rank mismatch in group ring arithmetic")
        return other

    def __add__(self, other) -> "GroupRingElement":
        other = self._coerce(other)
        out = dict(self._terms)
        for w, c in other._terms.items():
            out[w] = out.get(w, 0) + c
        return GroupRingElement._raw(self.rank, out)

    __radd__ = __add__

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement._raw(self.rank, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other) -> "GroupRingElement":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "GroupRingElement":
        return self._coerce(other) - self

    def __mul__(self, other) -> "GroupRingElement":
        other = self._coerce(other)
        out: dict = {}
        for u, a in self._terms.items():
            for v, b in other._terms.items():
                w = Word._trusted(self.rank, _free_reduce(u.letters + v.letters))
                out[w] = out.get(w, 0) + a * b
        return GroupRingElement._raw(self.rank, out)

    def __rmul__(self, other) -> "GroupRingElement":
        return self._coerce(other) * self

    def augmentation(self) -> int:
        return sum(self._terms.values())


def fox_derivative(a: Word, i: int) -> GroupRingElement:
    """d a / d x_i in Z[F].

    >>> fox_derivative(Word.parse("abA"), 1)
    1 + -1*abA
    """
    if not 1 <= i <= a.rank:
        raise InputError(f"generator index {i} out of range for rank {a.rank}")
    out: dict = {}
    prefix: tuple[int, ...] = ()
    for x in a.letters:
        if x == i:
            w = Word._trusted(a.rank, prefix)
            out[w] = out.get(w, 0) + 1
        prefix = _free_reduce(prefix + (x,))
        if x == -i:
            w = Word._trusted(a.rank, prefix)
            out[w] = out.get(w, 0) - 1
    return GroupRingElement._raw(a.rank, out)


def fox_gradient(a: Word) -> list[GroupRingElement]:
    return [fox_derivative(a, i) for i in range(1, a.rank + 1)]


def fundamental_defect(a: Word) -> GroupRingElement:
    """sum_i (d a/d x_i)(x_i - 1) - (a - 1); zero for every word."""
    total = GroupRingElement(a.rank)
    for i, d in enumerate(fox_gradient(a), start=1):
        total = total + d * (Word.generator(i, a.rank) - GroupRingElement.scalar(a.rank, 1))
    return total - (GroupRingElement.of(a) - 1)


def verify_fundamental_identity(a: Word) -> bool:
    return not fundamental_defect(a)


def derivation_value(values: Sequence[GroupRingElement], w: Word) -> GroupRingElement:
    """Value at w of the derivation F -> Z[F] with d(x_i) = values[i-1].

    Every derivation factors through the Fox gradient:
    d(w) = sum_i (d w / d x_i) d(x_i).
    """
    total = GroupRingElement(w.rank)
    for d, v in zip(fox_gradient(w), values):
        total = total + d * v
    return total


def inner_derivation_conjugation_check(a_elt: GroupRingElement, g: Word, h: Word) -> bool:
    """Check d(g h g^-1) = (g h g^-1 - 1)(g a - d(g)) for d(x) = (x - 1) a.

    d is evaluated through the Fox expansion of its generator values, so the
    two sides are computed along independent routes.
    """
    rank = a_elt.rank
    one = GroupRingElement.scalar(rank, 1)
    values = [(GroupRingElement.of(Word.generator(i, rank)) - one) * a_elt for i in range(1, rank + 1)]
    conj = h.conjugate(g)
    lhs = derivation_value(values, conj)
    rhs = (GroupRingElement.of(conj) - one) * (GroupRingElement.of(g) * a_elt - derivation_value(values, g))
    # d is inner, so d(h) = (h - 1) a as well
    assert derivation_value(values, h) == (GroupRingElement.of(h) - one) * a_elt
    return lhs == rhs


def geometric_sum(a: Word, n: int) -> GroupRingElement:
    """1 + a + ... + a^(n-1)."""
    return GroupRingElement(a.rank, {a**k: 1 for k in range(n)}) if n > 0 else GroupRingElement(a.rank)


def tau_row(a: Word, n: int) -> list[GroupRingElement]:
    """(a^(n-1) + ... + a + 1) times the Fox gradient of a."""
    if not a:
        raise InputError("tau_row needs a non-trivial word")
    if n < 1:
        raise InputError("tau_row needs a positive exponent")
    s = geometric_sum(a, n)
    return [s * d for d in fox_gradient(a)]


# ---------------------------------------------------------------- finite shadows


class FiniteAlgebraElement:
    """An element of F_p[M], as a coefficient vector indexed by M."""

    __slots__ = ("group", "p", "coeffs")

    def __init__(self, group: FiniteGroup, p: int, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.int64) % p
        if coeffs.shape != (group.order,):
            raise InputError("coefficient vector length must equal the group order")
        coeffs.setflags(write=False)
        self.group = group
        self.p = p
        self.coeffs = coeffs

    @classmethod
    def zero(cls, group: FiniteGroup, p: int) -> "FiniteAlgebraElement":
        return cls(group, p, np.zeros(group.order, dtype=np.int64))

    @classmethod
    def basis(cls, group: FiniteGroup, p: int, g: int, c: int = 1) -> "FiniteAlgebraElement":
        v = np.zeros(group.order, dtype=np.int64)
        v[g] = c
        return cls(group, p, v)

    def _check(self, other: "FiniteAlgebraElement") -> None:
        if other.group is not self.group or other.p != self.p:
            raise InputError("finite algebra elements over different algebras")

    def __add__(self, other):
        self._check(other)
        return FiniteAlgebraElement(self.group, self.p, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return FiniteAlgebraElement(self.group, self.p, self.coeffs - other.coeffs)

    def __mul__(self, other):
        if isinstance(other, int):
            return FiniteAlgebraElement(self.group, self.p, self.coeffs * other)
        self._check(other)
        out = np.zeros(self.group.order, dtype=np.int64)
        T = self.group.table
        for g in np.nonzero(self.coeffs)[0]:
            np.add.at(out, T[g], self.coeffs[g] * other.coeffs)
        return FiniteAlgebraElement(self.group, self.p, out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteAlgebraElement)
            and other.group is self.group
            and other.p == self.p
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __bool__(self) -> bool:
        return bool(np.any(self.coeffs))

    def augmentation(self) -> int:
        return int(self.coeffs.sum()) % self.p

    def push_forward(self, target: FiniteGroup, mapping: Sequence[int]) -> "FiniteAlgebraElement":
        """Image under the group homomorphism g -> mapping[g]."""
        out = np.zeros(target.order, dtype=np.int64)
        np.add.at(out, np.asarray(mapping, dtype=np.int64), self.coeffs)
        return FiniteAlgebraElement(target, self.p, out)

    def to_json(self) -> dict:
        return {str(g): int(c) for g, c in enumerate(self.coeffs) if c}

    def __repr__(self) -> str:
        return f"FiniteAlgebraElement({self.group.name}, p={self.p}, {self.to_json()})"


def _check_prime(p: int) -> None:
    if p < 2 or any(p % q == 0 for q in range(2, math.isqrt(p) + 1)):
        raise InputError(f"{p} is not a prime")


def evaluate(e: GroupRingElement, images: Sequence[int], group: FiniteGroup, p: int) -> FiniteAlgebraElement:
    """Apply the ring map Z[F] -> F_p[M] induced by x_i -> images[i-1]."""
    _check_prime(p)
    if len(images) != e.rank:
        raise InputError(f"expected {e.rank} generator images, got {len(images)}")
    out = np.zeros(group.order, dtype=np.int64)
    for w, c in e.terms.items():
        g = group.evaluate(w, images)
        out[g] = (out[g] + c) % p
    return FiniteAlgebraElement(group, p, out)


def trace_element(n: int, p: int) -> FiniteAlgebraElement:
    """n^-1 (1 + a + ... + a^(n-1)) in F_p[Z/n], where a is the element 1."""
    _check_prime(p)
    if n < 1:
        raise InputError("trace element needs a positive order")
    if n % p == 0:
        raise InputError(f"p = {p} divides n = {n}; the trace element does not exist")
    return FiniteAlgebraElement(cyclic(n), p, np.full(n, pow(n, -1, p), dtype=np.int64))


def verify_resolution_shadow(a: Word, n: int, images: Sequence[int], group: FiniteGroup, p: int) -> bool:
    """Check sum_i tau_i (phi(x_i) - 1) = phi(a^n - 1) = 0 in F_p[M]."""
    g = group.evaluate(a, images)
    if n % group.element_order(g):
        raise InputError(f"order of phi(a) does not divide n = {n}")
    rank = a.rank
    row = tau_row(a, n)
    one = FiniteAlgebraElement.basis(group, p, group.identity)
    total = FiniteAlgebraElement.zero(group, p)
    for i, entry in enumerate(row):
        xi = FiniteAlgebraElement.basis(group, p, images[i])
        total = total + evaluate(entry, images, group, p) * (xi - one)
    target = evaluate(GroupRingElement.of(a**n) - GroupRingElement.scalar(rank, 1), images, group, p)
    return total == target and not total
