"""Tubular groups: graphs of free groups with infinite cyclic edge groups.

A graph of groups is collapsed to a single vertex carrying the free product
of the vertex groups, with one stable letter per edge. Attaching words are
conjugated into canonical cyclic roots so that each relation reads

    q u^m q^-1 = v^n

with u, v canonical roots. The labeled graph Gamma has one vertex per root
and one edge per relation, and its combinatorics decide residual finiteness
and subgroup separability.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import sympy

from .errors import InputError, MalnormalityError
from .wordcore import CyclicWord, Word, _free_reduce, _inv, cyclic_reduce, is_malnormal_family, random_word, root

RF = "RF"
NOT_RF = "NotRF"
RF_CANDIDATE = "RFCandidate"


# ---------------------------------------------------------------- input types


@dataclass(frozen=True)
class Vertex:
    name: str
    rank: int


@dataclass(frozen=True)
class Edge:
    """An edge whose group is generated by u^m at the source end and v^n at
    the target end; empty words mean a trivial edge group."""

    name: str
    source: str
    target: str
    u: Word
    v: Word
    m: int = 1
    n: int = 1


@dataclass(frozen=True)
class GraphOfGroups:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        if not self.vertices:
            raise InputError("a graph of groups needs at least one vertex")
        ranks = {}
        for vx in self.vertices:
            if vx.name in ranks:
                raise InputError(f"duplicate vertex name {vx.name!r}")
            if not isinstance(vx.rank, int) or vx.rank < 1:
                raise InputError(f"vertex {vx.name!r} needs a positive rank")
            ranks[vx.name] = vx.rank
        names = set()
        for e in self.edges:
            if e.name in names:
                raise InputError(f"duplicate edge name {e.name!r}")
            names.add(e.name)
            for end, w in ((e.source, e.u), (e.target, e.v)):
                if end not in ranks:
                    raise InputError(f"edge {e.name!r} refers to unknown vertex {end!r}")
                if w.rank != ranks[end]:
                    raise InputError(f"attaching word of edge {e.name!r} has the wrong rank")
            if bool(e.u) != bool(e.v):
                raise InputError(f"edge {e.name!r}: attaching words must be both empty or both non-empty")
            if e.u and (e.m == 0 or e.n == 0):
                raise InputError(f"edge {e.name!r}: exponents must be nonzero")
        if not _connected(len(self.vertices), [(self._index(e.source), self._index(e.target)) for e in self.edges]):
            raise InputError("the underlying graph is not connected")

    def _index(self, name: str) -> int:
        return next(i for i, vx in enumerate(self.vertices) if vx.name == name)


def _connected(n: int, pairs: Sequence[tuple[int, int]]) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        parent[find(a)] = find(b)
    return len({find(x) for x in range(n)}) == 1


@dataclass(frozen=True)
class Relation:
    """q u^m q^-1 = v^n."""

    name: str
    u: CyclicWord
    m: int
    v: CyclicWord
    n: int


@dataclass(frozen=True)
class Substitution:
    """The original stable letter equals left * q * right."""

    name: str
    left: Word
    right: Word


@dataclass(frozen=True)
class HnnPresentation:
    base_rank: int
    relations: tuple[Relation, ...] = ()
    extra_free_rank: int = 0
    free_factor_rank: int = 0
    substitutions: tuple[Substitution, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple(self.relations))
        object.__setattr__(self, "substitutions", tuple(self.substitutions))
        if not isinstance(self.base_rank, int) or self.base_rank < 1:
            raise InputError("base_rank must be a positive integer")
        if self.extra_free_rank < 0:
            raise InputError("extra_free_rank must be nonnegative")
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise InputError("stable letter names must be distinct")
        for r in self.relations:
            if not r.name or r.name[0].isupper() or not r.name.isidentifier():
                raise InputError(f"bad stable letter name {r.name!r}")
            for c, e in ((r.u, r.m), (r.v, r.n)):
                if c.rank != self.base_rank:
                    raise InputError(f"relation {r.name!r} uses the wrong rank")
                if not c.letters:
                    raise InputError(f"relation {r.name!r} has a trivial attaching word")
                if e == 0:
                    raise InputError(f"relation {r.name!r} has a zero exponent")
        report = is_malnormal_family([c.word for c in self.roots])
        if not report.is_malnormal:
            raise MalnormalityError("attaching roots do not form a malnormal family", report)

    @property
    def roots(self) -> list[CyclicWord]:
        """The set A, in order of first appearance."""
        seen: dict[CyclicWord, None] = {}
        for r in self.relations:
            seen.setdefault(r.u)
            seen.setdefault(r.v)
        return list(seen)

    @property
    def stable_count(self) -> int:
        return len(self.relations)

    def stable_index(self, name: str) -> int:
        for j, r in enumerate(self.relations):
            if r.name == name:
                return j
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "base_rank": self.base_rank,
            "relations": [
                {"name": r.name, "u": r.u.word.text, "m": r.m, "v": r.v.word.text, "n": r.n}
                for r in self.relations
            ],
            "extra_free_rank": self.extra_free_rank,
            "free_factor_rank": self.free_factor_rank,
            "substitutions": [
                {"name": s.name, "left": s.left.text, "right": s.right.text} for s in self.substitutions
            ],
        }


def baumslag_solitar(n: int, m: int) -> HnnPresentation:
    """BS(n, m) = <a, t | t a^n t^-1 = a^m>."""
    a = CyclicWord(1, (1,))
    return HnnPresentation(1, (Relation("t", a, n, a, m),))


# ---------------------------------------------------------------- collapse


def collapse_to_single_vertex(g: GraphOfGroups) -> HnnPresentation:
    """Rewrite a graph of free groups as one vertex with stable letters.

    The result presents G * F_r with r = |V| - 1. Generators are re-indexed
    blockwise in vertex order, and each attaching word is conjugated into a
    canonical cyclic root whose power is absorbed into the exponent.
    """
    offsets, k = {}, 0
    for vx in g.vertices:
        offsets[vx.name] = k
        k += vx.rank

    def lift(w: Word, vertex: str) -> Word:
        off = offsets[vertex]
        return Word._trusted(k, tuple(x + off if x > 0 else x - off for x in w.letters))

    vertices: dict[tuple[int, ...], None] = {}

    def normalize(w: Word, e: int) -> tuple[Word, CyclicWord, int]:
        # w^e = conj * c^exp * conj^-1 with c a registered canonical root
        r, power = root(w)
        conj, c = cyclic_reduce(r)
        exp = power * e
        if c.letters not in vertices:
            k2, c_inv = cyclic_reduce(c.word.inverse())
            if c_inv.letters in vertices:
                return conj * k2, c_inv, -exp
            vertices[c.letters] = None
        return conj, c, exp

    relations, subs, trivial = [], [], 0
    for e in g.edges:
        if not e.u:
            trivial += 1
            continue
        gu, cu, mu = normalize(lift(e.u, e.source), e.m)
        gv, cv, nv = normalize(lift(e.v, e.target), e.n)
        relations.append(Relation(e.name, cu, mu, cv, nv))
        if gu or gv:
            subs.append(Substitution(e.name, gv, gu.inverse()))
    return HnnPresentation(k, tuple(relations), trivial, len(g.vertices) - 1, tuple(subs))


def _parse_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{what} must be an integer")
    return value


def graph_from_json(data: dict) -> GraphOfGroups:
    try:
        vertices = tuple(Vertex(str(v["name"]), _parse_int(v["rank"], "vertex rank")) for v in data["vertices"])
        ranks = {v.name: v.rank for v in vertices}
        edges = []
        for i, e in enumerate(data.get("edges", [])):
            src, dst = str(e["from"]), str(e["to"])
            if src not in ranks or dst not in ranks:
                raise InputError(f"edge {i} refers to an unknown vertex")
            edges.append(
                Edge(
                    str(e.get("name", f"q{i + 1}")),
                    src,
                    dst,
                    Word.parse(str(e.get("u", "")), ranks[src]),
                    Word.parse(str(e.get("v", "")), ranks[dst]),
                    _parse_int(e.get("m", 1), "m"),
                    _parse_int(e.get("n", 1), "n"),
                )
            )
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed graph of groups: {exc}") from exc
    return GraphOfGroups(vertices, tuple(edges))


def presentation_from_json(data: dict) -> HnnPresentation:
    """Accept a graph of groups, a single-vertex HNN description, or
    ``{"baumslag_solitar": [n, m]}``; return the normalized presentation."""
    if not isinstance(data, dict):
        raise InputError("presentation JSON must be an object")
    if "baumslag_solitar" in data:
        n, m = data["baumslag_solitar"]
        return baumslag_solitar(_parse_int(n, "n"), _parse_int(m, "m"))
    if "vertices" in data:
        return collapse_to_single_vertex(graph_from_json(data))
    if "base_rank" in data:
        k = _parse_int(data["base_rank"], "base_rank")
        edges = [
            {"name": r.get("name", f"q{i + 1}"), "from": "v", "to": "v", **{key: r[key] for key in ("u", "v") if key in r},
             "m": r.get("m", 1), "n": r.get("n", 1)}
            for i, r in enumerate(data.get("relations", []))
        ]
        extra = _parse_int(data.get("extra_free_rank", 0), "extra_free_rank")
        edges += [{"name": f"f{i + 1}", "from": "v", "to": "v"} for i in range(extra)]
        return collapse_to_single_vertex(graph_from_json({"vertices": [{"name": "v", "rank": k}], "edges": edges}))
    raise InputError("unrecognized presentation JSON")


def load_presentation(path) -> HnnPresentation:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: {exc}") from exc
    return presentation_from_json(data)


# ---------------------------------------------------------------- the graph Gamma


@dataclass(frozen=True)
class GammaEdge:
    relation: int
    u: int
    m: int
    v: int
    n: int


@dataclass(frozen=True)
class GammaGraph:
    vertices: tuple[CyclicWord, ...]
    edges: tuple[GammaEdge, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        for e in self.edges:
            if not (0 <= e.u < len(self.vertices) and 0 <= e.v < len(self.vertices)):
                raise InputError("Gamma edge endpoint out of range")
            if e.m == 0 or e.n == 0:
                raise InputError("Gamma labels must be nonzero")

    def step(self, edge: int, direction: int) -> tuple[int, int, int, int]:
        """(source, target, departure label, arrival label) of a traversal."""
        e = self.edges[edge]
        if direction == 1:
            return e.u, e.v, e.m, e.n
        if direction == -1:
            return e.v, e.u, e.n, e.m
        raise InputError("direction must be +1 or -1")

    def to_json(self) -> dict:
        return {
            "vertices": [c.word.text for c in self.vertices],
            "edges": [{"relation": e.relation, "u": e.u, "m": e.m, "v": e.v, "n": e.n} for e in self.edges],
        }


Walk = Sequence[tuple[int, int]]


def build_gamma(h: HnnPresentation) -> GammaGraph:
    roots = h.roots
    index = {c: i for i, c in enumerate(roots)}
    edges = tuple(GammaEdge(j, index[r.u], r.m, index[r.v], r.n) for j, r in enumerate(h.relations))
    return GammaGraph(tuple(roots), edges)


def _check_walk(g: GammaGraph, path: Walk) -> None:
    here = None
    for edge, d in path:
        if not 0 <= edge < len(g.edges):
            raise InputError(f"edge index {edge} out of range")
        src, dst, _, _ = g.step(edge, d)
        if here is not None and src != here:
            raise InputError("consecutive edges of the walk are not adjacent")
        here = dst


def loop_product(g: GammaGraph, path: Walk) -> int:
    """Product of the labels at the ends through which the walk departs.

    >>> G = build_gamma(baumslag_solitar(1, 2))
    >>> loop_product(G, [(0, 1)]), loop_product(G, reverse_walk([(0, 1)]))
    (1, 2)
    """
    _check_walk(g, path)
    return math.prod(g.step(e, d)[2] for e, d in path)


def reverse_walk(path: Walk) -> list[tuple[int, int]]:
    return [(e, -d) for e, d in reversed(path)]


@dataclass(frozen=True)
class ComponentReport:
    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    euler_characteristic: int
    is_clean: bool
    embedded_cycle: Optional[tuple[tuple[int, int], ...]] = None
    lp_forward: Optional[int] = None
    lp_backward: Optional[int] = None
    lp_C: Optional[int] = None
    # None when the component has no well-defined lp(C)
    prime_set: Optional[frozenset] = frozenset()

    def to_json(self) -> dict:
        big = lambda x: None if x is None else str(x)
        return {
            "vertices": list(self.vertices),
            "edges": list(self.edges),
            "euler_characteristic": self.euler_characteristic,
            "is_clean": self.is_clean,
            "embedded_cycle": None if self.embedded_cycle is None else [list(s) for s in self.embedded_cycle],
            "lp_forward": big(self.lp_forward),
            "lp_backward": big(self.lp_backward),
            "lp_C": big(self.lp_C),
            "prime_set": None if self.prime_set is None else sorted(self.prime_set),
        }


@dataclass
class _Component:
    vertices: list
    edges: list
    tree: set
    parent: dict  # vertex -> (edge, direction) of the tree step arriving there
    potential: dict
    unbalanced: list  # non-tree edges closing an unbalanced cycle


def _components(g: GammaGraph) -> list[_Component]:
    adjacency: dict[int, list[tuple[int, int]]] = {i: [] for i in range(len(g.vertices))}
    for j, e in enumerate(g.edges):
        adjacency[e.u].append((j, 1))
        adjacency[e.v].append((j, -1))
    seen, out = set(), []
    for start in range(len(g.vertices)):
        if start in seen:
            continue
        seen.add(start)
        comp = _Component([start], [], set(), {start: None}, {start: Fraction(1)}, [])
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for j, d in adjacency[x]:
                _, y, dep, arr = g.step(j, d)
                if y not in seen:
                    seen.add(y)
                    comp.vertices.append(y)
                    comp.tree.add(j)
                    comp.parent[y] = (j, d)
                    comp.potential[y] = comp.potential[x] * Fraction(abs(dep), abs(arr))
                    queue.append(y)
        comp.edges = sorted({j for x in comp.vertices for j, _ in adjacency[x]})
        comp.vertices.sort()
        for j in comp.edges:
            if j in comp.tree:
                continue
            e = g.edges[j]
            if comp.potential[e.u] * Fraction(abs(e.m), abs(e.n)) != comp.potential[e.v]:
                comp.unbalanced.append(j)
        out.append(comp)
    return out


def _tree_path(comp: _Component, g: GammaGraph, x: int) -> list[tuple[int, int]]:
    """Tree walk from the component root to x."""
    path = []
    while comp.parent[x] is not None:
        j, d = comp.parent[x]
        path.append((j, d))
        x = g.step(j, d)[0]
    return path[::-1]


def _reduce_walk(g: GammaGraph, path: Walk) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for step in path:
        if out and out[-1] == (step[0], -step[1]):
            out.pop()
        else:
            out.append(step)
    return out


def _cyclic_walk(g: GammaGraph, path: Walk) -> list[tuple[int, int]]:
    path = _reduce_walk(g, path)
    while len(path) > 1 and path[0] == (path[-1][0], -path[-1][1]):
        path = path[1:-1]
    return path


def _fundamental_cycle(comp: _Component, g: GammaGraph, j: int) -> list[tuple[int, int]]:
    """The non-tree edge j followed by the tree path back: a simple cycle."""
    e = g.edges[j]
    to_u, to_v = _tree_path(comp, g, e.u), _tree_path(comp, g, e.v)
    common = 0
    while common < min(len(to_u), len(to_v)) and to_u[common] == to_v[common]:
        common += 1
    return [(j, 1)] + reverse_walk(to_v[common:]) + to_u[common:]


def _primes(n: int) -> frozenset:
    return frozenset(int(p) for p in sympy.primefactors(abs(n)))


def _report(g: GammaGraph, comp: _Component) -> ComponentReport:
    chi = len(comp.vertices) - len(comp.edges)
    clean = not comp.unbalanced
    cycle = lp_f = lp_b = lp_c = None
    primes: Optional[frozenset] = frozenset()
    if chi == 0:
        (j,) = [j for j in comp.edges if j not in comp.tree]
        cycle = tuple(_fundamental_cycle(comp, g, j))
        lp_f = loop_product(g, cycle)
        lp_b = loop_product(g, reverse_walk(cycle))
        if not clean:
            if abs(lp_f) == 1:
                lp_c = lp_b
            elif abs(lp_b) == 1:
                lp_c = lp_f
    if not clean:
        primes = _primes(lp_c) if lp_c is not None else None
    return ComponentReport(tuple(comp.vertices), tuple(comp.edges), chi, clean, cycle, lp_f, lp_b, lp_c, primes)


def analyze_components(g: GammaGraph) -> list[ComponentReport]:
    """One report per connected component, ordered by least vertex."""
    return [_report(g, comp) for comp in _components(g)]


# ---------------------------------------------------------------- mixed words


def _mixed_rank(h: HnnPresentation) -> int:
    return h.base_rank + h.stable_count


def parse_mixed(h: HnnPresentation, text: str) -> Word:
    """Parse a word in base generators and stable letters.

    Tokens are whitespace separated. A token is a stable letter name,
    ``name^-1``, or a base word in text syntax; inside a base word a
    single-letter stable name may also appear, uppercase for its inverse.
    """
    k = h.base_rank
    names = {r.name: k + j + 1 for j, r in enumerate(h.relations)}
    single = {name: idx for name, idx in names.items() if len(name) == 1}
    letters: list[int] = []
    for token in text.split():
        if token == "1":
            continue
        if token in names:
            letters.append(names[token])
            continue
        if token.endswith("^-1") and token[:-3] in names:
            letters.append(-names[token[:-3]])
            continue
        for ch in token:
            if ch in single:
                letters.append(single[ch])
            elif ch.lower() in single and ch.isupper():
                letters.append(-single[ch.lower()])
            elif "a" <= ch.lower() <= "z" and ord(ch.lower()) - ord("a") < k:
                i = ord(ch.lower()) - ord("a") + 1
                letters.append(i if ch.islower() else -i)
            else:
                raise InputError(f"cannot parse {token!r} as a word in the presentation")
    return Word(_mixed_rank(h), _free_reduce(letters))


def format_mixed(h: HnnPresentation, w: Word) -> str:
    k = h.base_rank
    tokens, base = [], []
    for x in w.letters:
        if abs(x) <= k:
            base.append(x)
            continue
        if base:
            tokens.append(Word._trusted(k, tuple(base)).text)
            base = []
        name = h.relations[abs(x) - k - 1].name
        tokens.append(name if x > 0 else f"{name}^-1")
    if base:
        tokens.append(Word._trusted(k, tuple(base)).text)
    return " ".join(tokens) or "1"


def _power_of(s: tuple[int, ...], c: tuple[int, ...], step: int) -> Optional[int]:
    """t with s = (c^step)^t literally, or None."""
    if not s:
        return 0
    n = len(c) * abs(step)
    if len(s) % n:
        return None
    t = len(s) // n
    block = c * abs(step) if step > 0 else _inv(c) * abs(step)
    if s == block * t:
        return t
    if s == _inv(block) * t:
        return -t
    return None


def britton_reduce(h: HnnPresentation, w: Word | str) -> Word:
    """Pinch q s q^-1 (s a power of u^m) and q^-1 s q (s a power of v^n)
    until none applies. The result is empty only when the input is certified
    trivial.

    >>> B = baumslag_solitar(1, 2)
    >>> britton_reduce(B, "t a t^-1 AA")
    Word(rank=2, letters=())
    """
    if isinstance(w, str):
        w = parse_mixed(h, w)
    if w.rank != _mixed_rank(h):
        raise InputError("mixed word has the wrong rank")
    k = h.base_rank
    letters = w.letters
    changed = True
    while changed:
        changed = False
        stable = [i for i, x in enumerate(letters) if abs(x) > k]
        for i, j in zip(stable, stable[1:]):
            x, y = letters[i], letters[j]
            if x != -y:
                continue
            rel = h.relations[abs(x) - k - 1]
            s = letters[i + 1 : j]
            if x > 0:
                t = _power_of(s, rel.u.letters, rel.m)
                new = (rel.v.word ** (rel.n * t)).letters if t is not None else None
            else:
                t = _power_of(s, rel.v.letters, rel.n)
                new = (rel.u.word ** (rel.m * t)).letters if t is not None else None
            if new is not None:
                letters = _free_reduce(letters[:i] + new + letters[j + 1 :])
                changed = True
                break
    return Word._trusted(w.rank, letters)


def relator(h: HnnPresentation, j: int) -> Word:
    """q u^m q^-1 v^-n as a mixed word."""
    r = h.relations[j]
    q = h.base_rank + j + 1
    lift = lambda c, e: (c.word ** e).letters
    return Word(_mixed_rank(h), _free_reduce((q,) + lift(r.u, r.m) + (-q,) + lift(r.v, -r.n)))


# ---------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class CycleWitness:
    walk: tuple[tuple[int, int], ...]
    lp_forward: int
    lp_backward: int

    def to_json(self) -> dict:
        return {"walk": [list(s) for s in self.walk], "lp_forward": str(self.lp_forward), "lp_backward": str(self.lp_backward)}


@dataclass(frozen=True)
class UnbalancedWitness:
    """h g^n h^-1 = g^m with |n| != |m|."""

    g: Word
    h: Word
    n: int
    m: int
    walk: tuple[tuple[int, int], ...]
    certified: bool

    def identity_word(self) -> Word:
        return self.h * self.g**self.n * self.h.inverse() * self.g ** (-self.m)


@dataclass(frozen=True)
class Verdict:
    rf: str
    lerf: bool
    components: tuple[ComponentReport, ...]
    cycle_witness: Optional[CycleWitness] = None
    unbalanced_witness: Optional[UnbalancedWitness] = None

    @property
    def relies_on_citation(self) -> bool:
        return self.rf == RF_CANDIDATE

    def to_json(self, h: HnnPresentation) -> dict:
        u = self.unbalanced_witness
        return {
            "rf": self.rf,
            "lerf": self.lerf,
            "relies_on_citation": self.relies_on_citation,
            "applies_to": "G * F_r, hence to G",
            "components": [c.to_json() for c in self.components],
            "cycle_witness": None if self.cycle_witness is None else self.cycle_witness.to_json(),
            "unbalanced_witness": None
            if u is None
            else {
                "g": format_mixed(h, u.g),
                "h": format_mixed(h, u.h),
                "n": str(u.n),
                "m": str(u.m),
                "walk": [list(s) for s in u.walk],
                "certified": u.certified,
            },
        }


def unbalanced_witness(h: HnnPresentation, g: GammaGraph, walk: Walk) -> UnbalancedWitness:
    """Turn a closed walk in Gamma into words with h g^lp(walk) h^-1 = g^lp(reverse)."""
    _check_walk(g, walk)
    if not walk or g.step(*walk[0])[0] != g.step(*walk[-1])[1]:
        raise InputError("the walk is not closed")
    k, rank = h.base_rank, _mixed_rank(h)
    start = g.step(*walk[0])[0]
    gw = Word._trusted(rank, g.vertices[start].letters)
    stable = tuple(d * (k + g.edges[e].relation + 1) for e, d in reversed(walk))
    hw = Word._trusted(rank, _free_reduce(stable))
    n, m = loop_product(g, walk), loop_product(g, reverse_walk(walk))
    w = UnbalancedWitness(gw, hw, n, m, tuple(walk), False)
    return UnbalancedWitness(gw, hw, n, m, tuple(walk), not britton_reduce(h, w.identity_word()))


def _closed_walks(comp: _Component, g: GammaGraph, max_len: int):
    """Cyclically reduced closed walks built from words in the fundamental
    cycles, shortest words first."""
    basis = [
        _tree_path(comp, g, g.edges[j].u) + [(j, 1)] + reverse_walk(_tree_path(comp, g, g.edges[j].v))
        for j in comp.edges
        if j not in comp.tree
    ]
    gens = [(i, s) for i in range(len(basis)) for s in (1, -1)]
    for length in range(1, max_len + 1):
        for word in itertools.product(gens, repeat=length):
            if any(a[0] == b[0] and a[1] == -b[1] for a, b in zip(word, word[1:])):
                continue
            walk = []
            for i, s in word:
                walk += basis[i] if s == 1 else reverse_walk(basis[i])
            walk = _cyclic_walk(g, walk)
            if walk:
                yield walk


def _not_rf_cycle(comp: _Component, g: GammaGraph, max_len: int = 6) -> Optional[list]:
    for walk in _closed_walks(comp, g, max_len):
        f, b = abs(loop_product(g, walk)), abs(loop_product(g, reverse_walk(walk)))
        if f >= 2 and b >= 2 and f != b:
            return walk
    return None


def decide(h: HnnPresentation) -> Verdict:
    g = build_gamma(h)
    comps = _components(g)
    reports = tuple(_report(g, c) for c in comps)
    lerf = all(r.is_clean for r in reports)
    rf, cycle, unbalanced = RF, None, None
    for comp, rep in zip(comps, reports):
        if rep.is_clean:
            continue
        if unbalanced is None:
            unbalanced = unbalanced_witness(h, g, _fundamental_cycle(comp, g, comp.unbalanced[0]))
        if rep.euler_characteristic != 0 or rep.lp_C is None:
            walk = _not_rf_cycle(comp, g)
            if walk is None:
                raise RuntimeError("no cycle witness found for a non-residually-finite component")
            if cycle is None:
                cycle = CycleWitness(tuple(walk), loop_product(g, walk), loop_product(g, reverse_walk(walk)))
            rf = NOT_RF
        elif rf != NOT_RF:
            rf = RF_CANDIDATE
    return Verdict(rf, lerf, reports, cycle, unbalanced)


def edge_closure_descriptor(h: HnnPresentation) -> list[dict]:
    """For each relation, the primes whose part of the edge group dies in the
    profinite completion."""
    verdict = decide(h)
    if verdict.rf == NOT_RF:
        raise InputError("edge closures are only described for residually finite presentations")
    g = build_gamma(h)
    owner = {}
    for rep in verdict.components:
        for x in rep.vertices:
            owner[x] = rep
    out = []
    for e in g.edges:
        primes = sorted(owner[e.u].prime_set)
        desc = "all primes" if not primes else "all primes except " + ", ".join(map(str, primes))
        out.append({"relation": h.relations[e.relation].name, "primes": primes, "description": desc})
    return out


# ---------------------------------------------------------------- cohomology


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    mat = [[x % p for x in row] for row in rows]
    rank, cols = 0, len(mat[0]) if mat else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(mat)) if mat[r][c]), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        inv = pow(mat[rank][c], -1, p)
        mat[rank] = [x * inv % p for x in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][c]:
                f = mat[r][c]
                mat[r] = [(x - f * y) % p for x, y in zip(mat[r], mat[rank])]
        rank += 1
    return rank


def abelianized_relations(h: HnnPresentation) -> list[list[int]]:
    """Rows m [u] - n [v] over the base generators."""
    rows = []
    for r in h.relations:
        row = [0] * h.base_rank
        for c, e in ((r.u, r.m), (r.v, -r.n)):
            for x in c.letters:
                row[abs(x) - 1] += e * (1 if x > 0 else -1)
        rows.append(row)
    return rows


@dataclass(frozen=True)
class CohomologyReport:
    p: int
    h1: int
    h2: int
    A_p_size: int
    E_p_size: int

    @property
    def consistency(self) -> bool:
        return self.A_p_size == self.E_p_size

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "h1_abstract": self.h1,
            "h2_abstract": self.h2,
            "A_p_size": self.A_p_size,
            "E_p_size": self.E_p_size,
            "consistency": self.consistency,
        }


def cohomology_report(h: HnnPresentation, p: int) -> CohomologyReport:
    if p < 2 or not sympy.isprime(p):
        raise InputError(f"{p} is not a prime")
    rows = abelianized_relations(h)
    l = h.stable_count
    rank = rank_mod_p(rows, p) if rows else 0
    h1 = h.base_rank + l + h.extra_free_rank - rank
    h2 = h1 - (h.base_rank + h.extra_free_rank)
    a = e = 0
    for rep in analyze_components(build_gamma(h)):
        if rep.prime_set and p in rep.prime_set:
            a += len(rep.vertices)
            e += len(rep.edges)
    return CohomologyReport(p, h1, h2, a, e)


# ---------------------------------------------------------------- sampling


def random_presentation(
    rng: random.Random,
    max_rank: int = 4,
    max_relations: int = 5,
    max_root_len: int = 4,
    max_exponent: int = 5,
) -> HnnPresentation:
    """A random single-vertex tubular presentation drawn from a small pool of
    roots, so that Gamma tends to have cycles."""
    k = rng.randint(1, max_rank)
    pool: list[Word] = []
    for _ in range(rng.randint(1, 3)):
        while True:
            w = random_word(k, rng.randint(1, max_root_len), rng)
            if w and w.is_cyclically_reduced() and root(w)[1] == 1:
                break
        pool.append(w)
    exponent = lambda: rng.choice([1, -1]) * rng.randint(1, max_exponent)
    edges = [
        Edge(f"q{j + 1}", "v", "v", rng.choice(pool), rng.choice(pool), exponent(), exponent())
        for j in range(rng.randint(1, max_relations))
    ]
    return collapse_to_single_vertex(GraphOfGroups((Vertex("v", k),), tuple(edges)))
