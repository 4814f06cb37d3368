"""Diagonal projections in the Calkin algebra ``B(l2) / K(l2)``.

A diagonal projection on ``l2`` is determined by its support, a subset of
``N = {0, 1, 2, ...}``. Modulo compact operators only the support up to finite
symmetric difference matters. Here supports are *eventually periodic* sets:
a union of residue classes mod ``m`` with finitely many points added or
removed, which is closed under all Boolean operations and makes every
question below decidable by residue arithmetic.

Translation table used throughout:

==============================  =========================================
operator language               set language
==============================  =========================================
``P_s P_t``                     ``s & t``
compact                         finite
nonzero in the Calkin algebra   infinite
``1 - P_s``                     complement
``P_s`` a Calkin zero divisor   ``s`` infinite and co-infinite
==============================  =========================================

The graph modelled is the induced subgraph of the positive zero-divisor graph
of the Calkin algebra on classes of diagonal projections. Paths found here are
paths in the full graph. The length-3 lower bound relies on the
``UnionCofinite`` obstruction: if ``G P_s`` and ``G P_t`` are compact and
``P_{s|t}`` differs from the identity by a finite-rank projection, then ``G``
itself is compact. That argument holds for *every* ``G`` in ``B(H)``, not just
diagonal ones.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import NotAVertex, NotInfinite, ParseError


def _divisors(m: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(m) + 1) if m % d == 0]
    return sorted(set(small + [m // d for d in small]))


def _minimal_period(modulus: int, residues: frozenset[int]) -> tuple[int, frozenset[int]]:
    for d in _divisors(modulus):
        reduced = frozenset(r % d for r in residues)
        if all((r % d in reduced) == (r in residues) for r in range(modulus)):
            return d, reduced
    raise AssertionError("unreachable: the modulus itself is always a period")


@dataclass(frozen=True, init=False)
class EPSet:
    """An eventually periodic subset of ``N``.

    ``EPSet(m, R, plus, minus)`` denotes ``({n : n % m in R} | plus) - minus``.
    Construction always normalizes: the modulus becomes minimal and the
    corrections become the exact finite difference from the periodic part
    (``plus`` disjoint from it, ``minus`` inside it). Equal sets therefore
    compare and hash equal.
    """

    modulus: int
    residues: frozenset[int]
    plus: frozenset[int] = field(default=frozenset())
    minus: frozenset[int] = field(default=frozenset())

    def __init__(self, modulus: int, residues: Iterable[int] = (), plus: Iterable[int] = (), minus: Iterable[int] = ()):
        modulus = int(modulus)
        if modulus < 1:
            raise ValueError(f"modulus must be positive, got {modulus}")
        residues = frozenset(int(r) for r in residues)
        if any(not 0 <= r < modulus for r in residues):
            raise ValueError(f"residues must lie in [0, {modulus})")
        plus = frozenset(int(n) for n in plus)
        minus = frozenset(int(n) for n in minus)
        if any(n < 0 for n in plus | minus):
            raise ValueError("corrections must be natural numbers")
        m, res = _minimal_period(modulus, residues)
        members = {n for n in plus | minus if (n % m in res or n in plus) and n not in minus}
        object.__setattr__(self, "modulus", m)
        object.__setattr__(self, "residues", res)
        object.__setattr__(self, "plus", frozenset(n for n in members if n % m not in res))
        object.__setattr__(
            self, "minus", frozenset(n for n in plus | minus if n % m in res and n not in members)
        )

    # -- constructors -----------------------------------------------------

    @classmethod
    def periodic(cls, modulus: int, *residues: int) -> EPSet:
        return cls(modulus, residues)

    @classmethod
    def finite(cls, elements: Iterable[int]) -> EPSet:
        return cls(1, (), plus=elements)

    @classmethod
    def naturals(cls) -> EPSet:
        return cls(1, (0,))

    @classmethod
    def empty(cls) -> EPSet:
        return cls(1, ())

    # -- membership -------------------------------------------------------

    def __contains__(self, n: int) -> bool:
        if n in self.plus:
            return True
        if n in self.minus:
            return False
        return n % self.modulus in self.residues

    def mask(self, bound: int) -> np.ndarray:
        """Boolean membership vector for ``0..bound-1``."""
        table = np.zeros(self.modulus, dtype=bool)
        table[list(self.residues)] = True
        out = table[np.arange(bound) % self.modulus]
        for n in self.plus:
            if n < bound:
                out[n] = True
        for n in self.minus:
            if n < bound:
                out[n] = False
        return out

    @property
    def corrections(self) -> frozenset[int]:
        return self.plus | self.minus

    @property
    def is_finite(self) -> bool:
        return not self.residues

    @property
    def is_cofinite(self) -> bool:
        return len(self.residues) == self.modulus

    @property
    def periodic_part(self) -> EPSet:
        """The Calkin class representative: corrections dropped."""
        return EPSet(self.modulus, self.residues)

    def normalize(self) -> EPSet:
        return EPSet(self.modulus, self.residues, self.plus, self.minus)

    # -- Boolean algebra --------------------------------------------------

    def __or__(self, other: EPSet) -> EPSet:
        return epset_boolean("union", self, other)

    def __and__(self, other: EPSet) -> EPSet:
        return epset_boolean("intersect", self, other)

    def __sub__(self, other: EPSet) -> EPSet:
        return epset_boolean("difference", self, other)

    def __xor__(self, other: EPSet) -> EPSet:
        return epset_boolean("symdiff", self, other)

    def __invert__(self) -> EPSet:
        return complement(self)

    def issubset(self, other: EPSet) -> bool:
        return self - other == EPSet.empty()

    def __le__(self, other: EPSet) -> bool:
        return self.issubset(other)

    def __str__(self):
        return format_epset(self)

    def __repr__(self):
        return f"EPSet({format_epset(self)!r})"


_OPS = {
    "union": lambda x, y: x or y,
    "intersect": lambda x, y: x and y,
    "difference": lambda x, y: x and not y,
    "symdiff": lambda x, y: x != y,
}


def complement(s: EPSet) -> EPSet:
    return EPSet(
        s.modulus,
        set(range(s.modulus)) - s.residues,
        plus=s.minus,
        minus=s.plus,
    )


def epset_boolean(op: str, s: EPSet, t: EPSet | None = None) -> EPSet:
    """Exact Boolean operation on eventually periodic sets.

    ``op`` is one of ``union``, ``intersect``, ``complement`` (``t`` ignored),
    ``difference`` or ``symdiff``. The periodic part is computed on residues
    mod ``lcm(m_s, m_t)``; the result can only disagree with it on the
    finitely many corrections of the operands, which are patched one by one.
    """
    if op == "complement":
        return complement(s)
    try:
        f = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown Boolean operation {op!r}") from None
    if t is None:
        raise ValueError(f"{op} needs two operands")
    m = math.lcm(s.modulus, t.modulus)
    residues = {
        r for r in range(m)
        if f(r % s.modulus in s.residues, r % t.modulus in t.residues)
    }
    plus, minus = set(), set()
    for n in s.corrections | t.corrections:
        actual = f(n in s, n in t)
        if actual != (n % m in residues):
            (plus if actual else minus).add(n)
    return EPSet(m, residues, plus, minus)


def cardinality_class(s: EPSet) -> int | float:
    """Number of elements, or ``math.inf``."""
    return len(s.plus) if s.is_finite else math.inf


# -- the graph -------------------------------------------------------------


def is_vertex(s: EPSet) -> bool:
    """``P_s`` is a nonzero positive zero divisor of the Calkin algebra."""
    return not s.is_finite and not s.is_cofinite


def _require_vertices(*sets: EPSet):
    for s in sets:
        if not is_vertex(s):
            raise NotAVertex(f"{s} is finite or cofinite; its projection is 0 or 1 in the Calkin algebra")


def same_class(s: EPSet, t: EPSet) -> bool:
    """Equal modulo finite sets, i.e. the same Calkin projection."""
    return (s ^ t).is_finite


def is_edge(s: EPSet, t: EPSet) -> bool:
    _require_vertices(s, t)
    return (s & t).is_finite and not same_class(s, t)


@dataclass(frozen=True)
class CalkinProjection:
    """The Calkin-algebra image of the diagonal projection onto ``support``.

    Two projections are equal when their supports differ by a finite set.
    """

    support: EPSet

    @property
    def key(self) -> tuple[int, frozenset[int]]:
        p = self.support.periodic_part
        return p.modulus, p.residues

    def __eq__(self, other):
        if not isinstance(other, CalkinProjection):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __str__(self):
        return f"P[{self.support}]"


def split_orthogonal(s1: EPSet, s2: EPSet) -> tuple[EPSet, EPSet]:
    """Disjoint infinite ``L <= s1`` and ``F <= s2``.

    When ``s1 & s2`` is infinite with residues ``R`` mod ``m``, it is split by
    doubling the modulus: ``L`` keeps residues ``R`` mod ``2m`` and ``F``
    keeps ``R + m``. Otherwise the two differences already work.
    """
    for s in (s1, s2):
        if s.is_finite:
            raise NotInfinite(f"{s} is finite")
    both = s1 & s2
    if both.is_finite:
        return s1 - s2, s2 - s1
    m = both.modulus
    low = EPSet(2 * m, both.residues)
    high = EPSet(2 * m, {r + m for r in both.residues})
    return both & low, both & high


@dataclass(frozen=True)
class Certificate:
    """A checkable reason why ``d(s, t)`` is at least ``bound``.

    ``NotEqual``: ``s`` and ``t`` are different Calkin classes (``d >= 1``).
    ``IntersectionInfinite``: ``P_s P_t`` is not compact (``d >= 2``).
    ``UnionCofinite``: no nonzero ``G`` annihilates both (``d >= 3``).
    """

    kind: str
    s: EPSet
    t: EPSet

    @property
    def bound(self) -> int:
        return {"NotEqual": 1, "IntersectionInfinite": 2, "UnionCofinite": 3}[self.kind]

    def verify(self) -> bool:
        """Re-check from raw residue tables, bypassing the EPSet operations.

        Finite corrections never change whether a combination of residue
        classes is empty, so scanning one full period is exact.
        """
        s, t = self.s, self.t
        m = math.lcm(s.modulus, t.modulus)
        in_s = [r % s.modulus in s.residues for r in range(m)]
        in_t = [r % t.modulus in t.residues for r in range(m)]
        differ = any(x != y for x, y in zip(in_s, in_t))
        meet = any(x and y for x, y in zip(in_s, in_t))
        cover = all(x or y for x, y in zip(in_s, in_t))
        if self.kind == "NotEqual":
            return differ
        if self.kind == "IntersectionInfinite":
            return differ and meet
        if self.kind == "UnionCofinite":
            return differ and meet and cover
        return False

    def to_json(self) -> dict:
        return {"kind": self.kind, "s": str(self.s), "t": str(self.t), "bound": self.bound}


@dataclass(frozen=True)
class DistanceResult:
    distance: int
    path: tuple[CalkinProjection, ...]
    certificate: Certificate | None

    def validate(self) -> bool:
        """Every consecutive pair is an edge and the certificate re-checks."""
        if len(self.path) != self.distance + 1:
            return False
        for u, v in zip(self.path, self.path[1:]):
            if not is_edge(u.support, v.support):
                return False
        if self.distance == 0:
            return self.certificate is None
        return self.certificate is not None and self.certificate.verify() and self.certificate.bound == self.distance

    def to_json(self) -> dict:
        return {
            "distance": self.distance,
            "path": [str(p.support) for p in self.path],
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "validated": self.validate(),
        }


def common_neighbor_obstruction(s: EPSet, t: EPSet) -> Certificate | None:
    """``UnionCofinite`` when ``s | t`` is cofinite, so nothing nonzero kills both."""
    _require_vertices(s, t)
    if complement(s | t).is_finite:
        return Certificate("UnionCofinite", s, t)
    return None


def distance(s: EPSet, t: EPSet) -> DistanceResult:
    """Exact graph distance between ``P_s`` and ``P_t``, with path and certificate."""
    _require_vertices(s, t)
    ps, pt = CalkinProjection(s), CalkinProjection(t)
    if same_class(s, t):
        return DistanceResult(0, (ps,), None)
    if (s & t).is_finite:
        return DistanceResult(1, (ps, pt), Certificate("NotEqual", s, t))
    outside = complement(s | t)
    if not outside.is_finite:
        return DistanceResult(2, (ps, CalkinProjection(outside), pt), Certificate("IntersectionInfinite", s, t))
    low, high = split_orthogonal(complement(s), complement(t))
    return DistanceResult(
        3,
        (ps, CalkinProjection(low), CalkinProjection(high), pt),
        Certificate("UnionCofinite", s, t),
    )


H0 = EPSet(2, {0})
H1 = EPSet(4, {0, 1, 3})
H2 = EPSet(2, {1})


def distance_three_witness() -> tuple[EPSet, EPSet, EPSet, DistanceResult]:
    """The standard diameter-3 pair.

    ``H0`` is the even coordinates, ``H1`` everything except ``4k + 2``, ``H2``
    the odd coordinates. ``H2 <= H1`` and ``H0 | H2 = N`` make ``H0 | H1``
    cofinite while ``H0 & H1`` stays infinite.
    """
    h0, h1, h2 = H0, H1, H2
    assert h2.issubset(h1)
    assert (h0 | h2) == EPSet.naturals()
    assert (h0 & h2) == EPSet.empty()
    assert not (h0 & h1).is_finite
    return h0, h1, h2, distance(h0, h1)


def sample_epset(seed: int, max_modulus: int = 8) -> EPSet:
    """Deterministic random vertex: proper nonempty residue set plus up to 8 toggled points."""
    if max_modulus < 2:
        raise ValueError("max_modulus must be at least 2")
    rng = random.Random(seed)
    m = rng.randint(2, max_modulus)
    k = rng.randint(1, m - 1)
    residues = set(rng.sample(range(m), k))
    toggles = set(rng.sample(range(10 * m), rng.randint(0, 8)))
    plus = {n for n in toggles if n % m not in residues}
    minus = toggles - plus
    return EPSet(m, residues, plus, minus)


# -- text format -----------------------------------------------------------


def format_epset(s: EPSet) -> str:
    out = f"per({s.modulus};{','.join(map(str, sorted(s.residues)))})"
    if s.plus:
        out += " + {" + ",".join(map(str, sorted(s.plus))) + "}"
    if s.minus:
        out += " - {" + ",".join(map(str, sorted(s.minus))) + "}"
    return out


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<word>per)|(?P<sym>[();,{}+\-]))")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> tuple[str, str, int] | None:
        m = _TOKEN.match(self.text, self.pos)
        if m is None:
            rest = self.text[self.pos:]
            if rest.strip():
                return ("bad", rest.strip()[0], self.pos + len(rest) - len(rest.lstrip()))
            return None
        kind = m.lastgroup
        return kind, m.group(kind), m.start(kind)

    def take(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        if tok[0] == "bad":
            raise ParseError(f"unexpected character {tok[1]!r}", tok[2])
        self.pos = _TOKEN.match(self.text, self.pos).end()
        return tok

    def expect(self, value: str) -> int:
        kind, text, at = self.take()
        if text != value:
            raise ParseError(f"expected {value!r}, found {text!r}", at)
        return at

    def number(self) -> tuple[int, int]:
        kind, text, at = self.take()
        if kind != "num":
            raise ParseError(f"expected a number, found {text!r}", at)
        return int(text), at

    def number_list(self, closer: str) -> list[int]:
        out = []
        tok = self.peek()
        if tok is not None and tok[1] == closer:
            self.take()
            return out
        while True:
            n, _ = self.number()
            out.append(n)
            kind, text, at = self.take()
            if text == closer:
                return out
            if text != ",":
                raise ParseError(f"expected ',' or {closer!r}, found {text!r}", at)


def parse_epset(text: str) -> EPSet:
    """Parse ``per(m; r1,r2,...) [+ {a,...}] [- {b,...}]`` (whitespace-insensitive)."""
    sc = _Scanner(text)
    sc.expect("per")
    sc.expect("(")
    m, at = sc.number()
    if m < 1:
        raise ParseError("modulus must be positive", at)
    sc.expect(";")
    residues = sc.number_list(")")
    bad = [r for r in residues if r >= m]
    if bad:
        raise ParseError(f"residue {bad[0]} out of range for modulus {m}", at)
    plus: list[int] = []
    minus: list[int] = []
    seen_plus = seen_minus = False
    while sc.peek() is not None:
        kind, sym, at = sc.take()
        if sym == "+" and not seen_plus and not seen_minus:
            sc.expect("{")
            plus = sc.number_list("}")
            seen_plus = True
        elif sym == "-" and not seen_minus:
            sc.expect("{")
            minus = sc.number_list("}")
            seen_minus = True
        else:
            raise ParseError(f"unexpected {sym!r}", at)
    return EPSet(m, residues, plus, minus)
