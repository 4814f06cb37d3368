"""Piecewise-linear model of the commutative algebra ``C[0, 1]``.

A :class:`PLFunction` is given by its values at the breakpoints of a
:class:`GridSpace` and is linear in between. The model is exact for the
questions asked here:

* sup norms are attained at breakpoints, so they are computed there;
* for ``f, g >= 0`` the product ``f g`` vanishes identically iff on every
  segment one of them vanishes identically, so products are never formed;
* ``f`` is a zero divisor of ``C[0, 1]`` iff its zero set has interior, i.e.
  iff it vanishes on a whole segment.

``[0, 1]`` is connected, so the algebra has no projections besides 0 and 1
(:func:`pl_projection_scan` confirms this on the grid).
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    GridTooCoarse,
    InvalidPair,
    OutOfRange,
    PreconditionViolated,
    ProductNotZeroOnN,
    SpaceMismatch,
)


@dataclass(frozen=True)
class GridSpace:
    breakpoints: tuple[float, ...]

    def __post_init__(self):
        xs = tuple(float(x) for x in self.breakpoints)
        if len(xs) < 2:
            raise ValueError("a grid needs at least the two endpoints")
        if xs[0] != 0.0 or xs[-1] != 1.0:
            raise ValueError("grid must start at 0 and end at 1")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", xs)

    @classmethod
    def uniform(cls, points: int) -> GridSpace:
        """``points`` equally spaced breakpoints (``points >= 2``)."""
        if points < 2:
            raise ValueError("a uniform grid needs at least 2 points")
        return cls(tuple(i / (points - 1) for i in range(points)))

    def __len__(self):
        return len(self.breakpoints)

    @property
    def segments(self) -> int:
        return len(self.breakpoints) - 1

    def index(self, x: float) -> int:
        """Index of the breakpoint equal to ``x``; ``ValueError`` if ``x`` is not one."""
        return self.breakpoints.index(float(x))


@dataclass(frozen=True)
class PLFunction:
    space: GridSpace
    values: tuple[float, ...]

    def __post_init__(self):
        vs = tuple(float(v) for v in self.values)
        if len(vs) != len(self.space):
            raise ValueError(f"{len(vs)} values for {len(self.space)} breakpoints")
        object.__setattr__(self, "values", vs)

    @classmethod
    def const(cls, space: GridSpace, c: float) -> PLFunction:
        return cls(space, (c,) * len(space))

    @classmethod
    def from_callable(cls, space: GridSpace, fn) -> PLFunction:
        return cls(space, tuple(fn(x) for x in space.breakpoints))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values)

    def __call__(self, x):
        return np.interp(x, self.space.breakpoints, self.values)

    def norm(self) -> float:
        return max(abs(v) for v in self.values)

    def _check(self, other: PLFunction):
        if self.space != other.space:
            raise SpaceMismatch("functions live on different grids")

    def __add__(self, other):
        if isinstance(other, PLFunction):
            self._check(other)
            return PLFunction(self.space, tuple(a + b for a, b in zip(self.values, other.values)))
        return PLFunction(self.space, tuple(a + other for a in self.values))

    __radd__ = __add__

    def __neg__(self):
        return PLFunction(self.space, tuple(-a for a in self.values))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar: float):
        return PLFunction(self.space, tuple(scalar * a for a in self.values))

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"breakpoints": list(self.space.breakpoints), "values": list(self.values)}

    @classmethod
    def from_json(cls, data: dict) -> PLFunction:
        return cls(GridSpace(tuple(data["breakpoints"])), tuple(data["values"]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "f"])
        w.writerows(zip(map(repr, self.space.breakpoints), map(repr, self.values)))
        return buf.getvalue()


def segment_support(f: PLFunction, g: PLFunction) -> list[tuple[bool, bool]]:
    """Per segment: (f vanishes on it, g vanishes on it)."""
    f._check(g)
    fv, gv = f.values, g.values
    return [
        (fv[i] == 0 and fv[i + 1] == 0, gv[i] == 0 and gv[i + 1] == 0)
        for i in range(f.space.segments)
    ]


def product_is_zero(f: PLFunction, g: PLFunction) -> bool:
    """``f g = 0`` identically on ``[0, 1]``."""
    flags = segment_support(f, g)
    if not all(a or b for a, b in flags):
        return False
    return all(min(abs(a), abs(b)) == 0 for a, b in zip(f.values, g.values))


def pl_is_zero_divisor(f: PLFunction) -> bool:
    """True iff ``f`` vanishes on a whole segment (its zero set has interior)."""
    v = f.values
    return any(v[i] == 0 and v[i + 1] == 0 for i in range(len(v) - 1))


def validate_pl_pair(f: PLFunction, g: PLFunction) -> bool:
    """``f, g >= 0``, ``||f|| = ||g|| = 1`` exactly and ``f g = 0``."""
    f._check(g)
    if min(f.values) < 0 or min(g.values) < 0:
        return False
    if max(f.values) != 1.0 or max(g.values) != 1.0:
        return False
    return product_is_zero(f, g)


def disjoint_extension(
    space: GridSpace,
    indices: Sequence[int],
    f_values: Sequence[float],
    g_values: Sequence[float],
) -> tuple[PLFunction, PLFunction]:
    """Extend ``f, g`` given on the breakpoints ``indices`` to ``F, G`` with ``F G = 0``.

    Let ``h = f - g`` on the given points, interpolate it linearly between
    consecutive points (constant beyond the outermost ones), insert a
    breakpoint wherever ``h`` strictly changes sign inside a segment, and set
    ``F = max(h, 0)``, ``G = max(-h, 0)``. The result lives on the refined
    grid; its breakpoints contain every original breakpoint.
    """
    if not (len(indices) == len(f_values) == len(g_values)) or not indices:
        raise ValueError("need matching, nonempty index and value lists")
    order = np.argsort(indices)
    idx = np.asarray(indices)[order]
    if len(set(idx.tolist())) != len(idx) or idx[0] < 0 or idx[-1] >= len(space):
        raise ValueError("indices must be distinct breakpoint indices")
    fv = np.asarray(f_values, dtype=float)[order]
    gv = np.asarray(g_values, dtype=float)[order]
    if np.any((fv < 0) | (fv > 1) | (gv < 0) | (gv > 1)):
        raise OutOfRange("boundary values must lie in [0, 1]")
    if np.any(np.minimum(fv, gv) != 0):
        raise ProductNotZeroOnN("f g must vanish at every given point")

    xs = np.asarray(space.breakpoints)
    h = np.interp(xs, xs[idx], fv - gv)
    h[idx] = fv - gv  # exact at the data points

    new_x, new_h = [xs[0]], [h[0]]
    for i in range(len(xs) - 1):
        a, b = h[i], h[i + 1]
        if (a > 0 > b) or (a < 0 < b):
            t = a / (a - b)
            x = xs[i] + t * (xs[i + 1] - xs[i])
            if not xs[i] < x < xs[i + 1]:
                x = (xs[i] + xs[i + 1]) / 2  # crossing lost to rounding
            new_x.append(x)
            new_h.append(0.0)
        new_x.append(xs[i + 1])
        new_h.append(b)

    refined = GridSpace(tuple(new_x))
    hv = np.asarray(new_h)
    return (
        PLFunction(refined, tuple(np.maximum(hv, 0.0))),
        PLFunction(refined, tuple(np.maximum(-hv, 0.0))),
    )


def projectionless_d_check(f: PLFunction, g: PLFunction) -> float:
    """``||f + g - 1||`` for a valid unit pair; always exactly 1 in ``C[0, 1]``."""
    if not validate_pl_pair(f, g):
        raise InvalidPair("f, g must be positive, of norm 1, with f g = 0")
    return (f + g - 1.0).norm()


def scaled_pair_identity(f: PLFunction, g: PLFunction) -> tuple[float, float]:
    """``(|| ||f|| g + ||g|| f - ||f|| ||g|| ||, ||f|| ||g||)``; the two agree."""
    f._check(g)
    if min(f.values) < 0 or min(g.values) < 0:
        raise PreconditionViolated("f and g must be positive")
    nf, ng = f.norm(), g.norm()
    if nf == 0 or ng == 0:
        raise PreconditionViolated("f and g must be nonzero")
    if not product_is_zero(f, g):
        raise PreconditionViolated("f g must vanish")
    lhs = (nf * g + ng * f - nf * ng).norm()
    return lhs, nf * ng


def zdrr_perturb(a: PLFunction, eps: float) -> tuple[PLFunction, float]:
    """Shift ``a`` down by some ``0 < delta <= eps`` so the result is not a zero divisor.

    ``a - delta`` vanishes on a segment only if ``a`` is flat at height
    ``delta`` there; there are finitely many flat heights, so halving ``eps``
    escapes them after finitely many steps. ``(a - delta)**2`` has the same
    zero set as ``a - delta``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    v = a.values
    flat = {v[i] for i in range(len(v) - 1) if v[i] == v[i + 1]}
    delta = float(eps)
    while True:
        if delta not in flat:
            b = a - delta
            # rounding in a - delta can push ||a - b|| an ulp past eps
            if (a - b).norm() <= eps and not pl_is_zero_divisor(b):
                return b, delta
        delta /= 2


def non_zero_divisor_witness(space: GridSpace) -> PLFunction:
    """The identity function: positive, vanishes at 0 (not invertible), not a zero divisor."""
    return PLFunction(space, space.breakpoints)


def _bump(space: GridSpace, i: int) -> PLFunction:
    v = [0.0] * len(space)
    v[i] = 1.0
    return PLFunction(space, tuple(v))


def separating_sequence(space: GridSpace, marks: Sequence[float]) -> list[PLFunction]:
    """Elements ``z_1..z_K`` of the image of the addition map at mutual distance 1.

    ``g_n`` is the hat function at mark ``x_n`` and every ``f_n`` is the hat
    function at a reserved breakpoint away from all marks, so ``f_n`` vanishes
    at every mark and ``g_n`` vanishes at every other mark. At ``x_n`` the
    function ``z_n`` is 1 while ``z_m`` (``m > n``) is 0.
    """
    try:
        idx = [space.index(x) for x in marks]
    except ValueError:
        raise ValueError("marks must be breakpoints of the grid") from None
    if len(set(idx)) != len(idx):
        raise ValueError("marks must be distinct")
    last = len(space) - 1
    if any(i in (0, last) for i in idx):
        raise ValueError("marks must be interior breakpoints")
    if any(abs(i - j) < 2 for i, j in itertools.combinations(idx, 2)):
        raise GridTooCoarse("marks need private hat neighborhoods (two grid steps apart)")
    reserved = next((r for r in range(len(space)) if all(abs(r - i) >= 2 for i in idx)), None)
    if reserved is None:
        raise GridTooCoarse("no breakpoint left for the reserved hat")
    f = _bump(space, reserved)
    out = []
    for i in idx:
        g = _bump(space, i)
        assert validate_pl_pair(f, g)
        out.append(f + g)
    return out


def finite_seq_phi_membership(s: Sequence[float]) -> bool:
    """Is ``s`` in the image of the addition map of ``C^n``?

    ``a + b`` with disjointly supported ``a, b >= 0`` of sup norm 1 is exactly
    a vector with entries in ``[0, 1]`` equal to 1 in at least two places.
    """
    s = [float(x) for x in s]
    if not s or any(x < 0 or x > 1 for x in s):
        return False
    return sum(1 for x in s if x == 1.0) >= 2


def pl_projection_scan(space: GridSpace) -> list[PLFunction]:
    """All idempotent PL functions on ``space``, found by depth-first search.

    Idempotence forces breakpoint values into ``{0, 1}``; a segment joining 0
    to 1 passes through 1/2 at its midpoint, where ``y**2 != y``. The search
    checks both conditions and therefore only ever extends constant runs.
    """
    found: list[PLFunction] = []

    def idempotent(y: float) -> bool:
        return y * y == y

    for start in (0.0, 1.0):
        stack = [[start]]
        while stack:
            prefix = stack.pop()
            if len(prefix) == len(space):
                found.append(PLFunction(space, tuple(prefix)))
                continue
            for y in (0.0, 1.0):
                if idempotent(y) and idempotent((prefix[-1] + y) / 2):
                    stack.append(prefix + [y])
    return found
