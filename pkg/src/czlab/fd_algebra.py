"""Finite-dimensional C*-algebras ``M_n1(C) + ... + M_nk(C)``.

Elements are stored block by block. Every spectral question (positivity,
invertibility, kernels, square roots) is answered per block with
``numpy.linalg.eigh``, since an element of a direct sum is positive,
invertible or singular exactly when its blocks are.

All thresholds are *relative*: an eigenvalue counts as zero when it is at most
``tau * ||a||``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidPair,
    Invertible,
    NotCommuting,
    NotPositive,
    NotSelfAdjoint,
    PreconditionViolated,
    TrivialAlgebra,
    WrongShape,
    ZeroElement,
)

DEFAULT_TAU = 1e-10
PAIR_TOL = 1e-10


def _check_tau(tau: float) -> float:
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"tolerance must lie in [0, 1), got {tau!r}")
    return float(tau)


@dataclass(frozen=True)
class AlgebraShape:
    """Block sizes ``n_1..n_k`` of ``M_n1(C) + ... + M_nk(C)``."""

    block_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.block_sizes)
        if not sizes:
            raise ValueError("an algebra needs at least one block")
        if any(n < 1 for n in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    @classmethod
    def of(cls, *sizes: int) -> AlgebraShape:
        return cls(tuple(sizes))

    @property
    def dim(self) -> int:
        """Complex dimension, the sum of ``n_i ** 2``."""
        return sum(n * n for n in self.block_sizes)

    def __iter__(self):
        return iter(self.block_sizes)

    def __len__(self):
        return len(self.block_sizes)


class FdElement:
    """An element of a finite-dimensional C*-algebra, one complex matrix per block."""

    __slots__ = ("shape", "blocks")

    def __init__(self, shape: AlgebraShape | Sequence[int], blocks: Iterable):
        if not isinstance(shape, AlgebraShape):
            shape = AlgebraShape(tuple(shape))
        mats = tuple(np.array(b, dtype=complex, ndmin=2) for b in blocks)
        if len(mats) != len(shape):
            raise ValueError(f"expected {len(shape)} blocks, got {len(mats)}")
        for n, m in zip(shape, mats):
            if m.shape != (n, n):
                raise ValueError(f"block of shape {m.shape} does not match size {n}")
        self.shape = shape
        self.blocks = mats

    # -- constructors -----------------------------------------------------

    @classmethod
    def zeros(cls, shape) -> FdElement:
        shape = shape if isinstance(shape, AlgebraShape) else AlgebraShape(tuple(shape))
        return cls(shape, [np.zeros((n, n)) for n in shape])

    @classmethod
    def identity(cls, shape) -> FdElement:
        shape = shape if isinstance(shape, AlgebraShape) else AlgebraShape(tuple(shape))
        return cls(shape, [np.eye(n) for n in shape])

    @classmethod
    def diag(cls, *values: complex) -> FdElement:
        """A diagonal element of the single-block algebra ``M_n``."""
        return cls((len(values),), [np.diag(np.asarray(values, dtype=complex))])

    @classmethod
    def matrix(cls, m) -> FdElement:
        m = np.array(m, dtype=complex, ndmin=2)
        return cls((m.shape[0],), [m])

    @classmethod
    def vector(cls, *values: complex) -> FdElement:
        """An element of the commutative algebra ``C^n`` (n blocks of size one)."""
        return cls((1,) * len(values), [[[v]] for v in values])

    # -- algebra ----------------------------------------------------------

    def _same_shape(self, other: FdElement):
        if self.shape != other.shape:
            raise WrongShape(f"shape mismatch: {self.shape.block_sizes} vs {other.shape.block_sizes}")

    def __add__(self, other):
        if isinstance(other, FdElement):
            self._same_shape(other)
            return FdElement(self.shape, [x + y for x, y in zip(self.blocks, other.blocks)])
        return self + other * FdElement.identity(self.shape)

    __radd__ = __add__

    def __neg__(self):
        return FdElement(self.shape, [-x for x in self.blocks])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FdElement):
            self._same_shape(other)
            return FdElement(self.shape, [x @ y for x, y in zip(self.blocks, other.blocks)])
        return FdElement(self.shape, [x * other for x in self.blocks])

    def __rmul__(self, scalar):
        return FdElement(self.shape, [scalar * x for x in self.blocks])

    __matmul__ = __mul__

    def __truediv__(self, scalar):
        return FdElement(self.shape, [x / scalar for x in self.blocks])

    def adjoint(self) -> FdElement:
        return FdElement(self.shape, [x.conj().T for x in self.blocks])

    def to_dense(self) -> np.ndarray:
        """Block-diagonal dense matrix; handy for debugging and DOT labels."""
        n = sum(self.shape)
        out = np.zeros((n, n), dtype=complex)
        i = 0
        for b in self.blocks:
            k = b.shape[0]
            out[i:i + k, i:i + k] = b
            i += k
        return out

    def allclose(self, other: FdElement, atol: float = 1e-10) -> bool:
        return self.shape == other.shape and all(
            np.allclose(x, y, atol=atol, rtol=0) for x, y in zip(self.blocks, other.blocks)
        )

    def __repr__(self):
        return f"FdElement({list(self.shape.block_sizes)}, {[b.tolist() for b in self.blocks]})"

    # -- JSON -------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "shape": list(self.shape.block_sizes),
            "blocks": [
                [[[float(z.real), float(z.imag)] for z in row] for row in b]
                for b in self.blocks
            ],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> FdElement:
        if isinstance(data, str):
            data = json.loads(data)
        blocks = [
            [[complex(re, im) for re, im in row] for row in b]
            for b in data["blocks"]
        ]
        return cls(tuple(data["shape"]), blocks)


@dataclass(frozen=True)
class PositivePair:
    """A pair in the domain of the addition map: positive, unit norm, ``ab = 0``."""

    a: FdElement
    b: FdElement


# -- spectral helpers ------------------------------------------------------


def _hermitian_defect(block: np.ndarray) -> float:
    if block.size == 0:
        return 0.0
    return float(np.max(np.abs(block - block.conj().T)))


def _eigh(block: np.ndarray):
    # symmetrize so eigh sees an exactly Hermitian input
    return np.linalg.eigh((block + block.conj().T) / 2)


def operator_norm(a: FdElement) -> float:
    """C*-norm: the largest singular value over all blocks."""
    return max(float(np.linalg.norm(b, 2)) for b in a.blocks)


def is_self_adjoint(a: FdElement, tau: float = DEFAULT_TAU) -> bool:
    tau = _check_tau(tau)
    scale = tau * operator_norm(a)
    return all(_hermitian_defect(b) <= scale for b in a.blocks)


def is_positive(a: FdElement, tau: float = DEFAULT_TAU) -> bool:
    tau = _check_tau(tau)
    if not is_self_adjoint(a, tau):
        return False
    floor = -tau * operator_norm(a)
    return all(_eigh(b)[0][0] >= floor for b in a.blocks)


def pos_neg_parts(a: FdElement, tau: float = DEFAULT_TAU) -> tuple[FdElement, FdElement]:
    """Split a self-adjoint element as ``a = a_plus - a_minus`` with ``a_plus a_minus = 0``."""
    if not is_self_adjoint(a, tau):
        raise NotSelfAdjoint("element is not self-adjoint within tolerance")
    plus, minus = [], []
    for b in a.blocks:
        w, v = _eigh(b)
        plus.append((v * np.clip(w, 0, None)) @ v.conj().T)
        minus.append((v * np.clip(-w, 0, None)) @ v.conj().T)
    return FdElement(a.shape, plus), FdElement(a.shape, minus)


def sqrt_positive(a: FdElement, tau: float = DEFAULT_TAU) -> FdElement:
    """Positive square root.

    Eigenvalues at or below ``tau * ||a||`` are treated as exact zeros, so the
    root has exactly the numerical kernel of ``a`` instead of ``sqrt(1e-16)``
    sized leakage into it.
    """
    if not is_positive(a, tau):
        raise NotPositive("square root requires a positive element")
    cut = tau * operator_norm(a)
    out = []
    for b in a.blocks:
        w, v = _eigh(b)
        w = np.where(w <= cut, 0.0, w)
        out.append((v * np.sqrt(w)) @ v.conj().T)
    return FdElement(a.shape, out)


def _kernel_bases(a: FdElement, tau: float) -> list[np.ndarray]:
    cut = tau * operator_norm(a)
    bases = []
    for b in a.blocks:
        w, v = _eigh(b)
        bases.append(v[:, w <= cut])
    return bases


def kernel_basis(a: FdElement, tau: float = DEFAULT_TAU) -> list[np.ndarray]:
    """Orthonormal kernel basis of each block of a positive element (columns)."""
    if not is_positive(a, tau):
        raise NotPositive("kernel extraction requires a positive element")
    return _kernel_bases(a, tau)


def is_zero_divisor_positive(a: FdElement, tau: float = DEFAULT_TAU) -> bool:
    """A positive element is a zero divisor iff some block is singular.

    The zero element counts as singular here, which keeps the domination
    check vacuous at ``a = 0``; it is still never a graph vertex.
    """
    if not is_positive(a, tau):
        raise NotPositive("zero-divisor test is defined for positive elements")
    cut = tau * operator_norm(a)
    return any(_eigh(b)[0][0] <= cut for b in a.blocks)


def annihilator(a: FdElement, tau: float = DEFAULT_TAU) -> FdElement:
    """Orthogonal projection onto ``ker a``; a nonzero positive ``b`` with ``ab = ba = 0``."""
    if not is_zero_divisor_positive(a, tau):
        raise Invertible("element is invertible, its annihilator is zero")
    return FdElement(a.shape, [q @ q.conj().T for q in _kernel_bases(a, tau)])


def normalize(a: FdElement) -> FdElement:
    n = operator_norm(a)
    if n == 0:
        raise ZeroElement("cannot normalize the zero element")
    return a / n


# -- random generation ------------------------------------------------------


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_psd(shape: AlgebraShape, rng: np.random.Generator, rank: Sequence[int] | None = None) -> FdElement:
    """``G G*`` with i.i.d. standard complex Gaussian ``G``; ``rank`` caps each block's rank."""
    blocks = []
    for i, n in enumerate(shape):
        r = n if rank is None else rank[i]
        g = (rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))) / np.sqrt(2)
        blocks.append(g @ g.conj().T)
    return FdElement(shape, blocks)


def random_projection(shape: AlgebraShape, rng: np.random.Generator) -> FdElement:
    """A projection that is neither 0 nor 1.

    Each block gets a randomly rotated coordinate projection of random rank in
    ``[0, n]``; draws are repeated until the result is nontrivial, so a
    projection can live inside one block or straddle several.
    """
    if shape.dim <= 1:
        raise TrivialAlgebra("the one-dimensional algebra has no nontrivial projection")
    while True:
        ranks = [int(rng.integers(0, n + 1)) for n in shape]
        if any(ranks) and any(r < n for r, n in zip(ranks, shape)):
            break
    blocks = []
    for n, r in zip(shape, ranks):
        u = random_unitary(n, rng)
        blocks.append(u[:, :r] @ u[:, :r].conj().T)
    return FdElement(shape, blocks)


def pair_violation(a: FdElement, b: FdElement, tol: float = PAIR_TOL) -> str | None:
    """First violated domain condition of the addition map, or ``None``."""
    if a.shape != b.shape:
        return "a and b live in different algebras"
    if not is_positive(a, tol):
        return "a is not positive"
    if not is_positive(b, tol):
        return "b is not positive"
    if abs(operator_norm(a) - 1) > tol:
        return f"||a|| = {operator_norm(a)!r} != 1"
    if abs(operator_norm(b) - 1) > tol:
        return f"||b|| = {operator_norm(b)!r} != 1"
    if operator_norm(a * b) > tol:
        return f"ab != 0 (||ab|| = {operator_norm(a * b):.3e})"
    return None


def validate_pair(p: PositivePair, tol: float = PAIR_TOL) -> bool:
    return pair_violation(p.a, p.b, tol) is None


def random_orthogonal_pair(shape, seed: int) -> PositivePair:
    """Deterministic random point of the domain of the addition map."""
    if not isinstance(shape, AlgebraShape):
        shape = AlgebraShape(tuple(shape))
    if shape.dim <= 1:
        raise TrivialAlgebra("the algebra must be nontrivial (dim > 1)")
    rng = np.random.default_rng(seed)
    p = random_projection(shape, rng)
    q = FdElement.identity(shape) - p
    a = normalize(p * random_psd(shape, rng) * p)
    b = normalize(q * random_psd(shape, rng) * q)
    # scrub rounding so both are Hermitian to the last bit
    a = FdElement(shape, [(x + x.conj().T) / 2 for x in a.blocks])
    b = FdElement(shape, [(x + x.conj().T) / 2 for x in b.blocks])
    pair = PositivePair(a, b)
    why = pair_violation(a, b)
    if why is not None:
        raise InvalidPair(f"generated pair failed re-validation: {why}")
    return pair


# -- the addition map and the invariant d -----------------------------------


def addition_map(p: PositivePair, tol: float = PAIR_TOL) -> tuple[FdElement, float]:
    """``(a + b, ||a + b - 1||)`` for a valid pair."""
    why = pair_violation(p.a, p.b, tol)
    if why is not None:
        raise InvalidPair(why)
    s = p.a + p.b
    return s, operator_norm(s - 1)


def d_invariant(shape) -> tuple[float, PositivePair]:
    """``d = 0`` for every nontrivial finite-dimensional algebra.

    The certificate is ``(p, 1 - p)`` for the matrix unit ``e_11`` of the first
    block, which is a nontrivial projection as soon as ``dim > 1``.
    """
    if not isinstance(shape, AlgebraShape):
        shape = AlgebraShape(tuple(shape))
    if shape.dim <= 1:
        raise TrivialAlgebra("d is defined for nontrivial algebras only")
    blocks = [np.zeros((n, n)) for n in shape]
    blocks[0][0, 0] = 1.0
    p = FdElement(shape, blocks)
    return 0.0, PositivePair(p, FdElement.identity(shape) - p)


def joint_spectrum_commuting(a: FdElement, b: FdElement, tol: float = 1e-8) -> list[tuple[float, float]]:
    """Joint eigenvalues of two commuting positive elements.

    ``a`` is diagonalized first; ``b`` is then diagonalized on each eigenspace
    of ``a`` (eigenvalues of ``a`` closer than ``tol * max(1, ||a||)`` are one
    cluster).
    """
    a._same_shape(b)
    if not (is_positive(a) and is_positive(b)):
        raise NotPositive("joint spectrum is computed for positive elements")
    scale = max(1.0, operator_norm(a) * operator_norm(b))
    if operator_norm(a * b - b * a) > tol * scale:
        raise NotCommuting("a and b do not commute within tolerance")
    gap = tol * max(1.0, operator_norm(a))
    pairs: list[tuple[float, float]] = []
    for ab, bb in zip(a.blocks, b.blocks):
        w, v = _eigh(ab)
        start = 0
        for i in range(1, len(w) + 1):
            if i == len(w) or w[i] - w[i - 1] > gap:
                vs = v[:, start:i]
                t = np.linalg.eigvalsh(vs.conj().T @ ((bb + bb.conj().T) / 2) @ vs)
                s = float(np.mean(w[start:i]))
                pairs.extend((s, float(x)) for x in t)
                start = i
    return sorted(pairs)


def kernel_inclusion_residual(a: FdElement, b: FdElement, tau: float = DEFAULT_TAU) -> float:
    """``max ||a v|| / ||a||`` over the kernel basis vectors ``v`` of ``b`` (0 if ``a = 0``)."""
    na = operator_norm(a)
    if na == 0:
        return 0.0
    worst = 0.0
    for ablock, q in zip(a.blocks, kernel_basis(b, tau)):
        if q.shape[1]:
            worst = max(worst, float(np.max(np.linalg.norm(ablock @ q, axis=0))))
    return worst / na


def dominated_zero_divisor_check(a: FdElement, b: FdElement, tau: float = DEFAULT_TAU) -> bool:
    """Check that ``0 <= a <= b`` with ``b`` a zero divisor forces ``a`` to be one.

    Returns true when ``a`` is singular *and* ``ker b`` is contained in
    ``ker a`` within ``tau``. ``a = 0`` passes vacuously.
    """
    if not is_positive(a, tau):
        raise PreconditionViolated("a is not positive")
    if not is_positive(b, tau):
        raise PreconditionViolated("b is not positive")
    if not is_positive(b - a, tau):
        raise PreconditionViolated("b - a is not positive")
    if not is_zero_divisor_positive(b, tau):
        raise PreconditionViolated("b is not a zero divisor")
    if operator_norm(a) == 0:
        return True
    return is_zero_divisor_positive(a, tau) and kernel_inclusion_residual(a, b, tau) <= tau


def verify_m2_sum_identity(p: PositivePair, tol: float = PAIR_TOL) -> float:
    """``||a + b - I||`` for a valid pair in ``M_2``; always zero up to rounding."""
    if p.a.shape.block_sizes != (2,):
        raise WrongShape("the identity a + b = I is specific to M_2")
    s, _ = addition_map(p, tol)
    return operator_norm(s - 1)
