"""Search and certificates for positive zero-divisor graphs.

Vertex sets are infinite, so a graph is presented through an
:class:`AdjacencyOracle`: an exact ``is_edge`` test and a finite list of
*constructive* neighbors per vertex. Search over constructive neighbors gives
upper bounds on distances only; lower bounds come from certificates.

Positive scaling is quotiented out: ``a`` and ``lam * a`` (``lam > 0``) have
the same zero-product relations, so oracle keys are computed from ``a / ||a||``.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Hashable, NamedTuple, Sequence

import numpy as np

from . import calkin
from .calkin import EPSet
from .errors import (
    CzlabError,
    DepthCapExceeded,
    NotAVertex,
    NotRankOne,
    WrongDimension,
    ZeroElement,
)
from .fd_algebra import (
    DEFAULT_TAU,
    FdElement,
    is_positive,
    is_zero_divisor_positive,
    kernel_basis,
    operator_norm,
    random_unitary,
)

EDGE_TOL = 1e-9
LINE_TOL = 1e-10


class AdjacencyOracle(ABC):
    """Exact adjacency plus constructive neighbor generation for one graph."""

    name = "oracle"

    @abstractmethod
    def is_vertex(self, u) -> bool: ...

    @abstractmethod
    def is_edge(self, u, v) -> bool: ...

    @abstractmethod
    def canonical_neighbors(self, u) -> list: ...

    @abstractmethod
    def key(self, u) -> Hashable:
        """Hashable identity of the vertex class of ``u``."""

    def focus(self, a, b) -> AdjacencyOracle:
        """An oracle whose neighbor generation is tuned to a query ``a -> b``.

        Adjacency is unchanged; only the constructive moves may grow.
        """
        return self

    def describe(self, u) -> Any:
        return str(u)


@dataclass(frozen=True)
class GraphPath:
    vertices: tuple
    oracle_id: str

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def validate(self, oracle: AdjacencyOracle) -> bool:
        if not self.vertices:
            return False
        if not all(oracle.is_vertex(v) for v in self.vertices):
            return False
        return all(oracle.is_edge(u, v) for u, v in zip(self.vertices, self.vertices[1:]))


# -- oracles ---------------------------------------------------------------


class CalkinOracle(AdjacencyOracle):
    """Diagonal projections of the Calkin algebra, vertices given as :class:`EPSet` supports.

    Unfocused, the moves from ``s`` are its complement and the two halves of
    the complement. Focused on ``(a, b)``, the moves are all unions of the
    infinite atoms of the Boolean algebra generated by ``a`` and ``b`` that
    avoid ``s``; every shortest path has its inner vertices among those.
    """

    name = "calkin"

    def __init__(self, anchors: Sequence[EPSet] = ()):
        self.anchors = tuple(anchors)
        self._atoms = self._partition(self.anchors) if self.anchors else None

    @staticmethod
    def _partition(anchors) -> list[EPSet]:
        pieces = [EPSet.naturals()]
        for x in anchors:
            pieces = [q for p in pieces for q in (p & x, p - x) if not q.is_finite]
        return [p.periodic_part for p in pieces]

    def is_vertex(self, u) -> bool:
        return isinstance(u, EPSet) and calkin.is_vertex(u)

    def is_edge(self, u, v) -> bool:
        return calkin.is_edge(u, v)

    def key(self, u):
        p = u.periodic_part
        return p.modulus, p.residues

    def focus(self, a, b) -> CalkinOracle:
        return CalkinOracle((a, b))

    def canonical_neighbors(self, u) -> list[EPSet]:
        if self._atoms is None:
            rest = calkin.complement(u).periodic_part
            return [rest, *calkin.split_orthogonal(rest, rest)]
        free = [p for p in self._atoms if (p & u).is_finite]
        out = []
        for r in range(1, len(free) + 1):
            for combo in itertools.combinations(free, r):
                cand = combo[0]
                for p in combo[1:]:
                    cand = cand | p
                if calkin.is_vertex(cand):
                    out.append(cand)
        return out

    def describe(self, u) -> str:
        return calkin.format_epset(u)


def _proj(cols: np.ndarray) -> np.ndarray:
    return cols @ cols.conj().T


def _orth(cols: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the column span."""
    if cols.shape[1] == 0:
        return cols
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    return u[:, s > tol * max(1.0, s[0])]


def _orth_complement(cols: np.ndarray, n: int) -> np.ndarray:
    if cols.shape[1] == 0:
        return np.eye(n, dtype=complex)
    u, s, _ = np.linalg.svd(cols, full_matrices=True)
    rank = int(np.sum(s > 1e-10))
    return u[:, rank:]


def _intersection(qa: np.ndarray, qb: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the intersection of two orthonormally spanned subspaces."""
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        return qa[:, :0]
    u, s, _ = np.linalg.svd(qa.conj().T @ qb)
    k = int(np.sum(s > 1 - 1e-8))
    return _orth(qa @ u[:, :k])


def projection_onto(cols: np.ndarray) -> FdElement:
    q = _orth(np.asarray(cols, dtype=complex).reshape(cols.shape[0], -1))
    return FdElement.matrix(_proj(q))


class MatrixOracle(AdjacencyOracle):
    """Positive zero divisors of ``M_n(C)``.

    Moves from ``a``: projections onto spans of subsets of a fixed orthonormal
    kernel basis of ``a`` (sizes up to ``rank_bound``, plus the whole kernel).
    Focused on ``(a, b)``, the lattice spanned by ``ker a`` and ``ker b`` is
    added: both kernels, their meet, the complement of their join, and an
    orthogonal pair of kernel vectors when one exists.
    """

    def __init__(self, n: int, tau: float = DEFAULT_TAU, rank_bound: int = 2, anchors: Sequence[np.ndarray] = ()):
        self.n = n
        self.tau = tau
        self.rank_bound = rank_bound
        self.anchors = tuple(anchors)
        self.name = f"M{n}"

    def is_vertex(self, u) -> bool:
        if not isinstance(u, FdElement) or u.shape.block_sizes != (self.n,):
            return False
        if operator_norm(u) == 0 or not is_positive(u, self.tau):
            return False
        return is_zero_divisor_positive(u, self.tau)

    def is_edge(self, u, v) -> bool:
        if self.key(u) == self.key(v):
            return False
        return operator_norm(u * v) <= EDGE_TOL * operator_norm(u) * operator_norm(v)

    def key(self, u):
        # search works modulo positive scaling: a and 2a have the same neighbors
        m = u.blocks[0] / operator_norm(u)
        r = np.round(m, 8) + 0.0  # fold -0.0 into 0.0
        return r.tobytes()

    def _kernel(self, u) -> np.ndarray:
        return kernel_basis(u, self.tau)[0]

    def focus(self, a, b) -> MatrixOracle:
        ka, kb = self._kernel(a), self._kernel(b)
        anchors = [ka, kb, _intersection(ka, kb), _orth_complement(np.hstack([ka, kb]), self.n)]
        pair = orthogonal_kernel_vectors(ka, kb)
        if pair is not None:
            anchors.extend(v[:, None] for v in pair)
        return MatrixOracle(self.n, self.tau, self.rank_bound, [w for w in anchors if w.shape[1]])

    def canonical_neighbors(self, u) -> list[FdElement]:
        q = self._kernel(u)
        k = q.shape[1]
        spans = [q[:, list(c)] for r in range(1, min(k, self.rank_bound) + 1) for c in itertools.combinations(range(k), r)]
        if k > self.rank_bound:
            spans.append(q)
        um = u.blocks[0]
        scale = operator_norm(u)
        for w in self.anchors:
            if w.shape[1] < self.n and np.linalg.norm(um @ w, 2) <= EDGE_TOL * scale:
                spans.append(w)
        out, seen = [], set()
        for w in spans:
            p = FdElement.matrix(_proj(w))
            kk = self.key(p)
            if kk not in seen:
                seen.add(kk)
                out.append(p)
        return out

    def describe(self, u):
        return u.to_json()


# -- search ----------------------------------------------------------------


def bfs_path(oracle: AdjacencyOracle, a, b, depth_cap: int) -> GraphPath:
    """Shortest path from ``a`` to ``b`` over constructive neighbors.

    Bidirectional: for each candidate length ``L`` the forward ball of radius
    ``ceil((L - 1) / 2)`` is tested edge by edge against the backward ball of
    the remaining radius. Raises :class:`DepthCapExceeded` when nothing of
    length ``<= depth_cap`` turns up, which proves nothing by itself.
    """
    for v in (a, b):
        if not oracle.is_vertex(v):
            raise NotAVertex(f"{oracle.describe(v)} is not a vertex of {oracle.name}")
    if oracle.key(a) == oracle.key(b):
        return GraphPath((a,), oracle.name)
    search = oracle.focus(a, b)

    class Ball:
        def __init__(self, root):
            self.parent = {search.key(root): None}
            self.vertex = {search.key(root): root}
            self.layers = [[root]]

        def grow(self, radius: int):
            while len(self.layers) <= radius and self.layers[-1]:
                nxt = []
                for u in self.layers[-1]:
                    for w in search.canonical_neighbors(u):
                        kw = search.key(w)
                        if kw not in self.parent:
                            self.parent[kw] = search.key(u)
                            self.vertex[kw] = w
                            nxt.append(w)
                self.layers.append(nxt)

        def members(self, radius: int):
            return [v for layer in self.layers[: radius + 1] for v in layer]

        def chain(self, k):
            out = []
            while k is not None:
                out.append(self.vertex[k])
                k = self.parent[k]
            return out

    fwd, bwd = Ball(a), Ball(b)
    for length in range(1, depth_cap + 1):
        i = length // 2
        j = length - 1 - i
        fwd.grow(i)
        bwd.grow(j)
        for x in fwd.members(i):
            for y in bwd.members(j):
                if search.is_edge(x, y):
                    verts = fwd.chain(search.key(x))[::-1] + bwd.chain(search.key(y))
                    return GraphPath(tuple(verts), oracle.name)
    exhausted = not fwd.layers[-1] and not bwd.layers[-1]
    raise DepthCapExceeded(f"no path of length <= {depth_cap} found", exhausted=exhausted)


class DiameterEstimate(NamedTuple):
    """A lower bound on the diameter, with the pair that attains it."""

    max_distance: int
    witness: Any
    unresolved: int


def diameter_estimate(
    oracle: AdjacencyOracle,
    sampler: Callable[[int], Any],
    trials: int,
    depth_cap: int,
    seed: int = 0,
) -> DiameterEstimate:
    """Largest BFS distance over ``trials`` sampled pairs.

    Pair ``i`` is ``(sampler(seed + 2i), sampler(seed + 2i + 1))``. Pairs
    with no path within the cap are counted in ``unresolved``, not in the max.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    best, witness, unresolved = -1, None, 0
    for i in range(trials):
        u, v = sampler(seed + 2 * i), sampler(seed + 2 * i + 1)
        try:
            d = bfs_path(oracle, u, v, depth_cap).length
        except DepthCapExceeded:
            unresolved += 1
            continue
        if d > best:
            best, witness = d, (u, v)
    return DiameterEstimate(best, witness, unresolved)


# -- M_2 -------------------------------------------------------------------


def _same_element(a: FdElement, b: FdElement, tau: float) -> bool:
    """Equality of elements, not of scaling classes: ``a`` and ``2a`` differ."""
    return operator_norm(a - b) <= tau * max(operator_norm(a), operator_norm(b))


def _phase_fix(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) > 1e-12))
    return v * (abs(v[k]) / v[k])


def m2_classify(a: FdElement, tau: float = DEFAULT_TAU) -> tuple[float, np.ndarray]:
    """Write a positive zero divisor of ``M_2`` as ``lam * (projection onto a line)``."""
    if a.shape.block_sizes != (2,):
        raise NotRankOne("not an element of M_2")
    if not is_positive(a, tau):
        raise NotRankOne("not positive")
    lam = operator_norm(a)
    if lam == 0:
        raise ZeroElement("the zero element is not a vertex")
    w, v = np.linalg.eigh((a.blocks[0] + a.blocks[0].conj().T) / 2)
    if w[0] > tau * lam:
        raise NotRankOne("invertible: both eigenvalues are positive")
    return lam, _phase_fix(v[:, 1])


@dataclass(frozen=True)
class DisconnectionCertificate:
    """``b`` lies outside the component of ``a`` in the graph of ``M_2``.

    The component of ``a`` is every positive multiple of the projections onto
    ``line`` and ``line_perp``: a rank-one projection's kernel is the
    orthogonal line, so neighbors alternate between the two lines forever.
    ``target`` is parallel to neither.
    """

    line: np.ndarray
    line_perp: np.ndarray
    target: np.ndarray
    overlap: float

    def verify(self, tol: float = LINE_TOL) -> bool:
        u, up, v = self.line, self.line_perp, self.target
        if abs(np.vdot(u, up)) > tol:
            return False
        # closure: ker(P_u) = span(u_perp) and ker(P_{u_perp}) = span(u)
        for src, dst in ((u, up), (up, u)):
            w, vecs = np.linalg.eigh(np.outer(src, src.conj()))
            if not (abs(w[0]) <= tol and abs(abs(np.vdot(vecs[:, 0], dst)) - 1) <= tol):
                return False
        for line in (u, up):
            o = abs(np.vdot(line, v))
            if not (tol < o < 1 - tol):
                return False
        return True

    def to_json(self) -> dict:
        def enc(x):
            return [[float(z.real), float(z.imag)] for z in x]

        return {
            "kind": "M2Disconnected",
            "line": enc(self.line),
            "line_perp": enc(self.line_perp),
            "target": enc(self.target),
            "overlap": self.overlap,
        }


def m2_disconnection(a: FdElement, b: FdElement, tau: float = DEFAULT_TAU) -> GraphPath | DisconnectionCertificate:
    """A path of length <= 2 when the lines of ``a`` and ``b`` are equal or orthogonal, else a certificate."""
    try:
        _, u = m2_classify(a, tau)
        _, v = m2_classify(b, tau)
    except (NotRankOne, ZeroElement) as exc:
        raise NotAVertex(str(exc)) from exc
    oracle = MatrixOracle(2, tau)
    if _same_element(a, b, tau):
        return GraphPath((a,), oracle.name)
    overlap = float(abs(np.vdot(u, v)))
    up = _phase_fix(np.array([-np.conj(u[1]), np.conj(u[0])]))
    if overlap <= LINE_TOL:
        return GraphPath((a, b), oracle.name)
    if 1 - overlap <= LINE_TOL:
        return GraphPath((a, FdElement.matrix(np.outer(up, up.conj())), b), oracle.name)
    return DisconnectionCertificate(u, up, v, overlap)


# -- M_n, n >= 3 -----------------------------------------------------------


def orthogonal_kernel_vectors(ka: np.ndarray, kb: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Unit ``l`` in span(ka), ``f`` in span(kb) with ``<l, f> = 0``, if easy to find.

    Always succeeds when either subspace has dimension >= 2: fix a vector of
    one and take a vector of the other orthogonal to it. For two lines it
    succeeds only if they are already orthogonal.
    """
    if ka.shape[1] == 0 or kb.shape[1] == 0:
        return None
    if ka.shape[1] >= 2 or kb.shape[1] >= 2:
        swap = ka.shape[1] < 2
        big, small = (kb, ka) if swap else (ka, kb)
        f = small[:, 0]
        c = big.conj().T @ f
        # x orthogonal to c inside the coordinates of `big`
        _, _, vh = np.linalg.svd(c.conj()[None, :])
        x = vh[-1].conj()
        l = big @ x
        l = l / np.linalg.norm(l)
        return (f, l) if swap else (l, f)
    l, f = ka[:, 0], kb[:, 0]
    if abs(np.vdot(l, f)) <= LINE_TOL:
        return l, f
    return None


def mn_path(a: FdElement, b: FdElement, n: int, tau: float = DEFAULT_TAU) -> GraphPath:
    """A path of length at most 4 between two vertices of the graph of ``M_n``, ``n >= 3``.

    Cases, in order: ``ab = 0``; kernels meet; kernels contain orthogonal unit
    vectors ``l, f``; otherwise both kernels are lines and their join is a
    plane, whose orthogonal complement is nonzero because ``n >= 3``.
    """
    if n < 3:
        raise WrongDimension("M_2 has a disconnected graph; n must be at least 3")
    oracle = MatrixOracle(n, tau)
    for v in (a, b):
        if not oracle.is_vertex(v):
            raise NotAVertex("expected a nonzero positive singular element of M_n")
    if _same_element(a, b, tau):
        path = (a,)
    elif oracle.is_edge(a, b):
        path = (a, b)
    else:
        ka, kb = kernel_basis(a, tau)[0], kernel_basis(b, tau)[0]
        meet = _intersection(ka, kb)
        pair = orthogonal_kernel_vectors(ka, kb)
        if meet.shape[1]:
            path = (a, projection_onto(meet), b)
        elif pair is not None:
            l, f = pair
            path = (a, projection_onto(l[:, None]), projection_onto(f[:, None]), b)
        else:
            outside = _orth_complement(np.hstack([ka, kb]), n)
            path = (a, projection_onto(ka), projection_onto(outside), projection_onto(kb), b)
    result = GraphPath(path, oracle.name)
    if not result.validate(oracle):
        raise CzlabError("constructed path failed validation")
    return result


def random_vertex(n: int, seed: int, kernel_dim: int | None = None) -> FdElement:
    """Random positive zero divisor of ``M_n`` with unit norm and random kernel dimension."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n)) if kernel_dim is None else kernel_dim
    u = random_unitary(n, rng)
    w = np.concatenate([rng.uniform(0.1, 1.0, n - k), np.zeros(k)])
    w[0] = 1.0
    m = (u * w) @ u.conj().T
    return FdElement.matrix((m + m.conj().T) / 2)


def random_m2_vertex(seed: int) -> FdElement:
    """``lam * P`` for a random line in ``C^2`` and ``lam`` in ``[0.5, 5]``."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    v /= np.linalg.norm(v)
    return FdElement.matrix(rng.uniform(0.5, 5.0) * np.outer(v, v.conj()))


def calkin_sampler(max_modulus: int = 8) -> Callable[[int], EPSet]:
    return lambda seed: calkin.sample_epset(seed, max_modulus)


# -- reports ---------------------------------------------------------------


def path_report(oracle: AdjacencyOracle, path: GraphPath | None, certificate=None) -> dict:
    """``{"distance", "path", "certificate", "validated"}``."""
    cert = None
    if certificate is not None:
        cert = certificate.to_json() if hasattr(certificate, "to_json") else certificate
    validated = True
    if path is not None:
        validated = path.validate(oracle)
    if certificate is not None and hasattr(certificate, "verify"):
        validated = validated and certificate.verify()
    return {
        "distance": None if path is None else path.length,
        "path": [] if path is None else [oracle.describe(v) for v in path.vertices],
        "certificate": cert,
        "validated": bool(validated),
    }


def to_dot(oracle: AdjacencyOracle, vertices: Sequence, name: str = "G") -> str:
    """DOT text of the subgraph induced on ``vertices``."""
    uniq, seen = [], set()
    for v in vertices:
        k = oracle.key(v)
        if k not in seen:
            seen.add(k)
            uniq.append(v)
    lines = [f"graph {name} {{"]
    for i, v in enumerate(uniq):
        label = oracle.describe(v)
        if not isinstance(label, str):
            label = f"v{i}"
        lines.append(f'  v{i} [label="{label}"];')
    for i, j in itertools.combinations(range(len(uniq)), 2):
        if oracle.is_edge(uniq[i], uniq[j]):
            lines.append(f"  v{i} -- v{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"
