"""Acceptance checks, one test per criterion.

Each test is tagged ``criterion(n, title)``; the conftest prints a PASS/FAIL
line per criterion after the run. Run alone with
``pytest tests/test_acceptance.py``.
"""

import itertools
import math
import random
import time

import numpy as np
import pytest

from czlab import calkin as ck
from czlab import fd_algebra as fd
from czlab import pl
from czlab import zd_graph as zg
from czlab.errors import DepthCapExceeded
from czlab.suites import (
    RunConfig, ZDRR_EPS, dominated_pair, forced_case_iv, random_boundary_data, random_flat_pl,
    random_unit_pl_pair, run_suite, separating_marks,
)

criterion = pytest.mark.criterion


def _union_is_cofinite_by_scan(s: ck.EPSet, t: ck.EPSet) -> bool:
    """Brute force: past every correction, one full common period of ``s | t`` is all of it."""
    start = max([0, *s.corrections, *t.corrections]) + 1
    period = math.lcm(s.modulus, t.modulus)
    return all(n in s or n in t for n in range(start, start + period))


@criterion(1, "distance(H0, H1) = 3 with validated path and UnionCofinite certificate, < 1 s")
def test_calkin_witness():
    t0 = time.perf_counter()
    h0, h1, _, result = ck.distance_three_witness()
    elapsed = time.perf_counter() - t0
    assert result.distance == 3
    assert len(result.path) == 4 and result.validate()
    assert result.certificate.kind == "UnionCofinite" and result.certificate.verify()
    assert (result.path[0].support, result.path[-1].support) == (h0, h1)
    assert elapsed < 1.0


@criterion(2, "1000 sampled vertex pairs: distance in {0..3}, paths validate, 3s certified, 3 attained")
def test_calkin_sweep():
    threes = 0
    for i in range(1000):
        s, t = ck.sample_epset(2 * i), ck.sample_epset(2 * i + 1)
        r = ck.distance(s, t)
        assert r.distance in (0, 1, 2, 3)
        assert r.validate()
        assert all(ck.is_edge(u.support, v.support) for u, v in zip(r.path, r.path[1:]))
        if r.distance == 3:
            threes += 1
            assert r.certificate.kind == "UnionCofinite" and r.certificate.verify()
            assert _union_is_cofinite_by_scan(s, t)
    assert threes > 0


@criterion(3, "500 Boolean-op instances match a bitset oracle on 0..9999; normalize idempotent")
def test_epset_oracle():
    report = run_suite("epset-oracle", RunConfig(trials=500, seed=0))
    assert report.aggregate["pass_count"] == 500
    assert report.passed


def _phi_oracle(s):
    for split in itertools.product((0, 1), repeat=len(s)):
        a = [x if k else 0.0 for x, k in zip(s, split)]
        b = [0.0 if k else x for x, k in zip(s, split)]
        if max(a) == 1 and max(b) == 1:
            return True
    return False


@criterion(4, "1000 M_2 pairs give ||a+b-I|| <= 1e-8; C^n image matches brute force (n <= 3)")
def test_m2_identity_and_cn_image():
    worst = max(fd.verify_m2_sum_identity(fd.random_orthogonal_pair((2,), seed)) for seed in range(1000))
    assert worst <= 1e-8
    grid = [k / 20 for k in range(21)]
    for n in (1, 2, 3):
        for s in itertools.product(grid, repeat=n):
            assert pl.finite_seq_phi_membership(s) == _phi_oracle(s)


@criterion(5, "1000 pairs over [2],[3],[1,1],[2,1] give ||a+b|| = 1 within 1e-8; d certificate exact")
def test_unit_sum():
    shapes = [(2,), (3,), (1, 1), (2, 1)]
    for seed in range(1000):
        p = fd.random_orthogonal_pair(shapes[seed % 4], seed)
        assert fd.validate_pair(p)
        s, _ = fd.addition_map(p)
        assert abs(fd.operator_norm(s) - 1) <= 1e-8
    for shape in shapes:
        value, cert = fd.d_invariant(shape)
        assert value == 0
        assert fd.operator_norm(cert.a + cert.b - 1) == 0.0


@criterion(6, "500 PL unit pairs give ||f+g-1|| = 1 within 1e-12; only constant projections up to 256 points")
def test_projectionless_d():
    for seed in range(500):
        space = pl.GridSpace.uniform(3 + seed % 62)
        f, g = random_unit_pl_pair(space, random.Random(seed))
        assert pl.validate_pl_pair(f, g)
        assert abs(pl.projectionless_d_check(f, g) - 1) <= 1e-12
    for n in range(2, 257):
        found = pl.pl_projection_scan(pl.GridSpace.uniform(n))
        assert sorted(f.values for f in found) == [(0.0,) * n, (1.0,) * n]


@criterion(7, "500 non-normalized disjoint PL pairs satisfy lhs = rhs within 1e-9")
def test_scaled_identity():
    for seed in range(500):
        rng = random.Random(seed)
        f, g = random_unit_pl_pair(pl.GridSpace.uniform(5 + seed % 40), rng)
        alpha, beta = rng.uniform(0.01, 100), rng.uniform(0.01, 100)
        lhs, rhs = pl.scaled_pair_identity(f * alpha, g * beta)
        assert abs(lhs - rhs) <= 1e-9


@criterion(8, "200 boundary data sets: exact restriction, F G = 0 segmentwise, ranges in [0, 1]")
def test_disjoint_extension():
    for seed in range(200):
        space = pl.GridSpace.uniform(4 + seed % 60)
        idx, fv, gv = random_boundary_data(space, random.Random(seed))
        f, g = pl.disjoint_extension(space, idx, fv, gv)
        for i, a, b in zip(idx, fv, gv):
            j = f.space.index(space.breakpoints[i])
            assert f.values[j] == a and g.values[j] == b
        for (x0, x1), (u0, u1), (v0, v1) in zip(
            zip(f.space.breakpoints, f.space.breakpoints[1:]),
            zip(f.values, f.values[1:]), zip(g.values, g.values[1:]),
        ):
            assert (u0 == u1 == 0) or (v0 == v1 == 0), (x0, x1)
        assert all(0 <= v <= 1 for v in f.values + g.values)


@criterion(9, "100 PL functions with <= 5 flat segments: ||a-b|| <= eps, b not a zero divisor, all eps")
def test_zdrr():
    halvings = 0
    for seed in range(100):
        a = random_flat_pl(pl.GridSpace.uniform(6 + seed % 27), random.Random(seed))
        for eps in ZDRR_EPS:
            b, delta = pl.zdrr_perturb(a, eps)
            assert (a - b).norm() <= eps
            assert not pl.pl_is_zero_divisor(b)
            halvings += delta < eps
    # the generator plants flats at the eps heights, so halving must have happened
    assert halvings > 0


@criterion(10, "K = 8 marks on a 128-point grid: all 28 distances equal 1 within 1e-12")
def test_separating_sequence():
    space = pl.GridSpace.uniform(128)
    zs = pl.separating_sequence(space, separating_marks(space, 8))
    dists = [(zs[i] - zs[j]).norm() for i, j in itertools.combinations(range(8), 2)]
    assert len(dists) == 28
    assert max(abs(d - 1) for d in dists) <= 1e-12


@criterion(11, "500 dominated trials in M_4 and in M_2+M_3: a detected singular, residual <= 1e-8")
def test_hereditary_domination():
    for shape in ((4,), (2, 3)):
        s = fd.AlgebraShape(shape)
        for seed in range(500):
            a, b = dominated_pair(s, np.random.default_rng(seed))
            assert fd.dominated_zero_divisor_check(a, b)
            assert fd.kernel_inclusion_residual(a, b) <= 1e-8


@criterion(12, "M_2: 100 non-aligned pairs certified, 100 aligned pairs joined in <= 2, BFS cap 6 never connects")
def test_m2_disconnection():
    oracle = zg.MatrixOracle(2)
    certified = 0
    for seed in range(100):
        a, b = zg.random_m2_vertex(2 * seed), zg.random_m2_vertex(2 * seed + 1)
        cert = zg.m2_disconnection(a, b)
        assert isinstance(cert, zg.DisconnectionCertificate) and cert.verify()
        with pytest.raises(DepthCapExceeded):
            zg.bfs_path(oracle, a, b, 6)
        certified += 1
    assert certified == 100
    report = run_suite("m2-disconnect", RunConfig(trials=100, seed=1000))
    assert all(r["aligned_path_length"] <= 2 for r in report.records)
    assert report.passed


@criterion(13, "1000 pairs in each of M_3..M_6: paths validate, length <= 4, products <= 1e-9; case (iv) hit")
def test_mn_connectivity():
    for n in (3, 4, 5, 6):
        oracle = zg.MatrixOracle(n)
        for seed in range(1000):
            a, b = zg.random_vertex(n, 2 * seed), zg.random_vertex(n, 2 * seed + 1)
            path = zg.mn_path(a, b, n)
            assert path.length <= 4 and path.validate(oracle)
            for u, v in zip(path.vertices, path.vertices[1:]):
                assert fd.operator_norm(u * v) <= 1e-9
    a, b = forced_case_iv(3)
    path = zg.mn_path(a, b, 3)
    assert path.length == 4 and path.validate(zg.MatrixOracle(3))


@criterion(14, "200 valid M_4 pairs: every joint eigenvalue pair within 1e-8 of st = 0")
def test_joint_spectrum_cross():
    for seed in range(200):
        p = fd.random_orthogonal_pair((4,), seed)
        pairs = fd.joint_spectrum_commuting(p.a, p.b)
        assert len(pairs) == 4
        assert max(min(abs(s), abs(t)) for s, t in pairs) <= 1e-8


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
