import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from czlab import pl
from czlab.errors import GridTooCoarse, InvalidPair, OutOfRange, PreconditionViolated, ProductNotZeroOnN
from czlab.suites import random_boundary_data, random_flat_pl, random_unit_pl_pair

THREE = pl.GridSpace((0.0, 0.5, 1.0))
FOUR = pl.GridSpace.uniform(4)


def F(space, *values):
    return pl.PLFunction(space, tuple(float(v) for v in values))


class TestGrid:
    def test_uniform(self):
        g = pl.GridSpace.uniform(5)
        assert g.breakpoints == (0.0, 0.25, 0.5, 0.75, 1.0) and g.segments == 4

    @pytest.mark.parametrize("bps", [(0.0,), (0.0, 0.5), (0.1, 1.0), (0.0, 0.6, 0.5, 1.0)])
    def test_invalid(self, bps):
        with pytest.raises(ValueError):
            pl.GridSpace(bps)

    def test_evaluation_and_norm(self):
        f = F(THREE, 0, -2, 1)
        assert f(0.25) == pytest.approx(-1)
        assert f.norm() == 2

    def test_json_round_trip(self):
        f = F(THREE, 0.1, 0.2, 0.3)
        assert pl.PLFunction.from_json(f.to_json()) == f
        assert f.to_csv().splitlines()[0] == "x,f"


class TestZeroDivisors:
    @pytest.mark.parametrize("values,expected", [((0, 0, 1), True), ((0, 0.5, 1), False), ((0, 0, 0), True)])
    def test_examples(self, values, expected):
        assert pl.pl_is_zero_divisor(F(THREE, *values)) is expected

    def test_pairs(self):
        assert pl.validate_pl_pair(F(THREE, 1, 0, 0), F(THREE, 0, 0, 1))
        assert not pl.validate_pl_pair(F(THREE, 1, 1, 0), F(THREE, 0, 1, 1))
        assert not pl.validate_pl_pair(F(THREE, 0.5, 0, 0), F(THREE, 0, 0, 1))

    def test_product_segmentwise(self):
        # both vanish only at the shared breakpoint: product still zero
        assert pl.product_is_zero(F(THREE, 1, 0, 0), F(THREE, 0, 0, 1))
        assert not pl.product_is_zero(F(THREE, 1, 0.1, 0), F(THREE, 0, 0.1, 1))


class TestExtension:
    def test_two_point_ramps(self):
        space = pl.GridSpace.uniform(5)
        f, g = pl.disjoint_extension(space, [0, 4], [1, 0], [0, 1])
        assert 0.5 in f.space.breakpoints
        assert f(0.5) == 0 and g(0.5) == 0
        assert f(0) == 1 and g(1) == 1
        assert np.all(np.diff(f.array) <= 0) and np.all(np.diff(g.array) >= 0)

    def test_full_data_is_identity(self):
        space = pl.GridSpace.uniform(4)
        fv, gv = [1, 0.5, 0, 0], [0, 0, 0, 1]
        f, g = pl.disjoint_extension(space, range(4), fv, gv)
        assert f.space == space
        assert f.values == tuple(map(float, fv)) and g.values == tuple(map(float, gv))

    def test_errors(self):
        with pytest.raises(OutOfRange):
            pl.disjoint_extension(FOUR, [0, 1], [1.5, 0], [0, 1])
        with pytest.raises(ProductNotZeroOnN):
            pl.disjoint_extension(FOUR, [0, 1], [1, 0.5], [0, 0.5])

    @pytest.mark.parametrize("seed", range(30))
    def test_random_postconditions(self, seed):
        space = pl.GridSpace.uniform(17)
        rng = random.Random(seed)
        idx, fv, gv = random_boundary_data(space, rng)
        f, g = pl.disjoint_extension(space, idx, fv, gv)
        for i, a, b in zip(idx, fv, gv):
            x = space.breakpoints[i]
            assert f(x) == a and g(x) == b
        assert pl.product_is_zero(f, g)
        assert set(space.breakpoints) <= set(f.space.breakpoints)


class TestIdentities:
    def test_d_examples(self):
        assert pl.projectionless_d_check(F(THREE, 1, 0, 0), F(THREE, 0, 0, 1)) == 1
        assert pl.projectionless_d_check(F(FOUR, 1, 0, 0, 0), F(FOUR, 0, 0, 0, 1)) == 1
        with pytest.raises(InvalidPair):
            pl.projectionless_d_check(F(THREE, 1, 1, 0), F(THREE, 0, 1, 1))

    def test_scaled_identity_unit_case_matches_d(self):
        f, g = F(THREE, 1, 0, 0), F(THREE, 0, 0, 1)
        lhs, rhs = pl.scaled_pair_identity(f, g)
        assert lhs == rhs == 1

    def test_scaled_identity_scaled(self):
        f, g = random_unit_pl_pair(pl.GridSpace.uniform(33), random.Random(5))
        lhs, rhs = pl.scaled_pair_identity(f * 3, g * 0.2)
        assert lhs == pytest.approx(0.6, abs=1e-9) and rhs == pytest.approx(0.6, abs=1e-9)

    def test_scaled_identity_zero(self):
        with pytest.raises(PreconditionViolated):
            pl.scaled_pair_identity(F(THREE, 1, 0, 0), F(THREE, 0, 0, 0))


class TestPerturbation:
    def test_zero_function(self):
        b, delta = pl.zdrr_perturb(pl.PLFunction.const(THREE, 0), 0.1)
        assert not pl.pl_is_zero_divisor(b) and delta in (0.1, 0.05)
        assert b.values == (-delta,) * 3

    def test_identity(self):
        a = pl.PLFunction.from_callable(THREE, lambda x: x)
        b, delta = pl.zdrr_perturb(a, 0.5)
        assert delta == 0.5 and b.values == (-0.5, 0.0, 0.5)
        assert not pl.pl_is_zero_divisor(b)

    def test_flat_at_eps_forces_halving(self):
        a = F(FOUR, 0.1, 0.1, 0.05, 0.05)
        b, delta = pl.zdrr_perturb(a, 0.1)
        assert delta == 0.025 and not pl.pl_is_zero_divisor(b)

    @pytest.mark.parametrize("seed", range(20))
    def test_random(self, seed):
        a = random_flat_pl(pl.GridSpace.uniform(12), random.Random(seed))
        for eps in (1e-1, 1e-3, 1e-6):
            b, _ = pl.zdrr_perturb(a, eps)
            assert (a - b).norm() <= eps and not pl.pl_is_zero_divisor(b)

    def test_witness(self):
        w = pl.non_zero_divisor_witness(THREE)
        assert w.values == (0.0, 0.5, 1.0)
        for n in (2, 7, 64):
            w = pl.non_zero_divisor_witness(pl.GridSpace.uniform(n))
            assert not pl.pl_is_zero_divisor(w) and min(w.values) == 0


class TestSeparating:
    def test_two_marks(self):
        space = pl.GridSpace.uniform(9)
        z = pl.separating_sequence(space, [0.5, 0.75])
        assert (z[0] - z[1]).norm() == 1

    def test_single_mark(self):
        z = pl.separating_sequence(pl.GridSpace.uniform(9), [0.5])
        assert len(z) == 1 and z[0].norm() == 1

    def test_too_coarse(self):
        space = pl.GridSpace.uniform(9)
        with pytest.raises(GridTooCoarse):
            pl.separating_sequence(space, [space.breakpoints[i] for i in (2, 3, 4, 5, 6)])

    def test_bad_marks(self):
        with pytest.raises(ValueError):
            pl.separating_sequence(pl.GridSpace.uniform(9), [0.0])
        with pytest.raises(ValueError):
            pl.separating_sequence(pl.GridSpace.uniform(9), [0.3])


def phi_membership_oracle(s):
    """Search every disjointly supported split ``s = a + b`` with ``||a|| = ||b|| = 1``."""
    if any(x < 0 or x > 1 for x in s):
        return False
    for mask in itertools.product((0, 1), repeat=len(s)):
        a = [x if m else 0.0 for x, m in zip(s, mask)]
        b = [0.0 if m else x for x, m in zip(s, mask)]
        if max(a) == 1 and max(b) == 1:
            return True
    return False


class TestFiniteSequences:
    @pytest.mark.parametrize("s,expected", [((1, 1), True), ((1, 0.5), False), ((1, 1, 0.3), True)])
    def test_examples(self, s, expected):
        assert pl.finite_seq_phi_membership(s) is expected

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_against_oracle(self, n):
        grid = [k / 20 for k in range(21)]
        for s in itertools.product(grid, repeat=n):
            assert pl.finite_seq_phi_membership(s) == phi_membership_oracle(s), s


class TestProjectionScan:
    @pytest.mark.parametrize("n", [2, 3, 64])
    def test_constants(self, n):
        found = pl.pl_projection_scan(pl.GridSpace.uniform(n))
        assert len(found) == 2
        assert sorted(set(f.values) for f in found) == [{0.0}, {1.0}]


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 12), st.data())
def test_hereditary_zero_divisors(n, data):
    """``0 <= g <= f`` with ``f`` a zero divisor forces ``g`` to be one."""
    space = pl.GridSpace.uniform(n)
    vals = data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    i = data.draw(st.integers(0, n - 2))
    vals[i] = vals[i + 1] = 0.0
    f = pl.PLFunction(space, tuple(vals))
    scale = data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    g = pl.PLFunction(space, tuple(v * s for v, s in zip(vals, scale)))
    assert pl.pl_is_zero_divisor(f) and pl.pl_is_zero_divisor(g)


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 40), st.integers(0, 2**32))
def test_extension_pairs_are_valid(n, seed):
    f, g = random_unit_pl_pair(pl.GridSpace.uniform(n), random.Random(seed))
    assert pl.validate_pl_pair(f, g)
    assert pl.projectionless_d_check(f, g) == 1
