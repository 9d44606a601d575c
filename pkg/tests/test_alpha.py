"""Exact continued-fraction layer: convergents, named frequencies, engines."""

from fractions import Fraction

import pytest

from amofractal import (
    NAMED_ALPHAS,
    AlphaSpec,
    ContinuedFraction,
    make_alpha,
    named_alpha,
)
from amofractal.circle import cf_expand


def _fibonacci(n):
    seq = [1, 1]
    while len(seq) < n:
        seq.append(seq[-1] + seq[-2])
    return seq


def _pell(n):
    seq = [1, 2]
    while len(seq) < n:
        seq.append(2 * seq[-1] + seq[-2])
    return seq


class TestConvergents:
    def test_golden_quotients_all_one(self, golden):
        cf = cf_expand(golden, 30)
        assert cf.quotients == (1,) * 30

    def test_golden_denominators_are_fibonacci(self, golden):
        cf = cf_expand(golden, 30)
        assert list(cf.q) == _fibonacci(31)

    def test_silver_denominators_are_pell(self, silver):
        cf = cf_expand(silver, 30)
        assert cf.quotients == (2,) * 30
        assert list(cf.q) == _pell(31)

    def test_determinant_identity_exact(self, golden):
        cf = cf_expand(golden, 30)
        for k in range(1, 31):
            assert cf.p[k] * cf.q[k - 1] - cf.p[k - 1] * cf.q[k] == (-1) ** (k - 1)

    def test_two_step_growth(self, golden, silver):
        assert cf_expand(golden, 30).check_growth()
        assert cf_expand(silver, 20).check_growth()

    def test_convergent_values(self, golden):
        cf = cf_expand(golden, 10)
        assert cf.convergent(0) == Fraction(0)
        assert cf.convergent(1) == Fraction(1)
        assert cf.convergent(5) == Fraction(5, 8)

    def test_rejects_zero_quotient(self):
        with pytest.raises(ValueError):
            ContinuedFraction((1, 0, 2))


class TestAlphaEngines:
    def test_named_catalog(self):
        assert set(NAMED_ALPHAS) == {"golden", "silver"}
        with pytest.raises(ValueError):
            named_alpha("bronze")

    def test_golden_fixed_point_solves_quadratic(self, golden):
        # alpha = (sqrt 5 - 1)/2 satisfies x^2 + x - 1 = 0; the dyadic
        # approximation A/M must satisfy it to within the slope bound 3/M
        bits = 256
        A = golden.fixed_point(bits)
        M = 1 << bits
        assert abs(A * A + A * M - M * M) < 3 * M

    def test_silver_fixed_point_solves_quadratic(self, silver):
        bits = 256
        A = silver.fixed_point(bits)
        M = 1 << bits
        # x^2 + 2x - 1 = 0
        assert abs(A * A + 2 * A * M - M * M) < 4 * M

    def test_cf_prefix_engine(self):
        alpha = make_alpha(AlphaSpec(kind="cf", prefix=(1, 2, 3, 4)))
        assert alpha.partial_quotients(4) == (1, 2, 3, 4)
        cf = alpha.continued_fraction(4)
        assert cf.q[4] == 43

    def test_cf_periodic_tail_engine(self):
        alpha = make_alpha(AlphaSpec(kind="cf", prefix=(2,), tail=(1, 3)))
        assert alpha.partial_quotients(6) == (2, 1, 3, 1, 3, 1)

    def test_denominators_upto(self, golden):
        assert golden.denominators_upto(100) == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]

    def test_fixed_point_cache_returns_same_object(self, golden):
        assert golden.fixed_point(128) is golden.fixed_point(128)
