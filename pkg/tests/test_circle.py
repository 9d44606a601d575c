"""Integer-frame orbit geometry: distances, separation, counting."""

import math
from fractions import Fraction

import pytest

from amofractal import (
    CirclePoint,
    FixedOrbit,
    ScanCapExceeded,
    check_separation,
    circle_dist,
    circle_dist_bounds,
    count_in_interval,
    dc_check,
    dhat_estimate,
    norm_distance,
    orbit_point,
)
from amofractal.circle import exact_count

GOLDEN = (math.sqrt(5) - 1) / 2


class TestOrbitDistances:
    def test_golden_norm_is_power_of_alpha(self, golden):
        # ||q_k alpha|| = alpha^(k+1) for the golden rotation; the certified
        # bracket must straddle the float evaluation at every ladder rung
        q = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]
        for k, qk in enumerate(q, start=1):
            lo, hi = norm_distance(golden, qk)
            target = GOLDEN ** (k + 1)
            assert float(lo) <= target <= float(hi) * (1 + 1e-12)
            assert float(hi) - float(lo) < 1e-20

    def test_orbit_point_matches_quadratic_surd(self, golden):
        import mpmath

        with mpmath.workprec(300):
            surd = (mpmath.sqrt(5) - 1) / 2
            for k in (7, 89, 4181):
                x = orbit_point(golden, k)
                val = mpmath.mpf(x.value.numerator) / x.value.denominator
                ref = (k * surd) % 1
                assert abs(val - ref) <= float(x.err) + 1e-60

    def test_dist_symmetry_and_fold(self):
        a = CirclePoint.literal(Fraction(1, 10))
        b = CirclePoint.literal(Fraction(9, 10))
        assert circle_dist(a, b) == Fraction(1, 5)
        lo, hi = circle_dist_bounds(a, b)
        assert lo == hi == Fraction(1, 5)

    def test_fixed_orbit_residue_error_budget(self, golden):
        orb = FixedOrbit(golden, 64)
        for k in (1, 10, 1000):
            r = orb.point_int(k)
            exact = k * golden.fixed_point(64) % (1 << 64)
            assert abs(r - exact) <= k


class TestSeparation:
    def test_level_ten_attains_previous_denominator(self, golden):
        rep = check_separation(golden, 10)
        assert rep.q_n == 89
        assert rep.q_prev == 55
        assert rep.argmin_k == 55
        assert rep.argmin_is_q_prev
        assert rep.exceeds_half_inverse_q
        target = GOLDEN ** 10
        assert float(rep.min_dist_lo) <= target <= float(rep.min_dist_hi) * (1 + 1e-12)

    def test_all_levels_up_to_q_10000(self, golden, silver):
        for alpha in (golden, silver):
            n = 2
            while alpha.denominator(n) <= 10_000:
                rep = check_separation(alpha, n)
                assert rep.exceeds_half_inverse_q, f"violation at n={n}"
                assert rep.argmin_is_q_prev, f"argmin moved at n={n}"
                n += 1

    def test_scan_cap_guard(self, golden):
        with pytest.raises(ScanCapExceeded):
            check_separation(golden, 40, scan_cap=1000)


class TestCounting:
    def test_matches_float_brute_force(self, golden):
        # independent oracle: double-precision orbit; endpoints of the fixed
        # window stay > 1e-9 away from every orbit point at this range, far
        # beyond double rounding error
        a, b = Fraction(1, 10), Fraction(2, 5)
        m, n = 17, 10_017
        brute = sum(1 for k in range(m, n) if float(a) < (k * GOLDEN) % 1.0 < float(b))
        rep = count_in_interval(golden, m, n, (a, b))
        assert rep.count == brute
        assert rep.applicable
        assert rep.lower_bound <= rep.count <= rep.upper_bound

    def test_zero_is_a_boundary_hit_never_counted(self, golden):
        # the window is open and lo >= 0, so the k = 0 orbit point can only
        # sit on the boundary
        assert exact_count(golden, Fraction(0), Fraction(1, 2), 0, 1) == 0
        assert exact_count(golden, Fraction(1, 4), Fraction(1, 2), 0, 1) == 0

    def test_narrow_interval_not_applicable(self, golden):
        rep = count_in_interval(golden, 0, 100, (Fraction(0), Fraction(1, 1000)))
        assert not rep.applicable

    def test_dhat_scales_inversely(self, golden):
        d1 = dhat_estimate(golden, 100)
        d2 = dhat_estimate(golden, 10_000)
        d3 = dhat_estimate(golden, 1_000_000)
        assert Fraction(0) < d3 < d2 < d1 < Fraction(1)
        assert d2 == Fraction(3, 500)
        assert d2 < Fraction(1, 100)


class TestDiophantine:
    def test_golden_passes_gamma_three_eighths(self, golden):
        rep = dc_check(golden, Fraction(3, 8), kmax=10_000)
        assert rep.passed
        assert rep.worst_k == 1

    def test_golden_fails_gamma_two_fifths(self, golden):
        # ||alpha|| = alpha^2 = 0.3819... < 0.4 already at k = 1
        rep = dc_check(golden, Fraction(2, 5), kmax=100)
        assert not rep.passed
        assert rep.worst_k == 1
