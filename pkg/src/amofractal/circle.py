"""Certified arithmetic on the circle R/Z along a rotation orbit.

Orbit points k*alpha mod 1 are manipulated as integers at a fixed dyadic
scale: with A = floor(alpha * 2**B), the residue (k*A) mod 2**B differs from
the true point by at most k units of 2**-B.  Scans track that error budget
explicitly, so every membership or minimum reported here is a theorem about
the chosen frequency, not a float observation.  Ambiguities are resolved by
doubling B (always possible for quadratic frequencies) or raised as
PrecisionExhausted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .alpha import Alpha, ContinuedFraction
from .errors import PrecisionExhausted, ScanCapExceeded

__all__ = [
    "CirclePoint",
    "FixedOrbit",
    "cf_expand",
    "orbit_point",
    "circle_dist",
    "circle_dist_bounds",
    "norm_distance",
    "SeparationReport",
    "check_separation",
    "DiscrepancyReport",
    "count_in_interval",
    "dhat_estimate",
    "DcReport",
    "dc_check",
]

# Default cap on exhaustive scans (configurable per call).
DEFAULT_SCAN_CAP = 2_000_000


@dataclass(frozen=True)
class CirclePoint:
    """A point of R/Z with an exact dyadic value and a certified error bound.

    provenance records how the point arose; points from the same orbit can be
    compared exactly by index, which is the only way a distance of exactly
    zero can ever be certified (dyadic approximations of distinct orbit
    points are never equal to the points themselves).
    """

    value: Fraction
    err: Fraction
    provenance: tuple

    def __post_init__(self) -> None:
        if not (0 <= self.value < 1):
            raise ValueError(f"circle point value {self.value} outside [0, 1)")
        if self.err < 0:
            raise ValueError("error bound must be >= 0")

    @property
    def error_bound(self) -> Fraction:
        return self.err

    @classmethod
    def literal(cls, value: Fraction, err: Fraction = Fraction(0)) -> "CirclePoint":
        return cls(value=value % 1, err=err, provenance=("literal",))


def cf_expand(alpha: Alpha, depth: int) -> ContinuedFraction:
    """First `depth` partial quotients and convergents, exact integers."""
    if depth < 1:
        raise ValueError("need depth >= 1")
    return alpha.continued_fraction(depth)


class FixedOrbit:
    """Rotation orbit at dyadic scale 2**-bits for integer scan loops.

    point_int(k) = (k * A) mod M approximates k*alpha with error < k dyadic
    units; iterate() yields residues incrementally, which is what every hot
    loop in the package uses.
    """

    def __init__(self, alpha: Alpha, bits: int):
        self.alpha = alpha
        self.bits = bits
        self.M = 1 << bits
        self.A = alpha.fixed_point(bits)

    def point_int(self, k: int) -> int:
        return (k * self.A) % self.M

    def iterate(self, start: int, stop: int) -> Iterator[tuple[int, int]]:
        """Yield (k, residue) for k in [start, stop)."""
        r = self.point_int(start)
        for k in range(start, stop):
            yield k, r
            r += self.A
            if r >= self.M:
                r -= self.M

    def dist_int(self, r: int, r0: int) -> int:
        """Circle distance of two residues, in dyadic units."""
        d = (r - r0) % self.M
        return min(d, self.M - d)


def _orbit_bits(k: int, bits: int) -> int:
    # keep the error k * 2**-B below 2**-bits with room to spare
    return bits + max(abs(k), 1).bit_length() + 16


def orbit_point(alpha: Alpha, k: int, precision_bits: Optional[int] = None) -> CirclePoint:
    """k*alpha mod 1 with certified error below 2**-precision_bits.

    Defaults to the frequency's declared precision; the contract
    err <= 2**-(precision_bits/2) always holds with a wide margin.
    """
    bits = precision_bits if precision_bits is not None else alpha.spec.precision_bits
    B = _orbit_bits(k, bits)
    A = alpha.fixed_point(B)
    r = (k * A) % (1 << B)
    err = Fraction(abs(k), 1 << B)
    return CirclePoint(
        value=Fraction(r, 1 << B),
        err=err,
        provenance=("orbit", alpha.spec, k),
    )


def _same_orbit(x: CirclePoint, y: CirclePoint) -> bool:
    return (
        x.provenance[0] == "orbit"
        and y.provenance[0] == "orbit"
        and x.provenance[1] == y.provenance[1]
    )


def circle_dist_bounds(x: CirclePoint, y: CirclePoint) -> tuple[Fraction, Fraction]:
    """Certified (lo, hi) for the circle distance between two points.

    An exact zero lower AND upper bound requires identical orbit indices;
    numerically coincident dyadic values only pin the distance near zero.
    """
    if _same_orbit(x, y) and x.provenance[2] == y.provenance[2]:
        return Fraction(0), Fraction(0)
    d = abs(x.value - y.value)
    d = min(d, 1 - d)
    err = x.err + y.err
    lo = max(Fraction(0), d - err)
    hi = min(d + err, Fraction(1, 2))
    return lo, hi


def circle_dist(x: CirclePoint, y: CirclePoint) -> Fraction:
    """Central estimate of the circle distance; see circle_dist_bounds."""
    lo, hi = circle_dist_bounds(x, y)
    return (lo + hi) / 2


def norm_distance(alpha: Alpha, k: int, bits: int = 128) -> tuple[Fraction, Fraction]:
    """Certified (lo, hi) for ||k*alpha|| = dist(k*alpha, 0) on the circle."""
    if k == 0:
        return Fraction(0), Fraction(0)
    B = _orbit_bits(k, bits)
    M = 1 << B
    r = (k * alpha.fixed_point(B)) % M
    d = min(r, M - r)
    err = abs(k)
    return max(Fraction(0), Fraction(d - err, M)), Fraction(d + err, M)


# ---------------------------------------------------------------------------
# separation of an orbit segment from 0


@dataclass(frozen=True)
class SeparationReport:
    """Result of an exhaustive minimum of ||k*alpha|| over 1 <= k < q_n.

    The same scan certifies pairwise separation ||(k - k')alpha|| > 1/(2 q_n)
    for distinct k, k' <= q_n, since |k - k'| < q_n.
    """

    n: int
    q_n: int
    q_prev: int
    argmin_k: int
    min_dist_lo: Fraction
    min_dist_hi: Fraction
    argmin_is_q_prev: bool
    exceeds_half_inverse_q: bool

    @property
    def min_dist(self) -> Fraction:
        return (self.min_dist_lo + self.min_dist_hi) / 2

    @property
    def threshold(self) -> Fraction:
        return Fraction(1, 2 * self.q_n)

    @property
    def passed(self) -> bool:
        return self.argmin_is_q_prev and self.exceeds_half_inverse_q

    # audit-flavoured alias
    @property
    def ok(self) -> bool:
        return self.passed


def check_separation(
    alpha: Alpha, n: int, scan_cap: int = DEFAULT_SCAN_CAP
) -> SeparationReport:
    """Exhaustively verify min_{1<=k<q_n} ||k alpha|| = ||q_{n-1} alpha|| > 1/(2 q_n)."""
    cf = alpha.continued_fraction(n)
    q_n, q_prev = cf.q[n], cf.q[n - 1]
    if q_n == 1:
        # empty quantifier 1 <= k < 1: vacuous pass
        return SeparationReport(
            n=n,
            q_n=1,
            q_prev=q_prev,
            argmin_k=0,
            min_dist_lo=Fraction(1, 2),
            min_dist_hi=Fraction(1, 2),
            argmin_is_q_prev=True,
            exceeds_half_inverse_q=True,
        )
    if q_n > scan_cap:
        raise ScanCapExceeded(
            f"separation scan needs q_n = {q_n} iterations", needed=q_n, cap=scan_cap
        )
    bits = 64 + 2 * q_n.bit_length()
    while True:
        orb = FixedOrbit(alpha, bits)
        M = orb.M
        best_d, best_k = M, 0
        second_d = M
        for k, r in orb.iterate(1, q_n):
            d = min(r, M - r)
            if d < best_d:
                second_d = best_d
                best_d, best_k = d, k
            elif d < second_d:
                second_d = d
        err = q_n  # uniform per-point error bound in dyadic units
        argmin_certified = best_d + err < second_d - err
        bound_certified_true = 2 * q_n * (best_d - err) > M
        bound_certified_false = 2 * q_n * (best_d + err) < M
        if argmin_certified and (bound_certified_true or bound_certified_false):
            return SeparationReport(
                n=n,
                q_n=q_n,
                q_prev=q_prev,
                argmin_k=best_k,
                min_dist_lo=Fraction(best_d - err, M),
                min_dist_hi=Fraction(best_d + err, M),
                argmin_is_q_prev=(best_k == q_prev),
                exceeds_half_inverse_q=bound_certified_true,
            )
        bits *= 2
        if bits > 4096:
            raise PrecisionExhausted(
                f"separation at n={n} undecidable below 4096 bits"
            )


# ---------------------------------------------------------------------------
# counting orbit points in an interval


def _cmp_with_margin(r: int, err: int, bound: Fraction, M: int) -> int:
    """+1 if (r +- err)/M certified > bound, -1 if certified <, else 0."""
    lhs_lo = (r - err) * bound.denominator
    lhs_hi = (r + err) * bound.denominator
    rhs = bound.numerator * M
    if lhs_lo > rhs:
        return 1
    if lhs_hi < rhs:
        return -1
    return 0


def _resolve_side(alpha: Alpha, k: int, bound: Fraction, bits: int) -> int:
    """Certified sign of (k alpha mod 1) - bound, refining precision as needed."""
    while True:
        bits *= 2
        if bits > 8192:
            raise PrecisionExhausted(
                f"cannot separate orbit point k={k} from boundary {bound}"
            )
        M = 1 << bits
        r = (k * alpha.fixed_point(bits)) % M
        c = _cmp_with_margin(r, max(abs(k), 1), bound, M)
        if c != 0:
            return c


def exact_count(
    alpha: Alpha,
    lo: Fraction,
    hi: Fraction,
    start: int,
    stop: int,
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> int:
    """Number of k in [start, stop) with k*alpha mod 1 in the open (lo, hi).

    Requires 0 <= lo < hi <= 1; wrap-around windows should be split by the
    caller.  Border cases are resolved at higher precision so the count is
    exact for the true orbit.
    """
    if not (0 <= lo < hi <= 1):
        raise ValueError(f"need 0 <= lo < hi <= 1, got ({lo}, {hi})")
    if stop - start > scan_cap:
        raise ScanCapExceeded(
            f"interval count scans {stop - start} points", needed=stop - start, cap=scan_cap
        )
    bits = 64 + 2 * max(abs(start), abs(stop), 2).bit_length()
    orb = FixedOrbit(alpha, bits)
    M = orb.M
    count = 0
    for k, r in orb.iterate(start, stop):
        if k == 0:
            # the only exactly known orbit point; boundary hits excluded
            if lo < 0 < hi:
                count += 1
            continue
        err = abs(k)
        c_lo = _cmp_with_margin(r, err, lo, M)
        if c_lo == 0:
            c_lo = _resolve_side(alpha, k, lo, bits)
        if c_lo < 0:
            continue
        c_hi = _cmp_with_margin(r, err, hi, M)
        if c_hi == 0:
            c_hi = _resolve_side(alpha, k, hi, bits)
        if c_hi < 0:
            count += 1
    return count


def dhat_estimate(alpha: Alpha, n: int) -> Fraction:
    """Discrepancy surrogate min(1, (3/n) * sum of a_{k+1} over q_k <= n).

    Dominates the star discrepancy of the first n orbit points, so any
    interval longer than twice this value gets two-sided equidistribution
    bounds in count_in_interval.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    total = 0
    k = 0
    while True:
        q_k = alpha.denominator(k)
        if q_k > n:
            break
        total += alpha.partial_quotients(k + 1)[k]
        k += 1
    return min(Fraction(1), Fraction(3 * total, n))


@dataclass(frozen=True)
class DiscrepancyReport:
    """Exact orbit count in an interval plus the equidistribution window.

    When applicable is True (interval longer than twice the discrepancy
    surrogate), lower_bound <= count <= upper_bound is a guaranteed fact;
    otherwise the bounds are reported but not asserted.
    """

    n_range: tuple[int, int]
    interval: tuple[Fraction, Fraction]
    count: int
    lower_bound: Fraction
    upper_bound: Fraction
    applicable: bool
    dhat: Fraction


def count_in_interval(
    alpha: Alpha,
    m: int,
    n: int,
    interval: tuple[Fraction, Fraction],
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> DiscrepancyReport:
    """Count k in [m, n) with k*alpha mod 1 in the open interval (a, b).

    The count itself is exact.  applicable=True means b - a exceeds twice
    the discrepancy surrogate of the n - m points scanned, in which case the
    two-sided window [(b-a)(n-m)/2, 2(b-a)(n-m)] is guaranteed to contain
    the count.
    """
    a, b = Fraction(interval[0]), Fraction(interval[1])
    if not (0 <= m < n):
        raise ValueError(f"need 0 <= m < n, got ({m}, {n})")
    if not (0 <= a < b <= 1):
        raise ValueError(f"need 0 <= a < b <= 1, got ({a}, {b})")
    count = exact_count(alpha, a, b, m, n, scan_cap=scan_cap)
    span = n - m
    length = b - a
    dh = dhat_estimate(alpha, span)
    return DiscrepancyReport(
        n_range=(m, n),
        interval=(a, b),
        count=count,
        lower_bound=Fraction(length * span, 2),
        upper_bound=2 * length * span,
        applicable=length > 2 * dh,
        dhat=dh,
    )


# ---------------------------------------------------------------------------
# Diophantine condition check


@dataclass(frozen=True)
class DcReport:
    """Exhaustive check of |k|**tau * ||k alpha|| >= gamma for 1 <= |k| <= kmax.

    Scanning positive k suffices since ||-k alpha|| = ||k alpha||; worst_k is
    reported positive.  A pass is finite-scan evidence, not a proof of the
    Diophantine condition.
    """

    passed: bool
    worst_k: int
    worst_value: float
    gamma: Fraction
    tau: Fraction
    kmax: int


def dc_check(
    alpha: Alpha,
    gamma: Fraction,
    tau: Fraction = Fraction(1),
    kmax: int = 100_000,
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> DcReport:
    """Check the Diophantine lower bound ||k alpha|| >= gamma / |k|**tau exhaustively.

    gamma and tau must be rational so each comparison can be done in exact
    integer arithmetic: ||k alpha|| >= gamma k**-tau with tau = u/v amounts to
    d**v * k**u * g_den**v >= g_num**v * M**v for the scanned residues, with
    the per-point error absorbed on the certifying side.
    """
    gamma = Fraction(gamma)
    tau = Fraction(tau)
    if gamma <= 0 or tau < 0:
        raise ValueError("need gamma > 0 and tau >= 0")
    if kmax < 1:
        raise ValueError("need kmax >= 1")
    if kmax > scan_cap:
        raise ScanCapExceeded(f"dc scan needs {kmax} points", needed=kmax, cap=scan_cap)
    u, v = tau.numerator, tau.denominator
    bits = 64 + 2 * kmax.bit_length()
    orb = FixedOrbit(alpha, bits)
    M = orb.M
    rhs = gamma.numerator**v * M**v
    gden = gamma.denominator**v
    passed = True
    worst_k, worst_ratio = 1, None
    for k, r in orb.iterate(1, kmax + 1):
        d = min(r, M - r)
        # certified float ranking for the report; exact compare for the verdict
        ratio = (d / M) * float(k) ** float(tau)
        if worst_ratio is None or ratio < worst_ratio:
            worst_ratio, worst_k = ratio, k
        if passed:
            lhs = (d - k) ** v * k**u * gden if d > k else 0
            if lhs < rhs:
                # not certified >= : check certified < with the error flipped
                if (d + k) ** v * k**u * gden < rhs:
                    passed = False
                else:
                    side = _dc_resolve(alpha, k, gamma, u, v, bits)
                    if side < 0:
                        passed = False
    return DcReport(
        passed=passed,
        worst_k=worst_k,
        worst_value=float(worst_ratio),
        gamma=gamma,
        tau=tau,
        kmax=kmax,
    )


def _dc_resolve(alpha: Alpha, k: int, gamma: Fraction, u: int, v: int, bits: int) -> int:
    while True:
        bits *= 2
        if bits > 8192:
            raise PrecisionExhausted(f"dc comparison undecidable at k={k}")
        M = 1 << bits
        r = (k * alpha.fixed_point(bits)) % M
        d = min(r, M - r)
        rhs = gamma.numerator**v * M**v
        gden = gamma.denominator**v
        if d > k and (d - k) ** v * k**u * gden >= rhs:
            return 1
        if (d + k) ** v * k**u * gden < rhs:
            return -1
