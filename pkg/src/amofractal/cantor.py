"""Nested annulus refinement of the circle along denominator windows.

Levels of annuli A(n) = B(n*alpha, e^{-n delta_t}) \\ B(n*alpha, c e^{-n delta_t})
are carved out of [0, 1): integers n are harvested from denominator windows
q_k/2 <= n < q_k whose orbit points land inside the current region, integers
whose annulus comes too close to an intermediate orbit point are deleted, and
the survivors are thinned until the guard balls B(n alpha, a/(delta n)) are
pairwise disjoint.  The construction records every parameter, count and margin
it relied on, and verify_tree re-derives all of them from scratch.

Two operating modes share the code path:

* faithful: the powers of two are pinned (2^-14, 2^9, 2^-10, 2^-16) and every
  admissibility gate is enforced.  Only the first level is buildable at desk
  scale; the second level would need denominator windows of size e^{n delta},
  which the scan cap rejects with a diagnostic.
* toy: the powers are configurable and the equidistribution gate becomes
  advisory, so three levels fit under the scan cap while the structural
  inequalities (cardinality windows, guard-ball disjointness, nesting,
  exclusion margins) are still checked with the configured constants.

All geometry is certified: orbit points are integer residues with explicit
error budgets, radii are rational enclosures of e^{-n delta}, and every
comparison either resolves with a margin or refines its precision.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

from .alpha import Alpha
from .circle import (
    DEFAULT_SCAN_CAP,
    CirclePoint,
    FixedOrbit,
    circle_dist_bounds,
    dhat_estimate,
    orbit_point,
)
from .errors import (
    CardinalityViolation,
    InadmissibleScale,
    PrecisionExhausted,
    ScanCapExceeded,
)
from .numeric import Enclosure, exp_bounds

__all__ = [
    "Annulus",
    "ConstructionConstants",
    "LevelParams",
    "Selection",
    "ThinnedSelection",
    "CantorNode",
    "CantorTree",
    "AuditEntry",
    "AuditReport",
    "delta_sequence",
    "faithful_constants",
    "toy_constants",
    "toy_delta_schedule",
    "make_annulus",
    "select_in_interval",
    "select_in_annulus",
    "thin_selection",
    "admissible_scale_floor",
    "choose_k",
    "build_tree",
    "cantor_point",
    "verify_tree",
    "write_audit_csv",
    "tree_to_json",
    "tree_hash",
]

# relative bits carried by radius enclosures; doubled locally when a compare stalls
_RADIUS_PREC = 160
# relative bits kept when enclosures are serialized
_SER_BITS = 128
# refusal threshold for single-point refinement ladders
_MAX_BITS = 1 << 23

IntervalLike = tuple


def _fr(x) -> Fraction:
    # floats convert exactly (they are dyadic); no rounding happens here
    return Fraction(x)


def _log10(x: Fraction) -> float:
    """Rough base-10 magnitude of a positive rational, safe for huge exponents."""
    if x <= 0:
        return float("-inf")
    return (x.numerator.bit_length() - x.denominator.bit_length()) * 0.30102999566398114


# ---------------------------------------------------------------------------
# the level-delta schedule


def delta_sequence(delta, index: int):
    """Level delta at the given index: min(delta, log log index) once the
    index reaches e^3 (i.e. 21), and min(delta, 1) below that.

    delta may be +inf; the return value is exact (a Fraction) whenever the
    min is attained by delta or by the constant 1.
    """
    if index < 1:
        raise ValueError(f"need index >= 1, got {index}")
    infinite = isinstance(delta, float) and math.isinf(delta)
    if infinite:
        if delta < 0:
            raise ValueError("delta must be positive")
        base = None
    else:
        base = _fr(delta)
        if base <= 0:
            raise ValueError(f"delta must be positive, got {delta}")
    if index < 21:
        cap = Fraction(1)
        if base is None or base > cap:
            return cap
        return base
    cap = math.log(math.log(index))
    if base is None or base > cap:
        return cap
    return base


def _resolve_schedule(delta, schedule, depth: int) -> tuple[Fraction, ...]:
    """Per-level deltas for levels 1..depth+1, exact rationals.

    The extra entry feeds the look-ahead bound of the window-floor condition
    at the deepest built level.
    """
    if schedule is not None:
        vals = tuple(_fr(v) for v in schedule)
        if not vals:
            raise ValueError("empty delta schedule")
        if any(v <= 0 for v in vals):
            raise ValueError("schedule deltas must be positive")
        if any(a > b for a, b in zip(vals, vals[1:])):
            raise ValueError("delta schedule must be non-decreasing")
        if not (isinstance(delta, float) and math.isinf(delta)):
            if vals[-1] > _fr(delta):
                raise ValueError("schedule may not exceed the target delta")
        while len(vals) < depth + 1:
            vals = vals + (vals[-1],)
        return vals[: depth + 1]
    out = []
    for t in range(1, depth + 2):
        d = delta_sequence(delta, t)
        if not isinstance(d, Fraction):
            raise InadmissibleScale(
                "default schedule is irrational beyond index 20; pass an explicit one"
            )
        out.append(d)
    return tuple(out)


# ---------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class ConstructionConstants:
    """The annulus shape ratio c, the seed guard scale a0, and the powers of
    two steering sub-scale counts and window floors.

    faithful mode pins the powers; toy mode may override them so that deep
    levels stay below the scan cap while the same inequalities are audited.
    """

    c: Fraction
    a0: Fraction
    mode: str = "faithful"
    p_a: Fraction = Fraction(1, 1 << 14)
    p_j: int = 1 << 9
    p_amax: Fraction = Fraction(1, 1 << 10)
    p_h: Optional[Fraction] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _fr(self.c))
        object.__setattr__(self, "a0", _fr(self.a0))
        object.__setattr__(self, "p_a", _fr(self.p_a))
        object.__setattr__(self, "p_amax", _fr(self.p_amax))
        if self.p_h is None:
            object.__setattr__(self, "p_h", self.p_a / 4)
        else:
            object.__setattr__(self, "p_h", _fr(self.p_h))
        if self.mode not in ("faithful", "toy"):
            raise ValueError(f"mode must be 'faithful' or 'toy', got {self.mode!r}")
        if not (0 < self.c < 1):
            raise ValueError("need 0 < c < 1")
        if self.a0 <= 0:
            raise ValueError("need a0 > 0")
        if self.p_j < 1:
            raise ValueError("need p_j >= 1")
        if self.mode == "faithful":
            pinned = (
                self.p_a == Fraction(1, 1 << 14)
                and self.p_j == 1 << 9
                and self.p_amax == Fraction(1, 1 << 10)
                and self.p_h == Fraction(1, 1 << 16)
            )
            if not pinned:
                raise ValueError("faithful mode pins the powers of two")

    def validate(self, delta1: Fraction) -> None:
        """Mode-specific admissibility of (c, a0) against the first level delta."""
        delta1 = _fr(delta1)
        if delta1 <= 0:
            raise ValueError("delta1 must be positive")
        if self.c * 2 >= 1:
            raise InadmissibleScale("need c < 1/2 so annuli carry at least half a ball")
        if self.mode == "faithful":
            # c < (1/24)^2 (1 - e^{-delta1}), certified from above
            _, ehi = exp_bounds(-delta1)
            if self.c * 576 >= 1 - ehi:
                raise InadmissibleScale(
                    f"c = {self.c} not below (1/24)^2 (1 - e^-delta1)"
                )
            if self.a0 >= self.p_amax * min(Fraction(1), delta1):
                raise InadmissibleScale(
                    f"a0 = {self.a0} not below {self.p_amax} * min(1, delta1)"
                )
        else:
            if self.a0 * 8 > delta1:
                raise InadmissibleScale(
                    "need a0 <= delta1 / 8 for in-window guard-ball separation"
                )


def faithful_constants(delta1=Fraction(1)) -> ConstructionConstants:
    """Largest dyadic (c, a0) admissible in faithful mode at the given delta1."""
    delta1 = _fr(delta1)
    _, ehi = exp_bounds(-delta1)
    c_bound = (1 - ehi) / 576
    c = Fraction(1, 2)
    while c >= c_bound:
        c /= 2
    a_bound = Fraction(1, 1 << 10) * min(Fraction(1), delta1)
    a0 = Fraction(1, 2)
    while a0 >= a_bound:
        a0 /= 2
    return ConstructionConstants(c=c, a0=a0, mode="faithful")


def toy_constants() -> ConstructionConstants:
    """The stock toy knobs used by the depth-3 demonstrations and tests."""
    return ConstructionConstants(
        c=Fraction(1, 20),
        a0=Fraction(1, 1250),
        mode="toy",
        p_a=Fraction(1, 128),
        p_j=64,
        p_amax=Fraction(1, 16),
        p_h=Fraction(1, 512),
    )


def toy_delta_schedule() -> tuple[Fraction, Fraction, Fraction]:
    """Slow-start ramp ending at delta = 2; pairs with toy_constants()."""
    return (Fraction(27, 512), Fraction(33, 512), Fraction(2))


# ---------------------------------------------------------------------------
# annuli


@dataclass(frozen=True)
class Annulus:
    """The ring A(n) = B(n alpha, e^{-n delta}) \\ B(n alpha, c e^{-n delta}).

    outer_bounds encloses e^{-n delta}; the inner radius is exactly c times
    the outer one, so the shape ratio outer/inner = 1/c holds by construction.
    scale_index is the l with q_l/2 <= n < q_l the integer was harvested from.
    """

    center_k: int
    scale_index: int
    delta: Fraction
    c: Fraction
    center: CirclePoint
    outer_bounds: Enclosure

    def __post_init__(self) -> None:
        lo, hi = self.outer_bounds
        if not (0 < lo <= hi):
            raise ValueError("outer radius enclosure must be positive and ordered")
        if not (0 < self.c < 1):
            raise ValueError("need 0 < c < 1")
        if self.delta <= 0:
            raise ValueError("need delta > 0")

    @property
    def inner_bounds(self) -> Enclosure:
        lo, hi = self.outer_bounds
        return (self.c * lo, self.c * hi)

    @property
    def outer(self) -> float:
        return math.exp(-float(self.center_k * self.delta))

    @property
    def inner(self) -> float:
        return float(self.c) * self.outer

    @property
    def measure_bounds(self) -> Enclosure:
        # total length of the two arcs
        lo, hi = self.outer_bounds
        return (2 * (1 - self.c) * lo, 2 * (1 - self.c) * hi)

    @property
    def log10_outer(self) -> float:
        return -float(self.center_k * self.delta) * 0.43429448190325176


def make_annulus(
    alpha: Alpha,
    n: int,
    scale_index: int,
    delta,
    c,
    prec: int = _RADIUS_PREC,
) -> Annulus:
    delta, c = _fr(delta), _fr(c)
    q_l = alpha.denominator(scale_index)
    if not (q_l <= 2 * n and n < q_l):
        raise ValueError(f"n = {n} outside the window q_{scale_index}/2 <= n < q_{scale_index} = {q_l}")
    return Annulus(
        center_k=n,
        scale_index=scale_index,
        delta=delta,
        c=c,
        center=orbit_point(alpha, n),
        outer_bounds=exp_bounds(-n * delta, prec),
    )


def _wrap_arc(lo: Fraction, hi: Fraction) -> list[tuple[Fraction, Fraction]]:
    """Split an arc of length < 1 into non-wrapping sub-intervals of [0, 1)."""
    if hi <= lo:
        return []
    if hi - lo >= 1:
        raise ValueError("arc spans the whole circle")
    a = lo % 1
    b = a + (hi - lo)
    if b <= 1:
        return [(a, b)]
    return [(a, Fraction(1)), (Fraction(0), b - 1)]


def _target_shell_arcs(annulus: Annulus) -> tuple[list[tuple[Fraction, Fraction]], Fraction]:
    """Conservative arcs of the shrunken shell 2c e' < dist < (1-c) e'.

    Any point certified inside these rational arcs is truly inside the shell
    regardless of the center's own dyadic error, which is absorbed into the
    arc endpoints.  Returns (arcs, certified minimal arc width).
    """
    out_lo, out_hi = annulus.outer_bounds
    shell_out_lo = (1 - annulus.c) * out_lo
    shell_in_hi = 2 * annulus.c * out_hi
    v, e = annulus.center.value, annulus.center.err
    width = (shell_out_lo - shell_in_hi) - 2 * e
    if width <= 0:
        raise InadmissibleScale("annulus too thin to shrink against its center error")
    arcs: list[tuple[Fraction, Fraction]] = []
    arcs += _wrap_arc(v + e + shell_in_hi, v - e + shell_out_lo)
    arcs += _wrap_arc(v + e - shell_out_lo, v - e - shell_in_hi)
    return arcs, width


# ---------------------------------------------------------------------------
# window scans


def _certified_side(alpha: Alpha, n: int, bound: Fraction, bits: int) -> int:
    """Certified sign of (n alpha mod 1) - bound, refining precision as needed."""
    while True:
        bits *= 2
        if bits > _MAX_BITS:
            raise PrecisionExhausted(f"cannot separate point {n} from boundary {bound}")
        M = 1 << bits
        r = (n * alpha.fixed_point(bits)) % M
        if (r - n) * bound.denominator > bound.numerator * M:
            return 1
        if (r + n) * bound.denominator < bound.numerator * M:
            return -1


def _scan_arcs(
    alpha: Alpha,
    arcs: Sequence[tuple[Fraction, Fraction]],
    n0: int,
    n1: int,
    scan_cap: int,
    width_hint: Fraction,
) -> list[int]:
    """All n in [n0, n1) whose orbit point lies strictly inside one of the arcs."""
    span = n1 - n0
    if span > scan_cap:
        raise ScanCapExceeded(
            f"window scan needs {span} points", needed=span, cap=scan_cap
        )
    wbits = max(0, width_hint.denominator.bit_length() - width_hint.numerator.bit_length()) + 1
    bits = 48 + max(n1, 2).bit_length() + wbits
    orb = FixedOrbit(alpha, bits)
    M = orb.M
    pre = [
        (lo, hi, lo.numerator * M, lo.denominator, hi.numerator * M, hi.denominator)
        for lo, hi in arcs
    ]
    out: list[int] = []
    for n, r in orb.iterate(n0, n1):
        for lo, hi, lnM, ld, hnM, hd in pre:
            if (r - n) * ld > lnM and (r + n) * hd < hnM:
                out.append(n)
                break
            if (r + n) * ld < lnM or (r - n) * hd > hnM:
                continue
            if (
                _certified_side(alpha, n, lo, bits) > 0
                and _certified_side(alpha, n, hi, bits) < 0
            ):
                out.append(n)
                break
    return out


# ---------------------------------------------------------------------------
# selections


@dataclass(frozen=True)
class Selection:
    """One harvested denominator window: the kept integers plus the audit data
    (conflict deletions, region measure, equidistribution applicability)."""

    scale_index: int
    q: int
    window: tuple[int, int]
    members: tuple[int, ...]
    removed_conflicts: tuple[int, ...]
    conflict_scan: str
    region_measure: Enclosure
    applicable: bool
    dhat: Fraction

    @property
    def count(self) -> int:
        return len(self.members)

    def card_window(self) -> tuple[Fraction, Fraction]:
        """(lower, upper) cardinality bounds (1/8)|R| q and |R| q, outer-rounded."""
        lo, hi = self.region_measure
        return (hi * self.q / 8, lo * self.q)


@dataclass(frozen=True)
class ThinnedSelection:
    """A Selection after guard-ball thinning against earlier sub-scales."""

    base: Selection
    survivors: tuple[int, ...]
    removed_overlaps: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.survivors)


def _window(alpha: Alpha, k: int) -> tuple[int, int, int]:
    if k < 1:
        raise ValueError(f"need scale index >= 1, got {k}")
    q = alpha.denominator(k)
    n0 = (q + 1) // 2
    if n0 >= q:
        raise InadmissibleScale(f"scale index {k} has an empty window (q = {q})")
    return q, n0, q


def _check_mode(mode: str) -> None:
    if mode not in ("faithful", "toy"):
        raise ValueError(f"mode must be 'faithful' or 'toy', got {mode!r}")


def _card_check(count: int, q: int, measure: Enclosure, what: str) -> None:
    m_lo, m_hi = measure
    if 8 * count < m_hi * q:
        raise InadmissibleScale(
            f"{what}: count {count} below (1/8)|R| q ~ {float(m_hi * q / 8):.4g}"
        )
    if count > m_hi * q:
        raise InadmissibleScale(
            f"{what}: count {count} above |R| q ~ {float(m_hi * q):.4g}"
        )
    if count > m_lo * q:
        raise PrecisionExhausted(
            f"{what}: count {count} straddles the upper cardinality bound enclosure"
        )


def select_in_interval(
    alpha: Alpha,
    interval: IntervalLike,
    k: int,
    delta,
    mode: str = "faithful",
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> Selection:
    """Harvest the window q_k/2 <= n < q_k inside an interval of the circle.

    The interval is shrunk by the window's largest ball radius so that every
    B(n alpha, e^{-n delta}) fits inside; [0, 1] is treated as the full circle
    and not shrunk.  In faithful mode the interval must clear twice the
    discrepancy surrogate of the window, otherwise the scale is inadmissible.
    """
    _check_mode(mode)
    delta = _fr(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    a, b = _fr(interval[0]), _fr(interval[1])
    if not (0 <= a < b <= 1):
        raise ValueError(f"need 0 <= a < b <= 1, got ({a}, {b})")
    q, n0, n1 = _window(alpha, k)
    span = n1 - n0
    length = b - a
    full = a == 0 and b == 1
    r_hi = exp_bounds(-n0 * delta)[1]
    if 8 * r_hi > 1:
        raise InadmissibleScale(
            f"ball radius e^(-{n0} delta) ~ {float(r_hi):.3g} above 1/8 at the window floor"
        )
    dh = dhat_estimate(alpha, span)
    applicable = length > 2 * dh
    if mode == "faithful" and not applicable:
        raise InadmissibleScale(
            f"interval length {float(length):.4g} not above twice the "
            f"discrepancy surrogate {float(dh):.4g} of {span} points"
        )
    if full:
        members = list(range(n0, n1))
    else:
        lo, hi = a + r_hi, b - r_hi
        if lo >= hi:
            raise InadmissibleScale("interval too narrow for the window's ball radii")
        members = _scan_arcs(alpha, [(lo, hi)], n0, n1, scan_cap, hi - lo)
    sel = Selection(
        scale_index=k,
        q=q,
        window=(n0, n1),
        members=tuple(members),
        removed_conflicts=(),
        conflict_scan="none: intervals have no conflict pass",
        region_measure=(length, length),
        applicable=applicable,
        dhat=dh,
    )
    _card_check(sel.count, q, sel.region_measure, f"interval window k={k}")
    return sel


class _DecayLadder:
    """Integer bracket of e^{-m delta} * 2^bits, stepped by one in m.

    Both ends carry directed rounding, so lo <= e^{-m delta} 2^bits <= hi
    at every step; the bracket widens by O(1) units per step which is far
    below the margins the conflict pass needs.
    """

    def __init__(self, delta: Fraction, m0: int, bits: int):
        self.bits = bits
        scale = 1 << bits
        lo, hi = exp_bounds(-m0 * delta, bits + 32)
        self.lo = (lo.numerator * scale) // lo.denominator
        self.hi = -((-hi.numerator * scale) // hi.denominator)
        flo, fhi = exp_bounds(-delta, bits + 32)
        self.f_lo = (flo.numerator * scale) // flo.denominator
        self.f_hi = -((-fhi.numerator * scale) // fhi.denominator)

    def step(self) -> None:
        self.lo = (self.lo * self.f_lo) >> self.bits
        self.hi = ((self.hi * self.f_hi) >> self.bits) + 1


def _conflict_pass(
    alpha: Alpha,
    candidates: Sequence[int],
    delta: Fraction,
    c: Fraction,
    q_l: int,
    q_hi: int,
    child_r_hi: Fraction,
    scan_cap: int,
) -> tuple[tuple[int, ...], str]:
    """Delete candidates whose annulus meets B(m alpha, c e^{-m delta}) for
    some intermediate q_l <= m < q_hi.

    Distinct indices below q_hi are separated by more than 1/(2 q_hi), so when
    that gap exceeds the largest annulus radius plus the largest deletion
    radius the pass is vacuous and no scan runs.
    """
    thr_hi = c * exp_bounds(-q_l * delta)[1]
    gap = Fraction(1, 2 * q_hi)
    # compared in two steps so the deep child radius never enters a sum
    if gap > thr_hi and gap - thr_hi > child_r_hi:
        return (), (
            "vacuous: 1/(2 q_k) ~ %.3g exceeds e^(-q_k delta / 2) + c e^(-q_l delta), "
            "the latter ~ %.3g" % (float(gap), float(thr_hi))
        )
    rng = q_hi - q_l
    if rng > scan_cap:
        raise ScanCapExceeded(
            f"conflict scan covers {rng} intermediate scales", needed=rng, cap=scan_cap
        )
    bits = int(q_hi * delta * Fraction(1443, 1000)) + 64
    if bits > (1 << 20):
        # a non-vacuous pass at this depth would grind for hours; a scale
        # where it triggers is not worth building anyway
        raise PrecisionExhausted(
            f"conflict scan would need {bits} bits of orbit resolution"
        )
    orb = FixedOrbit(alpha, bits)
    M = orb.M
    scale = M
    radii = {}
    for n in candidates:
        lo, hi = exp_bounds(-n * delta, bits + 32)
        out_lo = (lo.numerator * scale) // lo.denominator
        out_hi = -((-hi.numerator * scale) // hi.denominator)
        inn_lo = (c * lo).numerator * scale // (c * lo).denominator
        inn_hi = -((-(c * hi).numerator * scale) // (c * hi).denominator)
        radii[n] = (out_lo, out_hi, inn_lo, inn_hi, orb.point_int(n))
    ladder = _DecayLadder(delta, q_l, bits)
    cnum, cden = c.numerator, c.denominator
    removed = set()
    m = q_l
    r_m = orb.point_int(m)
    A = orb.A
    while m < q_hi:
        rm_lo = (ladder.lo * cnum) // cden
        rm_hi = -((-ladder.hi * cnum) // cden) + 1
        for n, (out_lo, out_hi, inn_lo, inn_hi, r_n) in radii.items():
            if n in removed or n == m:
                continue
            d = r_n - r_m
            if d < 0:
                d = -d
            if M - d < d:
                d = M - d
            derr = n + m
            # definitely meets: both gap components certified below the radius
            if d + derr - out_lo < rm_lo and inn_hi - d + derr < rm_lo:
                removed.add(n)
                continue
            # definitely clear
            if d - derr - out_hi >= rm_hi or inn_lo - d - derr >= rm_hi:
                continue
            # borderline: deletion is the conservative side
            removed.add(n)
        m += 1
        r_m += A
        if r_m >= M:
            r_m -= M
        ladder.step()
    return tuple(sorted(removed)), f"enumerated {rng} intermediate scales"


def select_in_annulus(
    alpha: Alpha,
    annulus: Annulus,
    k: int,
    delta,
    mode: str = "faithful",
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> Selection:
    """Harvest the window q_k/2 <= n < q_k inside an annulus, then run the
    conflict pass against all intermediate scales q_l <= m < q_k.

    Admissibility: the new level delta may not decrease, the window must clear
    the annulus scale by two (disjoint index ranges), the child ball radius
    must fit through the annulus gap c e^{-l delta'}, and every ball must be
    small against the circle.  In faithful mode the shell arcs must also clear
    twice the discrepancy surrogate and the conflict deletions must stay under
    the volume bound |A| q / 24.
    """
    _check_mode(mode)
    delta = _fr(delta)
    if delta < annulus.delta:
        raise InadmissibleScale(
            f"level delta {delta} below the annulus delta {annulus.delta}"
        )
    l = annulus.scale_index
    if k < l + 2:
        raise InadmissibleScale(
            f"scale index {k} must clear the annulus scale {l} by at least two"
        )
    q, n0, n1 = _window(alpha, k)
    q_l = alpha.denominator(l)
    span = n1 - n0
    c = annulus.c
    out_lo, out_hi = annulus.outer_bounds
    r_child_hi = exp_bounds(-n0 * delta)[1]
    if 8 * r_child_hi > 1:
        raise InadmissibleScale(
            f"ball radius e^(-{n0} delta) ~ {float(r_child_hi):.3g} above 1/8"
        )
    if r_child_hi > c * out_lo:
        raise InadmissibleScale(
            f"child ball radius ~ {float(r_child_hi):.3g} does not fit the annulus "
            f"gap c e^(-l delta') ~ {float(c * out_lo):.3g}"
        )
    sep_small = 4 * q * r_child_hi < 1
    if mode == "faithful" and not sep_small:
        raise InadmissibleScale(
            f"e^(-q_k delta / 2) not below 1/(4 q_k) at scale {k}"
        )
    arcs, width = _target_shell_arcs(annulus)
    dh = dhat_estimate(alpha, span)
    applicable = width > 2 * dh
    if mode == "faithful" and not applicable:
        raise InadmissibleScale(
            f"shell arc width {float(width):.4g} not above twice the discrepancy "
            f"surrogate {float(dh):.4g} of {span} points"
        )
    dprime = _scan_arcs(alpha, arcs, n0, n1, scan_cap, width)
    conflicts, scan_note = _conflict_pass(
        alpha, dprime, delta, c, q_l, q, r_child_hi, scan_cap
    )
    removed = set(conflicts)
    members = tuple(n for n in dprime if n not in removed)
    measure = annulus.measure_bounds
    if mode == "faithful" and 24 * len(conflicts) > measure[0] * q:
        raise CardinalityViolation(
            f"conflict deletions {len(conflicts)} above the volume bound |A| q / 24"
        )
    sel = Selection(
        scale_index=k,
        q=q,
        window=(n0, n1),
        members=members,
        removed_conflicts=conflicts,
        conflict_scan=scan_note,
        region_measure=measure,
        applicable=applicable,
        dhat=dh,
    )
    _card_check(sel.count, q, measure, f"annulus window k={k}")
    return sel


# ---------------------------------------------------------------------------
# thinning


def _as_enclosure(a) -> Enclosure:
    if isinstance(a, tuple):
        lo, hi = _fr(a[0]), _fr(a[1])
    else:
        lo = hi = _fr(a)
    if not (0 < lo <= hi):
        raise ValueError("guard scale enclosure must be positive and ordered")
    return lo, hi


def _points_disjoint(
    alpha: Alpha,
    n: int,
    m: int,
    rsum_lo: Fraction,
    rsum_hi: Fraction,
) -> bool:
    """Certified predicate: guard balls around n alpha and m alpha are disjoint."""
    bits = 96 + max(n, m).bit_length()
    while True:
        M = 1 << bits
        A = alpha.fixed_point(bits)
        d = ((n - m) * A) % M
        if M - d < d:
            d = M - d
        err = abs(n - m) + 1
        if (d - err) > rsum_hi * M:
            return True
        if (d + err) < rsum_lo * M:
            return False
        bits *= 2
        if bits > _MAX_BITS:
            # deletion keeps the disjointness guarantee
            return False


def thin_selection(
    alpha: Alpha,
    selections: Sequence[Selection],
    a,
    delta,
    constants: ConstructionConstants,
    j_total: Optional[int] = None,
) -> list[ThinnedSelection]:
    """Make the guard balls B(n alpha, a/(delta n)) across all sub-scale
    windows pairwise disjoint by deleting later-window integers that touch an
    earlier survivor.

    The first window is kept whole.  Within one window disjointness is
    automatic once a <= delta/8, since distinct n, n' < q stay more than
    1/(2q) apart while the two radii sum to at most 4a/(delta q).  j_total is
    the full sub-scale budget when only a prefix of the windows was built.
    """
    if not selections:
        raise ValueError("need at least one selection")
    delta = _fr(delta)
    a_lo, a_hi = _as_enclosure(a)
    j = len(selections) if j_total is None else int(j_total)
    if j < len(selections):
        raise ValueError("j_total below the number of built windows")
    p_j = constants.p_j
    base_k = selections[0].scale_index
    for i, sel in enumerate(selections):
        if sel.scale_index != base_k + 2 * i:
            raise ValueError("sub-scale windows must step by two")
    # the window count contract 1/2 <= j p_j a / delta <= 1, certified
    if 2 * j * p_j * a_hi < delta:
        raise InadmissibleScale("sub-scale count below the guard window (j too small)")
    if j * p_j * a_lo > delta:
        raise InadmissibleScale("sub-scale count above the guard window (j too large)")
    if 2 * j * p_j * a_lo < delta or j * p_j * a_hi > delta:
        raise PrecisionExhausted("guard window check straddles the a enclosure")
    if 8 * a_hi > delta:
        raise InadmissibleScale("need a <= delta/8 for in-window ball separation")
    if constants.mode == "faithful":
        if a_hi >= constants.p_amax * min(Fraction(1), delta):
            raise InadmissibleScale("guard scale a above the faithful ceiling")

    # integer residues make the all-pairs sweep cheap; the exact ladder only
    # runs for pairs the fast path cannot separate
    n_top = max(sel.window[1] for sel in selections)
    bits = 96 + 2 * n_top.bit_length()
    orb = FixedOrbit(alpha, bits)
    M = orb.M
    kept: list[tuple[int, int, int]] = []  # (residue, ceil(radius_hi * M), n)
    out: list[ThinnedSelection] = []
    for i, sel in enumerate(selections):
        removed: list[int] = []
        survivors: list[int] = []
        for n in sel.members:
            r_n_lo = a_lo / (delta * n)
            r_n_hi = a_hi / (delta * n)
            rn_int = (r_n_hi.numerator * M) // r_n_hi.denominator + 1
            res_n = orb.point_int(n)
            ok = True
            if i > 0:
                for res_m, rm_int, m in kept:
                    d = res_n - res_m
                    if d < 0:
                        d = -d
                    if M - d < d:
                        d = M - d
                    if d - n - m > rn_int + rm_int:
                        continue
                    if not _points_disjoint(
                        alpha, n, m,
                        r_n_lo + a_lo / (delta * m),
                        r_n_hi + a_hi / (delta * m),
                    ):
                        ok = False
                        break
            if ok:
                survivors.append(n)
                kept.append((res_n, rn_int, n))
            else:
                removed.append(n)
        if 2 * len(survivors) < sel.count:
            raise CardinalityViolation(
                f"thinning window k={sel.scale_index} kept {len(survivors)} of "
                f"{sel.count}, below one half"
            )
        m_lo, m_hi = sel.region_measure
        if 16 * len(survivors) < m_hi * sel.q:
            raise CardinalityViolation(
                f"thinned count {len(survivors)} below (1/16)|R| q at k={sel.scale_index}"
            )
        out.append(
            ThinnedSelection(
                base=sel, survivors=tuple(survivors), removed_overlaps=tuple(removed)
            )
        )
    return out


# ---------------------------------------------------------------------------
# scale choice


def admissible_scale_floor(
    alpha: Alpha,
    delta_t,
    delta_next,
    a_prev,
    constants: ConstructionConstants,
    h_cap: int = 128,
) -> int:
    """Smallest index h such that p_a n delta e^{-n delta} stays below
    min(p_h a_prev, p_amax delta_next) for every n >= q_h / 2.

    Uses that y e^{-y} decreases past y = 1, so the window floor witnesses
    the whole tail.
    """
    delta_t, delta_next = _fr(delta_t), _fr(delta_next)
    a_lo, _ = _as_enclosure(a_prev)
    bound = min(constants.p_h * a_lo, constants.p_amax * delta_next)
    if bound <= 0:
        raise InadmissibleScale("window floor bound collapsed to zero")
    for h in range(1, h_cap + 1):
        q = alpha.denominator(h)
        n0 = (q + 1) // 2
        if n0 * delta_t < 1:
            continue
        f_hi = constants.p_a * n0 * delta_t * exp_bounds(-n0 * delta_t)[1]
        if f_hi < bound:
            return h
    raise InadmissibleScale(f"no admissible window floor below index {h_cap}")


def choose_k(
    alpha: Alpha,
    region,
    delta,
    constants: ConstructionConstants,
    k_floor: int,
    scan_cap: int = DEFAULT_SCAN_CAP,
    max_steps: int = 48,
    delta_next=None,
) -> int:
    """Smallest scale index at or above k_floor whose window selection
    succeeds with all bounds, found by probing.

    When delta_next is given, the window floor must additionally leave room
    for a sub-scale window at the next level: p_j p_a n0 delta e^{-n0 delta}
    <= delta_next, otherwise every harvested integer would force j = 0 one
    level down.  Raises a cap error with the last diagnostic once a window
    would out-scan the cap or the step budget runs out.
    """
    last = "no scale probed"
    k = max(1, k_floor)
    for step in range(max_steps):
        kk = k + step
        q = alpha.denominator(kk)
        span = q - (q + 1) // 2
        if span > scan_cap:
            raise ScanCapExceeded(
                f"window at scale index {kk} needs {span} points "
                f"(cap {scan_cap}); last diagnostic: {last}",
                needed=span,
                cap=scan_cap,
            )
        if delta_next is not None:
            n0 = (q + 1) // 2
            f_hi = constants.p_a * n0 * _fr(delta) * exp_bounds(-n0 * _fr(delta))[1]
            if f_hi * constants.p_j > _fr(delta_next):
                last = (
                    f"k={kk}: floor guard scale ~ {float(f_hi):.3g} leaves no "
                    f"sub-scale window at the next delta"
                )
                continue
        try:
            if isinstance(region, Annulus):
                select_in_annulus(
                    alpha, region, kk, delta, mode=constants.mode, scan_cap=scan_cap
                )
            else:
                select_in_interval(
                    alpha, region, kk, delta, mode=constants.mode, scan_cap=scan_cap
                )
            return kk
        except (InadmissibleScale, ScanCapExceeded, PrecisionExhausted) as exc:
            last = f"k={kk}: {exc}"
    raise ScanCapExceeded(
        f"no admissible scale within {max_steps} steps of {k_floor}; last: {last}",
        needed=alpha.denominator(k + max_steps),
        cap=scan_cap,
    )


# ---------------------------------------------------------------------------
# the tree


@dataclass(frozen=True)
class LevelParams:
    """Parameters a node's child level was built with: the level delta, the
    guard scale carried from the parent, the window floor h, the base scale k,
    the sub-scale budget j (recorded in full even when fewer windows are
    built), and the parent path."""

    t: int
    delta_t: Fraction
    delta_next: Fraction
    a_prev: Enclosure
    h_t: int
    k_t: int
    j_t: int
    built_windows: int
    parent_path: tuple[int, ...]


@dataclass
class CantorNode:
    path: tuple[int, ...]
    t: int
    n: Optional[int]
    scale_index: Optional[int]
    annulus: Optional[Annulus]
    params: Optional[LevelParams]
    selections: tuple[ThinnedSelection, ...] = ()
    children: tuple["CantorNode", ...] = ()
    expanded: bool = False
    child_params: Optional[LevelParams] = None
    child_gap: Optional[Enclosure] = None


@dataclass
class CantorTree:
    """The recorded construction: per-node windows, selections and margins.

    delta is the target; schedule holds the resolved per-level deltas
    (one look-ahead entry beyond depth).  Building is deterministic, so
    canonical serialization hashes are reproducible.
    """

    alpha: Alpha
    delta: object
    schedule: tuple[Fraction, ...]
    schedule_policy: str
    constants: ConstructionConstants
    depth: int
    branch_policy: tuple
    scan_cap: int
    max_windows: Optional[int]
    root: CantorNode

    def iter_nodes(self) -> Iterator[CantorNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def node_at(self, path: Sequence[int]) -> CantorNode:
        node = self.root
        for n in path:
            match = [ch for ch in node.children if ch.n == n]
            if not match:
                raise KeyError(f"no child {n} under {node.path}")
            node = match[0]
        return node

    def leaves(self) -> list[tuple[int, ...]]:
        return [node.path for node in self.iter_nodes() if node.n is not None and not node.children]

    def r0(self) -> Optional[Fraction]:
        """Smallest certified positive gap between sibling annuli over the
        expanded nodes; the ball-growth threshold for mass certificates."""
        gaps = [
            node.child_gap[0]
            for node in self.iter_nodes()
            if node.expanded and node.child_gap is not None and node.child_gap[0] > 0
        ]
        return min(gaps) if gaps else None


def _ff5_guard_scale(constants: ConstructionConstants, n: int, delta_prev: Fraction) -> Enclosure:
    lo, hi = exp_bounds(-n * delta_prev, _RADIUS_PREC)
    f = constants.p_a * n * delta_prev
    return (f * lo, f * hi)


def _sub_scale_count(delta_t: Fraction, a_prev: Enclosure, p_j: int) -> int:
    a_lo, a_hi = a_prev
    j_lo = int(delta_t / (p_j * a_hi))
    j_hi = int(delta_t / (p_j * a_lo))
    if j_lo != j_hi:
        raise PrecisionExhausted("sub-scale count straddles the guard-scale enclosure")
    if j_lo < 1:
        raise InadmissibleScale(
            "guard scale too large for any sub-scale window (j would be zero)"
        )
    return j_lo


def _min_child_gap(children: Sequence[CantorNode]) -> Optional[Enclosure]:
    """Certified enclosure of the smallest gap between sibling annuli
    (negative when they overlap)."""
    if len(children) < 2:
        return None
    pts = sorted(children, key=lambda ch: ch.annulus.center.value)
    best: Optional[Enclosure] = None
    for u, w in zip(pts, pts[1:] + pts[:1]):
        d_lo, d_hi = circle_dist_bounds(u.annulus.center, w.annulus.center)
        gap_lo = d_lo - u.annulus.outer_bounds[1] - w.annulus.outer_bounds[1]
        gap_hi = d_hi - u.annulus.outer_bounds[0] - w.annulus.outer_bounds[0]
        if best is None or gap_lo < best[0]:
            best = (gap_lo, gap_hi)
    return best


def build_tree(
    alpha: Alpha,
    delta,
    constants: ConstructionConstants,
    depth: int,
    branch_policy: tuple = ("full",),
    delta_schedule: Optional[Sequence] = None,
    max_windows: Optional[int] = None,
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> CantorTree:
    """Build the nested annulus tree to the requested depth.

    branch_policy ("full",) expands every child; ("sample", b) expands the b
    smallest-n children of each node, which have the largest annuli and hence
    the widest room for the next level.  Selections inside every built window
    are always complete; truncation happens only in which windows are built
    (max_windows) and which children recurse.
    """
    if depth < 1:
        raise ValueError(f"need depth >= 1, got {depth}")
    if branch_policy[0] == "full":
        sample = None
    elif branch_policy[0] == "sample":
        sample = int(branch_policy[1])
        if sample < 1:
            raise ValueError("sample branch policy needs at least one branch")
    else:
        raise ValueError(f"unknown branch policy {branch_policy!r}")
    if max_windows is not None and max_windows < 1:
        raise ValueError("max_windows must be at least 1")
    schedule = _resolve_schedule(delta, delta_schedule, depth)
    constants.validate(schedule[0])
    root = CantorNode(path=(), t=0, n=None, scale_index=None, annulus=None, params=None)
    tree = CantorTree(
        alpha=alpha,
        delta=delta,
        schedule=schedule,
        schedule_policy="explicit" if delta_schedule is not None else "default",
        constants=constants,
        depth=depth,
        branch_policy=tuple(branch_policy),
        scan_cap=scan_cap,
        max_windows=max_windows,
        root=root,
    )
    _expand_node(tree, root, sample)
    return tree


def _expand_node(tree: CantorTree, node: CantorNode, sample: Optional[int]) -> None:
    alpha, constants = tree.alpha, tree.constants
    t = node.t + 1
    delta_t = tree.schedule[t - 1]
    delta_next = tree.schedule[min(t, len(tree.schedule) - 1)]
    if node.t == 0:
        region = (Fraction(0), Fraction(1))
        a_prev: Enclosure = (constants.a0, constants.a0)
    else:
        region = node.annulus
        a_prev = _ff5_guard_scale(constants, node.n, node.annulus.delta)
    where = "/".join(map(str, node.path)) or "root"
    try:
        h_t = admissible_scale_floor(alpha, delta_t, delta_next, a_prev, constants)
        if node.t == 0:
            k_floor = h_t if constants.mode == "faithful" else 1
        else:
            k_floor = max(h_t, node.scale_index + 2)
        k_t = choose_k(
            alpha, region, delta_t, constants, k_floor,
            scan_cap=tree.scan_cap, delta_next=delta_next,
        )
        j_t = _sub_scale_count(delta_t, a_prev, constants.p_j)
        built = min(j_t, tree.max_windows) if tree.max_windows else j_t
        sels = []
        for i in range(built):
            if isinstance(region, Annulus):
                sels.append(
                    select_in_annulus(
                        alpha, region, k_t + 2 * i, delta_t,
                        mode=constants.mode, scan_cap=tree.scan_cap,
                    )
                )
            else:
                sels.append(
                    select_in_interval(
                        alpha, region, k_t + 2 * i, delta_t,
                        mode=constants.mode, scan_cap=tree.scan_cap,
                    )
                )
        thinned = thin_selection(alpha, sels, a_prev, delta_t, constants, j_total=j_t)
    except ScanCapExceeded as exc:
        raise ScanCapExceeded(
            f"level {t} under node {where}: {exc}", needed=exc.needed, cap=exc.cap
        ) from exc
    except (InadmissibleScale, CardinalityViolation, PrecisionExhausted) as exc:
        raise type(exc)(f"level {t} under node {where}: {exc}") from exc
    params = LevelParams(
        t=t,
        delta_t=delta_t,
        delta_next=delta_next,
        a_prev=a_prev,
        h_t=h_t,
        k_t=k_t,
        j_t=j_t,
        built_windows=built,
        parent_path=node.path,
    )
    children = []
    for ts in thinned:
        for n in ts.survivors:
            ann = make_annulus(alpha, n, ts.base.scale_index, delta_t, constants.c)
            children.append(
                CantorNode(
                    path=node.path + (n,),
                    t=t,
                    n=n,
                    scale_index=ts.base.scale_index,
                    annulus=ann,
                    params=params,
                )
            )
    node.selections = tuple(thinned)
    node.children = tuple(children)
    node.child_params = params
    node.expanded = True
    node.child_gap = _min_child_gap(children)
    if t < tree.depth:
        targets = children if sample is None else children[:sample]
        for child in targets:
            _expand_node(tree, child, sample)


# ---------------------------------------------------------------------------
# points of the construction


def _bits_bucket(bits: int) -> int:
    # round up to 2^16 blocks so repeated fixed-point queries share cache keys
    return ((bits >> 16) + 1) << 16


def cantor_point(tree: CantorTree, branch: Sequence[int]) -> CirclePoint:
    """A point of the leaf annulus at the end of a root-to-leaf branch.

    Placement is deterministic: the radial midpoint (1+c)/2 e^{-n delta} of
    the arc on the positive side of the center, which maximizes clearance
    from both annulus edges.  The branch integers are the witness scales and
    ride along in the provenance.
    """
    node = tree.node_at(branch)
    if node.n is None:
        raise ValueError("branch must name at least the first-level integer")
    if node.children:
        raise ValueError(f"branch {tuple(branch)} stops at an expanded node")
    n, delta = node.n, node.annulus.delta
    scale_bits = int(n * delta * Fraction(1443, 1000)) + 16
    xbits = _bits_bucket(scale_bits + 320)
    M = 1 << xbits
    rc = (n * tree.alpha.fixed_point(xbits)) % M
    # 384 relative bits: the enclosure width is e^{-n delta} 2^-380, tiny
    # against the annulus, while the evaluation cost stays flat in n delta
    off_lo, off_hi = exp_bounds(-n * delta, 384)
    mid = (1 + tree.constants.c) * (off_lo + off_hi) / 4
    off_int = (mid.numerator << xbits) // mid.denominator
    hw = (1 + tree.constants.c) * (off_hi - off_lo) / 4
    hw_int = -((-hw.numerator << xbits) // hw.denominator) if hw else 0
    x_int = (rc + off_int) % M
    # n residue units + offset floor rounding + the enclosure half-width;
    # the single Fraction normalization below is the costly step
    return CirclePoint(
        value=Fraction(x_int, M),
        err=Fraction(n + 2 + hw_int, M),
        provenance=("cantor", tree.alpha.spec, tuple(branch)),
    )


# ---------------------------------------------------------------------------
# audits


@dataclass(frozen=True)
class AuditEntry:
    path: str
    check: str
    passed: bool
    margin: float
    detail: str


@dataclass(frozen=True)
class AuditReport:
    entries: tuple[AuditEntry, ...]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[AuditEntry]:
        return [e for e in self.entries if not e.passed]

    def summary(self) -> str:
        bad = len(self.failures())
        return f"{len(self.entries)} checks, {bad} failed"


def write_audit_csv(report: AuditReport, path: str) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "check", "passed", "margin", "detail"])
        for e in report.entries:
            w.writerow([e.path, e.check, int(e.passed), repr(e.margin), e.detail])


def _node_rng(seed: int, path: tuple[int, ...], tag: str) -> random.Random:
    key = f"{seed}:{tag}:" + "/".join(map(str, path))
    digest = hashlib.sha256(key.encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _cmp_scaled(v: int, bits: int, t: Fraction) -> int:
    """Sign of v / 2^bits - t for v >= 0 and t > 0.

    Bit-length gating settles all but near-coincident cases without ever
    forming the million-bit cross products.
    """
    vb = v.bit_length() - bits
    tb = t.numerator.bit_length() - t.denominator.bit_length()
    if vb > tb + 1:
        return 1
    if vb < tb - 1:
        return -1
    lhs = v * t.denominator
    rhs = t.numerator << bits
    return (lhs > rhs) - (lhs < rhs)


def _exclusion_holds(
    alpha: Alpha, x_int: int, xbits: int, m: int, delta: Fraction, c: Fraction
) -> tuple[bool, float]:
    """Certified check of dist(x, m alpha) > c e^{-m delta} for x = x_int 2^-xbits.

    Pure integer residues throughout: normalizing a Fraction with a
    million-bit numerator and denominator costs seconds in gcd, so deep
    scales would be hopeless otherwise.
    """
    t_lo, t_hi = exp_bounds(-m * delta, 96)
    t_lo, t_hi = c * t_lo, c * t_hi
    bits = xbits
    while True:
        M = 1 << bits
        r = (m * alpha.fixed_point(bits)) % M
        d = r - (x_int << (bits - xbits))
        if d < 0:
            d = -d
        if M - d < d:
            d = M - d
        e = m + 1
        hi_exp = t_hi.numerator.bit_length() - t_hi.denominator.bit_length()
        if d - e > 0 and _cmp_scaled(d - e, bits, t_hi) > 0:
            margin = ((d - e).bit_length() - bits - hi_exp) * 0.30103
            return True, margin
        if _cmp_scaled(d + e, bits, t_lo) < 0:
            lo_exp = t_lo.numerator.bit_length() - t_lo.denominator.bit_length()
            margin = ((d + e).bit_length() - bits - lo_exp) * 0.30103
            return False, margin
        bits *= 2
        if bits > _MAX_BITS:
            raise PrecisionExhausted(f"exclusion compare stalls at m={m}")


def _entry(entries, node, check, passed, margin, detail="") -> None:
    path = "/".join(map(str, node.path)) or "root"
    entries.append(AuditEntry(path=path, check=check, passed=bool(passed), margin=float(margin), detail=detail))


def _audit_params(tree, node, entries) -> None:
    p = node.child_params
    constants = tree.constants
    # the guard scale must match its defining product, re-derived fresh
    if node.t == 0:
        fresh: Enclosure = (constants.a0, constants.a0)
    else:
        fresh = _ff5_guard_scale(constants, node.n, node.annulus.delta)
    ok = fresh[0] <= p.a_prev[1] and p.a_prev[0] <= fresh[1]
    _entry(entries, node, "guard-scale-identity", ok, _log10(fresh[1]),
           "a_prev enclosure consistent with p_a n delta e^(-n delta)")
    # window floor property: the floor index witnesses the whole tail
    q_h = tree.alpha.denominator(p.h_t)
    n0 = (q_h + 1) // 2
    bound = min(constants.p_h * p.a_prev[0], constants.p_amax * p.delta_next)
    mono = n0 * p.delta_t >= 1
    f_hi = constants.p_a * n0 * p.delta_t * exp_bounds(-n0 * p.delta_t)[1]
    _entry(entries, node, "window-floor-property", mono and f_hi < bound,
           _log10(bound) - _log10(f_hi) if f_hi > 0 else 0.0,
           f"h_t={p.h_t}: p_a n delta e^(-n delta) < min(p_h a, p_amax delta') at n={n0}")
    # scale floors
    if node.t == 0:
        need = p.h_t if constants.mode == "faithful" else 1
        _entry(entries, node, "scale-floor", p.k_t >= need, p.k_t - need,
               f"k={p.k_t} vs floor {need} (level-1 floor advisory in toy mode: h={p.h_t})")
    else:
        need = max(p.h_t, node.scale_index + 2)
        _entry(entries, node, "scale-floor", p.k_t >= need, p.k_t - need,
               f"k={p.k_t} vs floor max(h={p.h_t}, l+2={node.scale_index + 2})")
    # the base window floor must leave a sub-scale window one level down
    q_k = tree.alpha.denominator(p.k_t)
    nk = (q_k + 1) // 2
    f_k = constants.p_a * nk * p.delta_t * exp_bounds(-nk * p.delta_t)[1]
    look_ok = nk * p.delta_t >= 1 and f_k * constants.p_j <= p.delta_next
    _entry(entries, node, "window-floor-j-lookahead", look_ok,
           _log10(p.delta_next) - _log10(f_k * constants.p_j),
           f"p_j p_a n delta e^(-n delta) <= delta' at the floor n={nk}")
    # sub-scale budget window 1/2 <= j p_j a / delta <= 1
    lo_ok = 2 * p.j_t * constants.p_j * p.a_prev[0] >= p.delta_t
    hi_ok = p.j_t * constants.p_j * p.a_prev[1] <= p.delta_t
    _entry(entries, node, "sub-scale-window", lo_ok and hi_ok,
           float(p.j_t * constants.p_j * p.a_prev[0] / p.delta_t),
           f"j={p.j_t}, built={p.built_windows}")
    # deltas may not decrease along the branch
    if node.t >= 1:
        _entry(entries, node, "delta-monotone", p.delta_t >= node.annulus.delta,
               float(p.delta_t - node.annulus.delta), "")


def _audit_selections(tree, node, entries) -> None:
    alpha, constants = tree.alpha, tree.constants
    p = node.child_params
    if node.t == 0:
        measure: Enclosure = (Fraction(1), Fraction(1))
        arcs = None
    else:
        measure = node.annulus.measure_bounds
        arcs, _ = _target_shell_arcs(node.annulus)
    for i, ts in enumerate(node.selections):
        sel = ts.base
        tag = f"window-{sel.scale_index}"
        ok_step = sel.scale_index == p.k_t + 2 * i
        _entry(entries, node, f"{tag}-index", ok_step, 0.0, "sub-scales step by two")
        dlo = sel.count
        lo_ok = 8 * dlo >= measure[1] * sel.q
        up_ok = dlo <= measure[1] * sel.q
        _entry(entries, node, f"{tag}-card-harvest", lo_ok and up_ok,
               float(8 * dlo - measure[1] * sel.q),
               f"(1/8)|R|q <= {dlo} <= |R|q with |R|q ~ {float(measure[1] * sel.q):.4g}")
        half_ok = 2 * ts.count >= dlo
        six_ok = 16 * ts.count >= measure[1] * sel.q
        _entry(entries, node, f"{tag}-card-thinned", half_ok and six_ok,
               float(16 * ts.count - measure[1] * sel.q),
               f"{ts.count} of {dlo} kept")
        # membership recheck of every survivor against fresh arcs
        if arcs is not None:
            bad = 0
            for n in ts.survivors:
                inside = False
                for lo, hi in arcs:
                    try:
                        if (
                            _certified_side(alpha, n, lo, 96) > 0
                            and _certified_side(alpha, n, hi, 96) < 0
                        ):
                            inside = True
                            break
                    except PrecisionExhausted:
                        pass
                bad += 0 if inside else 1
            _entry(entries, node, f"{tag}-membership", bad == 0, -bad,
                   f"{len(ts.survivors)} survivors rechecked in the target shell")
        # conflict pass recheck
        if sel.conflict_scan.startswith("vacuous"):
            q_l = alpha.denominator(node.scale_index) if node.t else None
            if q_l is not None:
                thr = constants.c * exp_bounds(-q_l * p.delta_t)[1]
                child_r = exp_bounds(-sel.window[0] * p.delta_t)[1]
                gap = Fraction(1, 2 * sel.q)
                ok = gap > thr and gap - thr > child_r
                _entry(entries, node, f"{tag}-conflict-vacuous", ok,
                       _log10(gap) - _log10(thr) if thr >= child_r else _log10(gap) - _log10(child_r),
                       "separation exceeds the largest radii sum")
        window_ok = all(sel.window[0] <= n < sel.window[1] for n in sel.members)
        _entry(entries, node, f"{tag}-window-range", window_ok, 0.0, "")


def _audit_children(tree, node, entries) -> None:
    p = node.child_params
    children = node.children
    want = [n for ts in node.selections for n in ts.survivors]
    got = [ch.n for ch in children]
    _entry(entries, node, "children-match-selections", want == got, 0.0,
           f"{len(got)} children")
    # nesting: each child ball inside the parent annulus (levels >= 2)
    if node.t >= 1:
        worst = None
        ok = True
        for ch in children:
            d_lo, d_hi = circle_dist_bounds(ch.annulus.center, node.annulus.center)
            r_hi = ch.annulus.outer_bounds[1]
            # clearances are differences of moderate-precision numbers; the
            # deep child radius only ever sits on one side of a comparison
            clr_in = d_lo - node.annulus.inner_bounds[1]
            clr_out = node.annulus.outer_bounds[0] - d_hi
            inner_ok = clr_in >= r_hi
            outer_ok = clr_out >= r_hi
            m = min(_log10(clr_in), _log10(clr_out)) - _log10(r_hi)
            if worst is None or m < worst:
                worst = m
            ok = ok and inner_ok and outer_ok
        _entry(entries, node, "child-balls-nested", ok, worst if worst is not None else 0.0,
               "c e^(-l delta') < dist -+ e^(-n delta) < e^(-l delta')")
    # guard-ball disjointness across all windows (sorted sweep)
    if len(children) >= 2:
        pts = sorted(children, key=lambda ch: ch.annulus.center.value)
        ok = True
        worst = None
        for u, w in zip(pts, pts[1:] + pts[:1]):
            d_lo, _ = circle_dist_bounds(u.annulus.center, w.annulus.center)
            r_sum = p.a_prev[1] / (p.delta_t * u.n) + p.a_prev[1] / (p.delta_t * w.n)
            m = _log10(d_lo) - _log10(r_sum) if d_lo > 0 else float("-inf")
            if worst is None or m < worst:
                worst = m
            ok = ok and d_lo > r_sum
        _entry(entries, node, "guard-balls-disjoint", ok, worst if worst is not None else 0.0,
               "adjacent gaps exceed a/(delta n) + a/(delta n')")
        if tree.constants.mode == "faithful":
            gap = _min_child_gap(children)
            _entry(entries, node, "sibling-annuli-disjoint", gap[0] > 0,
                   _log10(gap[0]) if gap[0] > 0 else float(gap[0]),
                   "smallest certified inter-annulus gap")
    # recorded gap matches a fresh sweep
    fresh = _min_child_gap(children)
    same = (fresh is None and node.child_gap is None) or (
        fresh is not None and node.child_gap is not None and fresh == node.child_gap
    )
    _entry(entries, node, "recorded-child-gap", same, 0.0, "")


def _audit_exclusions(tree, node, entries, samples: int, seed: int) -> None:
    """Sampled exclusion margins dist(x, m alpha) > c e^{-m delta_t} for x in
    the node's annulus and intermediate m between the parent scale window and
    the node's own.  m = n itself is skipped: the annulus shape certifies it."""
    alpha, constants = tree.alpha, tree.constants
    parent = tree.node_at(node.path[:-1])
    q_l = alpha.denominator(parent.scale_index)
    q_k = alpha.denominator(node.scale_index)
    if q_k - q_l < 2:
        return
    rng = _node_rng(seed, node.path, "exclusion")
    ann = node.annulus
    delta_t = ann.delta
    # everything at a fixed dyadic resolution fine enough for the annulus;
    # the center residue carries n units of error, absorbed into the pad
    sb = int(node.n * delta_t * Fraction(1443, 1000)) + 96
    xbits = _bits_bucket(sb)
    M = 1 << xbits
    rc = (node.n * alpha.fixed_point(xbits)) % M
    inn_hi, out_lo = ann.inner_bounds[1], ann.outer_bounds[0]
    u_lo = -((-inn_hi.numerator << xbits) // inn_hi.denominator) + node.n + 2
    u_hi = (out_lo.numerator << xbits) // out_lo.denominator - node.n - 2
    if u_hi <= u_lo:
        _entry(entries, node, "exclusion-samples", False, 0.0,
               "annulus too thin to sample against its center error")
        return
    worst = None
    bad = 0
    for _ in range(samples):
        u = rng.randrange(u_lo, u_hi + 1)
        x_int = (rc + u if rng.getrandbits(1) else rc - u) % M
        m = rng.randrange(q_l, q_k)
        if m == node.n:
            continue
        ok, margin = _exclusion_holds(alpha, x_int, xbits, m, delta_t, constants.c)
        if worst is None or margin < worst:
            worst = margin
        bad += 0 if ok else 1
    _entry(entries, node, "exclusion-samples", bad == 0, worst if worst is not None else 0.0,
           f"{samples} sampled (x, m) pairs over [{q_l}, {q_k})")


def verify_tree(tree: CantorTree, exclusion_samples: int = 100, seed: int = 0) -> AuditReport:
    """Re-derive every recorded inequality of the tree from scratch.

    Failures become report entries, never exceptions.  The guard-ball
    disjointness, nesting, cardinality and window checks run on every node;
    sibling-annulus disjointness is additionally asserted in faithful mode
    where the window floor guarantees it.
    """
    entries: list[AuditEntry] = []
    try:
        tree.constants.validate(tree.schedule[0])
        _entry(entries, tree.root, "constants-admissible", True, 0.0, tree.constants.mode)
    except (InadmissibleScale, ValueError) as exc:
        _entry(entries, tree.root, "constants-admissible", False, 0.0, str(exc))
    for node in tree.iter_nodes():
        if node.expanded:
            _audit_params(tree, node, entries)
            _audit_selections(tree, node, entries)
            _audit_children(tree, node, entries)
        if node.t >= 2 and node.n is not None:
            _audit_exclusions(tree, node, entries, exclusion_samples, seed)
    return AuditReport(entries=tuple(entries))


# ---------------------------------------------------------------------------
# serialization


def _dyadic_obj(x: Fraction, up: bool, bits: int = _SER_BITS) -> dict:
    if x == 0:
        return {"m": 0, "e": 0}
    sign = -1 if x < 0 else 1
    num, den = abs(x.numerator), x.denominator
    e = num.bit_length() - den.bit_length() - bits
    if e >= 0:
        m, rem = divmod(num, den << e)
    else:
        m, rem = divmod(num << -e, den)
    if ((sign > 0) == up) and rem:
        m += 1
    return {"m": sign * m, "e": e}


def _enc_obj(enc: Enclosure) -> dict:
    return {"lo": _dyadic_obj(enc[0], up=False), "hi": _dyadic_obj(enc[1], up=True)}


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _selection_obj(ts: ThinnedSelection) -> dict:
    sel = ts.base
    return {
        "scale": sel.scale_index,
        "q": sel.q,
        "window": list(sel.window),
        "survivors": list(ts.survivors),
        "thinned_out": list(ts.removed_overlaps),
        "conflicts": list(sel.removed_conflicts),
        "conflict_scan": sel.conflict_scan,
        "applicable": sel.applicable,
        "dhat": _frac_str(sel.dhat),
        "measure": _enc_obj(sel.region_measure),
    }


def _params_obj(p: Optional[LevelParams]) -> Optional[dict]:
    if p is None:
        return None
    return {
        "t": p.t,
        "delta_t": _frac_str(p.delta_t),
        "delta_next": _frac_str(p.delta_next),
        "a_prev": _enc_obj(p.a_prev),
        "h_t": p.h_t,
        "k_t": p.k_t,
        "j_t": p.j_t,
        "built_windows": p.built_windows,
    }


def _node_obj(node: CantorNode) -> dict:
    out = {
        "n": node.n,
        "t": node.t,
        "scale": node.scale_index,
        "expanded": node.expanded,
        "selections": [_selection_obj(ts) for ts in node.selections],
        "children": [_node_obj(ch) for ch in node.children],
    }
    if node.annulus is not None:
        out["annulus"] = {
            "n": node.annulus.center_k,
            "l": node.annulus.scale_index,
            "delta": _frac_str(node.annulus.delta),
            "log10_outer": node.annulus.log10_outer,
            "outer": _enc_obj(node.annulus.outer_bounds),
        }
    if node.child_params is not None:
        out["level"] = _params_obj(node.child_params)
    if node.child_gap is not None:
        out["child_gap"] = _enc_obj(node.child_gap)
    return out


def tree_to_json(tree: CantorTree) -> str:
    """Canonical serialization: sorted keys, exact rationals as strings,
    radii as outward-rounded dyadic mantissa/exponent pairs."""
    delta = tree.delta
    if isinstance(delta, float) and math.isinf(delta):
        delta_repr = "inf"
    else:
        delta_repr = _frac_str(_fr(delta))
    obj = {
        "schema": "cantor-tree/1",
        "alpha": json.loads(tree.alpha.spec.to_json()),
        "delta": delta_repr,
        "schedule": [_frac_str(d) for d in tree.schedule],
        "schedule_policy": tree.schedule_policy,
        "constants": {
            "c": _frac_str(tree.constants.c),
            "a0": _frac_str(tree.constants.a0),
            "mode": tree.constants.mode,
            "p_a": _frac_str(tree.constants.p_a),
            "p_j": tree.constants.p_j,
            "p_amax": _frac_str(tree.constants.p_amax),
            "p_h": _frac_str(tree.constants.p_h),
        },
        "depth": tree.depth,
        "branch_policy": list(tree.branch_policy),
        "scan_cap": tree.scan_cap,
        "max_windows": tree.max_windows,
        "root": _node_obj(tree.root),
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def tree_hash(tree: CantorTree) -> str:
    return hashlib.sha256(tree_to_json(tree).encode()).hexdigest()
