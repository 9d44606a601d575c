"""Resonance strength of a circle point relative to a rotation orbit.

The resonance strength of a phase x is the limsup over integer k of
(-log ||x - k*alpha||) / |k|: how fast, in exponential units, the orbit
approaches x.  Finite windows of k give certified two-sided estimates over
both signs of k; a phase that lies exactly on the orbit has strength
+infinity by convention, and that case is only ever declared through exact
provenance, never through a small float.

Near-hits are re-resolved at geometrically growing precision, so a windowed
maximum is trustworthy even when the nearest orbit point sits at distance
exp(-millions).  The precision ladder is capped; hitting the cap raises
PrecisionExhausted rather than guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Union

from .alpha import Alpha
from .circle import DEFAULT_SCAN_CAP, CirclePoint
from .errors import PrecisionExhausted, ScanCapExceeded
from .numeric import exp_neg_fixed

__all__ = [
    "ResonanceEstimate",
    "resonance_strength",
    "resonance_ratio",
    "HitRecord",
    "psi_hits",
    "DDeltaVerdict",
    "classify_D_delta",
]

# Refinement ladders stop here; enough for leaf points of depth-3 builds.
REFINE_BITS_CAP = 1 << 23


def _as_point(x) -> CirclePoint:
    if isinstance(x, CirclePoint):
        return x
    return CirclePoint.literal(Fraction(x))


def _exact_hit_index(alpha: Alpha, x: CirclePoint) -> Optional[int]:
    """Orbit index j with x = j*alpha exactly, if certifiable."""
    if x.provenance[0] == "orbit" and x.provenance[1] == alpha.spec:
        return x.provenance[2]
    if x.err == 0 and x.value == 0:
        return 0
    return None


class _RatioScanner:
    """Shared machinery: certified (-log dist)/|k| over a window, both signs.

    Keeps one dyadic frame per precision level; individual k can be refined
    through a doubling ladder without rescanning the window.
    """

    def __init__(self, alpha: Alpha, x: CirclePoint, kmin: int, kmax: int,
                 max_bits: int = REFINE_BITS_CAP):
        if not (1 <= kmin <= kmax):
            raise ValueError(f"need 1 <= K_min <= K_max, got ({kmin}, {kmax})")
        self.alpha = alpha
        self.x = x
        self.kmin = kmin
        self.kmax = kmax
        self.max_bits = max_bits
        self.hit = _exact_hit_index(alpha, x)
        self.base_bits = 64 + 2 * kmax.bit_length()

    def _frame(self, bits: int) -> tuple[int, int, int]:
        """(A, X, x_err_units) at scale 2**bits."""
        A = self.alpha.fixed_point(bits)
        X, rem = divmod(self.x.value.numerator << bits, self.x.value.denominator)
        units = (1 if rem else 0)
        if self.x.err:
            e = self.x.err * (1 << bits)
            units += e.numerator // e.denominator + 1
        return A, X, units

    def scan(self) -> Iterator[tuple[int, int, int, int]]:
        """Yield (k_signed, d_units, err_units, bits) for |k| in the window.

        d is the dyadic circle distance ||x - k*alpha|| at the base frame;
        callers must treat d <= err as unresolved and call refine().
        """
        bits = self.base_bits
        A, X, x_units = self._frame(bits)
        M = 1 << bits
        r = (self.kmin * A) % M
        for k in range(self.kmin, self.kmax + 1):
            err = k + x_units
            d = (r - X) % M
            if d > M - d:
                d = M - d
            yield k, d, err, bits
            dm = (M - r - X) % M  # residue of -k*alpha is M - r, error k+1 units
            if dm > M - dm:
                dm = M - dm
            yield -k, dm, err + 1, bits
            r += A
            if r >= M:
                r -= M

    def refine(self, k: int, bits: int) -> tuple[int, int, int]:
        """(d_units, err_units, bits) for index k with d > 4*err guaranteed.

        Doubles precision until the distance separates from its error bound;
        an exact provenance hit returns (0, 0, bits).
        """
        if self.hit is not None and self.hit == k:
            return 0, 0, bits
        while True:
            bits *= 2
            if bits > self.max_bits:
                raise PrecisionExhausted(
                    f"||x - {k}*alpha|| unresolved at {bits // 2} bits; "
                    "point data or the refinement cap is insufficient"
                )
            A, X, x_units = self._frame(bits)
            M = 1 << bits
            r = (k * A) % M
            d = (r - X) % M
            if d > M - d:
                d = M - d
            err = abs(k) + x_units + (1 if k < 0 else 0)
            if d > 4 * err:
                return d, err, bits

    @staticmethod
    def ratio_bounds(d: int, err: int, bits: int, k: int) -> tuple[float, float]:
        """(lo, hi) for (-log(d/2^bits))/|k| given d known to +-err units."""
        c = bits * math.log(2.0)
        lo = (c - math.log(d + err)) / abs(k)
        hi = (c - math.log(max(d - err, 1))) / abs(k)
        return lo, hi


@dataclass(frozen=True)
class ResonanceEstimate:
    """Windowed maximum of (-log ||x - k*alpha||)/|k| over K_min <= |k| <= K_max.

    value_lo/value_hi bracket the true maximum; witness_ks lists every index
    whose certified ratio could attain it.  An exact orbit hit inside the
    window makes the value +infinity.
    """

    window: tuple[int, int]
    value: float
    value_lo: float
    value_hi: float
    witness_ks: tuple[int, ...]
    exact_orbit_hit: Optional[int] = None

    @property
    def is_infinite(self) -> bool:
        return self.exact_orbit_hit is not None


def resonance_strength(
    alpha: Alpha,
    x,
    kmin: int,
    kmax: int,
    scan_cap: int = DEFAULT_SCAN_CAP,
    max_bits: int = REFINE_BITS_CAP,
) -> ResonanceEstimate:
    """Certified windowed resonance strength of a phase, both signs of k.

    The estimate never decreases when the window is enlarged.  Ambiguous
    near-hits are refined at higher precision before the maximum is taken.
    """
    if kmax - kmin + 1 > scan_cap:
        raise ScanCapExceeded(
            f"resonance scan needs {kmax - kmin + 1} points",
            needed=kmax - kmin + 1,
            cap=scan_cap,
        )
    x = _as_point(x)
    sc = _RatioScanner(alpha, x, kmin, kmax, max_bits)
    if sc.hit is not None and kmin <= abs(sc.hit) <= kmax:
        return ResonanceEstimate(
            window=(kmin, kmax),
            value=math.inf,
            value_lo=math.inf,
            value_hi=math.inf,
            witness_ks=(sc.hit,),
            exact_orbit_hit=sc.hit,
        )
    # first pass: certified lower bound for the max, refining near-hits
    best_lo = -math.inf
    refined: dict[int, tuple[int, int, int]] = {}
    for k, d, err, bits in sc.scan():
        if d <= 4 * err:
            refined[k] = sc.refine(k, bits)
            d, err, bits = refined[k]
        lo, _hi = sc.ratio_bounds(d, err, bits, k)
        if lo > best_lo:
            best_lo = lo
    # second pass: collect everything whose upper bound reaches best_lo
    best_hi = -math.inf
    best_mid = -math.inf
    witnesses: list[int] = []
    for k, d, err, bits in sc.scan():
        if k in refined:
            d, err, bits = refined[k]
        lo, hi = sc.ratio_bounds(d, err, bits, k)
        if hi >= best_lo:
            witnesses.append(k)
            best_hi = max(best_hi, hi)
            best_mid = max(best_mid, (lo + hi) / 2)
    witnesses.sort(key=abs)
    return ResonanceEstimate(
        window=(kmin, kmax),
        value=best_mid,
        value_lo=best_lo,
        value_hi=best_hi,
        witness_ks=tuple(witnesses),
    )


def resonance_ratio(alpha: Alpha, x, k: int, bits: int = 96,
                    max_bits: int = REFINE_BITS_CAP) -> tuple[float, float]:
    """Certified (lo, hi) for (-log ||x - k alpha||)/|k|, k != 0."""
    if k == 0:
        raise ValueError("resonance ratio needs k != 0")
    x = _as_point(x)
    sc = _RatioScanner(alpha, x, abs(k), abs(k), max_bits)
    if sc.hit == k:
        return math.inf, math.inf
    B = bits + 2 * abs(k).bit_length() + 16
    A, X, x_units = sc._frame(B)
    M = 1 << B
    r = (k * A) % M
    d = (r - X) % M
    d = min(d, M - d)
    err = abs(k) + x_units
    if d <= 4 * err:
        d, err, B = sc.refine(k, B)
    return sc.ratio_bounds(d, err, B, k)


# ---------------------------------------------------------------------------
# threshold hits


@dataclass(frozen=True)
class HitRecord:
    """One certified threshold crossing ||x - k*alpha|| < threshold(k)."""

    k: int
    dist: float
    threshold: float


ThresholdSpec = Union[Fraction, float, int, Mapping[int, Fraction]]


def psi_hits(
    alpha: Alpha,
    x,
    threshold: ThresholdSpec,
    kmax: int,
    scan_cap: int = DEFAULT_SCAN_CAP,
    max_bits: int = REFINE_BITS_CAP,
) -> list[HitRecord]:
    """All k with 1 <= |k| <= kmax and ||x - k*alpha|| < threshold(k), certified.

    threshold is either a positive rate eta, meaning exp(-|k| eta), or an
    explicit mapping from |k| to rational thresholds (missing keys skip the
    index).  Records come back ordered by increasing |k|, negative sign
    first within a pair; only certified crossings are emitted.
    """
    if kmax < 1:
        raise ValueError("need kmax >= 1")
    if kmax > scan_cap:
        raise ScanCapExceeded(f"hit scan needs {kmax} points", needed=kmax, cap=scan_cap)
    x = _as_point(x)
    sc = _RatioScanner(alpha, x, 1, kmax, max_bits)
    table: Optional[Mapping[int, Fraction]] = None
    eta: Optional[Fraction] = None
    if isinstance(threshold, Mapping):
        table = threshold
    else:
        eta = Fraction(threshold)
        if eta <= 0:
            raise ValueError("threshold rate must be positive")

    bits = sc.base_bits
    M = 1 << bits
    if eta is not None:
        # incremental certified ladder for exp(-|k| eta) in dyadic units
        u_lo, u_hi = exp_neg_fixed(eta, bits)
        t_lo, t_hi = u_lo, u_hi

    out: list[HitRecord] = []
    pending: list[tuple[int, int, int, int]] = []
    for k, d, err, b in sc.scan():
        ak = abs(k)
        if table is not None:
            tf = table.get(ak)
            if tf is not None:
                tf = Fraction(tf)
                tau_lo = (tf.numerator << bits) // tf.denominator
                tau_hi = tau_lo + 1
                _emit_if_hit(sc, out, k, d, err, b, tau_lo, tau_hi)
            continue
        pending.append((k, d, err, b))
        if k < 0:
            for kk, dd, ee, bb in pending:
                _emit_if_hit(sc, out, kk, dd, ee, bb, t_lo, t_hi)
            pending.clear()
            # advance the exponential ladder to the next |k|
            if ak < kmax:
                t_lo = (t_lo * u_lo) >> bits
                t_hi = ((t_hi * u_hi) >> bits) + 1
    out.sort(key=lambda h: (abs(h.k), h.k))
    return out


def _emit_if_hit(sc: _RatioScanner, out: list[HitRecord], k: int, d: int,
                 err: int, bits: int, tau_lo: int, tau_hi: int) -> None:
    """Append a HitRecord when d < tau is certified, refining if ambiguous."""
    if tau_hi <= 0:
        return
    if d - err >= tau_hi:
        return
    if d + err < tau_lo:
        out.append(HitRecord(k=k, dist=d / (1 << bits) if d > err else 0.0,
                             threshold=tau_hi / (1 << bits)))
        return
    # ambiguous: resolve the distance at higher precision, rescaling tau
    try:
        d2, e2, b2 = sc.refine(k, bits)
    except PrecisionExhausted:
        if sc.hit is not None and sc.hit == k:
            out.append(HitRecord(k=k, dist=0.0, threshold=tau_hi / (1 << bits)))
        return
    shift = b2 - bits
    if d2 + e2 < tau_lo << shift:
        out.append(HitRecord(k=k, dist=d2 / (1 << b2), threshold=tau_hi / (1 << bits)))
    elif sc.hit is not None and sc.hit == k:
        out.append(HitRecord(k=k, dist=0.0, threshold=tau_hi / (1 << bits)))


# ---------------------------------------------------------------------------
# membership evidence for the resonance level set


@dataclass(frozen=True)
class DDeltaVerdict:
    """Finite-scale evidence about resonance strength against a target.

    lower_evidence: some index in the window certifies ratio >= target - tol.
    upper_evidence: no index in the window reaches target + tol.
    consistent: both at once.  For an infinite target, only an exact orbit
    hit counts as lower evidence.
    """

    consistent: bool
    lower_evidence: bool
    upper_evidence: bool
    window: tuple[int, int]
    delta_target: float
    tol: float
    best_k: Optional[int] = None
    best_ratio: Optional[float] = None


def classify_D_delta(
    alpha: Alpha,
    x,
    delta_target: float,
    K: Union[int, tuple[int, int]],
    tol: Optional[float] = None,
    scan_cap: int = DEFAULT_SCAN_CAP,
    max_bits: int = REFINE_BITS_CAP,
) -> DDeltaVerdict:
    """Classify a phase against a resonance-strength target over a k-window.

    K is either a single bound (window 1..K) or an explicit (K_min, K_max)
    pair, e.g. the scale window of a construction.  tol defaults to 10% of
    the target.  Every comparison is certified; ambiguity triggers per-index
    refinement rather than a guess.
    """
    if isinstance(K, tuple):
        kmin, kmax = K
    else:
        kmin, kmax = 1, int(K)
    if delta_target <= 0:
        raise ValueError("delta_target must be positive (possibly inf)")
    if tol is None:
        tol = delta_target / 10 if math.isfinite(delta_target) else 0.0
    if math.isfinite(delta_target) and tol <= 0:
        raise ValueError("tol must be positive for a finite target")
    if kmax - kmin + 1 > scan_cap:
        raise ScanCapExceeded(
            f"classification scan needs {kmax - kmin + 1} points",
            needed=kmax - kmin + 1,
            cap=scan_cap,
        )
    x = _as_point(x)
    sc = _RatioScanner(alpha, x, kmin, kmax, max_bits)

    if not math.isfinite(delta_target):
        hit_in = sc.hit is not None and kmin <= abs(sc.hit) <= kmax
        return DDeltaVerdict(
            consistent=hit_in,
            lower_evidence=hit_in,
            upper_evidence=True,
            window=(kmin, kmax),
            delta_target=math.inf,
            tol=tol,
            best_k=sc.hit if hit_in else None,
            best_ratio=math.inf if hit_in else None,
        )

    if sc.hit is not None and kmin <= abs(sc.hit) <= kmax:
        # exact hit: ratio is +inf at that index
        return DDeltaVerdict(
            consistent=False,
            lower_evidence=True,
            upper_evidence=False,
            window=(kmin, kmax),
            delta_target=delta_target,
            tol=tol,
            best_k=sc.hit,
            best_ratio=math.inf,
        )

    low_bar = delta_target - tol
    high_bar = delta_target + tol
    lower = False
    upper = True
    best_k: Optional[int] = None
    best_ratio = -math.inf
    for k, d, err, bits in sc.scan():
        if d <= 4 * err:
            d, err, bits = sc.refine(k, bits)
        lo, hi = sc.ratio_bounds(d, err, bits, k)
        if hi >= low_bar > lo or hi >= high_bar > lo:
            # enclosure straddles a bar: tighten this index
            d, err, bits = sc.refine(k, bits)
            lo, hi = sc.ratio_bounds(d, err, bits, k)
        mid = (lo + hi) / 2
        if mid > best_ratio:
            best_ratio, best_k = mid, k
        if lo >= low_bar:
            lower = True
        if hi >= high_bar:
            upper = False
    return DDeltaVerdict(
        consistent=lower and upper,
        lower_evidence=lower,
        upper_evidence=upper,
        window=(kmin, kmax),
        delta_target=delta_target,
        tol=tol,
        best_k=best_k,
        best_ratio=best_ratio,
    )
