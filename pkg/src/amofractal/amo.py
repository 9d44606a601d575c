"""Spectral engine for the almost Mathieu operator at rational frequency.

Periodic approximants carry the whole computable side of the spectral
analysis: band structure from the two Bloch boundary problems, the
integrated density of states with in-band interpolation through the
Floquet phase, gap labels, the Holder envelope of the states function,
the scaling-exponent map between the resonance and level-set pictures,
a surrogate local-dimension estimator, and the cover transport between
the energy axis and the frequency circle.

Irrational frequencies are handled by convergent ladders: every result
records its q so that stability across the ladder can be examined.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .alpha import Alpha, AlphaSpec, make_alpha
from .errors import LadderInstability
from .gauge import Cover, GaugeFunction, omega_eval

__all__ = [
    "AmoParams",
    "TransferProduct",
    "transfer_matrix",
    "SpectrumApprox",
    "approximant_spectrum",
    "duality_defect",
    "IDSTable",
    "ids_table",
    "ids",
    "GapLabel",
    "gap_labels",
    "HolderReport",
    "holder_check",
    "delta_of_beta",
    "beta_of_delta",
    "LocalDimReport",
    "local_dim_estimate",
    "convergent_ladder",
    "TransportItem",
    "TransportReport",
    "transport_cover",
    "write_bands_csv",
    "write_ids_csv",
    "write_butterfly_csv",
]

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class AmoParams:
    """Coupling, frequency, and phase of the operator.

    The frequency is either an exact rational p/q (0 <= p < q, coprime) or
    an AlphaSpec truncated to double precision on use.  The analysis lives
    at 0 < lam <= 1; larger couplings are admitted because duality checks
    evaluate the reciprocal model.
    """

    lam: float
    p: Optional[int] = None
    q: Optional[int] = None
    alpha: Optional[AlphaSpec] = None
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not self.lam >= 0:
            raise ValueError(f"coupling must be >= 0, got {self.lam}")
        rational = self.p is not None or self.q is not None
        if rational:
            if self.p is None or self.q is None:
                raise ValueError("rational frequency needs both p and q")
            if self.alpha is not None:
                raise ValueError("give either p/q or an alpha spec, not both")
            if self.q < 1 or not 0 <= self.p < self.q:
                raise ValueError(f"need 0 <= p < q, got {self.p}/{self.q}")
            if math.gcd(self.p, self.q) != 1:
                raise ValueError(f"p/q must be reduced, got {self.p}/{self.q}")
        elif self.alpha is None:
            raise ValueError("frequency missing: give p/q or an alpha spec")
        if not 0 <= self.theta < 1:
            raise ValueError(f"phase must lie in [0, 1), got {self.theta}")

    def alpha_value(self) -> float:
        if self.p is not None:
            return self.p / self.q
        return make_alpha(self.alpha).to_float()


# ---------------------------------------------------------------------------
# transfer matrices


@dataclass(frozen=True)
class TransferProduct:
    """A 2x2 cocycle product stored as matrix * 2**exponent.

    Rescaling by powers of two is exact in binary floating point, so the
    representation loses nothing while keeping entries in range for
    arbitrarily long hyperbolic products.
    """

    matrix: np.ndarray
    exponent: int

    @property
    def det(self) -> float:
        d = float(self.matrix[0, 0] * self.matrix[1, 1]
                  - self.matrix[0, 1] * self.matrix[1, 0])
        try:
            return math.ldexp(d, 2 * self.exponent)
        except OverflowError:
            return math.inf if d > 0 else -math.inf

    @property
    def trace(self) -> float:
        t = float(self.matrix[0, 0] + self.matrix[1, 1])
        try:
            return math.ldexp(t, self.exponent)
        except OverflowError:
            return math.inf if t > 0 else -math.inf

    def entry_log2(self, i: int, j: int) -> float:
        """log2 of |entry|, usable when the dense value would overflow."""
        e = abs(float(self.matrix[i, j]))
        if e == 0.0:
            return -math.inf
        return math.log2(e) + self.exponent


def transfer_matrix(params: AmoParams, E: float, n: int) -> TransferProduct:
    """Product of one-step matrices [[E - v(k), -1], [1, 0]] for k = n-1..0."""
    if n < 1:
        raise ValueError("need n >= 1")
    lam = params.lam
    theta = params.theta
    rational = params.p is not None
    a = None if rational else params.alpha_value()
    m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
    exponent = 0
    for k in range(n):
        if rational:
            # exact phase reduction keeps large k honest
            phase = ((k * params.p) % params.q) / params.q + theta
        else:
            phase = math.fmod(k * a + theta, 1.0)
        v = 2.0 * lam * math.cos(2.0 * math.pi * phase)
        t = E - v
        m00, m01, m10, m11 = t * m00 - m10, t * m01 - m11, m00, m01
        big = max(abs(m00), abs(m01), abs(m10), abs(m11))
        if big > 1e150:
            sh = int(math.floor(math.log2(big)))
            sc = math.ldexp(1.0, -sh)
            m00 *= sc
            m01 *= sc
            m10 *= sc
            m11 *= sc
            exponent += sh
    return TransferProduct(matrix=np.array([[m00, m01], [m10, m11]]), exponent=exponent)


def _trace_q(p: int, q: int, lam: float, theta: float, E: float) -> float:
    """Discriminant of the period-q problem: trace of the period product."""
    m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
    exponent = 0
    for v in _potential(p, q, lam, theta):
        t = E - v
        m00, m01, m10, m11 = t * m00 - m10, t * m01 - m11, m00, m01
        big = max(abs(m00), abs(m01), abs(m10), abs(m11))
        if big > 1e150:
            sh = int(math.floor(math.log2(big)))
            sc = math.ldexp(1.0, -sh)
            m00 *= sc
            m01 *= sc
            m10 *= sc
            m11 *= sc
            exponent += sh
    t = m00 + m11
    try:
        return math.ldexp(t, exponent)
    except OverflowError:
        return math.inf if t > 0 else -math.inf


# ---------------------------------------------------------------------------
# band structure


@lru_cache(maxsize=512)
def _potential(p: int, q: int, lam: float, theta: float) -> tuple[float, ...]:
    return tuple(2.0 * lam * math.cos(2.0 * math.pi * (((k * p) % q) / q + theta))
                 for k in range(q))


def _bloch_eigs(p: int, q: int, lam: float, theta: float, antiperiodic: bool) -> np.ndarray:
    """Eigenvalues of the q-site Bloch problem at kappa = 0 or pi."""
    v = _potential(p, q, lam, theta)
    sign = -1.0 if antiperiodic else 1.0
    if q == 1:
        return np.array([v[0] + 2.0 * sign])
    h = np.diag(v).astype(float)
    for k in range(q - 1):
        h[k, k + 1] = h[k + 1, k] = 1.0
    if q == 2:
        # the two bonds between the sites coincide
        h[0, 1] = h[1, 0] = 1.0 + sign
    else:
        h[0, q - 1] = h[q - 1, 0] = sign
    return np.linalg.eigvalsh(h)


def _pair_bands(edges: np.ndarray) -> tuple[tuple[float, float], ...]:
    e = np.sort(edges)
    return tuple((float(e[2 * i]), float(e[2 * i + 1])) for i in range(len(e) // 2))


def _sheet_bands(p: int, q: int, lam: float, theta: float) -> tuple[tuple[float, float], ...]:
    """The q Bloch bands at one phase, from the kappa = 0 and pi problems.

    Sorted edge pairing is the classical interlacing of the periodic and
    antiperiodic eigenvalues; touching bands come out with shared edges.
    """
    return _pair_bands(np.concatenate([
        _bloch_eigs(p, q, lam, theta, antiperiodic=False),
        _bloch_eigs(p, q, lam, theta, antiperiodic=True),
    ]))


def _union_bands(p: int, q: int, lam: float) -> tuple[tuple[float, float], ...]:
    """Bands of the union over every phase, valid for any coupling.

    The discriminant splits as P(E) + C(theta) with |C| <= 2 lam^q, so the
    union is {|P| <= 2 + 2 lam^q}.  Its edges are the periodic eigenvalues
    at the phase minimising C together with the antiperiodic ones at the
    phase maximising C; taking instead the per-phase band union would lose
    the interior-phase energies once 2 lam^q > 2.
    """
    th0, th1 = 0.0, 1.0 / (2 * q)
    d = _trace_q(p, q, lam, th0, 0.0) - _trace_q(p, q, lam, th1, 0.0)
    theta_plus, theta_minus = (th0, th1) if d >= 0 else (th1, th0)
    return _pair_bands(np.concatenate([
        _bloch_eigs(p, q, lam, theta_minus, antiperiodic=False),
        _bloch_eigs(p, q, lam, theta_plus, antiperiodic=True),
    ]))


def _merge_intervals(intervals: Sequence[tuple[float, float]],
                     tol: float = _EDGE_TOL) -> tuple[tuple[float, float], ...]:
    out: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1] + tol:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((a, b) for a, b in out)


def _policy_thetas(q: int, theta_policy) -> tuple[float, ...]:
    kind = theta_policy[0]
    if kind == "two-phase":
        return (0.0, 1.0 / (2 * q))
    if kind == "grid":
        m = int(theta_policy[1])
        if m < 1:
            raise ValueError("grid policy needs m >= 1")
        return tuple(i / m for i in range(m))
    if kind == "single":
        return (float(theta_policy[1]),)
    raise ValueError(f"unknown theta policy {theta_policy!r}")


@dataclass(frozen=True)
class SpectrumApprox:
    """Band union of the period-q approximant under a phase policy."""

    q: int
    p: int
    lam: float
    bands: tuple[tuple[float, float], ...]
    theta_policy: tuple

    @property
    def total_band_length(self) -> float:
        return math.fsum(hi - lo for lo, hi in self.bands)

    @property
    def extent(self) -> tuple[float, float]:
        return self.bands[0][0], self.bands[-1][1]


def approximant_spectrum(lam: float, p: int, q: int,
                         theta_policy: tuple = ("two-phase",)) -> SpectrumApprox:
    """Union of Bloch spectra over the phase policy, merged and validated.

    The two-phase policy resolves the phase extremes of the discriminant
    at theta in {0, 1/(2q)} and returns the union over all phases; a grid
    policy returns the plain union over its finitely many sheets.
    """
    AmoParams(lam=lam, p=p, q=q)
    if theta_policy[0] == "two-phase":
        merged = _merge_intervals(_union_bands(p, q, lam))
        if len(merged) > q:
            raise AssertionError(f"{len(merged)} components from a degree-{q} discriminant")
        for (lo, hi), (rlo, rhi) in zip(merged, [(-b, -a) for a, b in reversed(merged)]):
            if abs(lo - rlo) > 1e-9 or abs(hi - rhi) > 1e-9:
                raise AssertionError("band union lost its symmetry")
    else:
        all_bands: list[tuple[float, float]] = []
        for th in _policy_thetas(q, theta_policy):
            all_bands.extend(_sheet_bands(p, q, lam, th))
        merged = _merge_intervals(all_bands)
    lim = 2.0 + 2.0 * lam + 1e-9
    if merged[0][0] < -lim or merged[-1][1] > lim:
        raise AssertionError("bands escape the uniform norm bound")
    return SpectrumApprox(q=q, p=p, lam=lam, bands=merged, theta_policy=theta_policy)


def duality_defect(lam: float, p: int, q: int) -> float:
    """Max endpoint deviation between the band union at lam and the
    rescaled union at 1/lam.  An exact identity of the discriminants, so
    this measures numerics only.  Compared on the raw 2q edge lists:
    merging would close different nearly-degenerate gaps on the two sides.
    """
    if lam <= 0:
        raise ValueError("duality needs lam > 0")
    AmoParams(lam=lam, p=p, q=q)
    a = _union_bands(p, q, lam)
    b = _union_bands(p, q, 1.0 / lam)
    worst = 0.0
    for (lo1, hi1), (lo2, hi2) in zip(a, b):
        worst = max(worst, abs(lo1 - lam * lo2), abs(hi1 - lam * hi2))
    return worst


# ---------------------------------------------------------------------------
# integrated density of states


@dataclass(frozen=True)
class _Sheet:
    theta: float
    bands: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class IDSTable:
    """States function of a period-q approximant, averaged over the policy.

    Per sheet the count rises by exactly 1/q across each Bloch band,
    interpolated inside through the Floquet phase arccos(trace/2); it is
    constant on gaps.  The two-phase average restores the E -> -E symmetry
    exactly for every q, at the price of plateaux only where the sheets
    share a gap.
    """

    q: int
    p: int
    lam: float
    theta_policy: tuple
    sheets: tuple[_Sheet, ...]
    breakpoints: tuple[tuple[float, float], ...]
    interpolation: str = "bloch-arccos"

    def eval(self, E: float) -> float:
        return math.fsum(self._sheet_eval(s, E) for s in self.sheets) / len(self.sheets)

    __call__ = eval

    def _sheet_eval(self, sheet: _Sheet, E: float) -> float:
        bands = sheet.bands
        q = self.q
        lo_idx = -1
        for i, (lo, hi) in enumerate(bands):
            if lo - _EDGE_TOL <= E <= hi + _EDGE_TOL:
                lo_idx = i
                break
            if E < lo:
                return i / q
        else:
            return 1.0
        j = lo_idx + 1
        lo, hi = bands[lo_idx]
        # eigenvalue edges and the trace polynomial disagree at ~1e-13, which
        # the arccos square root would amplify; snap the edge collar to the
        # exact plateau fractions so breakpoint values mirror bitwise
        if hi - lo <= 2 * _EDGE_TOL:
            return (j - 0.5) / q
        if E - lo <= _EDGE_TOL:
            return (j - 1) / q
        if hi - E <= _EDGE_TOL:
            return j / q
        t = _trace_q(self.p, q, self.lam, sheet.theta, E)
        x = min(1.0, max(-1.0, 0.5 * t))
        phi = math.acos(x)
        if (q - j) % 2 == 0:
            return (j - phi / math.pi) / q
        return (j - 1 + phi / math.pi) / q

    @property
    def covered(self) -> tuple[tuple[float, float], ...]:
        """Union of all sheet bands: where the table is strictly increasing."""
        return _merge_intervals([b for s in self.sheets for b in s.bands])

    def gaps(self, min_width: float = 1e-9) -> tuple[tuple[float, float], ...]:
        cov = self.covered
        return tuple((cov[i][1], cov[i + 1][0]) for i in range(len(cov) - 1)
                     if cov[i + 1][0] - cov[i][1] > min_width)


def ids_table(lam: float, p: int, q: int,
              theta_policy: tuple = ("two-phase",)) -> IDSTable:
    AmoParams(lam=lam, p=p, q=q)
    sheets = tuple(_Sheet(theta=th, bands=_sheet_bands(p, q, lam, th))
                   for th in _policy_thetas(q, theta_policy))
    table = IDSTable(q=q, p=p, lam=lam, theta_policy=theta_policy,
                     sheets=sheets, breakpoints=())
    edges = sorted({e for s in sheets for b in s.bands for e in b})
    bps = []
    for e in edges:
        if bps and e - bps[-1][0] < _EDGE_TOL:
            continue
        bps.append((e, table.eval(e)))
    object.__setattr__(table, "breakpoints", tuple(bps))
    return table


@lru_cache(maxsize=64)
def _cached_table(lam: float, p: int, q: int, policy_key: tuple) -> IDSTable:
    return ids_table(lam, p, q, policy_key)


def ids(lam: float, p: int, q: int, E: float,
        theta_policy: tuple = ("two-phase",)) -> float:
    """States function value at E for the p/q approximant."""
    return _cached_table(float(lam), int(p), int(q), tuple(theta_policy)).eval(E)


# ---------------------------------------------------------------------------
# gap labels


@dataclass(frozen=True)
class GapLabel:
    interval: tuple[float, float]
    N: float
    j: int
    k: int
    tie: bool


def gap_labels(table: IDSTable, min_width: float = 1e-9) -> tuple[GapLabel, ...]:
    """Label each gap by the integer k with k p = j (mod q), |k| minimal.

    The plateau value of a gap is j/q on the q-lattice; ties between k and
    k - q at |k| = q/2 are broken toward the positive representative and
    flagged.
    """
    out = []
    q, p = table.q, table.p
    for lo, hi in table.gaps(min_width):
        val = table.eval(0.5 * (lo + hi))
        j = round(val * q)
        if abs(val * q - j) > 1e-6:
            raise ValueError(f"gap plateau {val} is not on the 1/{q} lattice")
        if j <= 0 or j >= q:
            continue
        k0 = (j * pow(p, -1, q)) % q
        tie = (2 * k0 == q)
        k = k0 if (k0 <= q - k0) else k0 - q
        out.append(GapLabel(interval=(lo, hi), N=j / q, j=j, k=k, tie=tie))
    return tuple(out)


# ---------------------------------------------------------------------------
# Holder envelope


@dataclass(frozen=True)
class HolderReport:
    """Fitted two-sided envelope c_low eps^{3/2} <= dN <= c_high eps^{1/2}.

    c_low is the largest lower constant and c_high the smallest upper one
    consistent with every sampled increment; a sample lands in violations
    only when no positive constants exist, i.e. a vanishing increment.
    """

    energies: tuple[float, ...]
    eps_grid: tuple[float, ...]
    c_low: float
    c_high: float
    violations: tuple[tuple[float, float, float], ...]

    @property
    def c_fit(self) -> float:
        """Single envelope constant in (0, 1): min(c_low, 1/c_high)."""
        c = min(self.c_low, 1.0 / self.c_high)
        return min(c, 0.999999)

    @property
    def passed(self) -> bool:
        return not self.violations


def holder_check(table: IDSTable, E_samples: Sequence[float],
                 eps_grid: Sequence[float]) -> HolderReport:
    cov = table.covered
    for E in E_samples:
        if not any(lo - _EDGE_TOL <= E <= hi + _EDGE_TOL for lo, hi in cov):
            raise ValueError(f"sample E={E} lies outside the band union")
    if any(not 0 < e < 1 for e in eps_grid):
        raise ValueError("eps grid must lie in (0, 1)")
    c_low = math.inf
    c_high = 0.0
    violations = []
    for E in E_samples:
        for eps in eps_grid:
            inc = table.eval(E + eps) - table.eval(E - eps)
            if inc <= 0:
                violations.append((float(E), float(eps), float(inc)))
                continue
            c_low = min(c_low, inc / eps**1.5)
            c_high = max(c_high, inc / eps**0.5)
    return HolderReport(energies=tuple(float(E) for E in E_samples),
                        eps_grid=tuple(float(e) for e in eps_grid),
                        c_low=c_low, c_high=c_high,
                        violations=tuple(violations))


# ---------------------------------------------------------------------------
# exponent map between the resonance and level-set pictures


def delta_of_beta(beta: float, lam: float) -> float:
    """delta = beta log(lam) / (1 - 2 beta) on beta in [1/2, 1)."""
    if not 0 < lam < 1:
        raise ValueError(f"coupling must lie in (0, 1), got {lam}")
    if not 0.5 <= beta < 1:
        raise ValueError(f"beta must lie in [1/2, 1), got {beta}")
    if beta == 0.5:
        return math.inf
    return beta * math.log(lam) / (1.0 - 2.0 * beta)


def beta_of_delta(delta: float, lam: float) -> float:
    """Inverse map; delta = -log(lam) returns the closure value beta = 1."""
    if not 0 < lam < 1:
        raise ValueError(f"coupling must lie in (0, 1), got {lam}")
    L = math.log(lam)
    if delta == math.inf:
        return 0.5
    if delta < -L - 1e-12:
        raise ValueError(f"delta must be >= {-L}, got {delta}")
    return delta / (L + 2.0 * delta)


# ---------------------------------------------------------------------------
# surrogate local dimension


def convergent_ladder(spec: AlphaSpec, q_max: int) -> list[tuple[int, int]]:
    """Convergents p_k/q_k with q_k <= q_max, skipping the trivial 0/1.

    Numerators are reduced mod q_k: the frequency only matters on the
    circle, and the first convergent of a [0; 1, ...] expansion is 1/1.
    """
    alpha = make_alpha(spec)
    qs = alpha.denominators_upto(q_max)
    cf = alpha.continued_fraction(len(qs) - 1)
    out = []
    for k in range(1, len(qs)):
        f = cf.convergent(k)
        out.append((f.numerator % f.denominator, f.denominator))
    return out


@dataclass(frozen=True)
class LocalDimReport:
    lower_est: float
    upper_est: float
    slopes: tuple[float, ...]
    r_grid: tuple[float, ...]
    by_q: tuple[tuple[int, float, float], ...]
    stable: bool


def local_dim_estimate(lam: float, ladder: Sequence[tuple[int, int]], E: float,
                       r_grid: Sequence[float], stability_tol: float = 0.35,
                       tail_fraction: float = 0.5) -> LocalDimReport:
    """Slopes log dN(E, r) / log r on the grid tail, finest approximant.

    The measure surrogate is the band-interpolated states function, so the
    estimate is only meaningful for r above the finest band scale; the
    report carries per-q values and raises when the two finest approximants
    disagree beyond stability_tol on either end of the slope range.
    Diagnostic: acceptance uses wide tolerances.
    """
    rs = sorted(set(float(r) for r in r_grid), reverse=True)
    if len(rs) < 2:
        raise ValueError("need at least two radii")
    if any(not 0 < r < 1 for r in rs):
        raise ValueError("radii must lie in (0, 1)")
    if not ladder:
        raise ValueError("empty approximant ladder")
    tail_start = int(len(rs) * (1.0 - tail_fraction))
    by_q = []
    for p, q in ladder[-2:]:
        table = _cached_table(float(lam), p, q, ("two-phase",))
        slopes = []
        for r in rs:
            inc = table.eval(E + r) - table.eval(E - r)
            if inc <= 0:
                slopes.append(math.inf)
            else:
                slopes.append(math.log(inc) / math.log(r))
        tail = slopes[tail_start:]
        by_q.append((q, min(tail), max(tail)))
        finest_slopes = tuple(slopes)
    lower = by_q[-1][1]
    upper = by_q[-1][2]
    stable = True
    if len(by_q) == 2:
        stable = (abs(by_q[0][1] - by_q[1][1]) <= stability_tol
                  and abs(by_q[0][2] - by_q[1][2]) <= stability_tol)
    report = LocalDimReport(lower_est=lower, upper_est=upper,
                            slopes=finest_slopes, r_grid=tuple(rs),
                            by_q=tuple(by_q), stable=stable)
    if not stable:
        raise LadderInstability(
            f"slope range moved beyond {stability_tol} between q={by_q[0][0]} "
            f"and q={by_q[1][0]}: {by_q}")
    return report


# ---------------------------------------------------------------------------
# cover transport


def _sup_below(table: IDSTable, a: float) -> float:
    """sup{E : N(E) <= a}, a in (0, 1); lands on the band closure."""
    lo, hi = table.covered[0][0], table.covered[-1][1]
    lo -= 1.0
    hi += 1.0
    if table.eval(hi) <= a:
        raise ValueError(f"value {a} at or above the full count")
    if table.eval(lo) > a:
        raise ValueError(f"value {a} at or below zero count")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if table.eval(mid) <= a:
            lo = mid
        else:
            hi = mid
    return lo


def _inf_above(table: IDSTable, b: float) -> float:
    lo, hi = table.covered[0][0], table.covered[-1][1]
    lo -= 1.0
    hi += 1.0
    if table.eval(lo) >= b:
        raise ValueError(f"value {b} at or below zero count")
    if table.eval(hi) < b:
        raise ValueError(f"value {b} above the full count")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if table.eval(mid) >= b:
            hi = mid
        else:
            lo = mid
    return hi


def _in_covered(cov: Sequence[tuple[float, float]], x: float) -> bool:
    return any(lo - _EDGE_TOL <= x <= hi + _EDGE_TOL for lo, hi in cov)


@dataclass(frozen=True)
class TransportItem:
    source: tuple[float, float]
    case: int
    pieces: tuple[tuple[float, float], ...]
    image_lengths: tuple[float, ...]
    cubic_ok: bool


@dataclass(frozen=True)
class TransportReport:
    direction: str
    s: float
    c: float
    input_sum: float
    output_sum: float
    bound_factor: float
    within_bound: bool
    items: tuple[TransportItem, ...]


def transport_cover(table: IDSTable, cover: Cover, s: float, direction: str,
                    c: float) -> TransportReport:
    """Push a cover through the states function and certify the gauge sums.

    direction "F->D": energy-side intervals map through N; requires
    |I| <= c^6 and asserts sum omega_s(|N(I)|) <= 3^s sum omega_s(|I|).

    direction "D->F": circle-side intervals [a, b] pull back to the
    extremal spectrum points E1 = sup{N <= a}, E2 = inf{N >= b}.  If the
    middle third of [E1, E2] meets the band union the whole interval is
    kept (case 1); otherwise the gap across the middle is cut out and the
    two flanks kept (case 2).  Requires |J| <= (c/6)^2 and |E2 - E1| < 1/2;
    asserts the cubic growth |N(piece)| >= |piece|^3 per piece and
    sum over pieces <= 2 * 3^s sum omega_s(|J|).
    """
    if not 0 < c < 1:
        raise ValueError(f"envelope constant must lie in (0, 1), got {c}")
    if s <= 0:
        raise ValueError("need s > 0")
    g = GaugeFunction(kind="log-power", s=s)
    items = []
    in_parts = []
    out_parts = []
    if direction == "F->D":
        limit = c**6
        for a, b in cover.intervals:
            if b - a > limit:
                raise ValueError(
                    f"interval length {b - a} exceeds the c^6 smallness bound {limit}")
            na, nb = table.eval(a), table.eval(b)
            in_parts.append(omega_eval(g, b - a))
            out_parts.append(omega_eval(g, nb - na))
            items.append(TransportItem(source=(a, b), case=0,
                                       pieces=((na, nb),),
                                       image_lengths=(nb - na,),
                                       cubic_ok=True))
        factor = 3.0**s
    elif direction == "D->F":
        limit = (c / 6.0)**2
        cov = table.covered
        for a, b in cover.intervals:
            if b - a > limit:
                raise ValueError(
                    f"interval length {b - a} exceeds the (c/6)^2 smallness bound {limit}")
            if not 0.0 < a and b < 1.0:
                raise ValueError(f"circle-side interval [{a}, {b}] must sit inside (0, 1)")
            e1 = _sup_below(table, a)
            e2 = _inf_above(table, b)
            span = e2 - e1
            if span >= 0.5:
                raise ValueError(
                    f"pullback of [{a}, {b}] spans {span} >= 1/2; cover too coarse")
            third_lo = e1 + span / 3.0
            third_hi = e1 + 2.0 * span / 3.0
            middle_hit = any(lo <= third_hi and hi >= third_lo for lo, hi in cov)
            if middle_hit:
                pieces = ((e1, e2),)
                case = 1
            else:
                mid = 0.5 * (e1 + e2)
                em = max((hi for lo, hi in cov if hi <= third_lo + _EDGE_TOL),
                         default=e1)
                ep = min((lo for lo, hi in cov if lo >= third_hi - _EDGE_TOL),
                         default=e2)
                if not e1 <= em <= mid <= ep <= e2:
                    raise AssertionError(
                        f"gap bracketing failed on [{a}, {b}]: {e1}, {em}, {ep}, {e2}")
                pieces = ((e1, em), (ep, e2))
                case = 2
            lens = []
            cubic_ok = True
            for lo, hi in pieces:
                img = table.eval(hi) - table.eval(lo)
                lens.append(img)
                if img + 1e-12 < (hi - lo)**3:
                    cubic_ok = False
                out_parts.append(omega_eval(g, hi - lo))
            in_parts.append(omega_eval(g, b - a))
            items.append(TransportItem(source=(a, b), case=case,
                                       pieces=pieces,
                                       image_lengths=tuple(lens),
                                       cubic_ok=cubic_ok))
        factor = 2.0 * 3.0**s
    else:
        raise ValueError(f"direction must be 'F->D' or 'D->F', got {direction!r}")
    input_sum = math.fsum(in_parts)
    output_sum = math.fsum(out_parts)
    within = output_sum <= factor * input_sum + 1e-12
    return TransportReport(direction=direction, s=s, c=c,
                           input_sum=input_sum, output_sum=output_sum,
                           bound_factor=factor, within_bound=within,
                           items=tuple(items))


# ---------------------------------------------------------------------------
# artifact tables


def _write_rows(path: str, schema: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema {schema} 1\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([x if isinstance(x, (int, str)) else repr(float(x)) for x in row])


def write_bands_csv(path: str, approx: SpectrumApprox) -> None:
    _write_rows(path, "amofractal.bands",
                ("q", "band_index", "E_lo", "E_hi"),
                ((approx.q, i, lo, hi) for i, (lo, hi) in enumerate(approx.bands)))


def write_ids_csv(path: str, table: IDSTable) -> None:
    _write_rows(path, "amofractal.ids",
                ("E", "N"),
                ((e, n) for e, n in table.breakpoints))


def write_butterfly_csv(path: str, lam: float, q_max: int) -> None:
    """Band rasters for all reduced p/q with q <= q_max."""
    def rows():
        for q in range(1, q_max + 1):
            for p in range(q):
                if math.gcd(p, q) != 1:
                    continue
                approx = approximant_spectrum(lam, p, q)
                for lo, hi in approx.bands:
                    yield (p, q, lo, hi)
    _write_rows(path, "amofractal.butterfly", ("p", "q", "E_lo", "E_hi"), rows())
