"""Logarithmic Hausdorff gauges and the covering tail that separates them.

The gauge family is omega_s(r) = (-log r)**-s for small r > 0.  Coverings by
balls of radius 2*exp(-k*eta) at integer resonance depths k >= K have gauge
mass 2 * sum_k (k*eta - log 2)**-s, which converges exactly when s > 1; the
boundary case s = 1 diverges logarithmically, growing by 2*log(10)/eta per
decade of depth.  That dichotomy is what tells gauges apart on the sets built
here, so the tail is provided with certified two-sided values.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DegenerateFit
from .numeric import neg_log_bounds, pow_bounds

__all__ = [
    "omega",
    "omega_bounds",
    "GaugeFunction",
    "Cover",
    "omega_eval",
    "cover_sum",
    "tail_sum",
    "tail_prediction",
    "partial_sum",
    "TailReport",
    "tail_report",
    "BorelCantelliReport",
    "borel_cantelli_tail",
    "LogDimFit",
    "log_dim_estimate",
]


def omega(r: float, s: float) -> float:
    """Gauge value (-log r)**-s for r in (0, 1)."""
    if not 0 < r < 1:
        raise ValueError(f"gauge needs r in (0, 1), got {r}")
    return (-math.log(r)) ** (-s)


def omega_bounds(r: Fraction, s: Fraction, prec: int = 96) -> tuple[Fraction, Fraction]:
    """Certified enclosure of omega_s(r) for exact rational r in (0, 1)."""
    if not 0 < r < 1:
        raise ValueError(f"gauge needs r in (0, 1), got {r}")
    s = Fraction(s)
    x_lo, x_hi = neg_log_bounds(r, prec)
    # x -> x**-s is decreasing for s > 0
    lo = pow_bounds(x_hi, -s, prec)[0]
    hi = pow_bounds(x_lo, -s, prec)[1]
    return lo, hi


def _term(k: int, s: float, eta: float) -> float:
    return 2.0 * (k * eta - math.log(2.0)) ** (-s)


def _check_depth(K: int, eta: float) -> None:
    if K * eta <= math.log(2.0):
        raise ValueError(f"first depth K={K} must satisfy K*eta > log 2")


def partial_sum(s: float, eta: float, k0: int, k1: int) -> float:
    """Sum of 2*(k*eta - log 2)**-s over k in [k0, k1)."""
    _check_depth(k0, eta)
    return math.fsum(_term(k, s, eta) for k in range(k0, k1))


def _integral_tail(x: float, s: float, eta: float) -> float:
    # integral over [x, inf) of 2*(t*eta - log 2)**-s dt, s > 1
    return 2.0 * (x * eta - math.log(2.0)) ** (1.0 - s) / (eta * (s - 1.0))


def tail_sum(s: float, eta: float, K: int, terms: int = 200_000) -> tuple[float, float]:
    """Certified (lo, hi) for the full tail sum from depth K, s > 1.

    Sums the first block exactly and brackets the rest between integrals of
    the decreasing integrand.
    """
    if s <= 1:
        raise ValueError("tail diverges for s <= 1; use partial_sum to watch it grow")
    if eta <= 0:
        raise ValueError("eta must be positive")
    _check_depth(K, eta)
    N = K + terms
    head = partial_sum(s, eta, K, N)
    # decreasing integrand: integral from N under-counts the remaining sum,
    # integral from N - 1 over-counts it
    return head + _integral_tail(N, s, eta), head + _integral_tail(N - 1, s, eta)


def tail_prediction(s: float, eta: float, K: int) -> float:
    """Closed-form integral surrogate 2*(K*eta - log 2)**(1-s) / (eta*(s-1))."""
    if s <= 1:
        raise ValueError("prediction defined for s > 1 only")
    _check_depth(K, eta)
    return _integral_tail(K, s, eta)


@dataclass(frozen=True)
class TailReport:
    """Tail sum versus its integral prediction at one starting depth."""

    s: float
    eta: float
    K: int
    sum_lo: float
    sum_hi: float
    prediction: float

    @property
    def ratio(self) -> float:
        return (self.sum_lo + self.sum_hi) / (2.0 * self.prediction)


def tail_report(s: float, eta: float, K: int, terms: int = 200_000) -> TailReport:
    lo, hi = tail_sum(s, eta, K, terms)
    return TailReport(s=s, eta=eta, K=K, sum_lo=lo, sum_hi=hi,
                      prediction=tail_prediction(s, eta, K))


# ---------------------------------------------------------------------------
# gauge functions as first-class values


@dataclass(frozen=True)
class GaugeFunction:
    """A dimension gauge: increasing on [0, 1), zero at zero.

    kind 'log-power': r -> (-log r)**-s, the family separating logarithmic
                      scaling regimes; diverges from domain at r >= 1.
    kind 'power':     r -> r**s, the classical Hausdorff gauge.
    kind 'table':     piecewise-linear through given (r, value) knots, which
                      must be strictly increasing in both coordinates.
    """

    kind: str
    s: float = 1.0
    table: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind in ("log-power", "power"):
            if self.s <= 0:
                raise ValueError(f"gauge exponent must be positive, got {self.s}")
        elif self.kind == "table":
            t = tuple((float(r), float(v)) for r, v in self.table)
            if len(t) < 1:
                raise ValueError("table gauge needs at least one knot")
            rs = [r for r, _ in t]
            vs = [v for _, v in t]
            if any(r <= 0 or v <= 0 for r, v in t):
                raise ValueError("table knots must be positive (0 maps to 0 implicitly)")
            if rs != sorted(set(rs)) or vs != sorted(set(vs)):
                raise ValueError("table knots must be strictly increasing in r and value")
            object.__setattr__(self, "table", t)
        else:
            raise ValueError(f"unknown gauge kind {self.kind!r}")

    def __call__(self, r: float) -> float:
        return omega_eval(self, r)


def omega_eval(g: GaugeFunction, r: float) -> float:
    """Evaluate a gauge at radius r in [0, 1)."""
    r = float(r)
    if r == 0:
        return 0.0
    if r < 0:
        raise ValueError(f"gauge needs r >= 0, got {r}")
    if g.kind == "log-power":
        if r >= 1:
            raise ValueError(f"log-power gauge undefined at r >= 1, got {r}")
        return (-math.log(r)) ** (-g.s)
    if g.kind == "power":
        return r**g.s
    # piecewise-linear table, anchored at (0, 0)
    rs = [kr for kr, _ in g.table]
    i = bisect_left(rs, r)
    if i == len(rs):
        raise ValueError(f"r={r} beyond the last table knot {rs[-1]}")
    r1, v1 = g.table[i]
    if r1 == r:
        return v1
    r0, v0 = (0.0, 0.0) if i == 0 else g.table[i - 1]
    return v0 + (v1 - v0) * (r - r0) / (r1 - r0)


@dataclass(frozen=True)
class Cover:
    """A countable-in-principle, finite-in-practice open cover by intervals."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if any(b <= a for a, b in ivs):
            raise ValueError("cover intervals must be non-degenerate (b > a)")
        object.__setattr__(self, "intervals", ivs)

    @property
    def mesh(self) -> float:
        return max((b - a for a, b in self.intervals), default=0.0)


def cover_sum(cover: Cover, g: GaugeFunction) -> float:
    """Gauge mass of a cover: sum of omega(b - a) over its intervals."""
    return math.fsum(omega_eval(g, b - a) for a, b in cover.intervals)


# ---------------------------------------------------------------------------
# first Borel-Cantelli covering tail


@dataclass(frozen=True)
class BorelCantelliReport:
    """Tail of the covering series for the limsup set of eta-resonant times.

    The balls around orbit points have length 2*exp(-k*eta) regardless of
    the frequency, so the series depends only on (s, eta, K).  convergent is
    the s > 1 verdict that forces zero gauge mass; for s <= 1 the partial
    sums grow like (2/(s' or log)) and the tail is reported infinite.
    """

    s: float
    eta: float
    K: int
    tail_lo: float
    tail_hi: float
    prediction: float
    convergent: bool
    verdict: str


def borel_cantelli_tail(alpha, eta: float, s: float, K: int,
                        terms: int = 200_000) -> BorelCantelliReport:
    """Certified tail of sum over k >= K of 2*omega_s(2 exp(-k eta)).

    alpha is accepted for interface symmetry with orbit-dependent scans but
    does not enter the sum.  For s > 1 the tail is finite with an integral
    remainder bracket; for s <= 1 the report flags divergence and leaves the
    partial-sum inspection to partial_sum.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    _check_depth(K, eta)
    if s > 1:
        lo, hi = tail_sum(s, eta, K, terms)
        return BorelCantelliReport(
            s=s, eta=eta, K=K, tail_lo=lo, tail_hi=hi,
            prediction=tail_prediction(s, eta, K),
            convergent=True,
            verdict=f"convergent; tail < {hi:.6g}",
        )
    return BorelCantelliReport(
        s=s, eta=eta, K=K, tail_lo=math.inf, tail_hi=math.inf,
        prediction=math.inf,
        convergent=False,
        verdict="divergent (partial sums grow logarithmically)"
        if s == 1
        else "divergent (partial sums grow polynomially)",
    )


# ---------------------------------------------------------------------------
# covering-count estimator for the logarithmic scaling exponent


def _greedy_cover_count(points: Sequence[float], r: float) -> int:
    """Minimal number of length-r intervals covering a finite 1-D sample."""
    xs = sorted(float(p) for p in points)
    count = 0
    i = 0
    n = len(xs)
    while i < n:
        count += 1
        end = xs[i] + r
        while i < n and xs[i] <= end:
            i += 1
    return count


@dataclass(frozen=True)
class LogDimFit:
    """Least-squares fit of log N(r) against log(-log r).

    A straight line here means N(r) ~ (-log r)^s: logarithmic scaling with
    exponent s.  Samples that actually scale polynomially in 1/r (positive
    box dimension) fit the power law far better; log_scaling is False then
    and the reported s is not meaningful.  Diagnostic only.
    """

    s: float
    intercept: float
    stderr: float
    scales: tuple[float, ...]
    counts: tuple[int, ...]
    residual: float
    power_residual: float
    log_scaling: bool


def log_dim_estimate(points: Sequence[float], scales: Sequence[float]) -> LogDimFit:
    """Fit the covering exponent of a sample in the logarithmic gauge family."""
    rs = sorted(set(float(r) for r in scales), reverse=True)
    if len(rs) < 2:
        raise ValueError("need at least 2 distinct scales")
    if any(not 0 < r < 1 for r in rs):
        raise ValueError("scales must lie in (0, 1)")
    if not points:
        raise ValueError("need a non-empty point sample")
    counts = [_greedy_cover_count(points, r) for r in rs]
    if len(set(counts)) == 1:
        raise DegenerateFit(f"all cover counts equal {counts[0]}; no scaling information")
    ys = [math.log(c) for c in counts]
    xs_log = [math.log(-math.log(r)) for r in rs]
    xs_pow = [math.log(1.0 / r) for r in rs]
    s, b, res_log = _lstsq(xs_log, ys)
    _, _, res_pow = _lstsq(xs_pow, ys)
    n = len(rs)
    sxx = math.fsum((x - math.fsum(xs_log) / n) ** 2 for x in xs_log)
    stderr = math.sqrt(res_log / max(n - 2, 1) / sxx) if sxx > 0 else math.inf
    return LogDimFit(
        s=s,
        intercept=b,
        stderr=stderr,
        scales=tuple(rs),
        counts=tuple(counts),
        residual=res_log,
        power_residual=res_pow,
        log_scaling=res_log <= res_pow,
    )


def _lstsq(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Slope, intercept, and residual sum of squares of a 1-D least squares."""
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise DegenerateFit("all scales collapse to one abscissa")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    rss = math.fsum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    return slope, intercept, rss
