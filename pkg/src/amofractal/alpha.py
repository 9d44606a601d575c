"""Exact rotation numbers and their continued fractions.

An irrational frequency can be described three ways: as a quadratic surd
(p + sqrt(d))/q with integer data, by an explicit list of partial quotients
with an optional periodic tail, or by a truncated decimal string.  Quadratic
surds admit exact integer continued-fraction expansion and exact fixed-point
floors at any bit depth; the other kinds are certified as far as their data
allows and raise PrecisionExhausted beyond that, never guessing a digit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Optional, Sequence

from .errors import PrecisionExhausted

__all__ = [
    "AlphaSpec",
    "ContinuedFraction",
    "Alpha",
    "named_alpha",
    "make_alpha",
    "NAMED_ALPHAS",
]


# ---------------------------------------------------------------------------
# exact comparisons against sqrt(d), d a non-square positive integer


def _is_square(d: int) -> bool:
    if d < 0:
        return True  # treated as invalid elsewhere
    r = isqrt(d)
    return r * r == d


def _sqrt_cmp(d: int, t: int) -> int:
    """Sign of sqrt(d) - t for non-square d > 0 (never zero)."""
    if t < 0:
        return 1
    return 1 if d > t * t else -1


def _quad_ge(P: int, Q: int, d: int, f: int) -> bool:
    """Whether (P + sqrt(d))/Q >= f, exactly."""
    t = f * Q - P
    if Q > 0:
        return _sqrt_cmp(d, t) > 0
    return _sqrt_cmp(d, t) < 0


def _floor_quad(P: int, Q: int, d: int, s: int) -> int:
    """floor((P + sqrt(d))/Q), exact for irrational sqrt(d)."""
    f = (P + s) // Q
    while not _quad_ge(P, Q, d, f):
        f -= 1
    while _quad_ge(P, Q, d, f + 1):
        f += 1
    return f


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class AlphaSpec:
    """Serializable description of an irrational frequency in (0, 1).

    kind 'quadratic': value (p + sqrt(d))/q, d positive non-square.
    kind 'cf':        partial quotients [0; a_1, a_2, ...] given by an explicit
                      prefix and an optional tail repeated forever.
    kind 'decimal':   decimal string '0.dddd...'; digits are trusted to one
                      unit in the last place in either direction.

    precision_bits is the default working precision for orbit points derived
    from this frequency; individual calls may ask for more.
    """

    kind: str
    p: int = 0
    q: int = 1
    d: int = 0
    prefix: tuple[int, ...] = ()
    tail: Optional[tuple[int, ...]] = None
    digits: str = ""
    precision_bits: int = 256

    def __post_init__(self) -> None:
        if self.precision_bits < 64:
            raise ValueError(f"precision_bits must be >= 64, got {self.precision_bits}")
        if self.kind == "quadratic":
            if self.q == 0:
                raise ValueError("quadratic spec needs q != 0")
            if self.d <= 0 or _is_square(self.d):
                raise ValueError(f"quadratic spec needs a positive non-square d, got {self.d}")
        elif self.kind == "cf":
            terms = tuple(self.prefix) + (tuple(self.tail) if self.tail else ())
            if self.tail is not None and len(self.tail) == 0:
                raise ValueError("cf tail must be non-empty when given")
            if not terms:
                raise ValueError("cf spec needs at least one partial quotient")
            if any(int(a) < 1 for a in terms):
                raise ValueError("partial quotients must be >= 1")
            object.__setattr__(self, "prefix", tuple(int(a) for a in self.prefix))
            if self.tail is not None:
                object.__setattr__(self, "tail", tuple(int(a) for a in self.tail))
        elif self.kind == "decimal":
            s = self.digits.strip()
            if s.startswith("0."):
                s = s[2:]
            elif s.startswith("."):
                s = s[1:]
            if not s or not s.isdigit():
                raise ValueError(f"decimal spec needs digits '0.ddd...', got {self.digits!r}")
            object.__setattr__(self, "digits", s)
        else:
            raise ValueError(f"unknown AlphaSpec kind {self.kind!r}")

    def to_json(self) -> str:
        payload: dict = {"kind": self.kind, "precision_bits": self.precision_bits}
        if self.kind == "quadratic":
            payload.update(p=self.p, q=self.q, d=self.d)
        elif self.kind == "cf":
            payload["prefix"] = list(self.prefix)
            payload["tail"] = list(self.tail) if self.tail is not None else None
        else:
            payload["digits"] = "0." + self.digits
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AlphaSpec":
        data = json.loads(text)
        kind = data["kind"]
        bits = int(data.get("precision_bits", 256))
        if kind == "quadratic":
            return cls(
                kind="quadratic",
                p=int(data["p"]),
                q=int(data["q"]),
                d=int(data["d"]),
                precision_bits=bits,
            )
        if kind == "cf":
            tail = data.get("tail")
            return cls(
                kind="cf",
                prefix=tuple(int(a) for a in data.get("prefix", ())),
                tail=tuple(int(a) for a in tail) if tail is not None else None,
                precision_bits=bits,
            )
        if kind == "decimal":
            return cls(kind="decimal", digits=data["digits"], precision_bits=bits)
        raise ValueError(f"unknown AlphaSpec kind {kind!r}")


NAMED_ALPHAS = {
    # (sqrt(5) - 1)/2, partial quotients all 1
    "golden": AlphaSpec(kind="quadratic", p=-1, q=2, d=5),
    # sqrt(2) - 1, partial quotients all 2
    "silver": AlphaSpec(kind="quadratic", p=-1, q=1, d=2),
}


def named_alpha(name: str) -> "Alpha":
    try:
        spec = NAMED_ALPHAS[name]
    except KeyError:
        raise ValueError(f"unknown named frequency {name!r}; have {sorted(NAMED_ALPHAS)}") from None
    return Alpha(spec)


def make_alpha(spec: AlphaSpec) -> "Alpha":
    return Alpha(spec)


# ---------------------------------------------------------------------------
# convergents


class ContinuedFraction:
    """Convergents p_k/q_k of [0; a_1, ..., a_n] with exactness checks.

    Index 0 is the trivial convergent 0/1; index k >= 1 uses quotients
    a_1..a_k.  The defining recurrence and the determinant identity
    p_k q_{k-1} - p_{k-1} q_k = (-1)^{k-1} are asserted on construction.
    """

    def __init__(self, quotients: Sequence[int]):
        a = [int(x) for x in quotients]
        if any(x < 1 for x in a):
            raise ValueError("partial quotients must be >= 1")
        ps = [0]
        qs = [1]
        prev_p, prev_q = 1, 0
        for k, ak in enumerate(a, start=1):
            np_ = ak * ps[-1] + prev_p
            nq_ = ak * qs[-1] + prev_q
            det = np_ * qs[-1] - ps[-1] * nq_
            if det != (-1) ** (k - 1):
                raise AssertionError(f"determinant identity broken at k={k}: {det}")
            prev_p, prev_q = ps[-1], qs[-1]
            ps.append(np_)
            qs.append(nq_)
        self.quotients = tuple(a)
        self.p = tuple(ps)
        self.q = tuple(qs)

    def __len__(self) -> int:
        return len(self.quotients)

    def convergent(self, k: int) -> Fraction:
        return Fraction(self.p[k], self.q[k])

    def check_growth(self) -> bool:
        """q_{k+2} >= 2 q_k for all applicable k."""
        return all(self.q[k + 2] >= 2 * self.q[k] for k in range(len(self.q) - 2))


# ---------------------------------------------------------------------------
# runtime engine


class Alpha:
    """A frequency with lazily extended certified continued-fraction data.

    Exposes exact (or certified-enclosure) primitives used everywhere else:
    partial quotients, convergents, rational enclosures, and fixed-point
    floors floor(alpha * 2**bits) for orbit scans.
    """

    def __init__(self, spec: AlphaSpec):
        self.spec = spec
        self._quotients: list[int] = []
        self._fixed: dict[int, int] = {}
        if spec.kind == "quadratic":
            self._init_quadratic()
        elif spec.kind == "decimal":
            self._init_decimal()

    # -- construction helpers

    def _init_quadratic(self) -> None:
        p, q, d = self.spec.p, self.spec.q, self.spec.d
        if (d - p * p) % q != 0:
            # rescale so that q divides d - p^2; value is unchanged
            p, d, q = p * abs(q), d * q * q, q * abs(q)
        s = isqrt(d)
        if not (_quad_ge(p, q, d, 0) and not _quad_ge(p, q, d, 1)):
            raise ValueError("quadratic spec value must lie in (0, 1)")
        # state for the quotient stream: current complete quotient is
        # (P + sqrt(d))/Q; the first stored quotient is a_1 of 1/alpha
        self._d = d
        self._s = s
        self._P = -p
        self._Q = (d - p * p) // q

    def _init_decimal(self) -> None:
        digits = self.spec.digits
        places = len(digits)
        v = Fraction(int(digits), 10**places)
        u = Fraction(1, 10**places)
        lo, hi = v - u, v + u
        if lo <= 0:
            lo = Fraction(1, 10 ** (places + 1))
        if hi >= 1:
            raise ValueError("decimal spec must describe a value in (0, 1)")
        self._dec_lo, self._dec_hi = lo, hi
        self._dec_state: tuple[Fraction, Fraction] | None = (lo, hi)

    # -- quotient streams

    def _extend_quadratic(self) -> None:
        P, Q, d, s = self._P, self._Q, self._d, self._s
        a = _floor_quad(P, Q, d, s)
        if a < 1:
            raise AssertionError("complete quotient fell below 1")
        P2 = a * Q - P
        num = d - P2 * P2
        if num % Q != 0:
            raise AssertionError("quadratic iteration lost integrality")
        self._quotients.append(a)
        self._P, self._Q = P2, num // Q

    def _extend_cf(self) -> None:
        k = len(self._quotients)
        prefix, tail = self.spec.prefix, self.spec.tail
        if k < len(prefix):
            self._quotients.append(prefix[k])
        elif tail is not None:
            self._quotients.append(tail[(k - len(prefix)) % len(tail)])
        else:
            raise PrecisionExhausted(
                f"partial quotient a_{k + 1} is not determined by the given prefix"
            )

    def _extend_decimal(self) -> None:
        state = self._dec_state
        if state is None:
            raise PrecisionExhausted(
                f"decimal digits certify only {len(self._quotients)} partial quotients"
            )
        lo, hi = state
        # x in (lo, hi) subset (0, 1); 1/x in (1/hi, 1/lo)
        ilo, ihi = 1 / hi, 1 / lo
        a = ilo.numerator // ilo.denominator
        if not (a >= 1 and ihi <= a + 1):
            self._dec_state = None
            raise PrecisionExhausted(
                f"decimal digits certify only {len(self._quotients)} partial quotients"
            )
        self._quotients.append(a)
        new_lo, new_hi = ilo - a, ihi - a
        if new_lo <= 0 or new_hi >= 1:
            self._dec_state = None
        else:
            self._dec_state = (new_lo, new_hi)

    def _ensure_quotients(self, n: int) -> None:
        while len(self._quotients) < n:
            if self.spec.kind == "quadratic":
                self._extend_quadratic()
            elif self.spec.kind == "cf":
                self._extend_cf()
            else:
                self._extend_decimal()

    # -- public API

    def partial_quotients(self, n: int) -> tuple[int, ...]:
        """First n partial quotients a_1..a_n (a_0 = 0 is implicit)."""
        self._ensure_quotients(n)
        return tuple(self._quotients[:n])

    def continued_fraction(self, n: int) -> ContinuedFraction:
        return ContinuedFraction(self.partial_quotients(n))

    def denominator(self, k: int) -> int:
        """q_k of the k-th convergent (q_0 = 1)."""
        return self.continued_fraction(k).q[k]

    def denominators_upto(self, limit: int) -> list[int]:
        """All convergent denominators q_0 <= q_1 <= ... that are <= limit."""
        out = [1]
        k = 1
        while True:
            try:
                qk = self.denominator(k)
            except PrecisionExhausted:
                break
            if qk > limit:
                break
            out.append(qk)
            k += 1
        return out

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        """Rational lo < alpha < hi with hi - lo <= 2**-bits."""
        width = Fraction(1, 1 << bits)
        if self.spec.kind == "quadratic":
            A = self.fixed_point(bits)
            return Fraction(A, 1 << bits), Fraction(A + 1, 1 << bits)
        if self.spec.kind == "decimal":
            lo, hi = self._dec_lo, self._dec_hi
            if hi - lo > width:
                raise PrecisionExhausted(
                    f"decimal digits give width {float(hi - lo):.3g} > 2^-{bits}"
                )
            return lo, hi
        # cf kind: alpha lies strictly between the last convergent and the
        # mediant with the previous one, since the continuation exceeds 1
        n = max(2, len(self._quotients))
        while True:
            try:
                cf = self.continued_fraction(n)
            except PrecisionExhausted:
                cf = self.continued_fraction(len(self._quotients))
                a = Fraction(cf.p[-1], cf.q[-1])
                b = Fraction(cf.p[-1] + cf.p[-2], cf.q[-1] + cf.q[-2])
                lo, hi = min(a, b), max(a, b)
                if hi - lo <= width:
                    return lo, hi
                raise PrecisionExhausted(
                    f"cf prefix gives width {float(hi - lo):.3g} > 2^-{bits}"
                ) from None
            a = Fraction(cf.p[-1], cf.q[-1])
            b = Fraction(cf.p[-1] + cf.p[-2], cf.q[-1] + cf.q[-2])
            lo, hi = min(a, b), max(a, b)
            if hi - lo <= width:
                return lo, hi
            n += 1

    def fixed_point(self, bits: int) -> int:
        """floor(alpha * 2**bits), exact for quadratic, certified otherwise."""
        cached = self._fixed.get(bits)
        if cached is not None:
            return cached
        if self.spec.kind == "quadratic":
            p, q, d = self.spec.p, self.spec.q, self.spec.d
            shift = 1 << bits
            d2 = d * shift * shift
            A = _floor_quad(p * shift, q, d2, isqrt(d2))
        else:
            lo, hi = self.enclosure(bits + 8)
            shift = 1 << bits
            fl = (lo.numerator * shift) // lo.denominator
            fh = (hi.numerator * shift) // hi.denominator
            if fl != fh:
                raise PrecisionExhausted(
                    f"cannot certify floor(alpha * 2^{bits}) from the available digits"
                )
            A = fl
        self._fixed[bits] = A
        return A

    def to_float(self) -> float:
        lo, hi = self.enclosure(64)
        return float((lo + hi) / 2)

    def __repr__(self) -> str:
        s = self.spec
        if s.kind == "quadratic":
            return f"Alpha(({s.p} + sqrt({s.d}))/{s.q})"
        if s.kind == "cf":
            tail = f", tail={list(s.tail)}" if s.tail else ""
            return f"Alpha(cf prefix={list(s.prefix)}{tail})"
        return f"Alpha(0.{s.digits})"
