"""Certified scalar arithmetic helpers.

Rational numbers (`fractions.Fraction`) are the exact substrate everywhere in
the package; transcendental functions are evaluated through mpmath interval
arithmetic and immediately converted back to exact rational lower and upper
bounds.  All routines here return enclosures `(lo, hi)` with lo <= value <= hi
guaranteed, so callers can do one-sided comparisons without trusting rounding.
"""

from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction
from typing import Iterator, Tuple

from mpmath import iv, mpf

Enclosure = Tuple[Fraction, Fraction]

_DEFAULT_PREC = 96


@contextmanager
def _iv_prec(prec: int) -> Iterator[None]:
    old = iv.prec
    iv.prec = prec
    try:
        yield
    finally:
        iv.prec = old


def frac_from_mpf(x: mpf) -> Fraction:
    """Exact rational value of an mpmath float (mpf values are dyadic)."""
    return _frac_from_raw(x._mpf_)


def _frac_from_raw(raw) -> Fraction:
    sign, man, exp, _ = raw
    if man == 0:
        if exp == 0:
            return Fraction(0)
        raise ValueError(f"non-finite mpf payload {raw!r} has no rational value")
    val = Fraction(int(man)) * (Fraction(2) ** exp)
    return -val if sign else val


def _frac_to_iv(x: Fraction):
    # Integer payloads convert exactly; the single division rounds outward.
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def _enclosure_of(z) -> Enclosure:
    lo_raw, hi_raw = z._mpi_
    return _frac_from_raw(lo_raw), _frac_from_raw(hi_raw)


def exp_bounds(x: Fraction, prec: int = _DEFAULT_PREC) -> Enclosure:
    """Certified enclosure of exp(x)."""
    with _iv_prec(prec):
        return _enclosure_of(iv.exp(_frac_to_iv(x)))


def log_bounds(x: Fraction, prec: int = _DEFAULT_PREC) -> Enclosure:
    """Certified enclosure of log(x) for x > 0."""
    if x <= 0:
        raise ValueError(f"log requires a positive argument, got {x}")
    with _iv_prec(prec):
        return _enclosure_of(iv.log(_frac_to_iv(x)))


def neg_log_bounds(x: Fraction, prec: int = _DEFAULT_PREC) -> Enclosure:
    """Certified enclosure of -log(x) for x in (0, 1]."""
    lo, hi = log_bounds(x, prec)
    return -hi, -lo


def pow_bounds(x: Fraction, s: Fraction, prec: int = _DEFAULT_PREC) -> Enclosure:
    """Certified enclosure of x**s for x > 0 and rational s."""
    if x <= 0:
        raise ValueError(f"power base must be positive, got {x}")
    with _iv_prec(prec):
        z = iv.exp(_frac_to_iv(s) * iv.log(_frac_to_iv(x)))
        return _enclosure_of(z)


def exp_neg_fixed(x: Fraction, bits: int, prec: int | None = None) -> tuple[int, int]:
    """Integer enclosure (lo, hi) of exp(-x) * 2**bits for x >= 0.

    Useful for threshold ladders in scan loops: lo <= exp(-x)*2**bits <= hi.
    """
    if x < 0:
        raise ValueError("exp_neg_fixed expects x >= 0")
    if prec is None:
        prec = bits + 32
    lo, hi = exp_bounds(-x, prec)
    scale = 1 << bits
    lo_i = (lo.numerator * scale) // lo.denominator
    hi_i = -((-hi.numerator * scale) // hi.denominator)
    return lo_i, hi_i


def dyadic_floor(x: Fraction, bits: int) -> Fraction:
    """Largest multiple of 2**-bits that is <= x."""
    scale = 1 << bits
    return Fraction((x.numerator * scale) // x.denominator, scale)


def dyadic_ceil(x: Fraction, bits: int) -> Fraction:
    """Smallest multiple of 2**-bits that is >= x."""
    scale = 1 << bits
    return Fraction(-((-x.numerator * scale) // x.denominator), scale)


def frac_repr(x: Fraction, digits: int = 12) -> str:
    """Compact decimal rendering of a Fraction for reports and logs."""
    return f"{float(x):.{digits}g}"
