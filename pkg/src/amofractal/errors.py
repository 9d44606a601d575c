"""Exception types shared across the toolkit.

Every certified routine either returns a result whose stated error bound is
honest, or raises one of these.  Nothing in the package silently degrades to
a best-effort float answer.
"""

from __future__ import annotations


class AmoFractalError(Exception):
    """Base class for all toolkit errors."""


class PrecisionExhausted(AmoFractalError):
    """A certified comparison could not be resolved at the available precision.

    Raised when the input description of an irrational (a truncated decimal,
    a finite partial-quotient list) carries too little information to decide
    a floor, an interval membership, or a continued-fraction digit.
    """


class ScanCapExceeded(AmoFractalError):
    """An exhaustive scan would exceed the configured work cap."""

    def __init__(self, message: str, *, needed: int | None = None, cap: int | None = None):
        super().__init__(message)
        self.needed = needed
        self.cap = cap


class InadmissibleScale(AmoFractalError):
    """No continued-fraction scale satisfies the selection constraints."""


class CardinalityViolation(AmoFractalError):
    """A constructed generation misses its guaranteed cardinality bounds."""


class DisjointnessViolation(AmoFractalError):
    """Protective balls that must be pairwise disjoint overlap."""


class MassInvariantViolation(AmoFractalError):
    """A mass distribution breaks conservation or a node mass bound."""


class LadderInstability(AmoFractalError):
    """A scaling-exponent ladder failed to stabilise at the requested depth."""


class DegenerateFit(AmoFractalError):
    """A regression has no usable signal (constant counts, collapsed scales)."""


class PlanError(AmoFractalError):
    """A construction plan is internally inconsistent or infeasible."""
