"""Log-magnitude arithmetic for quantities that overflow or underflow doubles.

A nonzero complex number c is stored as (log|c|, c/|c|).  Products add the
logs and multiply the unit phases; sums factor out the largest magnitude
before exponentiating, so cancellation is explicit rather than silent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class LogScaled:
    """A complex number written as unit * exp(log).  unit == 0 encodes zero."""

    log: float
    unit: complex

    @staticmethod
    def from_number(c) -> "LogScaled":
        c = complex(c)
        r = abs(c)
        if r == 0.0:
            return LogScaled(_NEG_INF, 0.0)
        return LogScaled(math.log(r), c / r)

    @staticmethod
    def from_parts(log: float, c) -> "LogScaled":
        """unit * exp(log) where c carries the phase (and a finite magnitude)."""
        c = complex(c)
        r = abs(c)
        if r == 0.0:
            return LogScaled(_NEG_INF, 0.0)
        return LogScaled(log + math.log(r), c / r)

    @property
    def is_zero(self) -> bool:
        return self.unit == 0.0

    def value(self) -> complex:
        if self.is_zero:
            return 0.0
        return self.unit * math.exp(self.log)

    def __mul__(self, other: "LogScaled") -> "LogScaled":
        if self.is_zero or other.is_zero:
            return LogScaled(_NEG_INF, 0.0)
        return LogScaled(self.log + other.log, self.unit * other.unit)

    def __truediv__(self, other: "LogScaled") -> "LogScaled":
        if other.is_zero:
            raise ZeroDivisionError("LogScaled division by zero")
        if self.is_zero:
            return self
        return LogScaled(self.log - other.log, self.unit / other.unit)

    def __neg__(self) -> "LogScaled":
        return LogScaled(self.log, -self.unit)

    def scale(self, factor: float) -> "LogScaled":
        """Multiply by exp(factor)."""
        if self.is_zero:
            return self
        return LogScaled(self.log + factor, self.unit)

    def real_sign(self, imag_tol: float = 1e-8):
        """(sign, log|.|) for a value expected to be real up to rounding."""
        if self.is_zero:
            return 0.0, _NEG_INF
        if abs(self.unit.imag) > imag_tol:
            raise ValueError(f"value not real: unit={self.unit}")
        return math.copysign(1.0, self.unit.real), self.log


def logsum(terms) -> LogScaled:
    """Sum of LogScaled terms, largest magnitude factored out.

    Uses math.fsum on the rescaled real and imaginary parts so that the
    relative cancellation level is limited only by the doubles themselves.
    """
    terms = [t for t in terms if not t.is_zero]
    if not terms:
        return LogScaled(_NEG_INF, 0.0)
    m = max(t.log for t in terms)
    re = math.fsum(t.unit.real * math.exp(t.log - m) for t in terms)
    im = math.fsum(t.unit.imag * math.exp(t.log - m) for t in terms)
    return LogScaled.from_parts(m, complex(re, im))


def cancellation_level(terms, total: LogScaled) -> float:
    """log10 of (largest term magnitude / result magnitude); 0 when benign."""
    logs = [t.log for t in terms if not t.is_zero]
    if not logs or total.is_zero:
        return float("inf")
    return max(0.0, (max(logs) - total.log) / math.log(10.0))


def log_cosh(x: float) -> float:
    """log(cosh x) without overflow."""
    ax = abs(x)
    return ax + math.log1p(math.exp(-2.0 * ax)) - math.log(2.0)


def logsumexp_signed(logs, signs):
    """(sign, log|sum|) of sum_i signs_i * exp(logs_i) for real data."""
    logs = np.asarray(logs, dtype=float)
    signs = np.asarray(signs, dtype=float)
    if logs.size == 0:
        return 0.0, _NEG_INF
    m = float(np.max(logs))
    if m == _NEG_INF:
        return 0.0, _NEG_INF
    s = math.fsum(signs * np.exp(logs - m))
    if s == 0.0:
        return 0.0, _NEG_INF
    return math.copysign(1.0, s), m + math.log(abs(s))
