"""Real numbers stored as a sign and the logarithm of the magnitude."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._kernels import CANCEL_RTOL

__all__ = ["SignedLog", "PrecisionWarning", "signed_logsumexp"]


class PrecisionWarning(UserWarning):
    """A signed sum cancelled to below ``CANCEL_RTOL`` of its largest term."""


@dataclass(frozen=True, order=False)
class SignedLog:
    sign: int
    logmag: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign}")
        if self.sign == 0:
            object.__setattr__(self, "logmag", -math.inf)
        elif math.isnan(self.logmag) or self.logmag == -math.inf:
            raise ValueError("nonzero SignedLog needs a finite log-magnitude")

    ZERO: "SignedLog" = None  # filled in below
    ONE: "SignedLog" = None

    @classmethod
    def from_float(cls, x):
        x = float(x)
        if x == 0.0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def to_float(self):
        """May overflow to +-inf or underflow to 0."""
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.logmag)
        except OverflowError:
            return self.sign * math.inf

    __float__ = to_float

    def is_zero(self):
        return self.sign == 0

    def __neg__(self):
        return SignedLog(-self.sign, self.logmag)

    def __abs__(self):
        return SignedLog(abs(self.sign), self.logmag)

    def __mul__(self, other):
        other = _coerce(other)
        s = self.sign * other.sign
        return SignedLog(s, self.logmag + other.logmag if s else -math.inf)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero SignedLog")
        s = self.sign * other.sign
        return SignedLog(s, self.logmag - other.logmag if s else -math.inf)

    def __add__(self, other):
        return signed_logsumexp([self.sign, _coerce(other).sign], [self.logmag, _coerce(other).logmag])

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def isclose(self, other, rtol=1e-9):
        """Same sign and log-magnitudes within ``rtol`` (relative to ``max(1, |log|)``)."""
        other = _coerce(other)
        if self.sign != other.sign:
            return False
        if self.sign == 0:
            return True
        return abs(self.logmag - other.logmag) <= rtol * max(1.0, abs(self.logmag))

    def __repr__(self):
        return f"SignedLog({self.sign:+d}, {self.logmag!r})"


def _coerce(x):
    return x if isinstance(x, SignedLog) else SignedLog.from_float(x)


SignedLog.ZERO = SignedLog(0, -math.inf)
SignedLog.ONE = SignedLog(1, 0.0)


def signed_logsumexp(signs, logs, warn=True):
    """Sum of ``signs[i] * exp(logs[i])`` as a :class:`SignedLog`.

    Emits :class:`PrecisionWarning` when the result is smaller than
    ``CANCEL_RTOL`` times the largest term (but still returns it).
    """
    signs = np.asarray(signs, dtype=float)
    logs = np.asarray(logs, dtype=float)
    mask = signs != 0
    if not mask.any():
        return SignedLog.ZERO
    signs, logs = signs[mask], logs[mask]
    top = logs.max()
    total = math.fsum((signs * np.exp(logs - top)).tolist())
    if total == 0.0 or abs(total) < CANCEL_RTOL:
        if warn:
            warnings.warn(
                f"signed sum cancelled to {abs(total):.3g} of its largest term",
                PrecisionWarning,
                stacklevel=2,
            )
        if total == 0.0:
            return SignedLog.ZERO
    return SignedLog(1 if total > 0 else -1, top + math.log(abs(total)))
