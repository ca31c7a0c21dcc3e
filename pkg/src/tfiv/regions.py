"""Rejection-region geometry for the composite t statistic.

The squared t-ratio at a point (t_ar, f) with correlation parameter rho is

    t^2 = t_ar^2 / (1 - 2 rho t_ar / f + t_ar^2 / f^2),

whose denominator times f^2 equals (f - rho t_ar)^2 + (1 - rho^2) t_ar^2 >= 0.
For fixed f, { t^2 > crit } is a quadratic condition in t_ar:

    h(t_ar) = t_ar^2 (1 - crit/f^2) + 2 crit rho t_ar / f - crit > 0,

so the region boundary at each f consists of (at most) the two roots of h.
This module computes those roots - including a cancellation-safe
rearrangement near the vertical asymptote f^2 = crit - and the perfectly
correlated specialization, where t_AR = f - f0 collapses t^2 onto the
quartic f^2 (f - f0)^2 / f0^2 and the boundary crossings have closed forms.

Orientation convention: roots are always returned ascending in t_ar.  Whether
the rejection set lies between or outside them follows from the sign of the
leading coefficient: between the roots when f^2 < crit, outside when
f^2 > crit.  Callers decide orientation from that sign; nothing here relies
on a printed ordering of integral limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateCase, DomainError

__all__ = [
    "RegionSpec",
    "boundary_roots",
    "quartic_t2_rho1",
    "rho1_rejection_roots",
]

# Relative half-width of the band around the asymptote f^2 = crit inside which
# the textbook root formula subtracts nearly equal quantities; there the
# nearly-cancelled root is rebuilt from its conjugate (rational) form.
_CANCEL_GUARD = 1e-6


@dataclass(frozen=True)
class RegionSpec:
    """Critical value and correlation fixing one rejection boundary."""

    crit: float
    rho: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.crit) and self.crit > 0.0):
            raise DomainError(f"crit must be positive and finite, got {self.crit!r}")
        if not (math.isfinite(self.rho) and abs(self.rho) <= 1.0):
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho!r}")


def boundary_roots(f: float, spec: RegionSpec) -> tuple[float, float]:
    """The two t_ar solutions of t^2(t_ar, f, rho) = crit, ascending.

    Raises DegenerateCase at the asymptote f^2 = crit (one root escapes to
    infinity) and DomainError when the discriminant is negative, i.e.
    f^2 < crit (1 - rho^2), where the boundary has no real points.
    """
    crit, rho = spec.crit, spec.rho
    if not math.isfinite(f):
        raise DomainError(f"f must be finite, got {f!r}")
    if f == 0.0:
        raise DomainError("boundary_roots: f = 0 (t^2 is identically 0 there)")
    f2 = f * f
    denom = f2 - crit
    if denom == 0.0:
        raise DegenerateCase(
            "boundary_roots: f^2 = crit is the vertical asymptote of the boundary"
        )
    # discriminant / (4) of h: crit * f^2 * (f^2 - crit (1 - rho^2))
    gap = f2 - crit * (1.0 - rho * rho)
    if gap < 0.0:
        raise DomainError(
            "boundary_roots: f^2 < crit (1 - rho^2); no real boundary at this f"
        )
    sq = math.sqrt(crit * f2 * gap)
    b = rho * crit * f
    r_plus = (-b + sq) / denom
    r_minus = (-b - sq) / denom
    if abs(denom) < _CANCEL_GUARD * crit:
        # Conjugate identity: (-b + sq)/denom = crit f^2 / (b + sq) and
        # (-b - sq)/denom = crit f^2 / (b - sq).  Only the branch whose
        # numerator cancels needs it; the other keeps full precision as is.
        if b > 0.0:
            r_plus = crit * f2 / (b + sq)
        elif b < 0.0:
            r_minus = crit * f2 / (b - sq)
        # b == 0 (rho = 0): both roots are +-sq/denom, no cancellation.
    return (r_plus, r_minus) if r_plus <= r_minus else (r_minus, r_plus)


def quartic_t2_rho1(f: float, f0: float) -> float:
    """t^2 along the degenerate |rho| = 1 line: f^2 (f - f0)^2 / f0^2.

    On that line t_AR = +-(f - f0) exactly, and substituting into the t^2
    composition collapses it to this quartic in f.
    """
    if f0 == 0.0:
        raise DegenerateCase(
            "quartic_t2_rho1: f0 = 0 makes t^2 infinite off the event {f = 0}"
        )
    z = f - f0
    return f * f * z * z / (f0 * f0)


def rho1_rejection_roots(f0: float, crit: float) -> list[float]:
    """Crossings of the |rho|=1 quartic with a flat cutoff, in t_ar = f - f0.

    The outer pair always exists; the inner pair appears exactly when
    f0 >= 4 sqrt(crit) (coinciding in a double root at equality), because only
    then does the interior hump of the quartic reach the cutoff.  Sorted
    ascending.  f0 = 0 is fully degenerate - t^2 is infinite off {f = 0} - and
    the returned double root [0, 0] encodes that measure-zero acceptance set.
    """
    if not (math.isfinite(crit) and crit > 0.0):
        raise DomainError(f"crit must be positive and finite, got {crit!r}")
    if not math.isfinite(f0) or f0 < 0.0:
        raise DomainError(f"f0 must be nonnegative, got {f0!r}")
    if f0 == 0.0:
        return [0.0, 0.0]
    s = math.sqrt(crit)
    outer = math.sqrt(f0 * f0 + 4.0 * f0 * s)
    roots = [(-f0 - outer) / 2.0, (-f0 + outer) / 2.0]
    inner_disc = f0 * f0 - 4.0 * f0 * s
    if inner_disc >= 0.0:
        inner = math.sqrt(inner_disc)
        roots.extend([(-f0 - inner) / 2.0, (-f0 + inner) / 2.0])
    return sorted(roots)
