"""Statistic definitions and the exact identity linking t to (t_AR, f, rho).

Everything downstream consumes four numbers derived from an estimated IV
regression summary: the conventional t-ratio on the structural coefficient,
the AR-style t-ratio

    t_ar = pi_hat (beta_iv_hat - beta_null)
           / sqrt(var_rf - 2 beta_null cov_rf_fs + beta_null^2 var_pi),

the first-stage t-ratio f = pi_hat / sqrt(var_pi) (so F = f^2), and the
correlation implied by the covariance entries under the null,

    rho_hat = (cov_rf_fs - beta_null var_pi)
              / sqrt((var_rf - 2 beta_null cov_rf_fs + beta_null^2 var_pi)
                     * var_pi).

For these definitions the relation

    t^2 = t_ar^2 / (1 - 2 rho_hat t_ar / f + t_ar^2 / f^2)

is exact algebra (not an approximation) whenever the supplied var_beta is the
delta-method variance (var_rf - 2 b cov + b^2 var_pi) / pi_hat^2 evaluated at
b = beta_iv_hat - as it is for any summary computed from one dataset's
moments.  ``t_squared_identity`` exposes the right-hand side so both routes
can be compared on data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateCase, DomainError

__all__ = [
    "IVSummary",
    "CoreStats",
    "core_stats_from_summary",
    "t_squared_identity",
]

# Tolerated overshoot of |implied correlation| past 1 before the covariance
# matrix is declared invalid rather than merely rounded.
_RHO_CLAMP = 1e-12


@dataclass(frozen=True)
class IVSummary:
    """IV point estimate plus first-stage/reduced-form variance entries.

    ``var_rf`` is the variance of the reduced-form slope (the product
    pi_hat * beta_iv_hat's regression coefficient), ``cov_rf_fs`` its
    covariance with the first-stage slope, and ``beta_null`` the hypothesized
    structural coefficient the statistics are evaluated at.
    """

    beta_iv_hat: float
    var_beta: float
    pi_hat: float
    var_pi: float
    var_rf: float
    cov_rf_fs: float
    beta_null: float = 0.0

    def __post_init__(self) -> None:
        for name in (
            "beta_iv_hat",
            "var_beta",
            "pi_hat",
            "var_pi",
            "var_rf",
            "cov_rf_fs",
            "beta_null",
        ):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise DomainError(f"IVSummary.{name} must be finite, got {v!r}")
        if self.var_beta <= 0.0 or self.var_pi <= 0.0 or self.var_rf <= 0.0:
            raise DegenerateCase("IVSummary variances must be strictly positive")
        if abs(self.cov_rf_fs) > math.sqrt(self.var_rf * self.var_pi) * (1.0 + 1e-9):
            raise DomainError(
                "IVSummary: |cov_rf_fs| exceeds sqrt(var_rf var_pi); "
                "not a valid covariance matrix"
            )


@dataclass(frozen=True)
class CoreStats:
    """The (t, t_ar, f, rho_hat) quadruple, with F = f^2 carried explicitly."""

    t: float
    t_ar: float
    f: float
    rho_hat: float
    F: float

    def __post_init__(self) -> None:
        if abs(self.rho_hat) > 1.0:
            raise DomainError(f"rho_hat must lie in [-1, 1], got {self.rho_hat!r}")
        if self.F != self.f * self.f:
            raise DomainError("CoreStats requires F = f^2 exactly")


def _ar_variance(s: IVSummary) -> float:
    b0 = s.beta_null
    return s.var_rf - 2.0 * b0 * s.cov_rf_fs + b0 * b0 * s.var_pi


def core_stats_from_summary(s: IVSummary) -> CoreStats:
    """Derive t, t_ar, f, rho_hat (and F) from the summary at its null."""
    if s.pi_hat == 0.0:
        raise DegenerateCase("core_stats_from_summary: pi_hat = 0")
    var_ar = _ar_variance(s)
    if var_ar <= 0.0:
        # The 2x2 covariance matrix is positive semidefinite, so this contrast
        # variance can only hit zero on a degenerate ray; at or below zero the
        # AR statistic is undefined.
        raise DegenerateCase(
            f"AR variance var_rf - 2 b0 cov + b0^2 var_pi = {var_ar:.6g} <= 0"
        )
    diff = s.beta_iv_hat - s.beta_null
    t = diff / math.sqrt(s.var_beta)
    t_ar = s.pi_hat * diff / math.sqrt(var_ar)
    f = s.pi_hat / math.sqrt(s.var_pi)
    rho = (s.cov_rf_fs - s.beta_null * s.var_pi) / math.sqrt(var_ar * s.var_pi)
    if abs(rho) > 1.0:
        if abs(rho) > 1.0 + _RHO_CLAMP:
            raise DomainError(
                f"implied rho_hat = {rho!r} leaves [-1, 1] by more than {_RHO_CLAMP}"
            )
        rho = math.copysign(1.0, rho)
    return CoreStats(t=t, t_ar=t_ar, f=f, rho_hat=rho, F=f * f)


def t_squared_identity(t_ar: float, f: float, rho_hat: float) -> float:
    """t^2 = t_ar^2 / (1 - 2 rho_hat t_ar/f + t_ar^2/f^2), exactly.

    The denominator is evaluated in the cancellation-free form
    ((f - rho t_ar)^2 + (1 - rho^2) t_ar^2) / f^2, which is nonnegative by
    construction; if it vanishes, t is infinite at this point and a
    DegenerateCase is raised rather than returning an overflowing value -
    callers treat infinite-t regions geometrically, not via overflow.
    """
    if not math.isfinite(t_ar) or not math.isfinite(f) or not math.isfinite(rho_hat):
        raise DomainError("t_squared_identity: arguments must be finite")
    if abs(rho_hat) > 1.0:
        raise DomainError(f"rho_hat must lie in [-1, 1], got {rho_hat!r}")
    if f == 0.0:
        raise DomainError("t_squared_identity: f = 0")
    num = (f - rho_hat * t_ar) ** 2 + (1.0 - rho_hat * rho_hat) * t_ar * t_ar
    if num == 0.0:
        raise DegenerateCase(
            "t_squared_identity: denominator vanishes (the t-ratio is infinite)"
        )
    return t_ar * t_ar * f * f / num
