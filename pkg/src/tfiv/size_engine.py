"""Rejection probabilities for t-ratio procedures at a nuisance point.

With one endogenous regressor and one instrument, size is governed by the
pair (t_ar, f), bivariate normal with mean (0, f0), unit variances, and
correlation rho under the null.  Each procedure rejects on a region of the
(t_ar, f) plane:

    conventional t   : t^2 > crit, where
                       t^2 = t_ar^2 f^2 / ((f - rho t_ar)^2 + (1-rho^2) t_ar^2)
    threshold t + F  : conventional rejection and F > f_threshold (F = f^2)
    hybrid t / AR    : threshold rejection, plus t_ar^2 > crit when
                       F <= f_threshold
    pure AR          : t_ar^2 > crit
    curve-based t(F) : t^2 > c(F) for a nonincreasing critical-value curve

For |rho| < 1, conditioning on f makes t_ar normal with mean rho (f - f0)
and sd s = sqrt(1 - rho^2), and the conditional rejection set is an interval
or an interval complement with endpoints from `regions.boundary_roots`.  The
probability is then a 1-D integral over f of smooth CDF differences:

    p = Int phi(f - f0) * P(reject | f) df,    truncated to |f - f0| <= 8.5
        (discarded tail mass < 2e-17).

`rejection_prob` evaluates that integral with adaptive Gauss-Kronrod
quadrature split at the geometry's breakpoints (+-sqrt(crit) asymptotes,
+-s sqrt(crit) root-birth points, +-sqrt(f_threshold), and the curve
procedure's support/crossing points); `rejection_prob_profile` and
`rejection_prob_matrix` evaluate many nuisance points at once on fixed
Gauss-Legendre panels graded towards the same breakpoints, which is what
makes dense nuisance grids affordable.

At |rho| = 1 the conditional law degenerates to the point t_ar = +-(f - f0)
and everything collapses to exact univariate normal computations (the
rejection probability is the same for rho = +1 and rho = -1).  Those closed
forms live in `rejection_prob_rho1` and friends and double as oracles for
the quadrature path; `rejection_prob` routes |rho| > 1 - 1e-6 to them
because the conditional sd underflows there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import ndtr

from .errors import DomainError, ToleranceUnmet
from .regions import RegionSpec, boundary_roots

if TYPE_CHECKING:  # pragma: no cover
    from .tf_critical import CriticalValueFunction

__all__ = [
    "NuisancePoint",
    "ConventionalT",
    "ThresholdTF",
    "HybridAR",
    "PureAR",
    "TFProcedure",
    "Procedure",
    "SizeResult",
    "rejection_prob",
    "rejection_prob_rho1",
    "hybrid_extra_term",
    "rejection_prob_profile",
    "rejection_prob_matrix",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# Half-width of the f-integration window around f0; 2 Phi(-8.5) < 2e-17.
_F_WINDOW = 8.5
# rejection_prob hands |rho| beyond this to the exact degenerate formulas.
_RHO1_EDGE = 1.0 - 1e-6
# The panel engine switches to the degenerate formulas a little earlier:
# Gauss-Legendre panels stop resolving conditional features once s ~ 0.01.
_PROFILE_RHO1_EDGE = 1.0 - 5e-5
# Geometric ladder of panel-edge offsets laid down on both sides of every
# breakpoint; root positions behave like sqrt(distance) at a root-birth
# point, so panels must shrink towards the kink.
_GRADED_OFFSETS = (1e-4, 4e-4, 1.6e-3, 6.4e-3, 2.56e-2)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
_F0_CHUNK = 64


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class NuisancePoint:
    """Nuisance parameter (rho, f0); f0 >= 0 without loss of generality.

    (rho, -f0) gives the same size as (-rho, f0), so negative noncentrality
    is answered by flipping the sign of rho instead.
    """

    rho: float
    f0: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rho) and math.isfinite(self.f0)):
            raise DomainError("NuisancePoint: rho and f0 must be finite")
        if abs(self.rho) > 1.0:
            raise DomainError(f"NuisancePoint: |rho| <= 1 required, got {self.rho!r}")
        if self.f0 < 0.0:
            raise DomainError(f"NuisancePoint: f0 >= 0 required, got {self.f0!r}")

    @property
    def ef(self) -> float:
        """Mean of F = f^2 (noncentral chi-square with 1 df): 1 + f0^2."""
        return 1.0 + self.f0 * self.f0


def _require_positive(name: str, value: float) -> None:
    if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be a positive finite real, got {value!r}")


@dataclass(frozen=True)
class ConventionalT:
    """Reject when t^2 > crit, regardless of the first stage."""

    crit: float

    def __post_init__(self) -> None:
        _require_positive("ConventionalT.crit", self.crit)


@dataclass(frozen=True)
class ThresholdTF:
    """Reject when t^2 > crit and additionally F > f_threshold."""

    crit: float
    f_threshold: float

    def __post_init__(self) -> None:
        _require_positive("ThresholdTF.crit", self.crit)
        _require_positive("ThresholdTF.f_threshold", self.f_threshold)


@dataclass(frozen=True)
class HybridAR:
    """Threshold rule above f_threshold, AR rule (t_ar^2 > crit) below it."""

    crit: float
    f_threshold: float

    def __post_init__(self) -> None:
        _require_positive("HybridAR.crit", self.crit)
        _require_positive("HybridAR.f_threshold", self.f_threshold)


@dataclass(frozen=True)
class PureAR:
    """Reject when t_ar^2 > crit; exact size 2 Phi(-sqrt(crit)) everywhere."""

    crit: float

    def __post_init__(self) -> None:
        _require_positive("PureAR.crit", self.crit)


@dataclass(frozen=True)
class TFProcedure:
    """Reject when t^2 > c(F) for a fitted critical-value curve.

    ``cvf`` is duck-typed: it must expose ``lower_support`` (an F value below
    which the test never rejects), ``f_tilde`` (the F value beyond which the
    curve sits at its floor), ``knots`` (sorted (sqrt_F, sqrt_crit) pairs),
    and ``sqrt_crit_profile(x)`` mapping an ndarray of sqrt-F values to
    sqrt-critical values (+inf below the support).
    """

    cvf: "CriticalValueFunction"

    def __post_init__(self) -> None:
        for attr in ("lower_support", "f_tilde", "knots", "sqrt_crit_profile"):
            if not hasattr(self.cvf, attr):
                raise DomainError(f"TFProcedure.cvf lacks required attribute {attr!r}")
        if not self.cvf.knots:
            raise DomainError("TFProcedure.cvf has no knots")


Procedure = Union[ConventionalT, ThresholdTF, HybridAR, PureAR, TFProcedure]


@dataclass(frozen=True)
class SizeResult:
    prob: float
    abs_err: float
    point: NuisancePoint

    def __post_init__(self) -> None:
        if not 0.0 <= self.prob <= 1.0:
            raise DomainError(f"SizeResult.prob must be a probability, got {self.prob!r}")
        if not self.abs_err >= 0.0:
            raise DomainError(f"SizeResult.abs_err must be >= 0, got {self.abs_err!r}")


# ---------------------------------------------------------------------------
# degenerate |rho| = 1 closed forms
#
# At rho = +-1, write f = f0 + z with z standard normal; then t_ar = +-z and
# t^2 = z^2 (f0 + z)^2 / f0^2, so every event is a union of z-intervals with
# endpoints that solve quadratics.  |z (z + f0)| > f0 sqrt(crit) has an outer
# root pair (always real) and an inner pair that exists iff f0 >= 4 sqrt(crit);
# at f0 = 0 the outer pair collapses to [0, 0], which reproduces the correct
# degenerate limits (t is infinite wherever t_ar != 0).


def _rho1_threshold_profile(crit: float, f_threshold: float, f0s: np.ndarray) -> np.ndarray:
    """P(t^2 > crit, F > f_threshold) at |rho| = 1; f_threshold = 0 drops the F gate."""
    sc = math.sqrt(crit)
    sf = math.sqrt(f_threshold) if f_threshold > 0.0 else 0.0
    f0s = np.asarray(f0s, dtype=float)
    outer = np.sqrt(f0s * f0s + 4.0 * f0s * sc)
    ra_hi = 0.5 * (-f0s + outer)
    ra_lo = 0.5 * (-f0s - outer)
    upper_cut = sf - f0s
    lower_cut = -sf - f0s
    p = 1.0 - ndtr(np.maximum(ra_hi, upper_cut)) + ndtr(np.minimum(ra_lo, lower_cut))
    disc = f0s * f0s - 4.0 * f0s * sc
    inner = np.sqrt(np.maximum(disc, 0.0))
    rb_hi = 0.5 * (-f0s + inner)
    rb_lo = 0.5 * (-f0s - inner)
    mid = np.where(
        (disc >= 0.0) & (upper_cut < rb_hi),
        ndtr(rb_hi) - ndtr(np.maximum(rb_lo, upper_cut)),
        0.0,
    )
    return np.clip(p + mid, 0.0, 1.0)


def _rho1_hybrid_profile(crit: float, f_threshold: float, f0s: np.ndarray) -> np.ndarray:
    f0s = np.asarray(f0s, dtype=float)
    base = _rho1_threshold_profile(crit, f_threshold, f0s)
    sc = math.sqrt(crit)
    sf = math.sqrt(f_threshold)
    upper_cut = sf - f0s
    lower_cut = -sf - f0s
    # AR rejections inside the sub-threshold band L < z < U.
    upper = np.maximum(0.0, ndtr(upper_cut) - ndtr(np.maximum(sc, lower_cut)))
    lower = np.maximum(0.0, ndtr(np.minimum(-sc, upper_cut)) - ndtr(lower_cut))
    return np.clip(base + upper + lower, 0.0, 1.0)


def _cvf_arrays(cvf) -> tuple[np.ndarray, np.ndarray, float]:
    xs = np.asarray([k[0] for k in cvf.knots], dtype=float)
    gs = np.asarray([k[1] for k in cvf.knots], dtype=float)
    return xs, gs, math.sqrt(cvf.lower_support)


def _rho1_cvf_prob(cvf, f0: float) -> float:
    """|rho| = 1 size of the curve-based test, by locating every f-crossing.

    In f-space the test rejects iff |f| >= sqrt(lower_support) and
    |f| |f - f0| > f0 g(|f|) with g the sqrt-critical curve.  On f <= -sq and
    on f >= max(sq, f0) the margin is strictly increasing (g is
    nonincreasing), giving one crossing each; on sq < f < f0 the margin is
    negative at both ends and can poke above zero in between, contributing
    a bounded "hump" interval scanned on the knot grid.
    """
    xs, gs, sq = _cvf_arrays(cvf)

    def g(x: float) -> float:
        return float(np.interp(x, xs, gs))

    # Lower tail f <= -sq: margin w(a) = a (a + f0) - f0 g(a) in a = -f.
    def w_low(a: float) -> float:
        return a * (a + f0) - f0 * g(a)

    if w_low(sq) >= 0.0:
        a_star = sq
    else:
        vals = xs * (xs + f0) - f0 * gs
        pos = np.nonzero(vals >= 0.0)[0]
        if pos.size:
            j = int(pos[0])
            a_star = brentq(w_low, xs[j - 1] if j else sq, xs[j], xtol=1e-12)
        else:
            # Beyond the last knot the curve is flat at gs[-1].
            gl = gs[-1]
            a_star = 0.5 * (-f0 + math.sqrt(f0 * f0 + 4.0 * f0 * gl))

    # Upper tail f >= max(sq, f0): margin w(x) = x (x - f0) - f0 g(x).
    def w_up(x: float) -> float:
        return x * (x - f0) - f0 * g(x)

    lo = max(sq, f0)
    if w_up(lo) >= 0.0:
        u_star = lo
    else:
        u_star = brentq(w_up, lo, f0 + 9.0, xtol=1e-12)

    p = ndtr(-a_star - f0) + 1.0 - ndtr(u_star - f0)

    # Interior band sq < f < f0 (nonempty only when f0 > sq).
    if f0 > sq + 1e-12:
        grid = np.unique(
            np.concatenate([xs[(xs > sq) & (xs < f0)], np.linspace(sq, f0, 257)])
        )
        vals = grid * (f0 - grid) - f0 * np.interp(grid, xs, gs)

        def w_mid(x: float) -> float:
            return x * (f0 - x) - f0 * g(x)

        inside = vals > 0.0
        flips = np.nonzero(inside[:-1] != inside[1:])[0]
        edges = [brentq(w_mid, grid[i], grid[i + 1], xtol=1e-12) for i in flips]
        # The margin is < 0 at both grid ends, so crossings pair up.
        for x1, x2 in zip(edges[0::2], edges[1::2]):
            p += ndtr(x2 - f0) - ndtr(x1 - f0)
    return float(min(max(p, 0.0), 1.0))


def _rho1_point_prob(proc: Procedure, f0: float) -> float:
    if isinstance(proc, ConventionalT):
        return float(_rho1_threshold_profile(proc.crit, 0.0, np.array([f0]))[0])
    if isinstance(proc, ThresholdTF):
        return float(_rho1_threshold_profile(proc.crit, proc.f_threshold, np.array([f0]))[0])
    if isinstance(proc, HybridAR):
        return float(_rho1_hybrid_profile(proc.crit, proc.f_threshold, np.array([f0]))[0])
    if isinstance(proc, PureAR):
        return 2.0 * float(ndtr(-math.sqrt(proc.crit)))
    if isinstance(proc, TFProcedure):
        return _rho1_cvf_prob(proc.cvf, f0)
    raise DomainError(f"unknown procedure {proc!r}")


def rejection_prob_rho1(proc: Procedure, f0: float) -> float:
    """Exact rejection probability at |rho| = 1 (same value for both signs)."""
    if not isinstance(f0, (int, float)) or not math.isfinite(f0) or f0 < 0.0:
        raise DomainError(f"rejection_prob_rho1: f0 must be finite and >= 0, got {f0!r}")
    return _rho1_point_prob(proc, float(f0))


def hybrid_extra_term(f_threshold: float, crit: float, f0: float) -> float:
    """Mass the hybrid rule adds below the F threshold at |rho| = 1.

    Equals Phi(-sqrt(crit)) - Phi(-sqrt(f_threshold) - f0), floored at zero;
    the subtracted term vanishes as f_threshold grows, leaving Phi(-sqrt(crit)).
    """
    _require_positive("hybrid_extra_term: crit", crit)
    if not math.isfinite(f_threshold) or f_threshold < crit / 2.0:
        raise DomainError(
            f"hybrid_extra_term requires f_threshold >= crit/2, got {f_threshold!r}"
        )
    if not math.isfinite(f0) or f0 < 0.0:
        raise DomainError(f"hybrid_extra_term: f0 must be >= 0, got {f0!r}")
    term = ndtr(-math.sqrt(crit)) - ndtr(-math.sqrt(f_threshold) - f0)
    return float(max(0.0, term))


# ---------------------------------------------------------------------------
# |rho| < 1: conditional rejection set for the t-statistic family
#
# Given f, the conventional region {t^2 > c} in t_ar is bounded by the roots
# of h(t_ar) = t_ar^2 (1 - c/f^2) + 2 c rho t_ar / f - c: between the roots
# when f^2 < c, outside them when f^2 > c, empty when f^2 < c (1 - rho^2).


def _t_conditional_prob(f: float, spec: RegionSpec, s: float, mu: float) -> float:
    crit, rho = spec.crit, spec.rho
    if f == 0.0:
        return 0.0
    denom = f * f - crit
    if denom == 0.0:
        # h degenerates to a line; rejection is a half-line in t_ar.
        if rho == 0.0:
            return 0.0
        z = (f / (2.0 * rho) - mu) / s
        return 1.0 - ndtr(z) if rho / f > 0.0 else float(ndtr(z))
    if f * f - crit * (1.0 - rho * rho) <= 0.0:
        return 0.0
    lo, hi = boundary_roots(f, spec)
    band = float(ndtr((hi - mu) / s) - ndtr((lo - mu) / s))
    return band if denom < 0.0 else 1.0 - band


def _ar_conditional_prob(crit: float, s: float, mu: float) -> float:
    sc = math.sqrt(crit)
    return 1.0 - float(ndtr((sc - mu) / s) - ndtr((-sc - mu) / s))


def _make_integrand(proc: Procedure, rho: float, f0: float):
    s = math.sqrt((1.0 - rho) * (1.0 + rho))

    if isinstance(proc, PureAR):
        crit = proc.crit

        def integrand(f: float) -> float:
            z = f - f0
            return _INV_SQRT_2PI * math.exp(-0.5 * z * z) * _ar_conditional_prob(
                crit, s, rho * z
            )

        return integrand

    if isinstance(proc, TFProcedure):
        cvf = proc.cvf
        profile = cvf.sqrt_crit_profile

        def integrand(f: float) -> float:
            z = f - f0
            dens = _INV_SQRT_2PI * math.exp(-0.5 * z * z)
            if dens == 0.0:
                return 0.0
            sq_c = float(np.asarray(profile(np.array([abs(f)])))[0])
            if not math.isfinite(sq_c):
                return 0.0
            spec = RegionSpec(crit=sq_c * sq_c, rho=rho)
            return dens * _t_conditional_prob(f, spec, s, rho * z)

        return integrand

    crit = proc.crit
    spec = RegionSpec(crit=crit, rho=rho)

    if isinstance(proc, ConventionalT):
        gate = None
    elif isinstance(proc, (ThresholdTF, HybridAR)):
        gate = proc.f_threshold
    else:  # pragma: no cover
        raise DomainError(f"unknown procedure {proc!r}")
    hybrid = isinstance(proc, HybridAR)

    def integrand(f: float) -> float:
        z = f - f0
        dens = _INV_SQRT_2PI * math.exp(-0.5 * z * z)
        if dens == 0.0:
            return 0.0
        mu = rho * z
        if gate is not None and f * f <= gate:
            cond = _ar_conditional_prob(crit, s, mu) if hybrid else 0.0
        else:
            cond = _t_conditional_prob(f, spec, s, mu)
        return dens * cond

    return integrand


def _scalar_sqrt_crit(cvf, x: float) -> float:
    return float(np.asarray(cvf.sqrt_crit_profile(np.array([x])))[0])


def _cvf_crossing(cvf, scale: float) -> float:
    """Positive x in [sqrt support, sqrt f_tilde] solving x = scale * g(x).

    g is nonincreasing, so x - scale g(x) is strictly increasing and the
    crossing is unique; if the margin is already >= 0 at the support edge the
    crossing is clamped there.
    """
    sq = math.sqrt(cvf.lower_support)
    # Beyond scale * (largest knot value) the margin is surely positive, so an
    # infinite f_tilde (a curve that never pins) still yields a finite bracket.
    hi = min(math.sqrt(cvf.f_tilde), scale * cvf.knots[0][1] + 1.0)

    def margin(x: float) -> float:
        return x - scale * _scalar_sqrt_crit(cvf, x)

    if margin(sq) >= 0.0:
        return sq
    if margin(hi) <= 0.0:
        return hi
    return float(brentq(margin, sq, hi, xtol=1e-12))


def _breakpoints(proc: Procedure, rho: float) -> list[float]:
    s = math.sqrt((1.0 - rho) * (1.0 + rho))
    pts: list[float] = []
    if isinstance(proc, (ConventionalT, ThresholdTF, HybridAR)):
        sc = math.sqrt(proc.crit)
        pts.extend([sc, s * sc])
        if isinstance(proc, (ThresholdTF, HybridAR)):
            pts.append(math.sqrt(proc.f_threshold))
    elif isinstance(proc, TFProcedure):
        cvf = proc.cvf
        pts.extend([math.sqrt(cvf.lower_support), math.sqrt(cvf.f_tilde)])
        pts.append(_cvf_crossing(cvf, 1.0))  # asymptote: f^2 = c(f^2)
        pts.append(_cvf_crossing(cvf, s))  # root birth: f = s sqrt(c)
    return sorted({p for x in pts for p in (-x, x) if x > 0.0 and math.isfinite(x)})


def rejection_prob(proc: Procedure, p: NuisancePoint, tol: float = 1e-6) -> SizeResult:
    """Rejection probability at p, certified to absolute accuracy tol.

    Adaptive quadrature over f with the conditional t_ar mass in closed form;
    |rho| > 1 - 1e-6 is answered by the exact degenerate formulas instead.
    Raises ToleranceUnmet when the error estimate cannot be brought under tol.
    """
    if not isinstance(p, NuisancePoint):
        raise DomainError("rejection_prob expects a NuisancePoint")
    if not (isinstance(tol, (int, float)) and 1e-12 < tol <= 1e-3):
        raise DomainError(f"tol must lie in (1e-12, 1e-3], got {tol!r}")

    if abs(p.rho) > _RHO1_EDGE:
        return SizeResult(prob=_rho1_point_prob(proc, p.f0), abs_err=1e-13, point=p)

    lo, hi = p.f0 - _F_WINDOW, p.f0 + _F_WINDOW
    pts = [b for b in _breakpoints(proc, p.rho) if lo + 1e-9 < b < hi - 1e-9]
    integrand = _make_integrand(proc, p.rho, p.f0)
    value, err = quad(
        integrand,
        lo,
        hi,
        points=pts or None,
        epsabs=0.5 * tol,
        epsrel=1e-12,
        limit=500,
        full_output=1,
    )[:2]
    abs_err = float(err) + 2e-17
    if not math.isfinite(value) or abs_err > tol:
        raise ToleranceUnmet(
            f"quadrature error {abs_err:.3e} exceeds tol {tol:.3e} at {p}"
        )
    return SizeResult(prob=float(min(max(value, 0.0), 1.0)), abs_err=abs_err, point=p)


# ---------------------------------------------------------------------------
# vectorised profiles: many f0 at once on Gauss-Legendre panels


def _segment_edges(a: float, b: float, h: float) -> np.ndarray:
    length = b - a
    offs = [d for d in _GRADED_OFFSETS if d < 0.45 * length]
    left = [a + d for d in offs]
    right = [b - d for d in reversed(offs)]
    core_a = left[-1] if left else a
    core_b = right[0] if right else b
    n = max(1, int(math.ceil((core_b - core_a) / h)))
    core = np.linspace(core_a, core_b, n + 1)
    return np.unique(np.concatenate([[a], left, core, right, [b]]))


def _panel_nodes(
    breaks: list[float], lo: float, hi: float, h: float
) -> tuple[np.ndarray, np.ndarray]:
    cuts = [lo] + [b for b in sorted(set(breaks)) if lo < b < hi] + [hi]
    edges = np.unique(np.concatenate([_segment_edges(a, b, h) for a, b in zip(cuts, cuts[1:])]))
    mids = 0.5 * (edges[:-1] + edges[1:])
    halfs = 0.5 * np.diff(edges)
    nodes = (mids[:, None] + halfs[:, None] * _GL_X[None, :]).ravel()
    weights = (halfs[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def _t_region_tables(
    f: np.ndarray, c: np.ndarray, rho: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-node conditional rejection set for {t^2 > c}: base + sign * band.

    Returns (base, sign, lo, hi) so that the conditional probability is
    base + sign * (Phi((hi-mu)/s) - Phi((lo-mu)/s)); sign 0 encodes "never".
    """
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        finite = np.isfinite(c) & (f != 0.0)
        c_safe = np.where(finite, c, 1.0)
        f2 = f * f
        denom = f2 - c_safe
        gap = f2 - c_safe * (1.0 - rho * rho)
        exists = finite & (gap > 0.0) & (denom != 0.0)
        disc = np.sqrt(np.where(exists, c_safe * f2 * gap, 0.0))
        b = rho * c_safe * f
        denom_safe = np.where(denom == 0.0, np.finfo(float).tiny, denom)
        near = np.abs(denom) < 1e-3 * np.maximum(c_safe, 1.0)
        plus_conj = near & (b > 0.0)
        minus_conj = near & (b < 0.0)
        r_plus = np.where(
            plus_conj,
            c_safe * f2 / np.where(plus_conj, b + disc, 1.0),
            (-b + disc) / denom_safe,
        )
        r_minus = np.where(
            minus_conj,
            c_safe * f2 / np.where(minus_conj, b - disc, 1.0),
            (-b - disc) / denom_safe,
        )
        lo = np.minimum(r_plus, r_minus)
        hi = np.maximum(r_plus, r_minus)
    between = exists & (denom < 0.0)
    outside = exists & (denom > 0.0)
    base = np.where(outside, 1.0, 0.0)
    sign = np.where(outside, -1.0, np.where(between, 1.0, 0.0))
    keep = sign != 0.0
    lo = np.where(keep, lo, 0.0)
    hi = np.where(keep, hi, 0.0)
    return base, sign, lo, hi


def _node_regions(
    proc: Procedure, f: np.ndarray, rho: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    n = f.size
    if isinstance(proc, PureAR):
        sc = math.sqrt(proc.crit)
        return (
            np.ones(n),
            np.full(n, -1.0),
            np.full(n, -sc),
            np.full(n, sc),
        )
    if isinstance(proc, TFProcedure):
        sq_c = np.asarray(proc.cvf.sqrt_crit_profile(np.abs(f)), dtype=float)
        with np.errstate(over="ignore"):
            return _t_region_tables(f, sq_c * sq_c, rho)
    base, sign, lo, hi = _t_region_tables(f, np.full(n, proc.crit), rho)
    if isinstance(proc, (ThresholdTF, HybridAR)):
        below = f * f <= proc.f_threshold
        if isinstance(proc, HybridAR):
            sc = math.sqrt(proc.crit)
            base = np.where(below, 1.0, base)
            sign = np.where(below, -1.0, sign)
            lo = np.where(below, -sc, lo)
            hi = np.where(below, sc, hi)
        else:
            base = np.where(below, 0.0, base)
            sign = np.where(below, 0.0, sign)
            lo = np.where(below, 0.0, lo)
            hi = np.where(below, 0.0, hi)
    return base, sign, lo, hi


def _rho1_profile(proc: Procedure, f0s: np.ndarray) -> np.ndarray:
    if isinstance(proc, ConventionalT):
        return _rho1_threshold_profile(proc.crit, 0.0, f0s)
    if isinstance(proc, ThresholdTF):
        return _rho1_threshold_profile(proc.crit, proc.f_threshold, f0s)
    if isinstance(proc, HybridAR):
        return _rho1_hybrid_profile(proc.crit, proc.f_threshold, f0s)
    if isinstance(proc, PureAR):
        return np.full(f0s.shape, 2.0 * float(ndtr(-math.sqrt(proc.crit))))
    if isinstance(proc, TFProcedure):
        return np.array([_rho1_cvf_prob(proc.cvf, float(v)) for v in f0s])
    raise DomainError(f"unknown procedure {proc!r}")


def rejection_prob_profile(proc: Procedure, rho: float, f0s) -> np.ndarray:
    """Rejection probabilities at one rho across an array of f0 values.

    Fixed Gauss-Legendre panels shared by every f0 in the sweep; accuracy is
    a few parts in 1e6 for |rho| <= 1 - 5e-5, beyond which the degenerate
    closed forms take over.
    """
    f0s = np.atleast_1d(np.asarray(f0s, dtype=float))
    if f0s.size == 0:
        return np.empty(0)
    if not math.isfinite(rho) or abs(rho) > 1.0:
        raise DomainError(f"rho must lie in [-1, 1], got {rho!r}")
    if not np.all(np.isfinite(f0s)) or np.any(f0s < 0.0):
        raise DomainError("f0 values must be finite and >= 0")

    if abs(rho) > _PROFILE_RHO1_EDGE:
        return _rho1_profile(proc, f0s)

    s = math.sqrt((1.0 - rho) * (1.0 + rho))
    h = min(0.3, 2.4 * max(s, 0.01))
    lo = float(f0s.min()) - _F_WINDOW
    hi = float(f0s.max()) + _F_WINDOW
    nodes, weights = _panel_nodes(_breakpoints(proc, rho), lo, hi, h)
    base, sign, rlo, rhi = _node_regions(proc, nodes, rho)

    out = np.empty(f0s.shape)
    for start in range(0, f0s.size, _F0_CHUNK):
        f0c = f0s[start : start + _F0_CHUNK]
        d = nodes[None, :] - f0c[:, None]
        dens = _INV_SQRT_2PI * np.exp(-0.5 * d * d)
        mu = rho * d
        band = ndtr((rhi[None, :] - mu) / s) - ndtr((rlo[None, :] - mu) / s)
        cond = base[None, :] + sign[None, :] * band
        out[start : start + _F0_CHUNK] = (dens * cond) @ weights
    return np.clip(out, 0.0, 1.0)


def rejection_prob_matrix(proc: Procedure, rhos, f0s) -> np.ndarray:
    """len(rhos) x len(f0s) grid of rejection probabilities."""
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    return np.vstack([rejection_prob_profile(proc, float(r), f0s) for r in rhos])
