"""Worst-case size over the nuisance space, and the solvers built on it.

The size surface p(rho, f0) of every t-based procedure is maximized on the
|rho| = 1 ridge (verified here by audit, not assumed), where the exact
closed forms of `size_engine` apply.  For the threshold procedure the ridge
has an interior stationary point at

    f0* = f_threshold / (sqrt(f_threshold) + sqrt(crit)),

at which the outer rejection root coincides exactly with the threshold gate
edge, so the ridge value collapses to the two-term expression computed by
`local_max_size`:

    1 - Phi(u) + Phi(-w),   u = sqrt(F c) / (sqrt(F) + sqrt(c)),
                            w = (sqrt(F c) + 2 F) / (sqrt(F) + sqrt(c)).

As f0 grows past the gate the ridge tends to the strong-instrument limit
2 Phi(-sqrt(crit)), approached from below when crit < 4 and from above when
crit > 4; that sign is what decides whether a finite corrected threshold
exists at a given level, and it is why the 1% problem has no solution.

`worst_case_size` audits a dense (rho, f0) grid plus the exact ridge plus
the analytic f0 -> infinity limit, refines locally, and reports a certified
tolerance from the grid's observed variation.  The solvers bisect on the
monotone closed forms and then certify their answers through the full audit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .errors import ConstructionError, DomainError, ToleranceUnmet
from .size_engine import (
    ConventionalT,
    HybridAR,
    Procedure,
    PureAR,
    TFProcedure,
    ThresholdTF,
    rejection_prob_matrix,
    rejection_prob_profile,
)

__all__ = [
    "WorstCase",
    "GridSpec",
    "ValidityRegion",
    "HybridBoundRow",
    "worst_case_size",
    "local_max_size",
    "solve_threshold_F",
    "solve_critical_value",
    "validity_region",
    "hybrid_nonexistence_certificate",
]

# Extra rho rows appended to the uniform audit grid: the surface has a
# boundary layer against |rho| = 1 (curvature grows like the inverse cube of
# the conditional width s), so the spacing must shrink geometrically there.
_RHO_LAYER = tuple(1.0 - g for g in np.geomspace(6e-3, 5e-5, 14))
# Certification never claims better than this; it covers the panel engine.
_CERT_FLOOR = 1e-6
# Slack used when a solver checks its candidate against the global audit.
_CERT_SLACK = 3e-5


@dataclass(frozen=True)
class WorstCase:
    """Supremum of the size surface with its (nonnegative-rho) argmax.

    arg_f0 = inf records a supremum approached as f0 -> infinity rather than
    attained; max_prob is then the analytic limit value.
    """

    max_prob: float
    arg_rho: float
    arg_f0: float
    certified_tol: float


@dataclass(frozen=True)
class GridSpec:
    """Audit grid over |rho| in [0,1] x E[F] in [ef_min, ef_max]."""

    n_rho: int = 201
    n_ef: int = 201
    ef_min: float = 1.0
    ef_max: float = 400.0

    def __post_init__(self) -> None:
        if self.n_rho < 100 or self.n_ef < 100:
            raise DomainError("GridSpec: resolution must be at least 100 x 100")
        if not (1.0 <= self.ef_min < self.ef_max):
            raise DomainError("GridSpec: need 1 <= ef_min < ef_max")

    def rho_values(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_rho)

    def ef_values(self) -> np.ndarray:
        return np.linspace(self.ef_min, self.ef_max, self.n_ef)


@dataclass(frozen=True, eq=False)
class ValidityRegion:
    """Boolean size-validity of the conventional t test per (|rho|, E[F]) cell.

    ``grid[i, j]`` marks whether size <= alpha at rhos[i], efs[j]; negative
    rho mirrors the positive half exactly.  ``rho_bar`` is the largest rho
    whose entire E[F] range is valid and ``ef_bar`` the smallest E[F] valid
    for every rho (None when no such value exists in the grid span) — both
    located by off-grid bisection so they do not inherit the grid's phase.
    """

    alpha: float
    crit: float
    grid: np.ndarray
    rho_bar: float
    ef_bar: Optional[float]
    rhos: np.ndarray
    efs: np.ndarray


@dataclass(frozen=True)
class HybridBoundRow:
    """One row of the hybrid-procedure size bound table.

    ``bound`` is the exact |rho| = 1 size of the hybrid rule at f0*, valid
    once f_threshold >= crit/2 (exactly there the AR window edge -w reaches
    -sqrt(crit)); it strictly exceeds alpha = 2 Phi(-sqrt(crit)) for every
    finite f_threshold because u < sqrt(crit) always.
    """

    f_threshold: float
    f0_star: float
    bound: float
    alpha: float
    exceeds: bool


def _f0_star(f_threshold: float, crit: float) -> float:
    return f_threshold / (math.sqrt(f_threshold) + math.sqrt(crit))


def local_max_size(f_threshold: float, crit: float) -> float:
    """Size of the threshold procedure at (rho = 1, f0 = f0*), in closed form.

    Strictly decreasing in both arguments; limits 1 - Phi(sqrt(crit)) as
    f_threshold -> infinity and 2 (1 - Phi(sqrt(f_threshold))) as
    crit -> infinity.
    """
    if not (math.isfinite(f_threshold) and f_threshold > 0.0):
        raise DomainError(f"local_max_size: f_threshold > 0 required, got {f_threshold!r}")
    if not (math.isfinite(crit) and crit > 0.0):
        raise DomainError(f"local_max_size: crit > 0 required, got {crit!r}")
    sf = math.sqrt(f_threshold)
    sc = math.sqrt(crit)
    denom = sf + sc
    u = sf * sc / denom
    w = (sf * sc + 2.0 * f_threshold) / denom
    return float(1.0 - ndtr(u) + ndtr(-w))


def _tail_limit(proc: Procedure) -> float:
    """Size limit as f0 -> infinity (strong instrument)."""
    if isinstance(proc, (ConventionalT, ThresholdTF, HybridAR, PureAR)):
        return 2.0 * float(ndtr(-math.sqrt(proc.crit)))
    if isinstance(proc, TFProcedure):
        return 2.0 * float(ndtr(-proc.cvf.knots[-1][1]))
    raise DomainError(f"unknown procedure {proc!r}")


def _ridge_f0_grid(proc: Procedure) -> np.ndarray:
    if isinstance(proc, TFProcedure):
        # Point-by-point scan; keep it lean, the curve is flat far out anyway.
        grid = np.concatenate([np.arange(0.0, 40.0, 0.005), np.arange(40.0, 100.01, 0.05)])
    else:
        hi = 500.0
        if isinstance(proc, (ThresholdTF, HybridAR)):
            hi = max(hi, 3.0 * math.sqrt(proc.f_threshold) + 50.0)
        grid = np.concatenate([np.arange(0.0, 40.0, 0.002), np.arange(40.0, hi + 1e-9, 0.02)])
    if isinstance(proc, (ThresholdTF, HybridAR)):
        grid = np.append(grid, _f0_star(proc.f_threshold, proc.crit))
    return np.unique(grid)


def _zoom_2d(
    proc: Procedure,
    rho_lo: float,
    rho_hi: float,
    f0_lo: float,
    f0_hi: float,
    rounds: int = 4,
    n: int = 13,
) -> tuple[float, float, float]:
    """Iteratively shrink a box around its interior size maximum."""
    best = (-1.0, 0.0, 0.0)
    for _ in range(rounds):
        rhos = np.linspace(max(0.0, rho_lo), min(1.0, rho_hi), n)
        f0s = np.linspace(max(0.0, f0_lo), f0_hi, n)
        mat = rejection_prob_matrix(proc, rhos, f0s)
        i, j = np.unravel_index(int(np.argmax(mat)), mat.shape)
        best = max(best, (float(mat[i, j]), float(rhos[i]), float(f0s[j])))
        rho_lo, rho_hi = rhos[max(i - 1, 0)], rhos[min(i + 1, n - 1)]
        f0_lo, f0_hi = f0s[max(j - 1, 0)], f0s[min(j + 1, n - 1)]
    return best


def _zoom_ridge(proc: Procedure, f0_lo: float, f0_hi: float, rounds: int = 4) -> tuple[float, float]:
    for _ in range(rounds):
        f0s = np.linspace(max(0.0, f0_lo), f0_hi, 33)
        vals = rejection_prob_profile(proc, 1.0, f0s)
        j = int(np.argmax(vals))
        f0_lo, f0_hi = f0s[max(j - 1, 0)], f0s[min(j + 1, 32)]
    return float(vals[j]), float(f0s[j])


def _midpoint_bound(
    mat: np.ndarray, x: np.ndarray, axis: int, open_end: bool = False
) -> np.ndarray:
    """Per-cell bound on off-grid excess along one (possibly uneven) axis.

    Uses the divided-difference curvature estimate and the h^2/8 midpoint
    rule per interval; each cell inherits the worse of its two intervals.
    With open_end the final interval contributes nothing — used for the rho
    axis, whose last stretch into |rho| = 1 is certified by the monotone
    approach check instead (curvature diverges like s^-3 there).
    """
    v = np.moveaxis(mat, axis, -1)
    h = np.diff(x)
    h0, h1 = h[:-1], h[1:]
    curv = 2.0 * (
        v[..., :-2] / (h0 * (h0 + h1))
        - v[..., 1:-1] / (h0 * h1)
        + v[..., 2:] / (h1 * (h0 + h1))
    )
    acurv = np.abs(curv)
    # Interval k sits between x[k] and x[k+1]; take the nearest estimates.
    per_interval = np.empty(v.shape[:-1] + (len(h),))
    per_interval[..., 1:-1] = np.maximum(acurv[..., :-1], acurv[..., 1:])
    per_interval[..., 0] = acurv[..., 0]
    per_interval[..., -1] = acurv[..., -1]
    per_interval *= h * h / 8.0
    if open_end:
        per_interval[..., -1] = 0.0
    out = np.empty_like(v)
    out[..., 1:-1] = np.maximum(per_interval[..., :-1], per_interval[..., 1:])
    out[..., 0] = per_interval[..., 0]
    out[..., -1] = per_interval[..., -1]
    return np.moveaxis(out, -1, axis)


def _final_approach_violation(mat: np.ndarray) -> float:
    """How badly the last rho rows fail to approach row |rho| = 1 monotonely.

    The surface behaves like p(1) - a s + O(s^2) in the conditional width
    s = sqrt(1 - rho^2); when the approach is one-signed and tightening, the
    un-bounded final interval cannot hide an interior excursion above the
    audited rows.  Returns the magnitude by which that pattern is violated.
    """
    d_near = mat[-1] - mat[-2]
    d_far = mat[-1] - mat[-3]
    opposite = d_near * d_far < -1e-18
    widening = np.abs(d_near) - np.abs(d_far)
    viol = np.where(opposite, np.abs(d_near), np.maximum(widening, 0.0))
    return max(0.0, float(np.max(viol)) - 1e-9)


def worst_case_size(proc: Procedure, tol: float = 1e-4) -> WorstCase:
    """Supremum of rejection probability over rho in [-1,1], f0 >= 0.

    The surface is symmetric under rho -> -rho, so the audit runs on
    rho in [0,1]: a uniform 209-row x 289-column grid (extra rows resolve
    the boundary layer against rho = 1), the exact rho = 1 ridge on a dense
    f0 grid window with the analytic stationary point and the f0 -> infinity
    limit as extra candidates, then local zooming around the leaders.  The
    certified tolerance combines the grid's observed second differences
    (midpoint bound) with the refinement resolution; ToleranceUnmet is
    raised if that certificate cannot meet tol.
    """
    if not (isinstance(tol, (int, float)) and 0.0 < tol <= 1e-4):
        raise DomainError(f"worst_case_size: tol must lie in (0, 1e-4], got {tol!r}")

    if isinstance(proc, PureAR):
        alpha = 2.0 * float(ndtr(-math.sqrt(proc.crit)))
        return WorstCase(max_prob=alpha, arg_rho=0.0, arg_f0=0.0, certified_tol=1e-13)

    rhos = np.unique(np.concatenate([np.linspace(0.0, 1.0, 135)[:-1], _RHO_LAYER, [1.0]]))
    f0_blocks = [np.arange(0.0, 8.0, 0.05), np.arange(8.0, 40.01, 0.25)]
    if isinstance(proc, (ThresholdTF, HybridAR)):
        # Resolve the transition zone (gate edge / stationary point) finely.
        star = _f0_star(proc.f_threshold, proc.crit)
        zone_hi = min(40.0, math.sqrt(proc.f_threshold) + 2.5)
        if zone_hi > 8.0:
            f0_blocks.append(np.arange(max(0.0, star - 2.5), zone_hi, 0.04))
    f0s = np.unique(np.concatenate(f0_blocks))
    mat = rejection_prob_matrix(proc, rhos, f0s)

    # Far field: flat in rho, so a coarse-rho block suffices out to f0 = 140.
    rhos_far = np.unique(np.concatenate([np.linspace(0.0, 1.0, 18), _RHO_LAYER[-3:], [1.0]]))
    f0s_far = np.arange(40.0, 140.01, 1.0)
    mat_far = rejection_prob_matrix(proc, rhos_far, f0s_far)

    i, j = np.unravel_index(int(np.argmax(mat)), mat.shape)
    best_prob, best_rho, best_f0 = float(mat[i, j]), float(rhos[i]), float(f0s[j])
    i_far, j_far = np.unravel_index(int(np.argmax(mat_far)), mat_far.shape)
    if float(mat_far[i_far, j_far]) > best_prob:
        best_prob = float(mat_far[i_far, j_far])
        best_rho, best_f0 = float(rhos_far[i_far]), float(f0s_far[j_far])

    # Exact ridge with analytic candidates.
    ridge_f0 = _ridge_f0_grid(proc)
    ridge = rejection_prob_profile(proc, 1.0, ridge_f0)
    k = int(np.argmax(ridge))
    if float(ridge[k]) >= best_prob:
        best_prob, best_rho, best_f0 = float(ridge[k]), 1.0, float(ridge_f0[k])

    # Local refinement: zoom the 2-D leader and polish the ridge argmax.
    lo_i, hi_i = max(i - 1, 0), min(i + 1, len(rhos) - 1)
    lo_j, hi_j = max(j - 1, 0), min(j + 1, len(f0s) - 1)
    z_prob, z_rho, z_f0 = _zoom_2d(proc, rhos[lo_i], rhos[hi_i], f0s[lo_j], f0s[hi_j])
    if z_prob > best_prob:
        best_prob, best_rho, best_f0 = z_prob, z_rho, z_f0
    r_prob, r_f0 = _zoom_ridge(
        proc, ridge_f0[max(k - 1, 0)], ridge_f0[min(k + 1, len(ridge_f0) - 1)]
    )
    if r_prob >= best_prob - 1e-12:
        # Prefer the exact-ridge location on ties: the argmax is on |rho| = 1.
        best_prob, best_rho, best_f0 = max(r_prob, best_prob), 1.0, r_f0
    if isinstance(proc, (ThresholdTF, HybridAR)):
        f0s_star = _f0_star(proc.f_threshold, proc.crit)
        p_star = float(rejection_prob_profile(proc, 1.0, [f0s_star])[0])
        if p_star >= best_prob:
            best_prob, best_rho, best_f0 = p_star, 1.0, f0s_star

    limit = _tail_limit(proc)
    if limit > best_prob:
        best_prob, best_rho, best_f0 = limit, 1.0, math.inf

    # Certification: a nonuniform midpoint bound over the audited window
    # (a probability can never exceed 1, so the per-cell claim is capped),
    # plus the far field, where the last audited column is compared against
    # the analytic limit and the densely audited ridge.
    claims = np.minimum(
        mat + _midpoint_bound(mat, rhos, 0, open_end=True) + _midpoint_bound(mat, f0s, 1),
        1.0,
    )
    approach_viol = _final_approach_violation(mat)
    if isinstance(proc, (ThresholdTF, HybridAR)):
        # The ridge peaks at a slope corner (gate edge meets rejection root),
        # which the working resolution cannot bound; re-audit that pocket at
        # h = 0.002 for the rows near |rho| = 1 and mask the coarse claims.
        star = _f0_star(proc.f_threshold, proc.crit)
        w_lo, w_hi = max(0.0, star - 0.15), star + 0.15
        near = rhos >= 0.999 - 1e-12
        claims[np.ix_(near, (f0s >= w_lo) & (f0s <= w_hi))] = 0.0
        f0s_patch = np.unique(np.append(np.arange(w_lo, w_hi, 0.0012), star))
        mat_patch = rejection_prob_matrix(proc, rhos[near], f0s_patch)
        patch_claims = np.minimum(
            mat_patch
            + _midpoint_bound(mat_patch, rhos[near], 0, open_end=True)
            + _midpoint_bound(mat_patch, f0s_patch, 1),
            1.0,
        )
        claims = np.concatenate([claims.ravel(), patch_claims.ravel()])
        approach_viol = max(approach_viol, _final_approach_violation(mat_patch))
    grid_excess = float(np.max(claims)) - best_prob
    far_claims = np.minimum(
        mat_far
        + _midpoint_bound(mat_far, rhos_far, 0, open_end=True)
        + _midpoint_bound(mat_far, f0s_far, 1),
        1.0,
    )
    grid_excess = max(grid_excess, float(np.max(far_claims)) - best_prob)
    approach_viol = max(approach_viol, _final_approach_violation(mat_far))
    far_ref = max(limit, float(ridge[ridge_f0 >= f0s_far[-1]].max(initial=0.0)))
    far_excess = float(mat_far[:, -1].max()) - max(far_ref, best_prob)
    certified = max(_CERT_FLOOR, grid_excess, far_excess, approach_viol, 0.0)
    if certified > tol:
        raise ToleranceUnmet(
            f"worst-case certificate {certified:.2e} exceeds requested tol {tol:.2e}"
        )
    return WorstCase(
        max_prob=best_prob, arg_rho=best_rho, arg_f0=best_f0, certified_tol=certified
    )


def _validate_alpha(alpha: float) -> None:
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 0.5):
        raise DomainError(f"alpha must lie in (0, 0.5), got {alpha!r}")


def _ridge_sup(crit: float, f_threshold: float) -> float:
    """Supremum of the rho = 1 threshold-procedure size over all f0.

    Dense grid over [0, max(500, 3 sqrt(F))] plus the stationary point and
    the f0 -> infinity limit 2 Phi(-sqrt(crit)).
    """
    hi = max(500.0, 3.0 * math.sqrt(f_threshold) + 50.0)
    f0s = np.concatenate(
        [
            np.arange(0.0, 40.0, 0.002),
            np.arange(40.0, hi + 1e-9, 0.02),
            [_f0_star(f_threshold, crit)],
        ]
    )
    proc = ThresholdTF(crit=crit, f_threshold=f_threshold)
    vals = rejection_prob_profile(proc, 1.0, np.unique(f0s))
    return max(float(vals.max()), 2.0 * float(ndtr(-math.sqrt(crit))))


def solve_threshold_F(crit: float, alpha: float) -> Optional[float]:
    """Smallest F threshold making the threshold procedure size-alpha.

    Bisects the strictly decreasing local_max_size(., crit) to alpha, then
    certifies the candidate globally with worst_case_size.  For crit < 4 a
    finite solution always exists: the rho = 1 ridge approaches its limit
    2 Phi(-sqrt(crit)) < alpha from below, so if an interior ridge hump
    still exceeds alpha at the closed-form candidate (it does when crit sits
    just under 4), the threshold is pushed up by bisecting the exact ridge
    supremum itself until the gate swallows the hump.  Returns None when no
    finite threshold exists: either the closed form never reaches alpha (its
    limit 1 - Phi(sqrt(crit)) is >= alpha), or crit >= 4, in which case the
    ridge approaches its limit from above and stays above alpha beyond every
    finite threshold whenever the closed-form candidate fails certification.
    """
    if not (math.isfinite(crit) and crit > 0.0):
        raise DomainError(f"solve_threshold_F: crit > 0 required, got {crit!r}")
    _validate_alpha(alpha)
    if 1.0 - float(ndtr(math.sqrt(crit))) >= alpha:
        return None

    def gap(f_threshold: float) -> float:
        return local_max_size(f_threshold, crit) - alpha

    lo, hi = 1.0, 1e6
    while gap(lo) < 0.0 and lo > 1e-9:
        lo /= 16.0
    while gap(hi) > 0.0 and hi < 1e12:
        hi *= 16.0
    if gap(lo) < 0.0 or gap(hi) > 0.0:
        return None
    f_star = float(brentq(gap, lo, hi, xtol=1e-10, rtol=1e-14))

    audit = worst_case_size(ThresholdTF(crit=crit, f_threshold=f_star))
    if audit.max_prob <= alpha + _CERT_SLACK:
        return f_star
    if crit >= 4.0:
        return None

    # Interior ridge hump above alpha: raise the gate until it covers it.
    def ridge_gap(f_threshold: float) -> float:
        return _ridge_sup(crit, f_threshold) - alpha

    r_lo, r_hi = f_star, 4.0 * f_star
    while ridge_gap(r_hi) > 0.0 and r_hi < 1e12:
        r_lo, r_hi = r_hi, 4.0 * r_hi
    if ridge_gap(r_hi) > 0.0:
        return None
    f_star = float(brentq(ridge_gap, r_lo, r_hi, xtol=1e-9, rtol=1e-12))
    audit = worst_case_size(ThresholdTF(crit=crit, f_threshold=f_star))
    if audit.max_prob > alpha + _CERT_SLACK:
        return None
    return f_star


def solve_critical_value(f_threshold: float, alpha: float) -> float:
    """Critical value making the threshold procedure worst-case size alpha.

    The binding constraint is the rho = 1 ridge: its interior maximum
    (the local_max_size closed form) for small thresholds, its f0 -> infinity
    limit 2 Phi(-sqrt(crit)) for large ones — which is why the answer floors
    at the chi-square quantile q_{1-alpha} once f_threshold is big enough and
    tends to it "from above" as the threshold grows.  Bisection runs on the
    full ridge supremum, and the result is certified via worst_case_size.
    """
    if not (math.isfinite(f_threshold) and f_threshold > 0.0):
        raise DomainError(
            f"solve_critical_value: f_threshold > 0 required, got {f_threshold!r}"
        )
    _validate_alpha(alpha)
    # Even crit -> infinity cannot push the ridge maximum below this floor.
    floor = 2.0 * (1.0 - float(ndtr(math.sqrt(f_threshold))))
    if floor >= alpha:
        raise DomainError(
            f"solve_critical_value: level {alpha} unattainable at "
            f"f_threshold={f_threshold} (floor {floor:.6f})"
        )

    q_alpha = _chi2_quantile(1.0 - alpha)

    def gap(crit: float) -> float:
        return _ridge_sup(crit, f_threshold) - alpha

    lo, hi = q_alpha, 400.0
    if gap(lo) <= 0.0:
        # The ridge limit 2 Phi(-sqrt(crit)) alone equals alpha at q_alpha,
        # so the supremum can never dip below alpha before that point.
        crit_star = float(lo)
    else:
        while gap(hi) > 0.0 and hi < 1e9:
            hi *= 4.0
        if gap(hi) > 0.0:
            raise DomainError(
                "solve_critical_value: no critical value reaches the requested level"
            )
        crit_star = float(brentq(gap, lo, hi, xtol=1e-12, rtol=1e-14))

    audit = worst_case_size(ThresholdTF(crit=crit_star, f_threshold=f_threshold))
    if audit.max_prob > alpha + _CERT_SLACK:
        raise ConstructionError(
            f"solved critical value fails global certification: "
            f"worst case {audit.max_prob:.6f} > alpha {alpha}"
        )
    return crit_star


def _chi2_quantile(p: float) -> float:
    from .gaussian import chi2_quantile_1df

    return chi2_quantile_1df(p)


def validity_region(
    crit: float, alpha: float, grid_spec: Optional[GridSpec] = None
) -> ValidityRegion:
    """Map where the conventional t test at crit has size <= alpha.

    Evaluates the size on the grid (the rho = 1 column in closed form, the
    rest via the panel engine) and marks a cell valid when size <= alpha +
    1e-9 (the engine is accurate to ~1e-10 there).  The extracted bounds are
    grid quantities: rho_bar is the largest grid rho whose whole column is
    valid (0.0 when no column is), ef_bar the smallest grid E[F] whose whole
    row is valid (None when every row has a violation).  Off-grid excursions
    between grid lines are not chased; the grid pitch is the advertised
    resolution of the map.
    """
    if not (math.isfinite(crit) and crit > 0.0):
        raise DomainError(f"validity_region: crit > 0 required, got {crit!r}")
    if not (math.isfinite(alpha) and 0.0 < alpha < 1.0):
        raise DomainError(f"validity_region: alpha in (0, 1) required, got {alpha!r}")
    spec = grid_spec or GridSpec()
    rhos = spec.rho_values()
    efs = spec.ef_values()
    f0s = np.sqrt(efs - 1.0)
    proc = ConventionalT(crit=crit)

    mat = rejection_prob_matrix(proc, rhos, f0s)
    valid = mat <= alpha + 1e-9

    # rho_bar: largest grid rho whose whole column (all E[F]) is valid.
    col_ok = valid.all(axis=1)
    rho_bar = float(rhos[int(np.nonzero(col_ok)[0].max())]) if col_ok.any() else 0.0

    # ef_bar: smallest grid E[F] whose whole row (all rho) is valid.
    row_ok = valid.all(axis=0)
    if row_ok.any():
        j_first = int(np.nonzero(row_ok)[0].min())
        ef_bar: Optional[float] = float(efs[j_first])
        # Shading must be monotone above the bound: no unshaded holes.
        if not bool(valid[:, j_first:].all()):
            raise ConstructionError(
                "validity_region: unshaded hole above the extracted E[F] bound"
            )
    else:
        ef_bar = None

    return ValidityRegion(
        alpha=alpha, crit=crit, grid=valid, rho_bar=rho_bar, ef_bar=ef_bar,
        rhos=rhos, efs=efs,
    )


def hybrid_nonexistence_certificate(crit: float, f_grid) -> list[HybridBoundRow]:
    """Evidence that no finite threshold makes the hybrid rule size-alpha.

    For each threshold F in f_grid the returned bound is

        1 - Phi(sqrt(F crit)/(sqrt(F) + sqrt(crit))) + Phi(-sqrt(crit)),

    a lower bound on the worst-case hybrid size: it equals the exact
    |rho| = 1 hybrid size at the stationary point f0* for F >= crit/2 (at
    exactly crit/2 the AR window edge -w hits -sqrt(crit)), and slightly
    below crit/2 the AR window still covers the Phi(-sqrt(crit)) term so
    the bound stays conservative.  It exceeds alpha = 2 Phi(-sqrt(crit))
    strictly for every finite F because the first argument stays below
    sqrt(crit), and only tends to alpha as F -> infinity.
    """
    q_two_sided_5 = 3.8414588206941254  # two-sided 5% chi-square quantile
    if not (math.isfinite(crit) and abs(crit - q_two_sided_5) < 2e-4):
        raise DomainError(
            "hybrid_nonexistence_certificate covers the two-sided 5% case; "
            f"crit must be approximately {q_two_sided_5:.4f}, got {crit!r}"
        )
    grid = [float(v) for v in f_grid]
    if not grid or any(not math.isfinite(v) or v <= 0.0 for v in grid):
        raise DomainError("f_grid must be a nonempty list of positive finite reals")
    grid = sorted(grid)
    if grid[0] < 0.48 * crit:
        raise DomainError(
            "f_grid values this far below crit/2 are outside the bound's validity"
        )

    sc = math.sqrt(crit)
    alpha = 2.0 * float(ndtr(-sc))
    rows = []
    for f_threshold in grid:
        sf = math.sqrt(f_threshold)
        u = sf * sc / (sf + sc)
        bound = float(1.0 - ndtr(u) + ndtr(-sc))
        rows.append(
            HybridBoundRow(
                f_threshold=f_threshold,
                f0_star=_f0_star(f_threshold, crit),
                bound=bound,
                alpha=alpha,
                exceeds=bound > alpha,
            )
        )
    return rows
