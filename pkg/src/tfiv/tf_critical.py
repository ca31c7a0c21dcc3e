"""Observed-F-adaptive critical value curves, tables, and adjusted errors.

At the degenerate corner |rho| = 1 the joint law of (t_ar, f) collapses to a
single standard normal draw zeta = f - f0, the F statistic is f^2, and the
t-statistic satisfies |t| = |zeta| |f| / f0.  A nonincreasing curve g over
x = sqrt(F) of critical values for |t| is chosen so that the rejection event
{ |t| > g(|f|), F >= q } has probability alpha at every ridge position f0
where that is achievable.  That corner is the binding one over the whole
nuisance space, so the resulting F-dependent test is level-alpha everywhere
while spending much less than the worst-case constant critical value once
the observed F is strong.

Representation: knots (x_i, g_i) on a 0.005 pitch in x = sqrt(F).  Below
x = sqrt(q) the test never rejects (the profile reports +inf).  Just above
sqrt(q) the true curve diverges, so knot values are capped at 50 -- harmless,
because for the ridge positions that would demand more, rejecting everything
above the support edge still yields size below alpha.  Beyond sqrt(f_tilde)
the curve pins to exactly sqrt(q).  Linear interpolation between knots
overstates the convex true curve, so between-knot queries are conservative.

Construction is a fixed point.  Each sweep computes, for every f0 on a dense
grid, the mass the current curve already rejects on the lower tail
(f <= -sqrt(q)) and on the interior hump (sqrt(q) < f < f0), converts the
remaining allowance into the upper-tail boundary zeta = z, and records the
requirement (x, y) = (f0 + z, (f0 + z) z / f0): the curve value at x that
makes this f0's size exactly alpha.  The new curve is the nonincreasing
upper envelope of all requirements, and sweeps repeat until the knot values
stabilize.  Both rejected-mass pieces are computed exactly: on each knot
interval the margin is a quadratic minus a linear function, so crossings are
quadratic roots, not searches.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ConstructionError, DomainError
from .gaussian import chi2_quantile_1df
from .worst_case import local_max_size

__all__ = [
    "CriticalValueFunction",
    "default_knot_grid",
    "build_cvf",
    "cvf_eval",
    "tf_adjusted_se",
    "emit_table3",
    "table3_csv",
    "save_cvf",
    "load_cvf",
]

_SQRT_CRIT_CAP = 50.0
_KNOT_PITCH = 0.005
_SWEEP_PITCH = 0.0025
_MAX_SWEEPS = 200
_CONVERGED = 1e-6
_FILE_FORMAT = "tfiv-cvf-v1"


@dataclass(frozen=True)
class CriticalValueFunction:
    """Nonincreasing sqrt-critical curve over sqrt(F) with a support edge.

    ``knots`` are (sqrt_F, sqrt_crit) pairs.  ``lower_support`` is the F
    below which the test never rejects; ``f_tilde`` the F beyond which the
    curve sits at exactly sqrt(lower_support) (infinite when the curve never
    pins inside the knot range, as happens for small alpha).
    """

    alpha: float
    f_tilde: float
    knots: tuple[tuple[float, float], ...]
    lower_support: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 0.25):
            raise DomainError(f"alpha must lie in (0, 0.25], got {self.alpha!r}")
        if not (math.isfinite(self.lower_support) and self.lower_support > 0.0):
            raise DomainError("lower_support must be positive and finite")
        if not self.knots:
            raise DomainError("need at least one knot")
        xs = np.asarray([k[0] for k in self.knots], dtype=float)
        gs = np.asarray([k[1] for k in self.knots], dtype=float)
        sq = math.sqrt(self.lower_support)
        if np.any(~np.isfinite(xs)) or np.any(~np.isfinite(gs)):
            raise DomainError("knots must be finite")
        if xs.size > 1 and np.any(np.diff(xs) <= 0.0):
            raise DomainError("knot positions must be strictly increasing")
        if xs[0] <= sq:
            raise DomainError("knots must start above the support edge")
        if np.any(np.diff(gs) > 1e-12):
            raise DomainError("knot values must be nonincreasing")
        if np.any(gs < sq - 1e-9) or np.any(gs > _SQRT_CRIT_CAP + 1e-9):
            raise DomainError("knot values must lie between sqrt(support) and the cap")
        if math.isfinite(self.f_tilde):
            if self.f_tilde < self.lower_support:
                raise DomainError("f_tilde cannot lie below the support")
            tail = gs[xs >= math.sqrt(self.f_tilde)]
            if tail.size and np.any(np.abs(tail - sq) > 1e-9):
                raise DomainError("knot values beyond f_tilde must pin to sqrt(support)")
        elif not self.f_tilde == math.inf:
            raise DomainError(f"f_tilde must be finite or +inf, got {self.f_tilde!r}")

    @cached_property
    def _arrays(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.asarray([k[0] for k in self.knots], dtype=float)
        gs = np.asarray([k[1] for k in self.knots], dtype=float)
        return xs, gs

    def sqrt_crit_profile(self, x) -> np.ndarray:
        """sqrt-critical values at sqrt(F) positions x; +inf below support."""
        arr = np.asarray(x, dtype=float)
        xs, gs = self._arrays
        out = np.interp(arr, xs, gs)
        edge = math.sqrt(self.lower_support) * (1.0 - 1e-12)
        return np.where(arr < edge, np.inf, out)


def default_knot_grid(alpha: float) -> np.ndarray:
    """Knot positions in sqrt(F): 0.005 pitch from just above the support."""
    if not (0.0 < alpha <= 0.25):
        raise DomainError(f"alpha must lie in (0, 0.25], got {alpha!r}")
    sq = math.sqrt(chi2_quantile_1df(1.0 - alpha))
    start = round(sq + 0.001, 3)
    while start <= sq:
        start += 0.001
    return np.arange(start, 12.0 + 1e-9, _KNOT_PITCH)


def _mass_low(xs: np.ndarray, gs: np.ndarray, sq: float, f0: float) -> float:
    """Mass of the lower-tail rejection region f <= -a*, via the exact
    crossing of w(a) = a(a + f0) - f0 g(a), which is strictly increasing."""
    av = np.concatenate(([sq], xs))
    gv = np.concatenate(([gs[0]], gs))
    vals = av * (av + f0) - f0 * gv
    if vals[0] >= 0.0:
        return float(ndtr(-sq - f0))
    pos = np.nonzero(vals >= 0.0)[0]
    if pos.size == 0:
        # Flat beyond the last knot: a^2 + f0 a - f0 g_last = 0.
        gl = gv[-1]
        a_star = 0.5 * (-f0 + math.sqrt(f0 * f0 + 4.0 * f0 * gl))
        a_star = max(a_star, sq)
    else:
        j = int(pos[0])
        x0, x1 = av[j - 1], av[j]
        g0, g1 = gv[j - 1], gv[j]
        m = (g1 - g0) / (x1 - x0)
        # a^2 + f0(1 - m) a - f0 (g0 - m x0) = 0, positive root.
        b = f0 * (1.0 - m)
        c = -f0 * (g0 - m * x0)
        a_star = 0.5 * (-b + math.sqrt(b * b - 4.0 * c))
        a_star = min(max(a_star, x0), x1)
    return float(ndtr(-a_star - f0))


def _mass_mid(xs: np.ndarray, gs: np.ndarray, sq: float, f0: float) -> float:
    """Mass of the interior hump sq < f < f0 where x(f0 - x)/f0 > g(x).

    The margin v(x) = x(f0 - x) - f0 g(x) is negative at both ends, so the
    region is a union of intervals; per knot interval v is a concave
    quadratic, solved exactly (both roots, covering dips entirely inside
    one interval).
    """
    if f0 <= sq + 1e-12:
        return 0.0
    inner = xs[(xs > sq) & (xs < f0)]
    xv = np.concatenate(([sq], inner, [f0]))
    gv = np.interp(xv, xs, gs)
    x0 = xv[:-1]
    x1 = xv[1:]
    g0 = gv[:-1]
    g1 = gv[1:]
    m = (g1 - g0) / (x1 - x0)
    # v(x) = -x^2 + (f0 - f0 m) x - f0 (g0 - m x0)  per interval.
    b = f0 * (1.0 - m)
    c = -f0 * (g0 - m * x0)
    disc = b * b + 4.0 * c
    ok = disc > 0.0
    if not np.any(ok):
        return 0.0
    sqrt_disc = np.sqrt(np.where(ok, disc, 0.0))
    r_lo = 0.5 * (b - sqrt_disc)
    r_hi = 0.5 * (b + sqrt_disc)
    roots = []
    for rr in (r_lo, r_hi):
        keep = ok & (rr > x0 + 1e-13) & (rr < x1 - 1e-13)
        roots.append(rr[keep])
    allr = np.sort(np.concatenate(roots))
    if allr.size == 0:
        return 0.0
    if allr.size % 2:  # numerical tie at a knot; drop the stray crossing
        allr = allr[:-1]
    starts = allr[0::2]
    ends = allr[1::2]
    return float(np.sum(ndtr(ends - f0) - ndtr(starts - f0)))


def _sweep_requirements(
    xs: np.ndarray, gs: np.ndarray, sq: float, f0s: np.ndarray, alpha: float
) -> tuple[np.ndarray, np.ndarray]:
    """One Jacobi sweep: requirement points (x, y) sorted by x."""
    req_x = []
    req_y = []
    for f0 in f0s:
        rest = _mass_low(xs, gs, sq, f0) + _mass_mid(xs, gs, sq, f0)
        need = alpha - rest
        if need <= 1e-14:
            continue
        z = float(ndtri(1.0 - need))
        x_req = f0 + z
        if x_req <= sq:
            continue
        req_x.append(x_req)
        req_y.append(x_req * z / f0)
    rx = np.asarray(req_x, dtype=float)
    ry = np.asarray(req_y, dtype=float)
    order = np.argsort(rx)
    return rx[order], ry[order]


def _upper_envelope(ry: np.ndarray) -> np.ndarray:
    """Nonincreasing completion: value at x is the max requirement at >= x."""
    return np.maximum.accumulate(ry[::-1])[::-1]


def _initial_curve(xs: np.ndarray, alpha: float, q: float) -> np.ndarray:
    """Constant-critical-value solution per knot, capped and clamped."""
    from scipy.optimize import brentq

    sq = math.sqrt(q)
    out = np.empty_like(xs)
    cap_c = _SQRT_CRIT_CAP * _SQRT_CRIT_CAP
    for i, x in enumerate(xs):
        f_threshold = x * x

        def gap(c: float) -> float:
            return local_max_size(f_threshold, c) - alpha

        if gap(q) <= 0.0:
            out[i] = sq
        elif gap(cap_c) >= 0.0:
            out[i] = _SQRT_CRIT_CAP
        else:
            out[i] = math.sqrt(brentq(gap, q, cap_c, xtol=1e-10, rtol=1e-12))
    return out


def build_cvf(alpha: float, grid: Optional[Sequence[float]] = None) -> CriticalValueFunction:
    """Construct the F-adaptive critical-value curve at level alpha.

    Runs the fixed-point sweep described in the module docstring on the knot
    ``grid`` (default: 0.005 pitch from just above sqrt(q) to 12), extracts
    f_tilde as the point where the requirement envelope crosses sqrt(q)
    (+inf if it never does inside the grid), pins the curve beyond it, and
    self-audits the result on the ridge: |size - alpha| <= 1e-4 on the band
    where the construction owns the size exactly, and excess-only bounds on
    the cap window near f0 = 0 and through the pin-deficit basin below
    f_tilde, with both zone edges and tolerances scaled to alpha (see
    ``_self_audit``).

    Raises ConstructionError if the sweep fails to stabilize (max knot
    change above 1e-6 after the iteration cap) or the self-audit fails.
    """
    if not (isinstance(alpha, float) and 0.0 < alpha <= 0.25):
        raise DomainError(f"alpha must be a float in (0, 0.25], got {alpha!r}")
    q = chi2_quantile_1df(1.0 - alpha)
    sq = math.sqrt(q)
    if grid is None:
        xs = default_knot_grid(alpha)
    else:
        xs = np.asarray(list(grid), dtype=float)
        if xs.ndim != 1 or xs.size < 50:
            raise DomainError("grid must be a 1-d sequence of at least 50 knots")
        if np.any(~np.isfinite(xs)) or np.any(np.diff(xs) <= 0.0):
            raise DomainError("grid must be finite and strictly increasing")
        if xs[0] <= sq or xs[0] > sq + 0.05:
            raise DomainError("grid must start just above sqrt(q)")
        if np.max(np.diff(xs)) > 0.02:
            raise DomainError("grid too coarse: max knot step is 0.02")
        if xs[-1] < sq + 8.5:
            raise DomainError("grid must extend at least 8.5 beyond sqrt(q)")

    f0s = np.arange(0.02, sq + 8.8, _SWEEP_PITCH)
    gs = _initial_curve(xs, alpha, q)

    rx = ry = None
    delta = math.inf
    for _ in range(_MAX_SWEEPS):
        rx, ry = _sweep_requirements(xs, gs, sq, f0s, alpha)
        if rx.size < 2:
            raise ConstructionError("requirement sweep produced no usable points")
        env = _upper_envelope(ry)
        g_new = np.interp(xs, rx, env)
        np.clip(g_new, sq, _SQRT_CRIT_CAP, out=g_new)
        g_new = np.maximum.accumulate(g_new[::-1])[::-1]
        delta = float(np.max(np.abs(g_new - gs)))
        gs = g_new
        if delta < _CONVERGED:
            break
    else:
        raise ConstructionError(
            f"fixed point failed to stabilize: max knot change {delta:.3e} "
            f"after {_MAX_SWEEPS} sweeps"
        )

    # f_tilde: where the requirement envelope itself crosses sqrt(q).
    env = _upper_envelope(ry)
    below = env <= sq
    if below.any() and not below[0]:
        k = int(np.nonzero(below)[0][0])
        x1, x2 = rx[k - 1], rx[k]
        y1, y2 = env[k - 1], env[k]
        x_tilde = float(x1 + (y1 - sq) * (x2 - x1) / (y1 - y2)) if y1 > y2 else float(x2)
        f_tilde = x_tilde * x_tilde
        gs = np.where(xs >= x_tilde, sq, gs)
    else:
        f_tilde = math.inf

    cvf = CriticalValueFunction(
        alpha=alpha,
        f_tilde=f_tilde,
        knots=tuple(zip(xs.tolist(), gs.tolist())),
        lower_support=q,
    )
    _self_audit(cvf)
    return cvf


def _self_audit(cvf: CriticalValueFunction) -> None:
    """Check the finished curve against an independent ridge evaluator.

    Three zones, each with the tightest tolerance the representation can
    honestly meet.  On [0.5, min(8.5, sqrt(f_tilde) - 1.6)] the construction
    owns the size exactly.
    Above that, the pin (the curve cannot drop below sqrt(q)) makes the size
    fall short of alpha for a while, so only excess is policed.  Near zero
    the value cap binds: rejecting everything beyond the support edge has
    size alpha + sqrt(q) phi(sqrt(q)) f0^2 + O(f0^4), and full rejection is
    forced up to f0_edge = q / (cap + sqrt(q)), so the overshoot peaks at
    about sqrt(q) phi(sqrt(q)) f0_edge^2 (~6.3e-4 at the 5% level) -- a
    representation artifact, not a construction failure.  The cap zone and
    its tolerance scale with alpha through f0_edge.
    """
    from .size_engine import TFProcedure, rejection_prob_profile

    proc = TFProcedure(cvf=cvf)
    alpha = cvf.alpha
    sq = math.sqrt(cvf.lower_support)
    # The pin drags the size into a deficit basin starting ~1.25 below
    # x_tilde (the monotone envelope cannot follow the pointwise
    # requirement down through sq), so exactness is only owed below it.
    x_tilde = math.sqrt(cvf.f_tilde) if math.isfinite(cvf.f_tilde) else math.inf
    strict_end = min(8.5, x_tilde - 1.6)
    if strict_end >= 0.6:
        strict = np.arange(0.5, strict_end + 1e-9, 0.01)
        p_strict = rejection_prob_profile(proc, 1.0, strict)
        worst = float(np.max(np.abs(p_strict - alpha)))
        if worst > 1e-4:
            j = int(np.argmax(np.abs(p_strict - alpha)))
            raise ConstructionError(
                f"ridge size misses alpha by {worst:.2e} at f0={strict[j]:.3f}"
            )
    f0_edge = cvf.lower_support / (_SQRT_CRIT_CAP + sq)
    # Partial-cap effects linger a little past the full-rejection edge;
    # start the excess-only zone beyond them, on the audit pitch.
    cap_end = 0.05 * math.ceil(1.25 * f0_edge / 0.05)
    broad = np.arange(cap_end, 40.0 + 1e-9, 0.05)
    p_broad = rejection_prob_profile(proc, 1.0, broad)
    over = float(np.max(p_broad - alpha))
    if over > 1e-4:
        j = int(np.argmax(p_broad - alpha))
        raise ConstructionError(
            f"ridge size exceeds alpha by {over:.2e} at f0={broad[j]:.3f}"
        )
    phi_sq = math.exp(-0.5 * sq * sq) / math.sqrt(2.0 * math.pi)
    cap_tol = max(1.35 * sq * phi_sq * f0_edge * f0_edge, 2.5e-4)
    capped = np.arange(0.0, cap_end, 0.005)
    p_cap = rejection_prob_profile(proc, 1.0, capped)
    over_cap = float(np.max(p_cap - alpha))
    if over_cap > cap_tol:
        j = int(np.argmax(p_cap - alpha))
        raise ConstructionError(
            f"cap-zone size exceeds alpha by {over_cap:.2e} at f0={capped[j]:.3f}"
        )


def cvf_eval(cvf: CriticalValueFunction, F: float) -> float:
    """Critical value for t^2 at observed first-stage F; may be +inf.

    Below lower_support the value is infinite (the test cannot reject).
    Beyond f_tilde it is exactly lower_support (= q).  Between knots the
    sqrt-value is interpolated linearly in sqrt(F) and squared; left of the
    first knot the curve saturates at its first (capped) value.
    """
    if not (isinstance(F, (int, float)) and math.isfinite(F) and F >= 0.0):
        raise DomainError(f"F must be a finite nonneg real, got {F!r}")
    if F < cvf.lower_support:
        return math.inf
    if F >= cvf.f_tilde:
        return cvf.lower_support
    xs, gs = cvf._arrays
    y = float(np.interp(math.sqrt(F), xs, gs))
    return y * y


def tf_adjusted_se(se: float, F: float, cvf: CriticalValueFunction) -> float:
    """Standard error inflated so +-sqrt(q) times it is a level-alpha CI.

    Returns se * sqrt(c(F)/q); +inf when F is below the support (no finite
    interval is valid there), and exactly se once F >= f_tilde.
    """
    if not (isinstance(se, (int, float)) and math.isfinite(se) and se > 0.0):
        raise DomainError(f"se must be a positive finite real, got {se!r}")
    c = cvf_eval(cvf, F)
    if math.isinf(c):
        return math.inf
    return se * math.sqrt(c / cvf.lower_support)


def _round_up_2dp(v: float) -> float:
    """Round to two decimals, half up, bumping once more if still below v."""
    n = math.floor(v * 100.0 + 0.5)
    if v > n / 100.0 + 1e-12:
        n += 1
    return n / 100.0


def emit_table3(cvf: CriticalValueFunction) -> np.ndarray:
    """10x8 grid of |t| critical values over sqrt(F) = 2.0 ... 9.9.

    Rows are the decimal part (0.0-0.9), columns the integer part (2-9);
    each cell is the curve's sqrt-critical value rounded up to two decimals,
    so table users are never anticonservative.
    """
    if abs(cvf.alpha - 0.05) > 1e-9:
        raise DomainError("the quick-reference table is defined for alpha = 0.05")
    xs, gs = cvf._arrays
    out = np.empty((10, 8))
    for r in range(10):
        for c in range(2, 10):
            x = c + r / 10.0
            out[r, c - 2] = _round_up_2dp(float(np.interp(x, xs, gs)))
    return out


def table3_csv(cvf: CriticalValueFunction) -> str:
    """CSV of emit_table3: header sqrtF_int,2..9; rows keyed 0.0-0.9."""
    table = emit_table3(cvf)
    lines = ["sqrtF_int," + ",".join(str(c) for c in range(2, 10))]
    for r in range(10):
        cells = ",".join(f"{table[r, c]:.2f}" for c in range(8))
        lines.append(f"{r / 10:.1f},{cells}")
    return "\n".join(lines) + "\n"


def _canonical_payload(cvf: CriticalValueFunction) -> str:
    payload = {
        "alpha": float(cvf.alpha),
        "f_tilde": float(cvf.f_tilde) if math.isfinite(cvf.f_tilde) else None,
        "lower_support": float(cvf.lower_support),
        "knots": [[float(x), float(g)] for x, g in cvf.knots],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_cvf(cvf: CriticalValueFunction, path) -> None:
    """Serialize the curve with a content checksum for cache reuse."""
    canonical = _canonical_payload(cvf)
    doc = {
        "format": _FILE_FORMAT,
        "sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "payload": json.loads(canonical),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_cvf(path) -> CriticalValueFunction:
    """Load a serialized curve, verifying format and checksum."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or doc.get("format") != _FILE_FORMAT:
        raise ConstructionError(f"not a recognized curve file: {path}")
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        raise ConstructionError(f"malformed curve file: {path}")
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canonical.encode()).hexdigest()
    if digest != doc.get("sha256"):
        raise ConstructionError(f"curve file checksum mismatch: {path}")
    f_tilde = payload.get("f_tilde")
    return CriticalValueFunction(
        alpha=float(payload["alpha"]),
        f_tilde=math.inf if f_tilde is None else float(f_tilde),
        knots=tuple((float(x), float(g)) for x, g in payload["knots"]),
        lower_support=float(payload["lower_support"]),
    )
