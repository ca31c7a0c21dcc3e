"""Regenerate the headline constants from scratch and print them.

Covers: the worst-case size of the (1.96^2, F > 10) threshold rule, the
corrected threshold 104.7, the corrected critical value 3.43, the validity
bounds (142.6, 0.565) at the 5% level and (none, 0.43) at the 1% level, and
the hybrid-rule nonexistence bound.  Runtime is a couple of minutes, almost
all of it in the two validity-region grids.
"""

import math
import time

import numpy as np

from tfiv.size_engine import ThresholdTF
from tfiv.worst_case import (
    hybrid_nonexistence_certificate,
    solve_critical_value,
    solve_threshold_F,
    validity_region,
    worst_case_size,
)

Q95 = 1.959963984540054**2
Q99 = 2.5758293035489004**2


def timed(label: str, fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    print(f"  [{time.perf_counter() - t0:6.1f} s] {label}")
    return out


def main() -> None:
    print("worst-case size of the F > 10 threshold rule at the 1.96 cutoff:")
    wc = timed("worst_case_size", worst_case_size, ThresholdTF(Q95, 10.0))
    print(f"    size = {wc.max_prob:.6f} at rho = {wc.arg_rho:g}, f0 = {wc.arg_f0:.4f}")
    print(f"    (10/(sqrt(10)+1.96) = {10.0 / (math.sqrt(10.0) + 1.96):.4f})")

    print("corrected F threshold keeping the 1.96 cutoff at 5%:")
    fbar = timed("solve_threshold_F", solve_threshold_F, Q95, 0.05)
    print(f"    F-bar = {fbar:.4f}")

    print("corrected critical value keeping the F > 10 screen at 5%:")
    crit = timed("solve_critical_value", solve_critical_value, 10.0, 0.05)
    print(f"    sqrt(c) = {math.sqrt(crit):.4f} (inflation {math.sqrt(crit) / 1.96:.4f}x)")

    print("validity bounds for the conventional 5% test:")
    vr = timed("validity_region 5%", validity_region, Q95, 0.05)
    print(f"    E[F]-bar = {vr.ef_bar:.4f}, rho-bar = {vr.rho_bar:.4f}")

    print("validity bounds for the conventional 1% test:")
    vr1 = timed("validity_region 1%", validity_region, Q99, 0.01)
    ef_text = "none" if vr1.ef_bar is None else f"{vr1.ef_bar:.4f}"
    print(f"    E[F]-bar = {ef_text}, rho-bar = {vr1.rho_bar:.4f}")
    fbar1 = timed("solve_threshold_F 1%", solve_threshold_F, Q99, 0.01)
    print(f"    corroboration: solve_threshold_F -> {fbar1!r}")

    print("hybrid rule cannot be fixed by any threshold (1.96 cutoff):")
    rows = timed(
        "hybrid_nonexistence_certificate",
        hybrid_nonexistence_certificate,
        Q95,
        np.geomspace(1.92075, 1e4, 60),
    )
    worst = min(r.bound for r in rows)
    print(f"    min size bound over thresholds = {worst:.6f} (> 0.05: {worst > 0.05})")


if __name__ == "__main__":
    main()
