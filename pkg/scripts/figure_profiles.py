"""Emit figure-ready CSV profiles of rejection probability.

One file per procedure: rows are E[F] values, columns are rho values, cells
are exact rejection probabilities under the null.  This is the layout behind
the size-profile figures; plotting is left to whatever reads the CSV.
"""

import argparse
from pathlib import Path

import numpy as np

from tfiv.size_engine import (
    ConventionalT,
    HybridAR,
    PureAR,
    TFProcedure,
    ThresholdTF,
    rejection_prob_matrix,
)
from tfiv.tf_critical import build_cvf

Q95 = 1.959963984540054**2

RHOS = (0.0, 0.3, 0.5, 0.7, 0.9, 1.0)


def procedures() -> dict:
    return {
        "conventional": ConventionalT(Q95),
        "threshold-2b": ThresholdTF(Q95, 104.7),
        "threshold-2c": ThresholdTF(3.43**2, 10.0),
        "hybrid-2b": HybridAR(Q95, 104.7),
        "ar": PureAR(Q95),
        "tf": TFProcedure(build_cvf(0.05)),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("out"))
    ap.add_argument("--ef-max", type=float, default=100.0)
    ap.add_argument("--n-ef", type=int, default=100)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    efs = np.linspace(1.0, args.ef_max, args.n_ef)
    f0s = np.sqrt(efs - 1.0)
    for name, proc in procedures().items():
        mat = rejection_prob_matrix(proc, np.array(RHOS), f0s)
        path = args.out_dir / f"profile_{name}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("ef," + ",".join(f"rho_{r:g}" for r in RHOS) + "\n")
            for j, ef in enumerate(efs):
                cells = ",".join(f"{mat[i, j]:.6f}" for i in range(len(RHOS)))
                fh.write(f"{ef:.4f},{cells}\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
