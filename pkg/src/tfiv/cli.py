"""Command-line front end for the size calculations and the tF tables.

Every subcommand is a thin shell over one library entry point: ``cv``,
``test`` and ``ci`` evaluate the fitted critical-value curve, ``size`` and
``mc`` evaluate rejection probabilities (quadrature and simulation), and
``solve``, ``table3``, ``audit`` regenerate the headline constants, the
published table, and the corpus reclassification report.

Output contract: exit code 0 on success; any failure prints a single JSON
object ``{"error": {"type": ..., "message": ...}}`` to stderr and exits
nonzero (2 for flag/usage problems, 1 for domain or I/O problems).  With
``--format json`` the result is one JSON document on stdout that validates
against ``schemas/cli_output.schema.json``; plain output prints
probabilities with 4 decimals unless ``--raw`` asks for full precision.

The threshold presets are 5%-specific by construction (the pairs
(1.96^2, 104.7) and (3.43^2, 10) have no analogue at other levels), so any
subcommand asked to combine them with a different ``--alpha`` refuses.

Built curves are expensive (~4 s); set ``TF_CACHE_DIR`` to keep the knot
files on disk between invocations.  Cache files are versioned and
checksummed, and a stale or corrupt file is silently rebuilt.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .audit import classify_corpus, read_corpus_csv, report_to_json
from .errors import DomainError, TfivError
from .gaussian import chi2_quantile_1df
from .mc_oracle import McConfig, mc_rejection
from .size_engine import (
    ConventionalT,
    HybridAR,
    NuisancePoint,
    PureAR,
    TFProcedure,
    ThresholdTF,
    rejection_prob,
    rejection_prob_matrix,
)
from .tf_critical import (
    CriticalValueFunction,
    _round_up_2dp,
    build_cvf,
    cvf_eval,
    load_cvf,
    save_cvf,
    table3_csv,
    tf_adjusted_se,
)
from .worst_case import (
    solve_critical_value,
    solve_threshold_F,
    validity_region,
)

__all__ = ["main"]

_PRESET_ALPHA = 0.05
# The fixed pairs the -2b / -2c preset names refer to: (t^2 cutoff,
# F threshold).  Both are 5%-only constants with no analogue elsewhere.
_PRESET_2B = (1.96 * 1.96, 104.7)
_PRESET_2C = (3.43 * 3.43, 10.0)

_TEST_PROCEDURES = ("conventional", "threshold-2b", "threshold-2c", "tf")
_SIZE_PROCEDURES = _TEST_PROCEDURES + ("hybrid-2b", "ar")
_AUDIT_PROCEDURES = _TEST_PROCEDURES

_SWEEP_RHOS = np.linspace(-1.0, 1.0, 201)


# ---------------------------------------------------------------------------
# plumbing


class _Parser(argparse.ArgumentParser):
    """argparse with machine-readable usage errors (exit code 2)."""

    def error(self, message: str) -> None:  # noqa: A003 - argparse API
        _emit_error("UsageError", message)
        raise SystemExit(2)


def _emit_error(kind: str, message: str) -> None:
    payload = {"error": {"type": kind, "message": message}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _fmt(value: Optional[float], raw: bool, nd: int = 4) -> str:
    """Plain-output number: fixed decimals by default, repr under --raw."""
    if value is None:
        return "none"
    v = float(value)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if raw:
        return repr(v)
    return f"{v:.{nd}f}"


def _finite_or_none(value: float) -> Optional[float]:
    """JSON payload cell: infinities become null (JSON has no inf)."""
    v = float(value)
    return v if math.isfinite(v) else None


def _cache_path(alpha: float) -> Optional[Path]:
    cache_dir = os.environ.get("TF_CACHE_DIR")
    if not cache_dir:
        return None
    return Path(cache_dir) / f"cvf-alpha{alpha:.6g}.json"


def _get_cvf(alpha: float) -> CriticalValueFunction:
    """Build the curve, round-tripping through TF_CACHE_DIR when set."""
    path = _cache_path(alpha)
    if path is not None and path.exists():
        try:
            cvf = load_cvf(path)
            if abs(cvf.alpha - alpha) <= 1e-12:
                return cvf
        except (TfivError, OSError, ValueError):
            pass  # stale format or bad checksum: rebuild below
    cvf = build_cvf(alpha)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_cvf(cvf, path)
    return cvf


def _require_preset_alpha(name: str, alpha: float) -> None:
    if abs(alpha - _PRESET_ALPHA) > 1e-9:
        raise DomainError(
            f"procedure {name!r} is a 5% preset; alpha = {alpha!r} is unsupported"
        )


def _build_procedure(name: str, alpha: float):
    """Map a CLI procedure name to a size-engine procedure object."""
    if name == "conventional":
        return ConventionalT(chi2_quantile_1df(1.0 - alpha))
    if name == "threshold-2b":
        _require_preset_alpha(name, alpha)
        return ThresholdTF(*_PRESET_2B)
    if name == "threshold-2c":
        _require_preset_alpha(name, alpha)
        return ThresholdTF(*_PRESET_2C)
    if name == "hybrid-2b":
        _require_preset_alpha(name, alpha)
        return HybridAR(*_PRESET_2B)
    if name == "ar":
        return PureAR(chi2_quantile_1df(1.0 - alpha))
    if name == "tf":
        return TFProcedure(_get_cvf(alpha))
    raise DomainError(f"unknown procedure {name!r}")


def _emit(payload: dict, plain_lines: list[str], fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in plain_lines:
            print(line)


# ---------------------------------------------------------------------------
# subcommands


def cmd_cv(args: argparse.Namespace) -> int:
    if not (math.isfinite(args.f) and args.f >= 0.0):
        raise DomainError(f"--f must be a finite nonnegative real, got {args.f!r}")
    cvf = _get_cvf(args.alpha)
    crit = cvf_eval(cvf, args.f)
    payload = {
        "command": "cv",
        "alpha": args.alpha,
        "F": args.f,
        "unbounded": not math.isfinite(crit),
        "crit": _finite_or_none(crit),
        "sqrt_crit": None,
        "sqrt_crit_table": None,
    }
    if math.isfinite(crit):
        sqrt_crit = math.sqrt(crit)
        table_value = _round_up_2dp(sqrt_crit)
        payload["sqrt_crit"] = sqrt_crit
        payload["sqrt_crit_table"] = table_value
        lines = [
            f"sqrt c(F) = {table_value:.2f} (table value, rounded up)",
            f"sqrt c(F) = {_fmt(sqrt_crit, args.raw)} unrounded",
            f"c(F) = {_fmt(crit, args.raw)}",
        ]
    else:
        lines = [
            "unbounded",
            f"F = {_fmt(args.f, args.raw)} is below the chi-square cutoff "
            f"{_fmt(cvf.lower_support, args.raw)}; no critical value is valid there",
        ]
    _emit(payload, lines, args.format)
    return 0


def _test_decision(name: str, alpha: float, t: float, F: float):
    """Return (reject, cutoff_abs_t, f_threshold, rule_text)."""
    t2 = t * t
    if name == "conventional":
        crit = chi2_quantile_1df(1.0 - alpha)
        cut = math.sqrt(crit)
        return t2 > crit, cut, None, f"reject when |t| > {cut:.4f}"
    if name in ("threshold-2b", "threshold-2c"):
        _require_preset_alpha(name, alpha)
        crit, fbar = _PRESET_2B if name == "threshold-2b" else _PRESET_2C
        cut = math.sqrt(crit)
        rule = f"reject when |t| > {cut:.2f} and F > {fbar:g}"
        return (t2 > crit) and (F > fbar), cut, fbar, rule
    if name == "tf":
        cvf = _get_cvf(alpha)
        crit = cvf_eval(cvf, F)
        cut = math.sqrt(crit) if math.isfinite(crit) else math.inf
        return t2 > crit, cut, None, "reject when |t| > sqrt c(F)"
    raise DomainError(f"unknown procedure {name!r}")


def cmd_test(args: argparse.Namespace) -> int:
    if not (math.isfinite(args.t) and math.isfinite(args.f)):
        raise DomainError("--t and --f must be finite reals")
    if args.f < 0.0:
        raise DomainError(f"--f must be nonnegative, got {args.f!r}")
    reject, cut, fbar, rule = _test_decision(args.procedure, args.alpha, args.t, args.f)
    payload = {
        "command": "test",
        "procedure": args.procedure,
        "alpha": args.alpha,
        "t": args.t,
        "F": args.f,
        "reject": reject,
        "cutoff_abs_t": _finite_or_none(cut),
        "f_threshold": fbar,
        "rule": rule,
    }
    lines = [
        "reject" if reject else "accept",
        f"|t| = {_fmt(abs(args.t), args.raw)} vs cutoff {_fmt(cut, args.raw)}"
        f" at F = {_fmt(args.f, args.raw)}",
        f"rule: {rule}",
    ]
    _emit(payload, lines, args.format)
    return 0


def cmd_ci(args: argparse.Namespace) -> int:
    if not (math.isfinite(args.se) and args.se > 0.0):
        raise DomainError(f"--se must be a positive finite real, got {args.se!r}")
    if not math.isfinite(args.beta):
        raise DomainError(f"--beta must be finite, got {args.beta!r}")
    if not (math.isfinite(args.f) and args.f >= 0.0):
        raise DomainError(f"--f must be a finite nonnegative real, got {args.f!r}")
    cvf = _get_cvf(args.alpha)
    crit = cvf_eval(cvf, args.f)
    adjusted = tf_adjusted_se(args.se, args.f, cvf)
    payload = {
        "command": "ci",
        "alpha": args.alpha,
        "beta": args.beta,
        "se": args.se,
        "F": args.f,
        "unbounded": not math.isfinite(crit),
        "lower": None,
        "upper": None,
        "half_width": None,
        "se_adjusted": _finite_or_none(adjusted),
        "inflation": None,
    }
    if math.isfinite(crit):
        half = math.sqrt(crit) * args.se
        inflation = adjusted / args.se
        payload.update(
            lower=args.beta - half,
            upper=args.beta + half,
            half_width=half,
            inflation=inflation,
        )
        lines = [
            f"ci = ({_fmt(args.beta - half, args.raw)}, {_fmt(args.beta + half, args.raw)})",
            f"adjusted se = {_fmt(adjusted, args.raw)}"
            f" (inflation {_fmt(inflation, args.raw)}x over conventional)",
        ]
    else:
        lines = [
            "ci = (-inf, inf)",
            "adjusted se = inf (F below the chi-square cutoff; "
            "no bounded interval holds its level)",
        ]
    _emit(payload, lines, args.format)
    return 0


def _resolve_f0(args: argparse.Namespace) -> float:
    if (args.f0 is None) == (args.ef is None):
        raise DomainError("exactly one of --f0 / --ef must be given")
    if args.f0 is not None:
        if not (math.isfinite(args.f0) and args.f0 >= 0.0):
            raise DomainError(f"--f0 must be a finite nonnegative real, got {args.f0!r}")
        return args.f0
    if not (math.isfinite(args.ef) and args.ef >= 1.0):
        raise DomainError(f"--ef must be a finite real >= 1, got {args.ef!r}")
    return math.sqrt(args.ef - 1.0)


def cmd_size(args: argparse.Namespace) -> int:
    f0 = _resolve_f0(args)
    proc = _build_procedure(args.procedure, args.alpha)
    if args.sweep:
        probs = rejection_prob_matrix(proc, _SWEEP_RHOS, [f0])[:, 0]
        payload = {
            "command": "size",
            "procedure": args.procedure,
            "alpha": args.alpha,
            "f0": f0,
            "ef": 1.0 + f0 * f0,
            "sweep": {
                "rho": [float(r) for r in _SWEEP_RHOS],
                "prob": [float(p) for p in probs],
            },
        }
        lines = ["rho,prob"]
        for r, p in zip(_SWEEP_RHOS, probs):
            lines.append(f"{r:.2f},{_fmt(p, args.raw)}")
        _emit(payload, lines, args.format)
        return 0
    if not (math.isfinite(args.rho) and abs(args.rho) <= 1.0):
        raise DomainError(f"--rho must lie in [-1, 1], got {args.rho!r}")
    res = rejection_prob(proc, NuisancePoint(args.rho, f0), tol=args.tol)
    payload = {
        "command": "size",
        "procedure": args.procedure,
        "alpha": args.alpha,
        "rho": args.rho,
        "f0": f0,
        "ef": 1.0 + f0 * f0,
        "tol": args.tol,
        "prob": res.prob,
        "abs_err": res.abs_err,
    }
    lines = [
        f"rejection probability = {_fmt(res.prob, args.raw)}"
        f" (abs err <= {res.abs_err:.1e})",
        f"rho = {_fmt(args.rho, args.raw)}, f0 = {_fmt(f0, args.raw)},"
        f" E[F] = {_fmt(1.0 + f0 * f0, args.raw)}",
    ]
    _emit(payload, lines, args.format)
    return 0


_CERT_THRESHOLD = (
    "no finite F threshold restores size alpha at this critical value; "
    "hybrid_nonexistence_certificate(crit, f_grid) bounds the size above "
    "alpha on any threshold grid"
)
_CERT_EF = (
    "no E[F] bound makes the conventional test valid for every rho at this "
    "level; corroborated by solve --mode threshold-F returning none"
)


def cmd_solve(args: argparse.Namespace) -> int:
    if not (math.isfinite(args.alpha) and 0.0 < args.alpha < 1.0):
        raise DomainError(f"--alpha must lie in (0, 1), got {args.alpha!r}")
    mode = args.mode
    payload = {
        "command": "solve",
        "mode": mode,
        "alpha": args.alpha,
        "crit": args.crit,
        "fbar": args.fbar,
        "result": None,
        "exists": False,
        "certificate": None,
    }
    if mode in ("threshold-F", "min-EF", "max-rho"):
        if args.crit is None:
            raise DomainError(f"--mode {mode} requires --crit")
        if args.fbar is not None:
            raise DomainError(f"--mode {mode} does not take --fbar")
    else:
        if args.fbar is None:
            raise DomainError("--mode critical-value requires --fbar")
        if args.crit is not None:
            raise DomainError("--mode critical-value does not take --crit")

    if mode == "threshold-F":
        value = solve_threshold_F(args.crit, args.alpha)
        if value is None:
            payload["certificate"] = _CERT_THRESHOLD
            lines = ["none", _CERT_THRESHOLD]
        else:
            payload.update(result=value, exists=True)
            lines = [
                f"F threshold = {value:.1f}",
                f"unrounded: {_fmt(value, args.raw)}",
            ]
    elif mode == "critical-value":
        value = solve_critical_value(args.fbar, args.alpha)
        payload.update(result=value, exists=True)
        lines = [
            f"sqrt critical value = {math.sqrt(value):.2f}",
            f"c = {_fmt(value, args.raw)} (sqrt c = {_fmt(math.sqrt(value), args.raw)})",
        ]
    elif mode == "max-rho":
        region = validity_region(args.crit, args.alpha)
        payload.update(result=region.rho_bar, exists=True)
        lines = [
            f"max rho = {region.rho_bar:.2f}",
            f"unrounded: {_fmt(region.rho_bar, args.raw)}",
        ]
    else:  # min-EF
        region = validity_region(args.crit, args.alpha)
        if region.ef_bar is None:
            payload["certificate"] = _CERT_EF
            lines = ["none", _CERT_EF]
        else:
            payload.update(result=region.ef_bar, exists=True)
            lines = [
                f"min E[F] = {region.ef_bar:.1f}",
                f"unrounded: {_fmt(region.ef_bar, args.raw)}",
            ]
    _emit(payload, lines, args.format)
    return 0


def cmd_table3(args: argparse.Namespace) -> int:
    cvf = _get_cvf(args.alpha)
    csv_text = table3_csv(cvf)
    out = None
    if args.out is not None:
        out = str(args.out)
        Path(out).write_text(csv_text, encoding="utf-8")
    payload = {"command": "table3", "alpha": args.alpha, "out": out, "csv": csv_text}
    if out is not None:
        lines = [f"wrote {out}"]
    else:
        lines = csv_text.splitlines()
    _emit(payload, lines, args.format)
    return 0


def cmd_audit(args: argparse.Namespace) -> int:
    records = read_corpus_csv(args.input, prefer_reported=args.prefer_reported)
    procedures = {name: _build_procedure(name, _PRESET_ALPHA) for name in _AUDIT_PROCEDURES}
    report = classify_corpus(records, procedures)
    report_json = report_to_json(report)
    out = None
    if args.out is not None:
        out = str(args.out)
        Path(out).write_text(report_json, encoding="utf-8")
    payload = {
        "command": "audit",
        "input": str(args.input),
        "out": out,
        "report": json.loads(report_json),
    }
    if out is not None:
        lines = [f"wrote {out}"]
    else:
        lines = report_json.splitlines()
    _emit(payload, lines, args.format)
    return 0


def cmd_mc(args: argparse.Namespace) -> int:
    f0 = _resolve_f0(args)
    if not (math.isfinite(args.rho) and abs(args.rho) <= 1.0):
        raise DomainError(f"--rho must lie in [-1, 1], got {args.rho!r}")
    proc = _build_procedure(args.procedure, args.alpha)
    cfg = McConfig(n_draws=args.n, seed=args.seed, point=NuisancePoint(args.rho, f0))
    estimate, std_error = mc_rejection(proc, cfg)
    payload = {
        "command": "mc",
        "procedure": args.procedure,
        "alpha": args.alpha,
        "rho": args.rho,
        "f0": f0,
        "n_draws": args.n,
        "seed": args.seed,
        "estimate": estimate,
        "std_error": std_error,
    }
    lines = [
        f"estimate = {_fmt(estimate, args.raw)} +/- {_fmt(std_error, args.raw)}"
        f" (n = {args.n}, seed = {args.seed})",
    ]
    _emit(payload, lines, args.format)
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("plain", "json"), default="plain")
    sub.add_argument(
        "--raw", action="store_true", help="full-precision numbers in plain output"
    )
    sub.add_argument("--alpha", type=float, default=0.05)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tfiv", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("cv", help="critical value c(F) at a first-stage F")
    p.add_argument("--f", type=float, required=True, help="observed F statistic")
    _add_common(p)
    p.set_defaults(func=cmd_cv)

    p = subs.add_parser("test", help="accept/reject a t statistic at an observed F")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--f", type=float, required=True)
    p.add_argument("--procedure", choices=_TEST_PROCEDURES, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_test)

    p = subs.add_parser("ci", help="adjusted confidence interval and standard error")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--se", type=float, required=True)
    p.add_argument("--f", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_ci)

    p = subs.add_parser("size", help="exact rejection probability at (rho, f0)")
    p.add_argument("--procedure", choices=_SIZE_PROCEDURES, required=True)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--f0", type=float, default=None)
    p.add_argument("--ef", type=float, default=None, help="E[F] = 1 + f0^2 instead of --f0")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument(
        "--sweep",
        action="store_true",
        help="emit a rho,prob profile over rho in [-1, 1] at the fixed f0",
    )
    _add_common(p)
    p.set_defaults(func=cmd_size)

    p = subs.add_parser("solve", help="headline constants: thresholds and bounds")
    p.add_argument(
        "--mode",
        choices=("threshold-F", "critical-value", "min-EF", "max-rho"),
        required=True,
    )
    p.add_argument("--crit", type=float, default=None, help="t^2 critical value")
    p.add_argument("--fbar", type=float, default=None, help="F threshold")
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = subs.add_parser("table3", help="write the critical-value table as CSV")
    p.add_argument("--out", type=Path, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_table3)

    p = subs.add_parser("audit", help="reclassify a t/F corpus under each procedure")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument(
        "--prefer-reported",
        action="store_true",
        help="take F_reported over F_derived when both are present",
    )
    _add_common(p)
    p.set_defaults(func=cmd_audit)

    p = subs.add_parser("mc", help="Monte Carlo check of a rejection probability")
    p.add_argument("--procedure", choices=_SIZE_PROCEDURES, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--f0", type=float, default=None)
    p.add_argument("--ef", type=float, default=None)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_mc)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not (math.isfinite(args.alpha) and 0.0 < args.alpha < 1.0):
        _emit_error("DomainError", f"--alpha must lie in (0, 1), got {args.alpha!r}")
        return 1
    try:
        return args.func(args)
    except TfivError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1
    except OSError as exc:
        _emit_error("IOError", str(exc))
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
