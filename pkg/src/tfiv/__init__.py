"""Exact size calculations for t-ratio inference with a single instrument."""

from .errors import (
    ConstructionError,
    DegenerateCase,
    DomainError,
    TfivError,
    ToleranceUnmet,
)
from .regions import RegionSpec, boundary_roots, quartic_t2_rho1, rho1_rejection_roots
from .size_engine import (
    ConventionalT,
    HybridAR,
    NuisancePoint,
    Procedure,
    PureAR,
    SizeResult,
    TFProcedure,
    ThresholdTF,
    hybrid_extra_term,
    rejection_prob,
    rejection_prob_matrix,
    rejection_prob_profile,
    rejection_prob_rho1,
)
from .statistics import CoreStats, IVSummary, core_stats_from_summary, t_squared_identity
from .worst_case import (
    GridSpec,
    HybridBoundRow,
    ValidityRegion,
    WorstCase,
    hybrid_nonexistence_certificate,
    local_max_size,
    solve_critical_value,
    solve_threshold_F,
    validity_region,
    worst_case_size,
)
from .audit import (
    AuditReport,
    ProcedureCells,
    SpecRecord,
    classify_corpus,
    classify_record,
    read_corpus_csv,
    report_to_json,
)
from .mc_oracle import McConfig, SyntheticDGP, mc_rejection, simulate_iv_dataset
from .tf_critical import (
    CriticalValueFunction,
    build_cvf,
    cvf_eval,
    default_knot_grid,
    emit_table3,
    load_cvf,
    save_cvf,
    table3_csv,
    tf_adjusted_se,
)

__all__ = [
    "TfivError",
    "DomainError",
    "DegenerateCase",
    "ToleranceUnmet",
    "ConstructionError",
    "RegionSpec",
    "boundary_roots",
    "quartic_t2_rho1",
    "rho1_rejection_roots",
    "IVSummary",
    "CoreStats",
    "core_stats_from_summary",
    "t_squared_identity",
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
    "CriticalValueFunction",
    "default_knot_grid",
    "build_cvf",
    "cvf_eval",
    "tf_adjusted_se",
    "emit_table3",
    "table3_csv",
    "save_cvf",
    "load_cvf",
    "McConfig",
    "SyntheticDGP",
    "mc_rejection",
    "simulate_iv_dataset",
    "SpecRecord",
    "ProcedureCells",
    "AuditReport",
    "classify_record",
    "classify_corpus",
    "read_corpus_csv",
    "report_to_json",
]
