"""Survival analysis of award winning under survivor and immortal-time bias.

The toolkit estimates how winning a major award changes remaining lifetime
using a rank-preserving structural accelerated failure time model fitted by
g-estimation, compares that against conventional hazard-model and
person-years analyses, and calibrates every method on synthetic cohorts
whose lifetimes are fixed before any award is given.
"""

__version__ = "0.1.0"

from .clogit import (
    ConditionalLogit,
    CovariateBasis,
    Design,
    DesignConfig,
    FitResult,
    build_design,
    fit_model,
    score_test,
)
from .domain import (
    CATEGORIES,
    DAYS_PER_YEAR,
    AwardStratum,
    CandidateRecord,
    Nomination,
    Performer,
    build_candidate_records,
    years_between,
)
from .errors import (
    AmbiguousInversionError,
    AwardSurvError,
    DataFormatError,
    DegenerateModelError,
    EmptyInputError,
    InconsistentRecordError,
    InvalidCensoringError,
    InvalidRecordError,
    MalformedStratumError,
    MonotoneLikelihoodError,
    NoEstimateError,
    NonConvergenceError,
    PartialReportError,
    RankDeficiencyError,
    ReferentialIntegrityError,
    ReliabilityError,
    UndefinedMedianError,
)
from .gestimation import (
    DEFAULT_SEARCH,
    DEFAULT_STEP,
    DiagnosticRow,
    ExclusionReport,
    GEstimate,
    GEstimator,
    SensitivityConfig,
    SensitivityRow,
    SurvivalAdvantage,
    ThetaPoint,
    apply_exclusion_rule,
    diagnostics,
    g_estimate,
    sensitivity_analysis,
    survival_advantage,
    theta_curve,
)
from .io import DEFAULT_CENSOR_DATE, IngestResult, ingest, parse_dataset, serialize
from .report import (
    ComparisonRow,
    ReportBundle,
    build_report,
    dataset_hash,
    write_report,
)
from .rpsaftm import (
    LatentTime,
    StrataArrays,
    artificial_censor_time,
    censored_latent,
    latent_time,
)
from .simulation import (
    METHODS,
    MortalityTables,
    ReplicationResult,
    SimAward,
    SimCohort,
    SimConfig,
    generate_cohort,
    mortality_tables,
    replicate,
    run_awards,
    run_method,
    simulate_cohort,
)
from .survival import (
    CoxFit,
    CoxSpec,
    Episodes,
    KaplanMeier,
    KmCurve,
    LogisticFit,
    PerformerHistory,
    PersonYearsFit,
    SurvivalRecord,
    build_episodes,
    cox_fit,
    cox_fit_arrays,
    discrete_hazard_lrt,
    expand_person_years,
    fit_logistic,
    km,
    person_years,
)

__all__ = [
    "__version__",
    # domain
    "CATEGORIES",
    "DAYS_PER_YEAR",
    "AwardStratum",
    "CandidateRecord",
    "Nomination",
    "Performer",
    "build_candidate_records",
    "years_between",
    # structural model
    "LatentTime",
    "StrataArrays",
    "artificial_censor_time",
    "censored_latent",
    "latent_time",
    # winner model
    "ConditionalLogit",
    "CovariateBasis",
    "Design",
    "DesignConfig",
    "FitResult",
    "build_design",
    "fit_model",
    "score_test",
    # estimation
    "DEFAULT_SEARCH",
    "DEFAULT_STEP",
    "DiagnosticRow",
    "ExclusionReport",
    "GEstimate",
    "GEstimator",
    "SensitivityConfig",
    "SensitivityRow",
    "SurvivalAdvantage",
    "ThetaPoint",
    "apply_exclusion_rule",
    "diagnostics",
    "g_estimate",
    "sensitivity_analysis",
    "survival_advantage",
    "theta_curve",
    # survival analyses
    "CoxFit",
    "CoxSpec",
    "Episodes",
    "KaplanMeier",
    "KmCurve",
    "LogisticFit",
    "PerformerHistory",
    "PersonYearsFit",
    "SurvivalRecord",
    "build_episodes",
    "cox_fit",
    "cox_fit_arrays",
    "discrete_hazard_lrt",
    "expand_person_years",
    "fit_logistic",
    "km",
    "person_years",
    # simulation
    "METHODS",
    "MortalityTables",
    "ReplicationResult",
    "SimAward",
    "SimCohort",
    "SimConfig",
    "generate_cohort",
    "mortality_tables",
    "replicate",
    "run_awards",
    "run_method",
    "simulate_cohort",
    # io and report
    "DEFAULT_CENSOR_DATE",
    "IngestResult",
    "ingest",
    "parse_dataset",
    "serialize",
    "ComparisonRow",
    "ReportBundle",
    "build_report",
    "dataset_hash",
    "write_report",
    # errors
    "AwardSurvError",
    "AmbiguousInversionError",
    "DataFormatError",
    "DegenerateModelError",
    "EmptyInputError",
    "InconsistentRecordError",
    "InvalidCensoringError",
    "InvalidRecordError",
    "MalformedStratumError",
    "MonotoneLikelihoodError",
    "NoEstimateError",
    "NonConvergenceError",
    "PartialReportError",
    "RankDeficiencyError",
    "ReferentialIntegrityError",
    "ReliabilityError",
    "UndefinedMedianError",
]
