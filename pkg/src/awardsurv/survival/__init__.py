"""Classical survival methods used as comparison baselines."""

from .cox import CoxFit, CoxSpec, Episodes, build_episodes, cox_fit, cox_fit_arrays
from .discrete_hazard import (
    EVAL_AGES,
    DiscreteHazardModel,
    LrtResult,
    PerformerHistory,
    build_model,
    discrete_hazard_lrt,
    tally_cells,
)
from .km import KaplanMeier, KmCurve, km
from .person_years import (
    LogisticFit,
    PersonYearsFit,
    expand_person_years,
    fit_logistic,
    person_years,
)
from .records import SurvivalRecord

__all__ = [
    "EVAL_AGES",
    "SurvivalRecord",
    "KmCurve",
    "km",
    "KaplanMeier",
    "CoxSpec",
    "CoxFit",
    "Episodes",
    "build_episodes",
    "cox_fit",
    "cox_fit_arrays",
    "LogisticFit",
    "PersonYearsFit",
    "fit_logistic",
    "expand_person_years",
    "person_years",
    "PerformerHistory",
    "DiscreteHazardModel",
    "LrtResult",
    "build_model",
    "tally_cells",
    "discrete_hazard_lrt",
]
