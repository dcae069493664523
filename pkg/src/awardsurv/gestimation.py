"""Effect estimation by test inversion over the structural model.

The estimate of the survival effect is the value of ``psi`` at which the
back-transformed latent lifetime carries no information about who wins
(the fitted latent-time coefficient crosses zero); the confidence interval
collects every ``psi`` whose score test is not rejected.  A Kaplan-Meier
comparison of actual versus latent lifetimes for first-nomination winners
translates ``psi`` into years of survival advantage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .clogit import CovariateBasis, DesignConfig, fit_model, score_test
from .domain import AwardStratum
from .errors import (
    AmbiguousInversionError,
    EmptyInputError,
    NoEstimateError,
)
from .rpsaftm import StrataArrays
from .survival.km import KmCurve, km

__all__ = [
    "ExclusionReport",
    "ThetaPoint",
    "GEstimate",
    "SurvivalAdvantage",
    "SensitivityConfig",
    "SensitivityRow",
    "DiagnosticRow",
    "apply_exclusion_rule",
    "theta_curve",
    "g_estimate",
    "survival_advantage",
    "sensitivity_analysis",
    "diagnostics",
    "GEstimator",
]

DEFAULT_SEARCH = (-0.5, 0.5)
DEFAULT_STEP = 0.0025
_ROOT_TOL = 1e-6
_CI_TOL = 1e-5


# ---------------------------------------------------------------------------
# Exclusion rule


@dataclass(frozen=True)
class ExclusionReport:
    """What the repeat-winner rule removed.

    ``dropped_records`` lists (award_index, performer_id) pairs whose first
    win predates the award; ``dropped_strata`` lists awards that lost their
    winner or kept fewer than two candidates.
    """

    dropped_records: tuple[tuple[int, str], ...]
    dropped_strata: tuple[int, ...]
    n_strata: int
    n_records: int


def apply_exclusion_rule(
    strata: list[AwardStratum],
) -> tuple[list[AwardStratum], ExclusionReport]:
    """Drop candidates who already won before the award date.

    A stratum whose winner is dropped, or that retains fewer than two
    candidates, is removed entirely; its remaining candidates carry no
    information about the winner model.
    """
    kept: list[AwardStratum] = []
    dropped_records: list[tuple[int, str]] = []
    dropped_strata: list[int] = []
    for stratum in strata:
        survivors = []
        for cand in stratum.candidates:
            if cand.F is not None and cand.F < cand.D:
                dropped_records.append((stratum.award_index, cand.performer_id))
            else:
                survivors.append(cand)
        if sum(c.A for c in survivors) != 1 or len(survivors) < 2:
            dropped_strata.append(stratum.award_index)
            continue
        if len(survivors) == stratum.n:
            kept.append(stratum)
        else:
            kept.append(
                AwardStratum(award_index=stratum.award_index, candidates=tuple(survivors))
            )
    report = ExclusionReport(
        dropped_records=tuple(dropped_records),
        dropped_strata=tuple(dropped_strata),
        n_strata=len(kept),
        n_records=sum(s.n for s in kept),
    )
    return kept, report


# ---------------------------------------------------------------------------
# Grid evaluation


@dataclass(frozen=True)
class ThetaPoint:
    psi: float
    theta: float
    p_value: float


def _prepared(strata):
    arrays = strata if isinstance(strata, StrataArrays) else StrataArrays.from_strata(strata)
    return arrays


def theta_curve(
    strata: list[AwardStratum] | StrataArrays,
    psi_grid,
    config: DesignConfig = DesignConfig(),
    theta_star: float = 0.0,
) -> list[ThetaPoint]:
    """Latent-time coefficient and score-test p at each grid value.

    ``theta_star`` pins the tested null for the coefficient; the reported
    ``theta`` is the free deviation from it.
    """
    arrays = _prepared(strata)
    basis = CovariateBasis(config).fit(arrays.nomage)
    out = []
    for psi in np.asarray(psi_grid, dtype=float):
        fit = fit_model(arrays, float(psi), config, theta_offset=theta_star, basis=basis)
        _, p = score_test(arrays, float(psi), config, theta_null=theta_star, basis=basis)
        out.append(ThetaPoint(psi=float(psi), theta=fit.theta, p_value=p))
    return out


@dataclass(frozen=True)
class GEstimate:
    """Point estimate, inverted confidence interval, and the grid curve."""

    psi_hat: float
    ci: tuple[float, float]
    theta_curve: tuple[ThetaPoint, ...]
    level: float
    p_at_estimate: float
    warnings: tuple[str, ...] = ()

    @property
    def survival_multiplier_ci(self) -> tuple[float, float]:
        """exp(-psi) range: how winning multiplies remaining lifetime."""
        lo, hi = self.ci
        return (math.exp(-hi), math.exp(-lo))


def _check_unimodal(ps: np.ndarray, curve) -> None:
    """Reject p-curves that rise again after falling (ambiguous inversion)."""
    diffs = np.diff(ps)
    falling = False
    for d in diffs:
        if d < -1e-12:
            falling = True
        elif d > 1e-12 and falling:
            raise AmbiguousInversionError(
                "score-test p-values are not unimodal over the search grid",
                curve=curve,
            )


def _invert(
    arrays: StrataArrays,
    config: DesignConfig,
    theta_star: float,
    search: tuple[float, float],
    step: float,
    level: float,
) -> GEstimate:
    lo, hi = search
    if not lo < hi:
        raise ValueError("search range must satisfy lo < hi")
    basis = CovariateBasis(config).fit(arrays.nomage)

    def theta_at(psi: float) -> float:
        return fit_model(arrays, psi, config, theta_offset=theta_star, basis=basis).theta

    def p_at(psi: float) -> float:
        return score_test(arrays, psi, config, theta_null=theta_star, basis=basis)[1]

    grid = np.arange(lo, hi + step / 2, step)
    points = [ThetaPoint(float(g), theta_at(float(g)), p_at(float(g))) for g in grid]
    thetas = np.array([pt.theta for pt in points])
    ps = np.array([pt.p_value for pt in points])
    curve = tuple(points)
    warnings: list[str] = []

    # point estimate: root of the free coefficient
    sign_changes = np.flatnonzero(np.sign(thetas[:-1]) != np.sign(thetas[1:]))
    psi_hat = None
    if thetas.size and np.any(thetas == 0.0):
        psi_hat = float(grid[np.flatnonzero(thetas == 0.0)[0]])
    elif sign_changes.size:
        # with several brackets keep the one nearest the p maximum
        best = sign_changes[0]
        if sign_changes.size > 1:
            peak = int(np.argmax(ps))
            best = sign_changes[int(np.argmin(np.abs(sign_changes - peak)))]
            warnings.append("multiple zero crossings of theta; kept the one nearest max p")
        a, b = float(grid[best]), float(grid[best + 1])
        fa = thetas[best]
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = theta_at(mid)
            if abs(fm) < _ROOT_TOL:
                psi_hat = mid
                break
            if np.sign(fm) == np.sign(fa):
                a, fa = mid, fm
            else:
                b = mid
        else:
            psi_hat = 0.5 * (a + b)
    else:
        alpha = 1.0 - level
        if ps.max() < alpha:
            raise NoEstimateError(
                "no zero crossing of theta and every grid p-value is below "
                f"{alpha:.3g}: effect range inconsistent with the model"
            )
        psi_hat = float(grid[int(np.argmax(ps))])
        warnings.append("no zero crossing of theta; used the maximum-p grid point")

    _check_unimodal(ps, curve)

    alpha = 1.0 - level
    p_hat = p_at(psi_hat)
    grid_p = {float(g): float(p) for g, p in zip(grid, ps)}

    def endpoint(side: int) -> float:
        """Bisect p(psi) - alpha outward from the estimate (side -1 or +1)."""
        if side < 0:
            outside = [g for g in grid if g < psi_hat and grid_p[float(g)] < alpha]
            if not outside:
                warnings.append("lower endpoint clamped to the search bound")
                return float(grid[0])
            outer = max(outside)
        else:
            outside = [g for g in grid if g > psi_hat and grid_p[float(g)] < alpha]
            if not outside:
                warnings.append("upper endpoint clamped to the search bound")
                return float(grid[-1])
            outer = min(outside)
        inner = psi_hat
        while abs(outer - inner) > _CI_TOL:
            mid = 0.5 * (inner + outer)
            if p_at(mid) >= alpha:
                inner = mid
            else:
                outer = mid
        return 0.5 * (inner + outer)

    ci = (endpoint(-1), endpoint(+1))
    return GEstimate(
        psi_hat=float(psi_hat),
        ci=(float(ci[0]), float(ci[1])),
        theta_curve=curve,
        level=level,
        p_at_estimate=float(p_hat),
        warnings=tuple(warnings),
    )


def g_estimate(
    strata: list[AwardStratum] | StrataArrays,
    config: DesignConfig = DesignConfig(),
    search: tuple[float, float] = DEFAULT_SEARCH,
    step: float = DEFAULT_STEP,
    level: float = 0.95,
) -> GEstimate:
    """Estimate the effect and its test-inversion confidence interval.

    Expects the exclusion rule to have been applied already.
    """
    return _invert(_prepared(strata), config, 0.0, search, step, level)


# ---------------------------------------------------------------------------
# Survival advantage


@dataclass(frozen=True)
class SurvivalAdvantage:
    """Median-years gain of actual over latent lifetime for first winners."""

    years: float
    ci_years: tuple[float, float]
    median_actual: float
    median_latent: float


def _first_win_median(arrays: StrataArrays, psi: float) -> float:
    uss, censored = arrays.u_star_star(psi)
    curve = km(uss, ~censored)
    return curve.median(label=f"latent lifetime at psi={psi:.4f}")


def survival_advantage(
    strata_all: list[AwardStratum],
    psi_hat: float,
    ci: tuple[float, float],
) -> SurvivalAdvantage:
    """Years of survival attributable to winning, for first-nomination winners.

    Uses the unfiltered dataset: candidates who won at their first nomination.
    The interval plugs the confidence limits of ``psi`` into the same
    median-difference computation.
    """
    winners = [
        c
        for s in strata_all
        for c in s.candidates
        if c.A and c.numprenom == 0
    ]
    if not winners:
        raise EmptyInputError("no first-nomination winners in the dataset")
    sub = [AwardStratum(award_index=k, candidates=(w,)) for k, w in enumerate(winners, 1)]
    arrays = StrataArrays.from_strata(sub)

    actual = km(arrays.x, arrays.death_observed)
    median_actual = actual.median(label="actual lifetime")

    def advantage_at(psi: float) -> float:
        return median_actual - _first_win_median(arrays, psi)

    years = advantage_at(psi_hat)
    lo, hi = sorted((advantage_at(ci[0]), advantage_at(ci[1])))
    return SurvivalAdvantage(
        years=float(years),
        ci_years=(float(lo), float(hi)),
        median_actual=float(median_actual),
        median_latent=float(median_actual - years),
    )


# ---------------------------------------------------------------------------
# Sensitivity analysis


@dataclass(frozen=True)
class SensitivityConfig:
    """Residual-association grid for relaxing the fair-selection assumption.

    Each ``theta_star`` is the assumed latent-time coefficient among
    candidates with identical covariates; ``exp(10 * theta_star)`` is the win
    odds ratio conferred by ten extra years of latent lifetime.
    """

    theta_star_grid: tuple[float, ...]

    @classmethod
    def from_odds_ratios(cls, odds_ratios) -> "SensitivityConfig":
        return cls(theta_star_grid=tuple(math.log(r) / 10.0 for r in odds_ratios))

    def odds_ratios(self) -> tuple[float, ...]:
        return tuple(math.exp(10.0 * t) for t in self.theta_star_grid)


@dataclass(frozen=True)
class SensitivityRow:
    theta_star: float
    odds_ratio: float
    estimate: GEstimate | None
    advantage: SurvivalAdvantage | None
    error: str | None = None


def sensitivity_analysis(
    strata: list[AwardStratum] | StrataArrays,
    strata_all: list[AwardStratum],
    sens: SensitivityConfig,
    config: DesignConfig = DesignConfig(),
    search: tuple[float, float] = DEFAULT_SEARCH,
    step: float = DEFAULT_STEP,
    level: float = 0.95,
) -> list[SensitivityRow]:
    """Repeat the inversion under each assumed residual association.

    ``strata`` is the exclusion-filtered analysis set; ``strata_all`` the
    unfiltered data for the survival-advantage translation.  Failures are
    captured per row so one pathological null does not lose the table.
    """
    arrays = _prepared(strata)
    rows: list[SensitivityRow] = []
    for theta_star in sens.theta_star_grid:
        orow = math.exp(10.0 * theta_star)
        try:
            est = _invert(arrays, config, theta_star, search, step, level)
            adv = survival_advantage(strata_all, est.psi_hat, est.ci)
            rows.append(
                SensitivityRow(
                    theta_star=theta_star,
                    odds_ratio=orow,
                    estimate=est,
                    advantage=adv,
                )
            )
        except Exception as err:  # noqa: BLE001 - per-row capture is the contract
            rows.append(
                SensitivityRow(
                    theta_star=theta_star,
                    odds_ratio=orow,
                    estimate=None,
                    advantage=None,
                    error=f"{type(err).__name__}: {err}",
                )
            )
    return rows


# ---------------------------------------------------------------------------
# Diagnostics


@dataclass(frozen=True)
class DiagnosticRow:
    """Five-number summary of censored latent time for one cell."""

    group: int
    age_low: float
    age_high: float
    winner: bool
    n: int
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


def diagnostics(
    strata: list[AwardStratum] | StrataArrays,
    psi_hat: float,
    groups: int = 5,
) -> list[DiagnosticRow]:
    """Winner versus non-winner latent-time summaries by nomination-age band.

    Groups are quantile bins of age at nomination over the analysis set; an
    empty cell yields a row with ``n=0`` and NaN summaries.
    """
    if groups < 2:
        raise ValueError("need at least two quantile groups")
    arrays = _prepared(strata)
    uss, _ = arrays.u_star_star(psi_hat)
    edges = np.quantile(arrays.nomage, np.linspace(0, 1, groups + 1))
    # collapse duplicate edges (degenerate age distributions)
    edges = np.unique(edges)
    n_groups = max(1, edges.size - 1)
    assignment = np.clip(np.searchsorted(edges, arrays.nomage, side="right") - 1, 0, n_groups - 1)
    rows: list[DiagnosticRow] = []
    for g in range(n_groups):
        in_group = assignment == g
        for winner in (True, False):
            vals = uss[in_group & (arrays.y == winner)]
            if vals.size == 0:
                summary = (math.nan,) * 5
            else:
                summary = tuple(
                    float(v) for v in np.quantile(vals, [0.0, 0.25, 0.5, 0.75, 1.0])
                )
            rows.append(
                DiagnosticRow(
                    group=g + 1,
                    age_low=float(edges[g]),
                    age_high=float(edges[g + 1]),
                    winner=winner,
                    n=int(vals.size),
                    minimum=summary[0],
                    q1=summary[1],
                    median=summary[2],
                    q3=summary[3],
                    maximum=summary[4],
                )
            )
    return rows


# ---------------------------------------------------------------------------
# Estimator facade


class GEstimator(BaseEstimator):
    """End-to-end pipeline: exclusion rule, inversion, advantage, diagnostics.

    Parameters mirror the underlying operations; ``basis`` is the age basis
    token (``poly3`` or ``spline:K``).  After ``fit``, the fitted attributes
    are ``estimate_`` (:class:`GEstimate`), ``exclusion_`` and
    ``advantage_``.
    """

    def __init__(
        self,
        basis: str = "poly3",
        search: tuple[float, float] = DEFAULT_SEARCH,
        step: float = DEFAULT_STEP,
        level: float = 0.95,
    ):
        self.basis = basis
        self.search = search
        self.step = step
        self.level = level

    def _config(self) -> DesignConfig:
        return DesignConfig(nomage_basis=self.basis)

    def fit(self, strata: list[AwardStratum]):
        analysis, report = apply_exclusion_rule(strata)
        self.exclusion_ = report
        self.analysis_strata_ = analysis
        self.estimate_ = g_estimate(
            analysis,
            config=self._config(),
            search=self.search,
            step=self.step,
            level=self.level,
        )
        self.advantage_ = survival_advantage(
            strata, self.estimate_.psi_hat, self.estimate_.ci
        )
        return self

    def diagnose(self, groups: int = 5) -> list[DiagnosticRow]:
        return diagnostics(self.analysis_strata_, self.estimate_.psi_hat, groups)
