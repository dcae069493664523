"""Person-year expansion and binomial logistic regression.

Each subject is expanded into one Bernoulli record per year alive after the
time origin; death in a year makes that record an event.  A winner's record
year is credited as exposed when the first win falls on or before the end of
that year.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np
from scipy import linalg, stats

from ..errors import (
    EmptyInputError,
    MonotoneLikelihoodError,
    NonConvergenceError,
    RankDeficiencyError,
)
from .records import SurvivalRecord

__all__ = ["LogisticFit", "PersonYearsFit", "fit_logistic", "expand_person_years", "person_years"]


@dataclass(frozen=True)
class LogisticFit:
    """Maximum-likelihood logistic regression fit (intercept included)."""

    columns: tuple[str, ...]
    coef: np.ndarray
    cov: np.ndarray
    loglik: float
    iterations: int
    converged: bool

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))

    @property
    def p_value(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(self.se > 0, self.coef / self.se, 0.0)
        return 2.0 * stats.norm.sf(np.abs(z))


def _logistic_parts(X, y, beta):
    eta = X @ beta
    # log(1 + exp(eta)) computed stably for both signs of eta
    loglik = float(y @ eta - np.logaddexp(0.0, eta).sum())
    prob = 1.0 / (1.0 + np.exp(-eta))
    grad = X.T @ (y - prob)
    w = prob * (1.0 - prob)
    info = X.T @ (X * w[:, None])
    return loglik, grad, info


def fit_logistic(
    X,
    y,
    columns=None,
    tol: float = 1e-9,
    max_iter: int = 100,
) -> LogisticFit:
    """Newton fit of a logistic regression; an intercept column is prepended."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X and y must share their first dimension")
    if X.shape[0] == 0:
        raise EmptyInputError("no rows to fit")
    n, p = X.shape
    columns = ("intercept",) + (
        tuple(columns) if columns is not None else tuple(f"x{j}" for j in range(p))
    )
    sd = X.std(axis=0)
    if np.any(sd == 0):
        bad = ", ".join(str(j) for j in np.flatnonzero(sd == 0))
        raise RankDeficiencyError(f"constant covariate column(s): {bad}")
    mean = X.mean(axis=0)
    Xs = np.column_stack([np.ones(n), (X - mean) / sd])

    beta = np.zeros(p + 1)
    loglik, grad, info = _logistic_parts(Xs, y, beta)
    it = 0
    converged = np.max(np.abs(grad)) < tol
    while not converged and it < max_iter:
        it += 1
        try:
            delta = linalg.solve(info, grad, assume_a="pos")
        except linalg.LinAlgError as err:
            raise RankDeficiencyError("singular information in logistic fit") from err
        step = 1.0
        new_beta = beta + delta
        new_ll = _logistic_parts(Xs, y, new_beta)[0]
        while not np.isfinite(new_ll) or new_ll < loglik - 1e-12:
            step *= 0.5
            if step < 1e-12:
                break
            new_beta = beta + step * delta
            new_ll = _logistic_parts(Xs, y, new_beta)[0]
        moved = np.max(np.abs(new_beta - beta))
        beta = new_beta
        if np.max(np.abs(beta[1:])) > 40:
            raise MonotoneLikelihoodError("separated data: coefficient diverging")
        loglik, grad, info = _logistic_parts(Xs, y, beta)
        if np.max(np.abs(grad)) < tol or moved < 1e-12:
            converged = True
    if not converged:
        raise NonConvergenceError(
            f"logistic fit did not converge in {max_iter} iterations", last_iterate=beta
        )
    try:
        cov_s = linalg.inv(info)
    except linalg.LinAlgError as err:
        raise RankDeficiencyError("singular information at the optimum") from err
    # back-transform: slope_raw = slope_std / sd, intercept absorbs the means
    scale = np.r_[1.0, sd]
    coef = beta / scale
    coef[0] -= float(mean @ coef[1:])
    J = np.eye(p + 1) / scale[None, :]
    J[0, 1:] = -mean / sd
    cov = J @ cov_s @ J.T
    return LogisticFit(
        columns=columns,
        coef=coef,
        cov=cov,
        loglik=loglik,
        iterations=it,
        converged=converged,
    )


def expand_person_years(
    records: list[SurvivalRecord],
    time_zero: str = "nomination-day",
):
    """Yearly Bernoulli records: (death flag, winner flag, age, calendar year).

    Requires ``yob`` (year of birth) in each record's covariates for the
    calendar-year column.  Subjects without a nomination are skipped on the
    nomination-day axis.
    """
    ys: list[float] = []
    rows: list[tuple[float, float, float]] = []
    for rec in records:
        if time_zero == "nomination-day":
            origin = rec.first_nomination
            if origin is None:
                continue
        elif time_zero == "birthday":
            origin = 0.0
        else:
            raise ValueError(f"unknown time zero {time_zero!r}")
        total = rec.end - origin
        if total <= 0:
            continue
        n_years = max(1, ceil(total))
        yob = float(rec.covariates["yob"])
        fw = rec.first_win
        for k in range(n_years):
            age = origin + k
            won = 1.0 if fw is not None and fw <= age + 1 else 0.0
            ys.append(1.0 if rec.event and k == n_years - 1 else 0.0)
            rows.append((won, age, yob + age))
    if not rows:
        raise EmptyInputError("person-year expansion produced no records")
    X = np.asarray(rows)
    return np.asarray(ys), X


@dataclass(frozen=True)
class PersonYearsFit:
    """Person-years logistic analysis summary."""

    fit: LogisticFit
    n_records: int
    level: float

    @property
    def winner_coef(self) -> float:
        return float(self.fit.coef[self.fit.columns.index("winner")])

    @property
    def winner_se(self) -> float:
        return float(self.fit.se[self.fit.columns.index("winner")])

    @property
    def p_value(self) -> float:
        return float(self.fit.p_value[self.fit.columns.index("winner")])

    def mortality_reduction(self) -> tuple[float, tuple[float, float]]:
        zq = stats.norm.ppf(0.5 + self.level / 2.0)
        lo = self.winner_coef - zq * self.winner_se
        hi = self.winner_coef + zq * self.winner_se
        return float(1.0 - np.exp(self.winner_coef)), (
            float(1.0 - np.exp(hi)),
            float(1.0 - np.exp(lo)),
        )


def person_years(
    records: list[SurvivalRecord],
    time_zero: str = "nomination-day",
    covariates: tuple[str, ...] = ("age", "year"),
    level: float = 0.95,
) -> PersonYearsFit:
    """Expand to person-years and regress death on winner status and covariates."""
    y, X = expand_person_years(records, time_zero)
    names = ["winner"]
    keep = [0]
    if "age" in covariates:
        names.append("age")
        keep.append(1)
    if "year" in covariates:
        names.append("year")
        keep.append(2)
    fit = fit_logistic(X[:, keep], y, columns=names)
    return PersonYearsFit(fit=fit, n_records=len(y), level=level)
