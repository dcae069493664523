"""Cox proportional hazards with counting-process episodes.

Episodes are half-open intervals (start, stop] on the age axis; a subject
is at risk at event time t when start < t <= stop.  The time-zero choice
sets each subject's entry time (birth, or first nomination with the
preceding person-time left-truncated).  Time-dependent covariates (winner
status, nomination and win counts) change value only at episode boundaries
and are evaluated at the left endpoint, so an event at a covariate-change
time is attributed to the pre-change state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from ..errors import (
    DegenerateModelError,
    EmptyInputError,
    MonotoneLikelihoodError,
    NonConvergenceError,
    RankDeficiencyError,
)
from .records import SurvivalRecord

__all__ = ["CoxSpec", "Episodes", "CoxFit", "build_episodes", "cox_fit", "cox_fit_arrays"]

_STATUSES = ("static", "dynamic")
_TIME_ZEROS = ("birthday", "nomination-day")
_TIE_METHODS = ("efron", "breslow")
_HISTORY_COVARIATES = ("numnom", "numwins")


@dataclass(frozen=True)
class CoxSpec:
    """Analysis variant: winner-status handling, time origin, covariates.

    ``covariates`` names static values from the record (for example ``yob``)
    plus the special time-dependent counts ``numnom`` and ``numwins``.
    Static status with nomination-day time zero is rejected: entering at
    first nomination with a winner flag that anticipates future wins is not
    a coherent analysis.
    """

    status: str = "dynamic"
    time_zero: str = "birthday"
    covariates: tuple[str, ...] = ()
    tie_method: str = "efron"

    def __post_init__(self):
        if self.status not in _STATUSES:
            raise ValueError(f"status must be one of {_STATUSES}, got {self.status!r}")
        if self.time_zero not in _TIME_ZEROS:
            raise ValueError(f"time_zero must be one of {_TIME_ZEROS}, got {self.time_zero!r}")
        if self.tie_method not in _TIE_METHODS:
            raise ValueError(f"tie_method must be one of {_TIE_METHODS}, got {self.tie_method!r}")
        if self.status == "static" and self.time_zero == "nomination-day":
            raise ValueError("static winner status with nomination-day time zero is not supported")


@dataclass(frozen=True)
class Episodes:
    """Stacked counting-process rows ready for partial-likelihood fitting."""

    start: np.ndarray
    stop: np.ndarray
    event: np.ndarray
    X: np.ndarray
    columns: tuple[str, ...]
    n_subjects: int
    n_dropped: int


def build_episodes(records: list[SurvivalRecord], spec: CoxSpec) -> Episodes:
    """Expand subject records into episodes under the given analysis spec.

    On the nomination-day axis subjects enter the risk set at their first
    nomination; subjects without one, or with nonpositive follow-up, are
    dropped and counted.
    """
    starts: list[float] = []
    stops: list[float] = []
    events: list[bool] = []
    rows: list[list[float]] = []
    dropped = 0
    used = 0
    for rec in records:
        if spec.time_zero == "nomination-day":
            entry = rec.first_nomination
            if entry is None:
                dropped += 1
                continue
        else:
            entry = 0.0
        if rec.end - entry <= 0:
            dropped += 1
            continue
        used += 1
        breaks: set[float] = set()
        if spec.status == "dynamic" and rec.first_win is not None:
            if entry < rec.first_win < rec.end:
                breaks.add(rec.first_win)
        for name in spec.covariates:
            if name == "numnom":
                ages = rec.nomination_ages
            elif name == "numwins":
                ages = rec.win_ages
            else:
                continue
            for a in ages:
                if entry < a < rec.end:
                    breaks.add(a)
        grid = [entry] + sorted(breaks) + [rec.end]
        for left, right in zip(grid[:-1], grid[1:]):
            if spec.status == "static":
                winner = 1.0 if rec.ever_won else 0.0
            else:
                winner = 1.0 if rec.first_win is not None and rec.first_win <= left else 0.0
            row = [winner]
            for name in spec.covariates:
                if name == "numnom":
                    row.append(float(sum(1 for a in rec.nomination_ages if a <= left)))
                elif name == "numwins":
                    row.append(float(sum(1 for a in rec.win_ages if a <= left)))
                else:
                    row.append(float(rec.covariates[name]))
            starts.append(left)
            stops.append(right)
            events.append(bool(rec.event) and right == rec.end)
            rows.append(row)
    if not rows:
        raise EmptyInputError("no usable subjects for the requested analysis")
    return Episodes(
        start=np.array(starts),
        stop=np.array(stops),
        event=np.array(events, dtype=bool),
        X=np.array(rows),
        columns=("winner",) + tuple(spec.covariates),
        n_subjects=used,
        n_dropped=dropped,
    )


@dataclass(frozen=True)
class CoxFit:
    """Partial-likelihood fit with Wald inference per covariate."""

    columns: tuple[str, ...]
    coef: np.ndarray
    cov: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    level: float
    n_subjects: int
    n_events: int

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))

    @property
    def hazard_ratio(self) -> np.ndarray:
        return np.exp(self.coef)

    @property
    def ci(self) -> np.ndarray:
        """Hazard-ratio confidence limits, one (low, high) row per covariate."""
        zq = stats.norm.ppf(0.5 + self.level / 2.0)
        lo = np.exp(self.coef - zq * self.se)
        hi = np.exp(self.coef + zq * self.se)
        return np.column_stack([lo, hi])

    @property
    def p_value(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(self.se > 0, self.coef / self.se, 0.0)
        return 2.0 * stats.norm.sf(np.abs(z))

    def mortality_reduction(self, name: str = "winner") -> tuple[float, tuple[float, float]]:
        """1 - hazard ratio for one covariate, with its confidence limits."""
        j = self.columns.index(name)
        hr_lo, hr_hi = self.ci[j]
        return float(1.0 - self.hazard_ratio[j]), (float(1.0 - hr_hi), float(1.0 - hr_lo))


def _partial_parts(start, stop, event, X, beta, ties, need_derivs=True):
    eta = X @ beta
    w = np.exp(eta)
    p = X.shape[1]
    loglik = 0.0
    grad = np.zeros(p)
    info = np.zeros((p, p))
    for t in np.unique(stop[event]):
        dead = event & (stop == t)
        risk = (start < t) & (stop >= t)
        d = int(dead.sum())
        wr = w[risk]
        xr = X[risk]
        s0 = wr.sum()
        s1 = wr @ xr
        wd = w[dead]
        xd = X[dead]
        s0d = wd.sum()
        s1d = wd @ xd
        loglik += float(eta[dead].sum())
        if need_derivs:
            s2 = xr.T @ (wr[:, None] * xr)
            s2d = xd.T @ (wd[:, None] * xd)
        # Efron spreads the tied deaths' own weight across the d factors;
        # Breslow keeps the full risk set in every factor (all fractions 0).
        fractions = np.arange(d) / d if ties == "efron" else np.zeros(d)
        for f in fractions:
            g0 = s0 - f * s0d
            loglik -= float(np.log(g0))
            if need_derivs:
                g1 = s1 - f * s1d
                g2 = s2 - f * s2d
                xbar = g1 / g0
                grad -= xbar
                info += g2 / g0 - np.outer(xbar, xbar)
        if need_derivs:
            grad += xd.sum(axis=0)
    return loglik, grad, info


def cox_fit_arrays(
    start,
    stop,
    event,
    X,
    columns=None,
    ties: str = "efron",
    level: float = 0.95,
    tol: float = 1e-9,
    max_iter: int = 100,
    n_subjects: int | None = None,
) -> CoxFit:
    """Newton maximization of the partial likelihood on episode arrays."""
    start = np.asarray(start, dtype=float)
    stop = np.asarray(stop, dtype=float)
    event = np.asarray(event, dtype=bool)
    X = np.asarray(X, dtype=float)
    if np.any(stop <= start):
        raise ValueError("every episode needs stop > start")
    if not event.any():
        raise DegenerateModelError("no events: partial likelihood is flat")
    n, p = X.shape
    columns = tuple(columns) if columns is not None else tuple(f"x{j}" for j in range(p))

    sd = X.std(axis=0)
    free = sd > 0
    Xs = (X[:, free] - X[:, free].mean(axis=0)) / sd[free]
    q = int(free.sum())
    beta = np.zeros(q)
    loglik, grad, info = _partial_parts(start, stop, event, Xs, beta, ties)
    it = 0
    converged = np.max(np.abs(grad)) < tol if q else True
    while not converged and it < max_iter:
        it += 1
        try:
            delta = linalg.solve(info, grad, assume_a="pos")
        except linalg.LinAlgError as err:
            raise RankDeficiencyError("singular information in partial likelihood") from err
        step = 1.0
        new_beta = beta + delta
        new_ll = _partial_parts(start, stop, event, Xs, new_beta, ties, need_derivs=False)[0]
        while not np.isfinite(new_ll) or new_ll < loglik - 1e-12:
            step *= 0.5
            if step < 1e-12:
                break
            new_beta = beta + step * delta
            new_ll = _partial_parts(start, stop, event, Xs, new_beta, ties, need_derivs=False)[0]
        moved = np.max(np.abs(new_beta - beta))
        beta = new_beta
        if np.max(np.abs(beta)) > 40:
            raise MonotoneLikelihoodError(
                "coefficient diverging: risk sets are separated by a covariate"
            )
        loglik, grad, info = _partial_parts(start, stop, event, Xs, beta, ties)
        if np.max(np.abs(grad)) < tol or moved < 1e-12:
            converged = True
    if not converged:
        raise NonConvergenceError(
            f"partial likelihood did not converge in {max_iter} iterations",
            last_iterate=beta,
        )
    coef = np.zeros(p)
    cov = np.zeros((p, p))
    if q:
        try:
            cov_s = linalg.inv(info)
        except linalg.LinAlgError as err:
            raise RankDeficiencyError("singular information at the optimum") from err
        coef[free] = beta / sd[free]
        cov[np.ix_(free, free)] = cov_s / np.outer(sd[free], sd[free])
    # constant columns keep coefficient 0; mark their variance infinite
    for j in np.flatnonzero(~free):
        cov[j, j] = np.inf
    return CoxFit(
        columns=columns,
        coef=coef,
        cov=cov,
        loglik=loglik,
        iterations=it,
        converged=converged,
        level=level,
        n_subjects=n_subjects if n_subjects is not None else n,
        n_events=int(event.sum()),
    )


def cox_fit(records: list[SurvivalRecord], spec: CoxSpec, level: float = 0.95) -> CoxFit:
    """Build episodes per the spec and fit the proportional hazards model."""
    eps = build_episodes(records, spec)
    return cox_fit_arrays(
        eps.start,
        eps.stop,
        eps.event,
        eps.X,
        columns=eps.columns,
        ties=spec.tie_method,
        level=level,
        n_subjects=eps.n_subjects,
    )
