"""Structural failure-time transform and artificial censoring.

The structural model assumes a first win multiplies a performer's remaining
lifetime by ``exp(-psi)``:  ``psi = 0`` means winning has no effect, negative
``psi`` means winning extends life.  Back-transforming the observed residual
lifetime gives the latent (never-won) residual lifetime; artificial censoring
then shrinks the censoring horizon so that the censored latent time is the
same function of (latent time, censoring time) for winners and non-winners,
which keeps the no-effect test honest under administrative censoring.

All functions are pure and operate in years (365.25 days/year).
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from math import exp

import numpy as np

from .domain import AwardStratum, CandidateRecord, years_between
from .errors import InconsistentRecordError, InvalidCensoringError

# Award and death dates are day-granular, so allow a 2-day slack when
# checking that a first win does not postdate the end of follow-up.
_DATE_TOLERANCE_YEARS = 2.0 / 365.25


@dataclass(frozen=True)
class LatentTime:
    """Latent residual lifetime, its artificial censoring bound, and their min.

    ``censored`` is true when the artificial bound bites or the underlying
    observation was already censored.
    """

    u: float
    c_psi: float
    u_star_star: float
    censored: bool


def latent_time(x: float, f: date | None, d: date, psi: float) -> float:
    """Back-transform an observed residual lifetime to its latent value.

    ``x`` is the (possibly censored) residual lifetime in years after the
    award date ``d``; ``f`` is the performer's first-win date, if any.
    Candidates who never won, or whose first win predates this award, are
    unaffected by ``psi``; for a first win at or after the award date the
    post-win stretch is scaled by ``exp(psi)``.
    """
    if x < 0:
        raise InconsistentRecordError(f"negative residual lifetime {x}")
    if f is None or f < d:
        return x
    f_years = years_between(d, f)
    if f_years > x + _DATE_TOLERANCE_YEARS:
        raise InconsistentRecordError(
            f"first win {f.isoformat()} falls {f_years:.4f} years after award "
            f"{d.isoformat()} but observed time is only {x:.4f} years"
        )
    return f_years + exp(psi) * (x - f_years)


def artificial_censor_time(c: date, d: date, f: date | None, psi: float) -> float:
    """Censoring horizon for the latent time, in years after the award date.

    Candidates whose first win predates the award keep their administrative
    horizon ``c - d``.  Everyone else (winners at/after the award date and
    never-winners alike) gets ``min(c - d, (c - d) * exp(psi))`` so that the
    winner/non-winner pair is censored identically at the true ``psi``.
    """
    if c < d:
        raise InvalidCensoringError(
            f"censor date {c.isoformat()} precedes award date {d.isoformat()}"
        )
    horizon = years_between(d, c)
    if f is not None and f < d:
        return horizon
    return min(horizon, horizon * exp(psi))


def censored_latent(record: CandidateRecord, psi: float) -> LatentTime:
    """Latent time of one candidate record, censored at the artificial bound."""
    u = latent_time(record.X, record.F, record.D, psi)
    c_psi = artificial_censor_time(record.censor_date, record.D, record.F, psi)
    u_star_star = min(u, c_psi)
    censored = (u_star_star < u - _DATE_TOLERANCE_YEARS) or not record.death_observed
    return LatentTime(u=u, c_psi=c_psi, u_star_star=u_star_star, censored=censored)


@dataclass(frozen=True)
class StrataArrays:
    """Column-oriented view of candidate records for vectorized evaluation.

    Rows are grouped by stratum (contiguous, in award order).  ``f_years`` is
    the first-win offset in years after the award date, NaN when the record
    is unaffected by ``psi`` (never won, or won before this award).
    """

    group: np.ndarray          # (n,) int stratum index, contiguous
    y: np.ndarray              # (n,) bool winner flag
    x: np.ndarray              # (n,) observed residual years
    f_years: np.ndarray        # (n,) float, NaN on the psi-free branch
    won_before: np.ndarray     # (n,) bool first win strictly before award
    horizon: np.ndarray        # (n,) censor years (censor_date - D)
    death_observed: np.ndarray # (n,) bool
    nomage: np.ndarray         # (n,) float
    numprenom: np.ndarray      # (n,) float
    extra: dict[str, np.ndarray]
    award_index: np.ndarray    # (n,) int
    n_strata: int

    @classmethod
    def from_strata(cls, strata: list[AwardStratum]) -> "StrataArrays":
        records = [c for s in strata for c in s.candidates]
        group = np.repeat(np.arange(len(strata)), [s.n for s in strata])
        f_years = np.full(len(records), np.nan)
        won_before = np.zeros(len(records), dtype=bool)
        for k, r in enumerate(records):
            if r.F is not None:
                if r.F < r.D:
                    won_before[k] = True
                else:
                    f_years[k] = years_between(r.D, r.F)
        extra_names = sorted({name for r in records for name in r.extra})
        return cls(
            group=group,
            y=np.array([r.A for r in records], dtype=bool),
            x=np.array([r.X for r in records], dtype=float),
            f_years=f_years,
            won_before=won_before,
            horizon=np.array(
                [years_between(r.D, r.censor_date) for r in records], dtype=float
            ),
            death_observed=np.array([r.death_observed for r in records], dtype=bool),
            nomage=np.array([r.nomage for r in records], dtype=float),
            numprenom=np.array([r.numprenom for r in records], dtype=float),
            extra={
                name: np.array([r.extra.get(name, 0.0) for r in records], dtype=float)
                for name in extra_names
            },
            award_index=np.array([r.award_index for r in records], dtype=int),
            n_strata=len(strata),
        )

    def u_star_star(self, psi: float) -> tuple[np.ndarray, np.ndarray]:
        """Censored latent times and censor flags for all rows at once."""
        scale = exp(psi)
        u = self.x.copy()
        affected = ~np.isnan(self.f_years)
        u[affected] = self.f_years[affected] + scale * (
            self.x[affected] - self.f_years[affected]
        )
        c_psi = np.where(
            self.won_before, self.horizon, np.minimum(self.horizon, self.horizon * scale)
        )
        uss = np.minimum(u, c_psi)
        censored = (uss < u - _DATE_TOLERANCE_YEARS) | ~self.death_observed
        return uss, censored
