"""Discrete-time hazard cells and the winning-history likelihood-ratio test.

Mortality at ages 70 and 80 is modelled by saturated per-cell rates.  The
full model keys cells by nomination and win counts per age decade; the
reduced model drops the win counts.  Comparing their log-likelihoods tests
whether winning carries information about death beyond nomination history.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from ..errors import DegenerateModelError

__all__ = [
    "PerformerHistory",
    "CellKey",
    "DiscreteHazardModel",
    "LrtResult",
    "tally_cells",
    "build_model",
    "discrete_hazard_lrt",
]

EVAL_AGES = (70, 80)

CellKey = tuple


@dataclass(frozen=True)
class PerformerHistory:
    """Nomination and win counts per age decade, plus the death age."""

    death_age: int
    n30: int = 0
    a30: int = 0
    n60: int = 0
    a60: int = 0
    n70: int = 0
    a70: int = 0

    def key(self, age: int, wins: bool) -> CellKey:
        """History cell key at an evaluation age.

        At 70 only the 30s and 60s decades have happened; at 80 the 70s
        decade joins.  ``wins`` selects the full keying (nomination and win
        counts) versus the reduced keying (nomination counts only).
        """
        if age == 70:
            return (self.n30, self.a30, self.n60, self.a60) if wins else (self.n30, self.n60)
        if age == 80:
            if wins:
                return (self.n30, self.a30, self.n60, self.a60, self.n70, self.a70)
            return (self.n30, self.n60, self.n70)
        raise ValueError(f"unsupported evaluation age {age}")


def tally_cells(
    histories: list[PerformerHistory], age: int, wins: bool
) -> dict[CellKey, tuple[int, int]]:
    """Map each history cell at ``age`` to (deaths, at_risk)."""
    cells: dict[CellKey, list[int]] = {}
    for h in histories:
        if h.death_age < age:
            continue
        key = h.key(age, wins)
        entry = cells.setdefault(key, [0, 0])
        entry[1] += 1
        if h.death_age == age:
            entry[0] += 1
    return {k: (d, n) for k, (d, n) in cells.items()}


@dataclass(frozen=True)
class DiscreteHazardModel:
    """Saturated cell rates over both evaluation ages.

    ``cells`` maps (age, *history key*) to (deaths, at_risk, rate); the
    log-likelihood is the binomial likelihood at the per-cell maximum
    (rate = deaths / at_risk).
    """

    cells: dict[CellKey, tuple[int, int, float]]
    loglik: float

    @property
    def n_death_cells(self) -> int:
        """Cells in which deaths occur.

        Cells that are at risk but structurally death-free (histories only
        survivors can have reached) carry no usable rate parameter, so the
        test's degrees of freedom count only cells with observed deaths.
        """
        return sum(1 for d, n, _ in self.cells.values() if d > 0)


def build_model(histories: list[PerformerHistory], wins: bool) -> DiscreteHazardModel:
    cells: dict[CellKey, tuple[int, int, float]] = {}
    loglik = 0.0
    for age in EVAL_AGES:
        for key, (d, n) in tally_cells(histories, age, wins).items():
            h = d / n
            loglik += float(special.xlogy(d, h) + special.xlogy(n - d, 1.0 - h))
            cells[(age, *key)] = (d, n, h)
    return DiscreteHazardModel(cells=cells, loglik=loglik)


@dataclass(frozen=True)
class LrtResult:
    chi2: float
    df: int
    p: float
    full: DiscreteHazardModel
    reduced: DiscreteHazardModel


def discrete_hazard_lrt(
    histories: list[PerformerHistory], df: int | None = None
) -> LrtResult:
    """Likelihood-ratio test of win history given nomination history.

    Degrees of freedom default to the death-carrying cell count of the full
    model minus that of the reduced model, an estimate from the realized
    data.  Pass ``df`` when the design itself fixes the number of extra win
    parameters, so small samples cannot deflate the reference distribution.
    When both models coincide the statistic is zero and p is one.
    """
    full = build_model(histories, wins=True)
    reduced = build_model(histories, wins=False)
    chi2 = max(0.0, -2.0 * (reduced.loglik - full.loglik))
    if df is None:
        df = full.n_death_cells - reduced.n_death_cells
    if df <= 0:
        if chi2 < 1e-9:
            return LrtResult(chi2=0.0, df=0, p=1.0, full=full, reduced=reduced)
        raise DegenerateModelError(
            f"likelihood ratio {chi2:.3g} with nonpositive degrees of freedom {df}"
        )
    return LrtResult(
        chi2=chi2,
        df=df,
        p=float(stats.chi2.sf(chi2, df)),
        full=full,
        reduced=reduced,
    )
