"""Synthetic award cohorts with predetermined lifetimes.

Every simulated performer's sickness and death ages are fixed at birth, so
winning awards cannot causally change survival: any analysis method that
reports an effect on these cohorts is biased.  Healthier performers stay
eligible longer and accumulate more nominations, which plants exactly the
survivor bias the structural model is meant to remove.

All times are whole years.  Nominee selection draws a fixed quota from three
age bands; the 60s band uses per-group weights that either do ("table3"
scenario) or do not ("table8") depend on previous winning.  The winner of
each award is sampled from a softmax over age-band and history terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import date
from typing import Mapping

import numpy as np

from .clogit import DesignConfig, score_test
from .domain import AwardStratum, CandidateRecord, Nomination, Performer, build_candidate_records
from .errors import ReliabilityError
from .gestimation import apply_exclusion_rule
from .survival import (
    EVAL_AGES,
    CoxSpec,
    PerformerHistory,
    SurvivalRecord,
    cox_fit,
    discrete_hazard_lrt,
    person_years,
)

# Age decades that key the mortality history cells.
_KEY_BANDS = (30, 60, 70)

__all__ = [
    "SimConfig",
    "SimAward",
    "ShortStratum",
    "SimCohort",
    "TABLE3_WEIGHTS",
    "TABLE8_WEIGHTS",
    "METHODS",
    "generate_cohort",
    "run_awards",
    "simulate_cohort",
    "to_strata",
    "to_survival_records",
    "to_histories",
    "structural_df",
    "run_method",
    "replicate",
    "ReplicationResult",
    "mortality_tables",
    "MortalityTables",
]

# 60s-band selection weight per (health group, has previous win).
TABLE3_WEIGHTS: Mapping[tuple[int, bool], float] = {
    (1, True): 0.0,
    (1, False): 0.0,
    (2, True): 8.0,
    (2, False): 1.0,
    (3, True): 9.0,
    (3, False): 7.0,
}
TABLE8_WEIGHTS: Mapping[tuple[int, bool], float] = {
    (1, True): 0.0,
    (1, False): 0.0,
    (2, True): 8.0,
    (2, False): 8.0,
    (3, True): 9.0,
    (3, False): 9.0,
}

_BANDS = (30, 60, 70)
_BAND_INDEX = {30: 0, 60: 1, 70: 2}


@dataclass(frozen=True)
class SimConfig:
    """Cohort and award generation settings.

    ``scenario`` selects the 60s-band weights: ``table3`` re-nominates
    previous winners preferentially, ``table8`` ignores winning history.
    ``caps``, when set, removes performers at (max nominations, max wins)
    from all future eligibility.
    """

    birth_years: tuple[int, int] = (1830, 1999)
    births_per_year: int = 5
    age_patterns: tuple[tuple[int, int], ...] = ((60, 70), (70, 80), (80, 90))
    award_years: tuple[int, int] = (1927, 2004)
    quota: tuple[tuple[int, int], ...] = ((30, 2), (60, 2), (70, 1))
    scenario: str = "table3"
    weights_60s: Mapping[tuple[int, bool], float] | None = None
    softmax_band: Mapping[int, float] = field(
        default_factory=lambda: {30: 0.5, 60: 1.0, 70: 2.0}
    )
    softmax_history: float = 0.5
    caps: tuple[int, int] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.scenario not in ("table3", "table8"):
            raise ValueError(f"scenario must be 'table3' or 'table8', got {self.scenario!r}")
        if self.births_per_year < 0:
            raise ValueError("births_per_year must be nonnegative")

    def resolved_weights(self) -> Mapping[tuple[int, bool], float]:
        if self.weights_60s is not None:
            return self.weights_60s
        return TABLE3_WEIGHTS if self.scenario == "table3" else TABLE8_WEIGHTS


@dataclass(frozen=True)
class SimAward:
    """One award year: nominees, their state at selection time, the winner."""

    year: int
    nominees: tuple[int, ...]
    bands: tuple[int, ...]
    prev_nominations: tuple[int, ...]
    prev_wins: tuple[int, ...]
    winner: int


@dataclass(frozen=True)
class ShortStratum:
    year: int
    band: int
    requested: int
    drawn: int


@dataclass(frozen=True)
class SimCohort:
    """A simulated population, optionally with its award history attached."""

    config: SimConfig
    birth_year: np.ndarray
    group: np.ndarray
    sick_age: np.ndarray
    death_age: np.ndarray
    awards: tuple[SimAward, ...] = ()
    short_strata: tuple[ShortStratum, ...] = ()
    noms_by_band: np.ndarray | None = None
    wins_by_band: np.ndarray | None = None
    first_win_year: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.birth_year.size)


def _spawned_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent substreams for cohort generation and award running."""
    cohort_ss, awards_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(cohort_ss), np.random.default_rng(awards_ss)


def generate_cohort(config: SimConfig, rng: np.random.Generator | None = None) -> SimCohort:
    """Fixed-size birth cohorts with uniformly assigned age patterns."""
    if rng is None:
        rng, _ = _spawned_rngs(config.seed)
    lo, hi = config.birth_years
    years = np.arange(lo, hi + 1)
    birth_year = np.repeat(years, config.births_per_year)
    n = birth_year.size
    pattern = rng.integers(0, len(config.age_patterns), size=n)
    patterns = np.asarray(config.age_patterns)
    return SimCohort(
        config=config,
        birth_year=birth_year,
        group=pattern + 1,
        sick_age=patterns[pattern, 0] if n else np.empty(0, dtype=int),
        death_age=patterns[pattern, 1] if n else np.empty(0, dtype=int),
    )


def _weighted_draw_without_replacement(
    pool: np.ndarray, weights: np.ndarray, count: int, rng: np.random.Generator
) -> list[int]:
    """Sequential weighted selection; stops early when no mass remains."""
    chosen: list[int] = []
    pool = list(pool)
    weights = list(weights)
    for _ in range(count):
        total = sum(weights)
        if not pool or total <= 0:
            break
        probs = np.asarray(weights) / total
        j = int(rng.choice(len(pool), p=probs))
        chosen.append(pool.pop(j))
        weights.pop(j)
    return chosen


def run_awards(cohort: SimCohort, rng: np.random.Generator | None = None) -> SimCohort:
    """Draw nominees and winners for every award year.

    Selection state (counts of nominations and wins) evolves chronologically;
    the softmax history terms use the counts before the current award.
    """
    config = cohort.config
    if rng is None:
        _, rng = _spawned_rngs(config.seed)
    n = cohort.n
    weights_60s = config.resolved_weights()
    n_noms = np.zeros(n, dtype=int)
    n_wins = np.zeros(n, dtype=int)
    noms_by_band = np.zeros((n, 3), dtype=int)
    wins_by_band = np.zeros((n, 3), dtype=int)
    first_win_year = np.full(n, -1, dtype=int)
    awards: list[SimAward] = []
    shorts: list[ShortStratum] = []

    lo, hi = config.award_years
    for year in range(lo, hi + 1):
        age = year - cohort.birth_year
        eligible = age < cohort.sick_age
        if config.caps is not None:
            max_noms, max_wins = config.caps
            eligible = eligible & (n_noms < max_noms) & (n_wins < max_wins)
        nominees: list[int] = []
        bands: list[int] = []
        for band, count in config.quota:
            pool = np.flatnonzero(eligible & (age >= band) & (age <= band + 9))
            if band == 60:
                w = np.array(
                    [weights_60s[(int(cohort.group[i]), bool(n_wins[i] > 0))] for i in pool]
                )
                picked = _weighted_draw_without_replacement(pool, w, count, rng)
            else:
                k = min(count, pool.size)
                picked = list(rng.choice(pool, size=k, replace=False)) if k else []
            if len(picked) < count:
                shorts.append(
                    ShortStratum(year=year, band=band, requested=count, drawn=len(picked))
                )
            nominees.extend(int(i) for i in picked)
            bands.extend(band for _ in picked)
        if not nominees:
            continue
        linear = np.array(
            [
                config.softmax_band[band]
                + config.softmax_history * (n_noms[i] + n_wins[i])
                for i, band in zip(nominees, bands)
            ]
        )
        probs = np.exp(linear - linear.max())
        probs /= probs.sum()
        winner = nominees[int(rng.choice(len(nominees), p=probs))]
        awards.append(
            SimAward(
                year=year,
                nominees=tuple(nominees),
                bands=tuple(bands),
                prev_nominations=tuple(int(n_noms[i]) for i in nominees),
                prev_wins=tuple(int(n_wins[i]) for i in nominees),
                winner=winner,
            )
        )
        for i, band in zip(nominees, bands):
            n_noms[i] += 1
            noms_by_band[i, _BAND_INDEX[band]] += 1
        n_wins[winner] += 1
        winner_band = bands[nominees.index(winner)]
        wins_by_band[winner, _BAND_INDEX[winner_band]] += 1
        if first_win_year[winner] < 0:
            first_win_year[winner] = year

    return replace(
        cohort,
        awards=tuple(awards),
        short_strata=tuple(shorts),
        noms_by_band=noms_by_band,
        wins_by_band=wins_by_band,
        first_win_year=first_win_year,
    )


def simulate_cohort(config: SimConfig) -> SimCohort:
    """Generate a cohort and run its awards with seed-derived substreams."""
    rng_cohort, rng_awards = _spawned_rngs(config.seed)
    return run_awards(generate_cohort(config, rng_cohort), rng_awards)


# ---------------------------------------------------------------------------
# Adapters to the analysis representations

_FAR_CENSOR = date(2999, 1, 1)


def to_strata(cohort: SimCohort) -> list[AwardStratum]:
    """Award strata on the calendar-date representation (January 1 dates).

    Age-band indicator columns ``age60`` and ``age70`` ride along in each
    record's extra covariates so the winner model can condition on exactly
    what the generating softmax used.
    """
    nominated = sorted({i for a in cohort.awards for i in a.nominees})
    performers = [
        Performer(
            id=f"p{i}",
            birth=date(int(cohort.birth_year[i]), 1, 1),
            death=date(int(cohort.birth_year[i] + cohort.death_age[i]), 1, 1),
            censor_date=_FAR_CENSOR,
        )
        for i in nominated
    ]
    nominations = [
        Nomination(
            performer_id=f"p{i}",
            award_index=a.year,
            award_date=date(a.year, 1, 1),
            category="lead-actor",
            won=(i == a.winner),
        )
        for a in cohort.awards
        for i in a.nominees
    ]
    strata = build_candidate_records(performers, nominations)
    with_bands: list[AwardStratum] = []
    for stratum in strata:
        candidates = []
        for cand in stratum.candidates:
            age = int(round(cand.nomage))
            extra = {
                "age60": 1.0 if 60 <= age <= 69 else 0.0,
                "age70": 1.0 if 70 <= age <= 79 else 0.0,
            }
            candidates.append(replace(cand, extra=extra))
        with_bands.append(replace(stratum, candidates=tuple(candidates)))
    return with_bands


def to_survival_records(cohort: SimCohort) -> list[SurvivalRecord]:
    """Ever-nominated performers as age-axis follow-up records."""
    noms: dict[int, list[float]] = {}
    wins: dict[int, list[float]] = {}
    for a in cohort.awards:
        for i in a.nominees:
            noms.setdefault(i, []).append(float(a.year - cohort.birth_year[i]))
        w = a.winner
        wins.setdefault(w, []).append(float(a.year - cohort.birth_year[w]))
    return [
        SurvivalRecord(
            end=float(cohort.death_age[i]),
            event=True,
            nomination_ages=tuple(sorted(noms[i])),
            win_ages=tuple(sorted(wins.get(i, ()))),
            covariates={"yob": float(cohort.birth_year[i])},
        )
        for i in sorted(noms)
    ]


def to_histories(cohort: SimCohort) -> list[PerformerHistory]:
    """Every performer's decade-level nomination and win counts."""
    nb = cohort.noms_by_band
    wb = cohort.wins_by_band
    if nb is None or wb is None:
        raise ValueError("run_awards must be applied before building histories")
    return [
        PerformerHistory(
            death_age=int(cohort.death_age[i]),
            n30=int(nb[i, 0]),
            a30=int(wb[i, 0]),
            n60=int(nb[i, 1]),
            a60=int(wb[i, 1]),
            n70=int(nb[i, 2]),
            a70=int(wb[i, 2]),
        )
        for i in range(cohort.n)
    ]


# ---------------------------------------------------------------------------
# Per-method p-values

SIM_DESIGN = DesignConfig(
    nomage_basis="none",
    include_numprenom=True,
    extra_covariates=("age60", "age70"),
)


def _p_cox(cohort: SimCohort, spec: CoxSpec) -> float:
    fit = cox_fit(to_survival_records(cohort), spec)
    return float(fit.p_value[fit.columns.index("winner")])


def _p_person_years(cohort: SimCohort) -> float:
    fit = person_years(to_survival_records(cohort), time_zero="nomination-day")
    return fit.p_value


def _p_gtest(cohort: SimCohort) -> float:
    analysis, _ = apply_exclusion_rule(to_strata(cohort))
    _, p = score_test(analysis, 0.0, SIM_DESIGN)
    return p


def structural_df(config: SimConfig) -> int:
    """Design-fixed degrees of freedom for the winning-history test.

    Career caps bound the nomination and win counts, so the death-capable
    history cells can be enumerated from the design alone: each cell the
    full keying adds over the reduced keying contributes one win parameter.
    Data-driven cell counts deflate on small cohorts where rare histories
    go unobserved; the structural count does not.
    """
    if config.caps is None:
        raise ValueError("structural degrees of freedom require caps")
    max_noms, max_wins = config.caps
    full_keys: set[tuple] = set()
    reduced_keys: set[tuple] = set()
    for sick_age, death_age in config.age_patterns:
        if death_age not in EVAL_AGES:
            continue
        open_band = [b < death_age and b < sick_age for b in _KEY_BANDS]
        counts = [range(max_noms + 1) if o else (0,) for o in open_band]
        for n30 in counts[0]:
            for n60 in counts[1]:
                for n70 in counts[2]:
                    if n30 + n60 + n70 > max_noms:
                        continue
                    for a30 in range(min(n30, max_wins) + 1):
                        for a60 in range(min(n60, max_wins) + 1):
                            for a70 in range(min(n70, max_wins) + 1):
                                if a30 + a60 + a70 > max_wins:
                                    continue
                                h = PerformerHistory(
                                    death_age=death_age,
                                    n30=n30, a30=a30,
                                    n60=n60, a60=a60,
                                    n70=n70, a70=a70,
                                )
                                full_keys.add((death_age, h.key(death_age, True)))
                                reduced_keys.add((death_age, h.key(death_age, False)))
    return len(full_keys) - len(reduced_keys)


def _p_lrt(cohort: SimCohort) -> float:
    df = structural_df(cohort.config) if cohort.config.caps is not None else None
    return discrete_hazard_lrt(to_histories(cohort), df=df).p


METHODS = {
    "cox-static-birthday": lambda c: _p_cox(
        c, CoxSpec(status="static", time_zero="birthday")
    ),
    "cox-dynamic-birthday": lambda c: _p_cox(
        c, CoxSpec(status="dynamic", time_zero="birthday", covariates=("yob",))
    ),
    "cox-dynamic-nomination": lambda c: _p_cox(
        c, CoxSpec(status="dynamic", time_zero="nomination-day", covariates=("yob",))
    ),
    "person-years": _p_person_years,
    "rpsaftm-gtest": _p_gtest,
    "discrete-hazard-lrt": _p_lrt,
}

TABLE12_METHODS = (
    "cox-static-birthday",
    "cox-dynamic-birthday",
    "cox-dynamic-nomination",
    "person-years",
    "rpsaftm-gtest",
)


def run_method(cohort: SimCohort, method: str) -> float:
    """One method's p-value for the no-effect null on one cohort."""
    try:
        fn = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}") from None
    return float(fn(cohort))


def _rep_seeds(seed: int, n_reps: int) -> np.ndarray:
    """Fixed derivation of per-replication seeds from the master seed."""
    return np.random.SeedSequence(seed).generate_state(n_reps)


@dataclass(frozen=True)
class ReplicationResult:
    """Per-method p-value samples over independent replications."""

    p_values: dict[str, np.ndarray]
    failures: dict[str, int]
    n_reps: int

    def mean(self, method: str) -> float:
        vals = self.p_values[method]
        return float(np.nanmean(vals))

    def means(self) -> dict[str, float]:
        return {m: self.mean(m) for m in self.p_values}

    def histogram(self, method: str, bins: int = 10) -> np.ndarray:
        vals = self.p_values[method]
        counts, _ = np.histogram(vals[~np.isnan(vals)], bins=bins, range=(0.0, 1.0))
        return counts


def replicate(
    config: SimConfig,
    n_reps: int,
    methods: tuple[str, ...] = TABLE12_METHODS,
    max_failure_rate: float = 0.05,
) -> ReplicationResult:
    """Independent cohorts, one p-value per method per replication.

    Failed method evaluations are recorded as NaN and excluded from means;
    a method failing on more than ``max_failure_rate`` of replications
    raises a reliability error.
    """
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {sorted(METHODS)}")
    seeds = _rep_seeds(config.seed, n_reps)
    samples = {m: np.full(n_reps, np.nan) for m in methods}
    failures = {m: 0 for m in methods}
    for r in range(n_reps):
        cohort = simulate_cohort(replace(config, seed=int(seeds[r])))
        for m in methods:
            try:
                samples[m][r] = run_method(cohort, m)
            except Exception:  # noqa: BLE001 - failures are data, not bugs
                failures[m] += 1
    for m in methods:
        if failures[m] > max_failure_rate * n_reps:
            raise ReliabilityError(
                f"method {m} failed on {failures[m]} of {n_reps} replications"
            )
    return ReplicationResult(p_values=samples, failures=failures, n_reps=n_reps)


# ---------------------------------------------------------------------------
# Mortality tables


@dataclass(frozen=True)
class CellStat:
    mean: float
    lo: float
    hi: float
    n_reps: int


@dataclass(frozen=True)
class MortalityTables:
    """Replication-averaged cell rates.

    Keys are (age, keying, history key) where keying is "wins" for the full
    nomination-and-win cells or "noms" for the nomination-only cells.
    """

    cells: dict[tuple, CellStat]
    n_reps: int

    def rate(self, age: int, keying: str, key: tuple) -> CellStat:
        return self.cells[(age, keying, key)]


def mortality_tables(config: SimConfig, n_reps: int) -> MortalityTables:
    """Mean and 2.5/97.5 percentile of each cell rate across replications.

    Cells unpopulated in a replication simply do not contribute to that
    replication's sample; cells never populated are absent from the result.
    """
    from .survival.discrete_hazard import tally_cells

    seeds = _rep_seeds(config.seed, n_reps)
    samples: dict[tuple, list[float]] = {}
    for r in range(n_reps):
        cohort = simulate_cohort(replace(config, seed=int(seeds[r])))
        histories = to_histories(cohort)
        for age in (70, 80):
            for keying, wins in (("wins", True), ("noms", False)):
                for key, (d, n) in tally_cells(histories, age, wins).items():
                    samples.setdefault((age, keying, key), []).append(d / n)
    cells = {
        cell: CellStat(
            mean=float(np.mean(vals)),
            lo=float(np.percentile(vals, 2.5)),
            hi=float(np.percentile(vals, 97.5)),
            n_reps=len(vals),
        )
        for cell, vals in samples.items()
    }
    return MortalityTables(cells=cells, n_reps=n_reps)
