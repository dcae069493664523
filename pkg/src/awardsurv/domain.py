"""Core data model: performers, nominations, award strata, time arithmetic.

All types are frozen dataclasses, immutable after construction, so they can
be shared freely across concurrent analysis tasks.

Dates are plain :class:`datetime.date` objects; differences are integer day
counts and every year-valued quantity is derived as ``days / 365.25``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Mapping, Sequence

from .errors import (
    InvalidRecordError,
    MalformedStratumError,
    ReferentialIntegrityError,
)

DAYS_PER_YEAR = 365.25

CATEGORIES = ("lead-actor", "lead-actress", "supporting-actor", "supporting-actress")


def years_between(start: date, end: date) -> float:
    """Signed number of years from ``start`` to ``end`` (365.25 days/year)."""
    return (end.toordinal() - start.toordinal()) / DAYS_PER_YEAR


@dataclass(frozen=True)
class Performer:
    """One actor or actress, identified by a unique token.

    A performer without a recorded death is censored at ``censor_date``.
    """

    id: str
    birth: date
    death: date | None
    censor_date: date

    def __post_init__(self):
        if self.death is not None and self.death < self.birth:
            raise InvalidRecordError(f"performer {self.id}: death precedes birth")


@dataclass(frozen=True)
class Nomination:
    """One (performer, award) nomination entry with its outcome."""

    performer_id: str
    award_index: int
    award_date: date
    category: str
    won: bool

    def __post_init__(self):
        if self.award_index < 1:
            raise InvalidRecordError(f"award index must be >= 1, got {self.award_index}")
        if self.category not in CATEGORIES:
            raise InvalidRecordError(f"unknown category {self.category!r}")


@dataclass(frozen=True)
class CandidateRecord:
    """One nomination prepared for analysis.

    ``X`` is the observed, possibly censored residual lifetime in years after
    the award date; ``F`` is the date of the performer's first win anywhere in
    their career (absent if they never won).  ``nomage`` and ``numprenom`` are
    the raw covariates from which design matrices are built; ``extra`` holds
    any additional named covariates.
    """

    award_index: int
    performer_id: str
    A: bool
    nomage: float
    numprenom: int
    X: float
    F: date | None
    D: date
    censor_date: date
    death_observed: bool
    extra: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.X < 0:
            raise InvalidRecordError(
                f"record ({self.award_index}, {self.performer_id}): negative residual time"
            )


@dataclass(frozen=True)
class AwardStratum:
    """The candidates of one award, exactly one of whom won."""

    award_index: int
    candidates: tuple[CandidateRecord, ...]

    def __post_init__(self):
        winners = sum(c.A for c in self.candidates)
        if winners != 1:
            raise MalformedStratumError(
                f"award {self.award_index}: expected exactly 1 winner, found {winners}"
            )

    @property
    def n(self) -> int:
        return len(self.candidates)


def build_candidate_records(
    performers: Iterable[Performer],
    nominations: Iterable[Nomination],
) -> list[AwardStratum]:
    """Assemble nominations into per-award strata of candidate records.

    Computes, for every nomination, the residual lifetime ``X`` after the
    award date, the age at nomination, the count of strictly earlier
    nominations, and the performer's first-win date.

    Raises
    ------
    ReferentialIntegrityError
        if a nomination references an unknown performer.
    MalformedStratumError
        if an award has zero or more than one winner, or a performer is
        nominated twice for the same award.
    InvalidRecordError
        if a performer's death precedes an award they were nominated for.
    """
    by_id = {p.id: p for p in performers}
    noms = list(nominations)

    seen: set[tuple[str, int]] = set()
    for nom in noms:
        if nom.performer_id not in by_id:
            raise ReferentialIntegrityError(
                f"nomination for award {nom.award_index} references unknown "
                f"performer {nom.performer_id!r}"
            )
        key = (nom.performer_id, nom.award_index)
        if key in seen:
            raise MalformedStratumError(
                f"duplicate nomination {key[0]!r} for award {key[1]}"
            )
        seen.add(key)

    # First win date per performer: earliest award date among winning nominations.
    first_win: dict[str, date] = {}
    for nom in noms:
        if nom.won:
            cur = first_win.get(nom.performer_id)
            if cur is None or nom.award_date < cur:
                first_win[nom.performer_id] = nom.award_date

    by_performer: dict[str, list[Nomination]] = {}
    for nom in noms:
        by_performer.setdefault(nom.performer_id, []).append(nom)

    by_award: dict[int, list[CandidateRecord]] = {}
    for nom in noms:
        perf = by_id[nom.performer_id]
        if perf.death is not None and perf.death < nom.award_date:
            raise InvalidRecordError(
                f"performer {perf.id} died before award {nom.award_index} "
                f"({perf.death.isoformat()} < {nom.award_date.isoformat()})"
            )
        if perf.death is not None:
            x = years_between(nom.award_date, perf.death)
            observed = True
        else:
            x = years_between(nom.award_date, perf.censor_date)
            observed = False
        numprenom = sum(
            1 for other in by_performer[nom.performer_id]
            if other.award_date < nom.award_date
        )
        record = CandidateRecord(
            award_index=nom.award_index,
            performer_id=nom.performer_id,
            A=nom.won,
            nomage=years_between(perf.birth, nom.award_date),
            numprenom=numprenom,
            X=x,
            F=first_win.get(nom.performer_id),
            D=nom.award_date,
            censor_date=perf.censor_date,
            death_observed=observed,
        )
        by_award.setdefault(nom.award_index, []).append(record)

    return [
        AwardStratum(award_index=i, candidates=tuple(records))
        for i, records in sorted(by_award.items())
    ]


def winners(strata: Sequence[AwardStratum]) -> list[CandidateRecord]:
    """Winning record of each stratum, in award order."""
    return [next(c for c in s.candidates if c.A) for s in strata]
