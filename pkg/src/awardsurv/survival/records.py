"""Subject-level follow-up records shared by the comparison analyses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

__all__ = ["SurvivalRecord"]


@dataclass(frozen=True)
class SurvivalRecord:
    """One performer's follow-up on the age time axis.

    ``end`` is the age at death or censoring; ``event`` is true for an
    observed death.  Nomination and win ages drive time-dependent covariate
    construction; ``covariates`` holds static values such as year of birth.
    """

    end: float
    event: bool
    nomination_ages: tuple[float, ...] = ()
    win_ages: tuple[float, ...] = ()
    covariates: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.end <= 0:
            raise ValueError("follow-up must end after birth")
        if tuple(sorted(self.nomination_ages)) != self.nomination_ages:
            object.__setattr__(self, "nomination_ages", tuple(sorted(self.nomination_ages)))
        if tuple(sorted(self.win_ages)) != self.win_ages:
            object.__setattr__(self, "win_ages", tuple(sorted(self.win_ages)))

    @property
    def first_nomination(self) -> float | None:
        return self.nomination_ages[0] if self.nomination_ages else None

    @property
    def first_win(self) -> float | None:
        return self.win_ages[0] if self.win_ages else None

    @property
    def ever_won(self) -> bool:
        return bool(self.win_ages)
