"""Dataset file reading and writing.

The canonical dataset is one UTF-8 text file with two CSV sections::

    # performers
    performer_id,name,birth_date,death_date
    p1,Example Performer,1924-04-03,2004-07-01
    p2,Another Performer,1930-01-01,
    # nominations
    performer_id,award_index,award_date,category,won
    p1,28,1955-03-30,lead-actor,1

Dates are ISO-8601; an empty ``death_date`` means the performer was alive at
the study cutoff and is censored.  ``won`` is 0 or 1.  Nominations whose
performer died before the award date are dropped during ingest and reported
in the exclusion log rather than rejected.
"""

from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .domain import CATEGORIES, Nomination, Performer
from .errors import DataFormatError

__all__ = ["DEFAULT_CENSOR_DATE", "IngestResult", "ingest", "parse_dataset", "serialize"]

DEFAULT_CENSOR_DATE = date(2007, 7, 25)

_PERFORMER_HEADER = ["performer_id", "name", "birth_date", "death_date"]
_NOMINATION_HEADER = ["performer_id", "award_index", "award_date", "category", "won"]


@dataclass(frozen=True)
class IngestResult:
    """Parsed dataset plus the exclusion log and summary counts."""

    performers: tuple[Performer, ...]
    nominations: tuple[Nomination, ...]
    exclusions: tuple[str, ...]
    names: Mapping[str, str] = field(default_factory=dict)

    @property
    def n_performers(self) -> int:
        return len(self.performers)

    @property
    def n_winners(self) -> int:
        won = {n.performer_id for n in self.nominations if n.won}
        return len(won)

    @property
    def n_nonwinning_nominees(self) -> int:
        nominated = {n.performer_id for n in self.nominations}
        won = {n.performer_id for n in self.nominations if n.won}
        return len(nominated - won)

    @property
    def n_censored(self) -> int:
        return sum(1 for p in self.performers if p.death is None)

    def summary(self) -> str:
        return (
            f"{self.n_performers} performers, {self.n_winners} winners, "
            f"{self.n_nonwinning_nominees} nonwinning nominees, "
            f"{self.n_censored} censored"
        )


def _parse_date(text: str, line: int, column: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise DataFormatError(f"bad {column} {text!r}", line=line) from None


def parse_dataset(lines: Iterable[str], censor_date: date = DEFAULT_CENSOR_DATE) -> IngestResult:
    """Parse dataset text already split into lines.

    Structural problems (wrong section order, bad headers, unparseable
    fields, duplicate keys, unknown categories) raise a format error naming
    the offending line.  Lifetime inconsistencies that the study protocol
    excludes (death before the award date) are logged, not raised.
    """
    performers: list[Performer] = []
    names: dict[str, str] = {}
    raw_noms: list[tuple[int, Nomination]] = []
    seen_pairs: set[tuple[str, int]] = set()
    section = None
    expect_header = False
    n_lines = 0

    for lineno, raw in enumerate(lines, start=1):
        n_lines = lineno
        text = raw.rstrip("\n")
        if not text.strip():
            continue
        if text.startswith("#"):
            marker = text.lstrip("#").strip()
            if marker == "performers":
                if section is not None:
                    raise DataFormatError("duplicate performers section", line=lineno)
                section = "performers"
            elif marker == "nominations":
                if section != "performers":
                    raise DataFormatError(
                        "nominations section before performers section", line=lineno
                    )
                section = "nominations"
            else:
                raise DataFormatError(f"unknown section marker {text!r}", line=lineno)
            expect_header = True
            continue
        if section is None:
            raise DataFormatError("expected '# performers' section marker", line=lineno)
        row = next(csv.reader([text]))
        expected = _PERFORMER_HEADER if section == "performers" else _NOMINATION_HEADER
        if expect_header:
            if row != expected:
                raise DataFormatError(
                    f"bad {section} header, expected {','.join(expected)}", line=lineno
                )
            expect_header = False
            continue
        if len(row) != len(expected):
            raise DataFormatError(
                f"expected {len(expected)} fields, got {len(row)}", line=lineno
            )
        if section == "performers":
            pid, name, birth_text, death_text = row
            if pid in names:
                raise DataFormatError(f"duplicate performer id {pid!r}", line=lineno)
            birth = _parse_date(birth_text, lineno, "birth_date")
            death = _parse_date(death_text, lineno, "death_date") if death_text else None
            names[pid] = name
            performers.append(
                Performer(id=pid, birth=birth, death=death, censor_date=censor_date)
            )
        else:
            pid, index_text, date_text, category, won_text = row
            try:
                award_index = int(index_text)
            except ValueError:
                raise DataFormatError(f"bad award_index {index_text!r}", line=lineno) from None
            if award_index < 1:
                raise DataFormatError(f"award_index must be >= 1, got {award_index}", line=lineno)
            if (pid, award_index) in seen_pairs:
                raise DataFormatError(
                    f"duplicate nomination ({pid!r}, {award_index})", line=lineno
                )
            seen_pairs.add((pid, award_index))
            if category not in CATEGORIES:
                raise DataFormatError(f"unknown category {category!r}", line=lineno)
            if won_text not in ("0", "1"):
                raise DataFormatError(f"won must be 0 or 1, got {won_text!r}", line=lineno)
            raw_noms.append(
                (
                    lineno,
                    Nomination(
                        performer_id=pid,
                        award_index=award_index,
                        award_date=_parse_date(date_text, lineno, "award_date"),
                        category=category,
                        won=won_text == "1",
                    ),
                )
            )

    if section is None:
        raise DataFormatError("empty dataset", line=max(n_lines, 1))

    death_by_id = {p.id: p.death for p in performers}
    nominations: list[Nomination] = []
    exclusions: list[str] = []
    for lineno, nom in raw_noms:
        if nom.performer_id not in death_by_id:
            raise DataFormatError(
                f"nomination references unknown performer {nom.performer_id!r}", line=lineno
            )
        death = death_by_id[nom.performer_id]
        if death is not None and death < nom.award_date:
            exclusions.append(
                f"excluded {nom.performer_id} award {nom.award_index}: "
                f"died {death.isoformat()} before award date {nom.award_date.isoformat()}"
            )
            continue
        nominations.append(nom)

    return IngestResult(
        performers=tuple(performers),
        nominations=tuple(nominations),
        exclusions=tuple(exclusions),
        names=names,
    )


def ingest(path: str | Path, censor_date: date = DEFAULT_CENSOR_DATE) -> IngestResult:
    """Read and validate a dataset file."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_dataset(text.splitlines(), censor_date)


def serialize(
    performers: Sequence[Performer],
    nominations: Sequence[Nomination],
    names: Mapping[str, str] | None = None,
) -> str:
    """Dataset text in the canonical two-section format.

    Output is deterministic: performers sort by id, nominations by
    (award_index, performer_id).  Serializing an ingest result and reading
    it back reproduces the same domain objects.
    """
    names = names or {}
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    buf.write("# performers\n")
    writer.writerow(_PERFORMER_HEADER)
    for p in sorted(performers, key=lambda p: p.id):
        writer.writerow(
            [
                p.id,
                names.get(p.id, p.id),
                p.birth.isoformat(),
                p.death.isoformat() if p.death is not None else "",
            ]
        )
    buf.write("# nominations\n")
    writer.writerow(_NOMINATION_HEADER)
    for n in sorted(nominations, key=lambda n: (n.award_index, n.performer_id)):
        writer.writerow(
            [
                n.performer_id,
                str(n.award_index),
                n.award_date.isoformat(),
                n.category,
                "1" if n.won else "0",
            ]
        )
    return buf.getvalue()
