"""Dataset parsing and serialization: round trips and format errors."""

from __future__ import annotations

from dataclasses import replace
from datetime import date

import pytest

from awardsurv.errors import DataFormatError
from awardsurv.io import DEFAULT_CENSOR_DATE, ingest, parse_dataset, serialize

GOOD = """\
# performers
performer_id,name,birth_date,death_date
p1,First Example,1920-05-01,1990-01-15
p2,Second Example,1930-06-02,
p3,Third Example,1935-07-03,
# nominations
performer_id,award_index,award_date,category,won
p1,28,1955-03-30,lead-actor,1
p2,28,1955-03-30,lead-actress,0
p3,30,1957-03-27,supporting-actor,0
p1,30,1957-03-27,lead-actor,0
"""


def test_parse_good_dataset():
    result = parse_dataset(GOOD.splitlines())
    assert result.n_performers == 3
    assert result.n_winners == 1
    assert result.n_nonwinning_nominees == 2
    assert result.n_censored == 2
    assert result.exclusions == ()
    assert result.names["p1"] == "First Example"
    p1 = result.performers[0]
    assert p1.death == date(1990, 1, 15)
    assert p1.censor_date == DEFAULT_CENSOR_DATE
    assert result.summary() == "3 performers, 1 winners, 2 nonwinning nominees, 2 censored"


def test_censor_date_override():
    cutoff = date(2000, 1, 1)
    result = parse_dataset(GOOD.splitlines(), censor_date=cutoff)
    assert all(p.censor_date == cutoff for p in result.performers)


def test_round_trip_reproduces_domain_objects(null_raw):
    performers, nominations = null_raw
    names = {p.id: f"Performer {p.id[1:]}" for p in performers}
    text = serialize(performers, nominations, names=names)
    result = parse_dataset(text.splitlines())
    expected = {
        p.id: replace(p, censor_date=DEFAULT_CENSOR_DATE) for p in performers
    }
    assert {p.id: p for p in result.performers} == expected
    assert sorted(result.nominations, key=lambda n: (n.award_index, n.performer_id)) == sorted(
        nominations, key=lambda n: (n.award_index, n.performer_id)
    )
    assert dict(result.names) == names
    # a second pass over the parsed objects is byte-identical
    assert serialize(result.performers, result.nominations, names=result.names) == text


def test_serialize_is_order_insensitive(null_raw):
    performers, nominations = null_raw
    shuffled = serialize(list(reversed(performers)), list(reversed(nominations)))
    assert shuffled == serialize(performers, nominations)


def test_ingest_reads_file(tmp_path):
    path = tmp_path / "dataset.csv"
    path.write_text(GOOD, encoding="utf-8")
    result = ingest(path)
    assert result.n_performers == 3
    assert len(result.nominations) == 4


def test_death_before_award_is_logged_not_raised():
    text = GOOD.replace("p1,First Example,1920-05-01,1990-01-15",
                        "p1,First Example,1920-05-01,1956-01-01")
    result = parse_dataset(text.splitlines())
    # the 1955 nomination survives, the posthumous 1957 one is excluded
    assert len(result.exclusions) == 1
    assert "p1" in result.exclusions[0]
    assert "1956-01-01" in result.exclusions[0]
    assert "1957-03-27" in result.exclusions[0]
    assert sum(1 for n in result.nominations if n.performer_id == "p1") == 1


BAD_CASES = [
    ("p1,X,1920-01-01,\n", 1, "expected '# performers'"),
    ("# people\n", 1, "unknown section marker"),
    ("# nominations\n", 1, "before performers"),
    ("# performers\nperformer_id,name,birth\n", 2, "bad performers header"),
    (
        "# performers\nperformer_id,name,birth_date,death_date\n# performers\n",
        3,
        "duplicate performers section",
    ),
    (
        "# performers\nperformer_id,name,birth_date,death_date\np1,X,1920-13-01,\n",
        3,
        "bad birth_date",
    ),
    (
        "# performers\nperformer_id,name,birth_date,death_date\np1,X,1920-01-01,\np1,Y,1921-01-01,\n",
        4,
        "duplicate performer id",
    ),
    (
        "# performers\nperformer_id,name,birth_date,death_date\np1,X,1920-01-01\n",
        3,
        "expected 4 fields, got 3",
    ),
    (GOOD + "p1,abc,1960-01-01,lead-actor,0\n", 12, "bad award_index"),
    (GOOD + "p1,0,1960-01-01,lead-actor,0\n", 12, "award_index must be >= 1"),
    (GOOD + "p1,28,1955-03-30,lead-actor,0\n", 12, "duplicate nomination"),
    (GOOD + "p1,40,1967-01-01,best-dancer,0\n", 12, "unknown category"),
    (GOOD + "p1,40,1967-01-01,lead-actor,2\n", 12, "won must be 0 or 1"),
    (GOOD + "p9,40,1967-01-01,lead-actor,0\n", 12, "unknown performer"),
    ("", 1, "empty dataset"),
    ("\n\n", 2, "empty dataset"),
]


@pytest.mark.parametrize("text,line,fragment", BAD_CASES)
def test_format_errors_name_the_line(text, line, fragment):
    with pytest.raises(DataFormatError) as exc:
        parse_dataset(text.splitlines())
    assert exc.value.line == line
    assert fragment in str(exc.value)
    assert f"line {line}:" in str(exc.value)


def test_blank_lines_and_trailing_newlines_are_ignored():
    padded = "\n" + GOOD.replace("# nominations", "\n# nominations") + "\n\n"
    result = parse_dataset(padded.splitlines())
    assert result.n_performers == 3
    assert len(result.nominations) == 4
