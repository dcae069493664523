"""Structural transform: latent times, artificial censoring, vectorization."""

from datetime import date
from math import exp

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from awardsurv.domain import (
    Nomination,
    Performer,
    build_candidate_records,
    years_between,
)
from awardsurv.errors import InconsistentRecordError, InvalidCensoringError
from awardsurv.rpsaftm import (
    StrataArrays,
    artificial_censor_time,
    censored_latent,
    latent_time,
)

CENSOR = date(2007, 7, 25)


@pytest.fixture(scope="module")
def veteran_records():
    """A long career: eight nominations, first win on the fourth.

    Exercises every transform branch: nominations before the first win
    (affected by psi), at the first win (f_years = 0), and after it
    (unaffected).  A same-day filler candidate completes each stratum.
    """
    star = Performer(
        id="star", birth=date(1924, 4, 3), death=date(2004, 7, 1),
        censor_date=CENSOR,
    )
    filler = Performer(id="other", birth=date(1930, 1, 1), censor_date=CENSOR)
    career = [
        (77, date(1952, 3, 20), False),
        (81, date(1953, 3, 19), False),
        (85, date(1954, 3, 25), False),
        (89, date(1955, 3, 30), True),
        (101, date(1958, 3, 26), False),
        (161, date(1973, 4, 27), True),
        (165, date(1974, 4, 2), False),
        (231, date(1990, 3, 26), False),
    ]
    noms = []
    for idx, when, won in career:
        noms.append(Nomination(
            performer_id="star", award_index=idx, award_date=when,
            category="lead-actor", won=won,
        ))
        noms.append(Nomination(
            performer_id="other", award_index=idx, award_date=when,
            category="lead-actor", won=not won,
        ))
    strata = build_candidate_records([star, filler], noms)
    return {
        s.award_index: next(c for c in s.candidates if c.performer_id == "star")
        for s in strata
    }


def test_psi_zero_is_identity(null_strata, veteran_records):
    records = [c for s in null_strata for c in s.candidates]
    records += list(veteran_records.values())
    for r in records:
        assert latent_time(r.X, r.F, r.D, 0.0) == r.X


def test_never_winner_unaffected_by_psi(null_strata):
    records = [c for s in null_strata for c in s.candidates if c.F is None]
    assert records
    for psi in (-0.4, -0.1, 0.3):
        for r in records[:50]:
            assert latent_time(r.X, r.F, r.D, psi) == r.X


def test_transform_oracle_on_career(veteran_records):
    """Hand-computed latent times at psi = -0.2 for each branch."""
    psi = -0.2
    death = date(2004, 7, 1)
    first_win = date(1955, 3, 30)

    # nomination before the first win: post-win stretch is rescaled
    rec = veteran_records[77]
    d = date(1952, 3, 20)
    x = (death.toordinal() - d.toordinal()) / 365.25
    f_years = (first_win.toordinal() - d.toordinal()) / 365.25
    assert rec.X == pytest.approx(x)
    expected = f_years + exp(psi) * (x - f_years)
    assert latent_time(rec.X, rec.F, rec.D, psi) == pytest.approx(expected)
    assert latent_time(rec.X, rec.F, rec.D, psi) == pytest.approx(3.0267, abs=2e-4)

    # nomination on the first-win day: the whole residual time is rescaled
    rec = veteran_records[89]
    x89 = (death.toordinal() - first_win.toordinal()) / 365.25
    assert latent_time(rec.X, rec.F, rec.D, psi) == pytest.approx(exp(psi) * x89)

    # nomination after the first win: untouched
    rec = veteran_records[231]
    assert rec.F < rec.D
    assert latent_time(rec.X, rec.F, rec.D, psi) == rec.X


def test_artificial_censoring_branches(veteran_records):
    psi = -0.2
    # won before this award: administrative horizon kept
    rec = veteran_records[231]
    h = years_between(rec.D, rec.censor_date)
    assert artificial_censor_time(rec.censor_date, rec.D, rec.F, psi) == h
    # first win at/after the award: horizon shrunk on the short side
    rec = veteran_records[77]
    h = years_between(rec.D, rec.censor_date)
    assert artificial_censor_time(rec.censor_date, rec.D, rec.F, psi) == pytest.approx(
        min(h, h * exp(psi))
    )
    # positive psi shrinks nothing
    assert artificial_censor_time(rec.censor_date, rec.D, rec.F, 0.3) == h


@settings(max_examples=200, deadline=None)
@given(
    u=st.floats(1.0, 60.0),
    f_years=st.floats(0.0, 20.0),
    horizon=st.floats(5.0, 50.0),
    psi=st.floats(-0.6, 0.6),
)
def test_censoring_fairness_on_matched_pairs(u, f_years, horizon, psi):
    """A winner and non-winner with equal latent time and horizon censor alike.

    The winner's observed time stretches the post-win part by exp(-psi);
    back-transforming at the true psi and applying the artificial bound must
    give both candidates the same censored value and the same censor flag.
    """
    award = date(1970, 3, 1)
    censor = date(
        award.year + int(horizon), award.month, award.day
    )
    h = years_between(award, censor)
    if u <= f_years:
        u = f_years + 1.0
    first_win = date.fromordinal(award.toordinal() + int(f_years * 365.25))
    f_exact = years_between(award, first_win)
    x_winner = f_exact + exp(-psi) * (u - f_exact)
    u_winner = latent_time(x_winner, first_win, award, psi)
    u_nonwin = latent_time(u, None, award, psi)
    c_winner = artificial_censor_time(censor, award, first_win, psi)
    c_nonwin = artificial_censor_time(censor, award, None, psi)
    assert u_winner == pytest.approx(u, rel=1e-12, abs=1e-12)
    assert u_nonwin == u
    assert c_winner == c_nonwin
    assert min(u_winner, c_winner) == pytest.approx(min(u_nonwin, c_nonwin), rel=1e-12)


def test_first_win_after_followup_end_rejected():
    with pytest.raises(InconsistentRecordError):
        latent_time(1.0, date(1980, 1, 1), date(1970, 1, 1), 0.0)
    with pytest.raises(InconsistentRecordError):
        latent_time(-0.5, None, date(1970, 1, 1), 0.0)


def test_censor_before_award_rejected():
    with pytest.raises(InvalidCensoringError):
        artificial_censor_time(date(1969, 1, 1), date(1970, 1, 1), None, 0.0)


def test_censored_latent_flags(veteran_records):
    # negative psi can pull the artificial bound below an observed death
    rec = veteran_records[77]
    lt = censored_latent(rec, -0.5)
    assert lt.u_star_star == pytest.approx(min(lt.u, lt.c_psi))
    if lt.c_psi < lt.u:
        assert lt.censored
    # at psi = 0 the bound is the administrative horizon; observed deaths stay events
    lt0 = censored_latent(rec, 0.0)
    assert lt0.u == rec.X
    assert not lt0.censored


def test_vectorized_matches_scalar(null_strata):
    arrays = StrataArrays.from_strata(null_strata)
    records = [c for s in null_strata for c in s.candidates]
    for psi in (-0.3, 0.0, 0.25):
        uss, censored = arrays.u_star_star(psi)
        for k, rec in enumerate(records):
            lt = censored_latent(rec, psi)
            assert uss[k] == pytest.approx(lt.u_star_star, rel=1e-12, abs=1e-12)
            assert censored[k] == lt.censored


def test_strata_arrays_layout(null_strata):
    arrays = StrataArrays.from_strata(null_strata)
    assert arrays.n_strata == len(null_strata)
    # groups are contiguous and sized like the strata
    sizes = np.bincount(arrays.group)
    assert list(sizes) == [s.n for s in null_strata]
    assert arrays.y.sum() == len(null_strata)
