"""Shared fixtures: synthetic award data with a known-null win effect."""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np
import pytest

from awardsurv.domain import Nomination, Performer, build_candidate_records


def make_null_dataset(rng, n_strata=250, m=5, categories=("lead-actor",)):
    """Strata where winning truly has no effect on survival.

    Residual lifetime is exponential with an age-dependent mean and the
    winner is drawn by an age-dependent softmax, so age confounds winning
    but the structural effect is exactly zero.  Returns (performers,
    nominations); censoring is administrative per performer.
    """
    performers, noms = [], []
    pid = 0
    base = date(1960, 1, 1)
    for s in range(n_strata):
        award_date = base + timedelta(days=int(365.25 * (s % 40)))
        ages = rng.uniform(30.0, 70.0, size=m)
        mean_resid = np.maximum(45.0 - 0.45 * ages, 5.0)
        u = rng.exponential(mean_resid)
        eta = 0.03 * (ages - 50.0)
        p = np.exp(eta - eta.max())
        p /= p.sum()
        w = rng.choice(m, p=p)
        for j in range(m):
            pid += 1
            birth = award_date - timedelta(days=int(ages[j] * 365.25))
            censor = award_date + timedelta(
                days=int(rng.uniform(20.0, 45.0) * 365.25)
            )
            death = award_date + timedelta(days=max(int(u[j] * 365.25), 1))
            performers.append(
                Performer(
                    id=f"p{pid}",
                    birth=birth,
                    death=death if death <= censor else None,
                    censor_date=censor,
                )
            )
            noms.append(
                Nomination(
                    performer_id=f"p{pid}",
                    award_index=s + 1,
                    award_date=award_date,
                    category=categories[s % len(categories)],
                    won=bool(j == w),
                )
            )
    return performers, noms


def make_null_strata(rng, n_strata=250, m=5):
    performers, noms = make_null_dataset(rng, n_strata=n_strata, m=m)
    return build_candidate_records(performers, noms)


@pytest.fixture(scope="session")
def null_strata():
    """A fixed medium-size null dataset, shared across tests."""
    return make_null_strata(np.random.default_rng(11), n_strata=120)


@pytest.fixture(scope="session")
def null_raw():
    """(performers, nominations) for a fixed small null dataset."""
    return make_null_dataset(np.random.default_rng(7), n_strata=40)
