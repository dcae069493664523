"""Kaplan-Meier product-limit estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import EmptyInputError, UndefinedMedianError

__all__ = ["KmCurve", "km", "KaplanMeier"]


@dataclass(frozen=True)
class KmCurve:
    """Product-limit curve evaluated at the distinct event times.

    ``survival[k]`` is the estimate just after ``times[k]``; before the first
    event time the curve equals one.  Ties at a time are processed as
    simultaneous events, with same-time censorings still counted at risk.
    """

    times: np.ndarray
    survival: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray

    def survival_at(self, t: float) -> float:
        idx = np.searchsorted(self.times, t, side="right")
        return 1.0 if idx == 0 else float(self.survival[idx - 1])

    def median(self, label: str = "survival curve") -> float:
        """Smallest time at which the curve drops to 0.5 or below."""
        below = np.flatnonzero(self.survival <= 0.5)
        if below.size == 0:
            raise UndefinedMedianError(f"{label}: survival never reaches 0.5")
        return float(self.times[below[0]])


def km(durations, events) -> KmCurve:
    """Kaplan-Meier estimate from durations and event flags.

    ``events`` is truthy for an observed event and falsy for censoring.
    """
    durations = np.asarray(durations, dtype=float)
    events = np.asarray(events, dtype=bool)
    if durations.size == 0:
        raise EmptyInputError("no observations for the product-limit estimate")
    if durations.shape != events.shape:
        raise ValueError("durations and events must have the same shape")
    if np.any(durations < 0):
        raise ValueError("durations must be nonnegative")
    event_times = np.unique(durations[events])
    if event_times.size == 0:
        return KmCurve(
            times=np.empty(0),
            survival=np.empty(0),
            at_risk=np.empty(0, dtype=int),
            events=np.empty(0, dtype=int),
        )
    # at risk at t: duration >= t; deaths at t counted before same-time censorings
    order = np.sort(durations)
    n_total = durations.size
    at_risk = n_total - np.searchsorted(order, event_times, side="left")
    deaths = np.array([(durations[events] == t).sum() for t in event_times])
    survival = np.cumprod(1.0 - deaths / at_risk)
    return KmCurve(
        times=event_times,
        survival=survival,
        at_risk=at_risk.astype(int),
        events=deaths.astype(int),
    )


class KaplanMeier(BaseEstimator):
    """Estimator-style wrapper around :func:`km`.

    Attributes after ``fit``: ``curve_`` (the :class:`KmCurve`) and
    ``median_`` (``None`` when the curve never reaches 0.5).
    """

    def fit(self, durations, events):
        self.curve_ = km(durations, events)
        try:
            self.median_ = self.curve_.median()
        except UndefinedMedianError:
            self.median_ = None
        return self

    def predict(self, times):
        """Survival probability at each requested time."""
        return np.array([self.curve_.survival_at(t) for t in np.atleast_1d(times)])
