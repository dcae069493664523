"""Conditional logistic regression over exactly-one-winner strata.

Each award stratum contributes a discrete-choice likelihood term: the
probability that the observed winner is the one selected among the stratum's
candidates under a softmax over linear predictors.  Fitting is plain Newton
with step-halving on the (concave) conditional log-likelihood; the score test
for the latent-time coefficient is evaluated at the constrained fit.

Covariates are standardized internally (dataset mean/sd) for Hessian
conditioning and coefficients are back-transformed for reporting; convergence
tolerances apply to the standardized problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import interpolate, linalg, stats
from sklearn.base import BaseEstimator

from .domain import AwardStratum
from .errors import NonConvergenceError, RankDeficiencyError
from .rpsaftm import StrataArrays

__all__ = [
    "DesignConfig",
    "Design",
    "FitResult",
    "ConditionalLogit",
    "build_design",
    "fit_model",
    "score_test",
]


@dataclass(frozen=True)
class DesignConfig:
    """How candidate covariate rows are constructed.

    ``nomage_basis`` is ``"poly3"`` (age, age squared, age cubed),
    ``"spline:K"`` for a cubic B-spline with K interior knots (1..4) placed
    at equally spaced quantiles of age over the full analysis dataset, or
    ``"none"`` to omit age terms entirely (callers then supply their own
    age covariates).  ``extra_covariates`` names additional per-record
    covariates to append.
    """

    nomage_basis: str = "poly3"
    include_numprenom: bool = True
    extra_covariates: tuple[str, ...] = ()

    def spline_knots(self) -> int | None:
        if self.nomage_basis in ("poly3", "none"):
            return None
        kind, _, arg = self.nomage_basis.partition(":")
        if kind != "spline" or not arg.isdigit():
            raise ValueError(f"unknown nomage basis {self.nomage_basis!r}")
        k = int(arg)
        if not 1 <= k <= 4:
            raise ValueError(f"spline knot count must be in 1..4, got {k}")
        return k


@dataclass(frozen=True)
class Design:
    """Per-candidate covariate rows for one value of the effect parameter.

    ``matrix`` columns are the age basis, the previous-nomination count, any
    extra covariates, and finally the censored latent time; ``columns`` names
    them in order.  ``informative`` flags rows belonging to strata of size
    at least two (singleton strata contribute a constant likelihood term).
    """

    matrix: np.ndarray
    columns: tuple[str, ...]
    y: np.ndarray
    groups: np.ndarray
    informative: np.ndarray
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class FitResult:
    """Coefficients and inference for one conditional-logistic fit.

    ``coef`` spans every design column; ``theta`` is the coefficient on the
    censored latent time (the last column) when present.  ``p_value`` is the
    score-test p when the result comes from :func:`score_test`, otherwise the
    two-sided Wald p for ``theta``.
    """

    columns: tuple[str, ...]
    coef: np.ndarray
    cov: np.ndarray
    loglik: float
    converged: bool
    iterations: int
    theta: float | None = None
    theta_se: float | None = None
    score_stat: float | None = None
    p_value: float = float("nan")
    warnings: tuple[str, ...] = ()

    @property
    def beta(self) -> np.ndarray:
        """Coefficients on the plain covariates (everything but the latent time)."""
        if self.theta is None:
            return self.coef
        return self.coef[:-1]

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))

    @property
    def z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coef / self.se

    @property
    def wald_p(self) -> np.ndarray:
        return 2.0 * stats.norm.sf(np.abs(self.z))


# ---------------------------------------------------------------------------
# Design construction


class CovariateBasis:
    """Learns the age basis (polynomial or spline knots) from a dataset."""

    def __init__(self, config: DesignConfig):
        self.config = config
        self.knots_: np.ndarray | None = None
        self.boundary_: tuple[float, float] | None = None

    def fit(self, nomage: np.ndarray) -> "CovariateBasis":
        k = self.config.spline_knots()
        if k is not None:
            qs = np.linspace(0, 1, k + 2)[1:-1]
            self.knots_ = np.quantile(nomage, qs)
            self.boundary_ = (float(np.min(nomage)), float(np.max(nomage)))
        return self

    def transform(self, nomage: np.ndarray) -> tuple[np.ndarray, list[str]]:
        if self.config.nomage_basis == "none":
            return np.empty((nomage.size, 0)), []
        if self.config.spline_knots() is None:
            cols = np.column_stack([nomage, nomage**2, nomage**3])
            return cols, ["nomage", "nomage_sq", "nomage_cu"]
        lo, hi = self.boundary_
        t = np.r_[[lo] * 4, self.knots_, [hi] * 4]
        x = np.clip(nomage, lo, hi)
        basis = interpolate.BSpline.design_matrix(x, t, k=3).toarray()
        # B-spline columns sum to one; drop the first so the basis stays
        # identifiable once stratum conditioning absorbs the intercept.
        basis = basis[:, 1:]
        names = [f"nomage_bs{j + 1}" for j in range(basis.shape[1])]
        return basis, names


def build_design(
    strata: list[AwardStratum] | StrataArrays,
    psi: float,
    config: DesignConfig = DesignConfig(),
    basis: CovariateBasis | None = None,
) -> Design:
    """Assemble the covariate matrix (including the latent-time column).

    Spline knots and quantiles are always computed over the full dataset
    passed in, never per stratum.  A pre-fitted ``basis`` can be supplied to
    keep knots fixed while re-evaluating at many effect values.
    """
    arrays = strata if isinstance(strata, StrataArrays) else StrataArrays.from_strata(strata)
    warnings: list[str] = []
    if basis is None:
        basis = CovariateBasis(config).fit(arrays.nomage)
    cols, names = basis.transform(arrays.nomage)
    parts = [cols]
    if names and np.ptp(arrays.nomage) == 0:
        warnings.append("degenerate age basis: all candidates share one nomage")
    if config.include_numprenom:
        parts.append(arrays.numprenom[:, None])
        names = names + ["numprenom"]
    for name in config.extra_covariates:
        parts.append(arrays.extra[name][:, None])
        names = names + [name]
    uss, _ = arrays.u_star_star(psi)
    parts.append(uss[:, None])
    names = names + ["u_star_star"]
    sizes = np.bincount(arrays.group, minlength=arrays.n_strata)
    return Design(
        matrix=np.column_stack(parts),
        columns=tuple(names),
        y=arrays.y.copy(),
        groups=arrays.group.copy(),
        informative=sizes[arrays.group] >= 2,
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# Newton core (array level)


def _group_starts(groups: np.ndarray) -> np.ndarray:
    if groups.size == 0:
        raise ValueError("empty stratum index")
    changed = groups[1:] != groups[:-1]
    return np.flatnonzero(np.r_[True, changed])


def _group_inverse(groups: np.ndarray) -> np.ndarray:
    return np.cumsum(np.r_[False, groups[1:] != groups[:-1]])


def _parts(X, y, starts, inv, beta, offset):
    """Log-likelihood, score, and information at one parameter point."""
    eta = offset if X.shape[1] == 0 else X @ beta + offset
    top = np.maximum.reduceat(eta, starts)
    z = np.exp(eta - top[inv])
    denom = np.add.reduceat(z, starts)
    pi = z / denom[inv]
    loglik = float(eta[y].sum() - (np.log(denom) + top).sum())
    resid = np.asarray(y, dtype=float) - pi
    score = X.T @ resid
    weighted = X * pi[:, None]
    stratum_means = np.add.reduceat(weighted, starts, axis=0)
    info = X.T @ weighted - stratum_means.T @ stratum_means
    return loglik, score, info, pi


def _loglik_only(X, y, starts, inv, beta, offset):
    eta = offset if X.shape[1] == 0 else X @ beta + offset
    top = np.maximum.reduceat(eta, starts)
    z = np.exp(eta - top[inv])
    denom = np.add.reduceat(z, starts)
    return float(eta[y].sum() - (np.log(denom) + top).sum())


@dataclass
class _NewtonOutput:
    beta: np.ndarray
    cov: np.ndarray
    loglik: float
    iterations: int
    converged: bool


def _newton_clogit(X, y, groups, offset, tol, param_tol, max_iter):
    starts = _group_starts(groups)
    inv = _group_inverse(groups)
    n, p = X.shape
    if offset is None:
        offset = np.zeros(n)
    if p == 0:
        ll = _loglik_only(X, y, starts, inv, np.zeros(0), offset)
        return _NewtonOutput(np.zeros(0), np.zeros((0, 0)), ll, 0, True)

    beta = np.zeros(p)
    loglik, score, info, _ = _parts(X, y, starts, inv, beta, offset)
    converged = np.max(np.abs(score)) < tol
    it = 0
    while not converged and it < max_iter:
        it += 1
        try:
            chol = linalg.cho_factor(info)
            delta = linalg.cho_solve(chol, score)
        except linalg.LinAlgError as err:
            raise RankDeficiencyError(
                f"singular information matrix at iteration {it}"
            ) from err
        step = 1.0
        new_beta = beta + delta
        new_ll = _loglik_only(X, y, starts, inv, new_beta, offset)
        while not np.isfinite(new_ll) or new_ll < loglik - 1e-12:
            step *= 0.5
            if step < 1e-12:
                break
            new_beta = beta + step * delta
            new_ll = _loglik_only(X, y, starts, inv, new_beta, offset)
        moved = np.max(np.abs(new_beta - beta))
        beta = new_beta
        loglik, score, info, _ = _parts(X, y, starts, inv, beta, offset)
        if np.max(np.abs(score)) < tol or moved < param_tol:
            converged = True
    if not converged:
        raise NonConvergenceError(
            f"conditional logit did not converge in {max_iter} iterations",
            last_iterate=beta,
        )
    try:
        cov = linalg.inv(info)
    except linalg.LinAlgError as err:
        raise RankDeficiencyError("singular information at the optimum") from err
    return _NewtonOutput(beta, cov, loglik, it, converged)


def _standardize(X):
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    if np.any(sd == 0):
        bad = [str(j) for j in np.flatnonzero(sd == 0)]
        raise RankDeficiencyError(f"constant design column(s): {', '.join(bad)}")
    return (X - mean) / sd, sd


class ConditionalLogit(BaseEstimator):
    """Conditional (one winner per stratum) logistic regression.

    Parameters
    ----------
    tol : float
        Convergence threshold on the max absolute score (standardized scale).
    param_tol : float
        Alternative threshold on the max absolute parameter change.
    max_iter : int
        Newton iteration budget; exceeding it raises ``NonConvergenceError``.

    Attributes
    ----------
    coef_ : array of shape (p,)
        Coefficients on the original covariate scale.
    cov_ : array of shape (p, p)
        Inverse observed information, original scale.
    loglik_ : float
        Conditional log-likelihood at the optimum.
    """

    def __init__(self, tol: float = 1e-8, param_tol: float = 1e-10, max_iter: int = 100):
        self.tol = tol
        self.param_tol = param_tol
        self.max_iter = max_iter

    def fit(self, X, y, groups, offset=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=bool)
        groups = np.asarray(groups)
        if X.ndim != 2 or X.shape[0] != y.shape[0] or y.shape[0] != groups.shape[0]:
            raise ValueError("X, y and groups must share their first dimension")
        order = np.argsort(groups, kind="stable")
        if np.any(order != np.arange(order.size)):
            X, y, groups = X[order], y[order], groups[order]
            offset = None if offset is None else np.asarray(offset, float)[order]
        counts = np.bincount(
            np.unique(groups, return_inverse=True)[1], weights=y.astype(float)
        )
        if np.any(counts != 1):
            raise ValueError("every stratum must contain exactly one winner")
        if X.shape[1] == 0:
            out = _newton_clogit(X, y, groups, offset, self.tol, self.param_tol, self.max_iter)
            self.coef_, self.cov_ = out.beta, out.cov
        else:
            Xs, sd = _standardize(X)
            out = _newton_clogit(Xs, y, groups, offset, self.tol, self.param_tol, self.max_iter)
            self.coef_ = out.beta / sd
            self.cov_ = out.cov / np.outer(sd, sd)
        self.loglik_ = out.loglik
        self.n_iter_ = out.iterations
        self.converged_ = out.converged
        return self

    def loglik(self, X, y, groups, coef=None, offset=None):
        """Conditional log-likelihood at ``coef`` (default: the fitted one)."""
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=bool)
        groups = np.asarray(groups)
        beta = self.coef_ if coef is None else np.asarray(coef, dtype=float)
        starts = _group_starts(groups)
        inv = _group_inverse(groups)
        if offset is None:
            offset = np.zeros(len(y))
        return _loglik_only(X, y, starts, inv, beta, offset)


def _rao_statistic(X, y, groups, coef, offset):
    """Score statistic for the last column of X, evaluated at ``coef``."""
    Xs, sd = _standardize(X)
    starts = _group_starts(groups)
    inv = _group_inverse(groups)
    if offset is None:
        offset = np.zeros(len(y))
    _, score, info, _ = _parts(Xs, y, starts, inv, coef * sd, offset)
    try:
        inv_info = linalg.inv(info)
    except linalg.LinAlgError as err:
        raise RankDeficiencyError("singular information in score test") from err
    return float(score[-1] ** 2 * inv_info[-1, -1])


# ---------------------------------------------------------------------------
# Stratum-level operations


def _informative_design(design: Design) -> Design:
    if np.all(design.informative):
        return design
    keep = design.informative
    return replace(
        design,
        matrix=design.matrix[keep],
        y=design.y[keep],
        groups=design.groups[keep],
        informative=design.informative[keep],
    )


def _require_informative(design: Design) -> Design:
    design = _informative_design(design)
    if np.unique(design.groups).size < 2:
        raise ValueError("need at least two informative strata to fit")
    return design


def fit_model(
    strata: list[AwardStratum] | StrataArrays,
    psi: float,
    config: DesignConfig = DesignConfig(),
    theta_offset: float = 0.0,
    basis: CovariateBasis | None = None,
) -> FitResult:
    """Fit the winner model at one effect value, with a free latent-time slope.

    ``theta_offset`` adds a fixed, known multiple of the censored latent time
    to every linear predictor; the reported ``theta`` then measures the free
    deviation from that offset.
    """
    design = _require_informative(build_design(strata, psi, config, basis))
    u = design.matrix[:, -1]
    offset = theta_offset * u if theta_offset else None
    model = ConditionalLogit().fit(design.matrix, design.y, design.groups, offset=offset)
    theta = float(model.coef_[-1])
    theta_se = float(np.sqrt(model.cov_[-1, -1]))
    wald = 2.0 * stats.norm.sf(abs(theta / theta_se)) if theta_se > 0 else float("nan")
    return FitResult(
        columns=design.columns,
        coef=model.coef_,
        cov=model.cov_,
        loglik=model.loglik_,
        converged=model.converged_,
        iterations=model.n_iter_,
        theta=theta,
        theta_se=theta_se,
        p_value=wald,
        warnings=design.warnings,
    )


def score_test(
    strata: list[AwardStratum] | StrataArrays,
    psi: float,
    config: DesignConfig = DesignConfig(),
    theta_null: float = 0.0,
    basis: CovariateBasis | None = None,
) -> tuple[float, float]:
    """Score test of the latent-time coefficient against ``theta_null``.

    Fits the model with the latent-time coefficient pinned at ``theta_null``
    (plain covariates free), then evaluates the Rao statistic for the pinned
    coordinate at that constrained fit.  Returns ``(statistic, p_value)``
    with the p-value from the chi-square distribution with one degree of
    freedom (two-sided).
    """
    design = _require_informative(build_design(strata, psi, config, basis))
    stat = _score_statistic(design, theta_null)
    return stat, float(stats.chi2.sf(stat, df=1))


def _score_statistic(design: Design, theta_null: float) -> float:
    u = design.matrix[:, -1]
    W = design.matrix[:, :-1]
    offset = theta_null * u
    if W.shape[1] > 0:
        constrained = ConditionalLogit().fit(W, design.y, design.groups, offset=offset)
        coef = np.r_[constrained.coef_, theta_null]
    else:
        coef = np.array([theta_null])
    return _rao_statistic(design.matrix, design.y, design.groups, coef, None)
