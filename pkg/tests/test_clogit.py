"""Conditional logistic core: likelihood oracle, invariances, gradient checks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, special

from awardsurv.clogit import (
    ConditionalLogit,
    CovariateBasis,
    DesignConfig,
    build_design,
    fit_model,
    score_test,
)
from awardsurv.clogit import _loglik_only, _group_starts, _group_inverse, _parts
from awardsurv.errors import RankDeficiencyError

NO_PRENOM = DesignConfig(nomage_basis="poly3", include_numprenom=False)


def brute_loglik(X, y, groups, beta):
    """Direct per-stratum conditional log-likelihood, no shared code paths."""
    eta = X @ beta
    total = 0.0
    for g in np.unique(groups):
        mask = groups == g
        e = eta[mask]
        total += e[y[mask]][0] - special.logsumexp(e)
    return total


def random_problem(rng, n_strata=30, p=3):
    sizes = rng.integers(2, 6, size=n_strata)
    groups = np.repeat(np.arange(n_strata), sizes)
    X = rng.normal(size=(groups.size, p))
    y = np.zeros(groups.size, dtype=bool)
    start = 0
    for s in sizes:
        y[start + rng.integers(0, s)] = True
        start += s
    return X, y, groups


def test_loglik_matches_brute_force():
    rng = np.random.default_rng(3)
    X, y, groups = random_problem(rng)
    model = ConditionalLogit().fit(X, y, groups)
    for _ in range(5):
        beta = rng.normal(scale=0.7, size=X.shape[1])
        assert model.loglik(X, y, groups, coef=beta) == pytest.approx(
            brute_loglik(X, y, groups, beta), rel=1e-12
        )


def test_fit_matches_independent_optimizer():
    rng = np.random.default_rng(4)
    X, y, groups = random_problem(rng, n_strata=60)
    model = ConditionalLogit().fit(X, y, groups)
    res = optimize.minimize(
        lambda b: -brute_loglik(X, y, groups, b),
        np.zeros(X.shape[1]),
        method="BFGS",
        options={"gtol": 1e-10},
    )
    assert model.converged_
    np.testing.assert_allclose(model.coef_, res.x, rtol=1e-6, atol=1e-8)
    assert model.loglik_ == pytest.approx(-res.fun, rel=1e-10)


def test_two_candidate_strata_equal_difference_logistic():
    """With two candidates a stratum reduces to a logit on covariate differences."""
    rng = np.random.default_rng(5)
    X, y, groups = random_problem(rng, n_strata=80)
    keep = np.isin(groups, [g for g in np.unique(groups) if (groups == g).sum() == 2])
    X, y, groups = X[keep], y[keep], groups[keep]

    diffs = []
    for g in np.unique(groups):
        xw = X[(groups == g) & y][0]
        xl = X[(groups == g) & ~y][0]
        diffs.append(xw - xl)
    diffs = np.asarray(diffs)

    beta = np.zeros(X.shape[1])
    for _ in range(50):
        p = special.expit(diffs @ beta)
        grad = diffs.T @ (1.0 - p)
        hess = (diffs * (p * (1.0 - p))[:, None]).T @ diffs
        step = np.linalg.solve(hess, grad)
        beta = beta + step
        if np.max(np.abs(step)) < 1e-13:
            break

    model = ConditionalLogit(tol=1e-12, param_tol=1e-14).fit(X, y, groups)
    np.testing.assert_allclose(model.coef_, beta, rtol=1e-8, atol=1e-10)


def test_statsmodels_cross_check(null_strata):
    sm_clogit = pytest.importorskip(
        "statsmodels.discrete.conditional_models"
    ).ConditionalLogit
    design = build_design(null_strata, 0.1, NO_PRENOM)
    # Same z-scored matrix for both fitters: statsmodels runs raw Newton and
    # needs the conditioning; comparing on one scale avoids back-transforms.
    Z = (design.matrix - design.matrix.mean(axis=0)) / design.matrix.std(axis=0)
    model = ConditionalLogit().fit(Z, design.y, design.groups)
    ref = sm_clogit(design.y.astype(int), Z, groups=design.groups).fit(
        method="newton", tol=1e-12, maxiter=300, disp=0
    )
    np.testing.assert_allclose(model.coef_, ref.params, rtol=1e-5, atol=1e-7)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_stratum_translation_invariance(seed):
    """Adding stratum-level constants to columns changes nothing conditional."""
    rng = np.random.default_rng(seed)
    X, y, groups = random_problem(rng, n_strata=25)
    shifts = rng.normal(scale=5.0, size=(25, X.shape[1]))
    X2 = X + shifts[groups]
    base = ConditionalLogit().fit(X, y, groups)
    shifted = ConditionalLogit().fit(X2, y, groups)
    np.testing.assert_allclose(shifted.coef_, base.coef_, rtol=1e-7, atol=1e-9)
    assert shifted.loglik_ == pytest.approx(base.loglik_, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_permutation_invariance(seed):
    """Row order within strata and stratum labels are irrelevant."""
    rng = np.random.default_rng(seed)
    X, y, groups = random_problem(rng, n_strata=25)
    perm = rng.permutation(groups.size)
    relabel = rng.permutation(groups.max() + 1)
    base = ConditionalLogit().fit(X, y, groups)
    shuffled = ConditionalLogit().fit(X[perm], y[perm], relabel[groups[perm]])
    np.testing.assert_allclose(shuffled.coef_, base.coef_, rtol=1e-7, atol=1e-9)
    assert shuffled.loglik_ == pytest.approx(base.loglik_, rel=1e-10)


def test_analytic_gradient_matches_finite_differences():
    rng = np.random.default_rng(6)
    X, y, groups = random_problem(rng, n_strata=40)
    starts = _group_starts(groups)
    inv = _group_inverse(groups)
    offset = np.zeros(groups.size)
    beta = rng.normal(scale=0.5, size=X.shape[1])
    _, score, _, _ = _parts(X, y, starts, inv, beta, offset)
    h = 1e-5
    for k in range(beta.size):
        e = np.zeros_like(beta)
        e[k] = h
        fd = (
            _loglik_only(X, y, starts, inv, beta + e, offset)
            - _loglik_only(X, y, starts, inv, beta - e, offset)
        ) / (2 * h)
        assert abs(fd - score[k]) / max(abs(score[k]), 1.0) < 1e-6


def test_fisher_information_matches_finite_difference_hessian():
    rng = np.random.default_rng(7)
    X, y, groups = random_problem(rng, n_strata=40)
    starts = _group_starts(groups)
    inv = _group_inverse(groups)
    offset = np.zeros(groups.size)
    beta = rng.normal(scale=0.3, size=X.shape[1])
    _, _, info, _ = _parts(X, y, starts, inv, beta, offset)
    h = 1e-5
    for k in range(beta.size):
        e = np.zeros_like(beta)
        e[k] = h
        _, s_plus, _, _ = _parts(X, y, starts, inv, beta + e, offset)
        _, s_minus, _, _ = _parts(X, y, starts, inv, beta - e, offset)
        fd_row = (s_plus - s_minus) / (2 * h)
        np.testing.assert_allclose(fd_row, -info[k], rtol=1e-4, atol=1e-6)


def test_theta_offset_shifts_the_free_coefficient(null_strata):
    base = fit_model(null_strata, 0.05, NO_PRENOM)
    shifted = fit_model(null_strata, 0.05, NO_PRENOM, theta_offset=0.01)
    assert shifted.theta == pytest.approx(base.theta - 0.01, abs=1e-7)
    np.testing.assert_allclose(shifted.coef[:-1], base.coef[:-1], rtol=1e-5, atol=1e-7)


def test_score_test_zero_at_unconstrained_optimum(null_strata):
    fit = fit_model(null_strata, 0.0, NO_PRENOM)
    stat, p = score_test(null_strata, 0.0, NO_PRENOM, theta_null=fit.theta)
    assert stat == pytest.approx(0.0, abs=1e-6)
    assert p > 0.999


def test_score_and_wald_agree_on_large_data(null_strata):
    fit = fit_model(null_strata, 0.0, NO_PRENOM)
    stat, p_score = score_test(null_strata, 0.0, NO_PRENOM, theta_null=0.0)
    wald_stat = (fit.theta / fit.theta_se) ** 2
    assert stat == pytest.approx(wald_stat, rel=0.2)
    assert p_score == pytest.approx(fit.p_value, abs=0.05)


def test_design_columns_poly_and_spline(null_strata):
    d3 = build_design(null_strata, 0.0, DesignConfig("poly3", False))
    assert d3.columns[-1] == "u_star_star"
    assert len([c for c in d3.columns if c.startswith("nomage")]) == 3
    ds = build_design(null_strata, 0.0, DesignConfig("spline:2", False))
    spline_cols = [c for c in ds.columns if c.startswith("nomage_bs")]
    assert len(spline_cols) == 5  # K interior knots -> K + 3 columns
    assert np.isfinite(ds.matrix).all()


def test_spline_knots_fixed_by_prefit_basis(null_strata):
    config = DesignConfig("spline:2", False)
    from awardsurv.rpsaftm import StrataArrays

    arrays = StrataArrays.from_strata(null_strata)
    basis = CovariateBasis(config).fit(arrays.nomage)
    d_full = build_design(null_strata, 0.0, config, basis=basis)
    d_sub = build_design(null_strata[:40], 0.0, config, basis=basis)
    np.testing.assert_allclose(
        d_sub.matrix[:, :-1],
        d_full.matrix[: d_sub.matrix.shape[0], :-1],
        rtol=1e-12,
    )


def test_constant_column_raises():
    rng = np.random.default_rng(8)
    X, y, groups = random_problem(rng, n_strata=20)
    X[:, 1] = 2.5
    with pytest.raises(RankDeficiencyError):
        ConditionalLogit().fit(X, y, groups)


def test_stratum_without_single_winner_rejected():
    rng = np.random.default_rng(9)
    X, y, groups = random_problem(rng, n_strata=10)
    y[groups == 3] = False
    with pytest.raises(ValueError):
        ConditionalLogit().fit(X, y, groups)
