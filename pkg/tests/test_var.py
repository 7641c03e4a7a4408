import numpy as np
import pytest

from spillover import DataError, FevdTable, NumericalError, cholesky_fevd, fit_var, gfevd, ma_coefficients, select_lag
from spillover.var import StabilityWarning, VarModel, gfevd_from_params, information_criteria

from conftest import MASTER_SEED, make_panel, random_stable_var, simulate_var
from oracles import companion_power_gfevd, monte_carlo_gfevd


def model_from(coefs, sigma):
    coefs = np.asarray(coefs, dtype=float)
    if coefs.ndim == 2:
        coefs = coefs[None]
    N = coefs.shape[1]
    return VarModel(tuple(f"y{i}" for i in range(N)), coefs, np.zeros(N), np.asarray(sigma, float))


# --- fit_var ---------------------------------------------------------------

def test_fit_recovers_ar1():
    rng = np.random.default_rng(MASTER_SEED)
    y = simulate_var([[[0.5]]], 10_000, rng)
    m = fit_var(make_panel(y), 1)
    assert abs(m.coefs[0, 0, 0] - 0.5) < 0.02


def test_white_noise_coefficients_small():
    rng = np.random.default_rng(MASTER_SEED + 1)
    T = 2000
    m = fit_var(make_panel(rng.standard_normal((T, 3))), 1)
    assert np.all(np.abs(m.coefs[0]) < 3 / np.sqrt(T))


def test_insufficient_observations():
    y = np.random.default_rng(0).standard_normal((8, 3))
    with pytest.raises(DataError, match="insufficient"):
        fit_var(make_panel(y), 2)      # T - p = 6 <= N*p + 1 = 7


def test_rank_deficient():
    x = np.random.default_rng(0).standard_normal(50)
    with pytest.raises(DataError, match="rank"):
        fit_var(make_panel(np.column_stack([x, 2 * x])), 1)


def test_residuals_orthogonal_and_centered():
    rng = np.random.default_rng(3)
    coefs, sigma = random_stable_var(rng, 3, 2)
    y = simulate_var(coefs, 400, rng, sigma)
    m = fit_var(make_panel(y), 2)
    from spillover.var import lag_matrix
    _, X = lag_matrix(y, 2, True)
    assert np.abs(X.T @ m.residuals).max() < 1e-8
    assert np.abs(m.residuals.mean(axis=0)).max() < 1e-10
    np.testing.assert_allclose(m.sigma, m.residuals.T @ m.residuals / (400 - 2))


def test_unstable_estimate_warns():
    y = np.cumsum(np.cumsum(np.random.default_rng(1).standard_normal((300, 1)), axis=0), axis=0)
    with pytest.warns(StabilityWarning):
        fit_var(make_panel(y), 1)


# --- select_lag ------------------------------------------------------------

VAR2 = np.array([[[0.5, 0.1], [0.0, 0.4]], [[-0.35, 0.0], [0.2, -0.3]]])


@pytest.mark.slow
def test_bic_selects_two_for_strong_var2():
    rng = np.random.default_rng(MASTER_SEED)
    hits = sum(select_lag(make_panel(simulate_var(VAR2, 2000, rng)), 6) == 2 for _ in range(100))
    assert hits >= 90


def test_bic_white_noise_selects_one():
    rng = np.random.default_rng(MASTER_SEED)
    picks = [select_lag(make_panel(rng.standard_normal((500, 2))), 4) for _ in range(30)]
    assert picks.count(1) > len(picks) / 2


def test_select_lag_pmax_one():
    y = np.random.default_rng(0).standard_normal((50, 2))
    assert select_lag(make_panel(y), 1) == 1
    ic = information_criteria(make_panel(y), 3)
    assert ic["bic"].shape == (3,)
    with pytest.raises(DataError):
        select_lag(make_panel(y), 2, criterion="hq")


# --- ma_coefficients -------------------------------------------------------

def test_ma_zero_coefficients():
    A = ma_coefficients(np.zeros((1, 2, 2)), 5)
    np.testing.assert_array_equal(A[0], np.eye(2))
    np.testing.assert_array_equal(A[1:], 0)


def test_ma_scalar_geometric():
    A = ma_coefficients(np.array([[[0.5]]]), 8)
    np.testing.assert_allclose(A[:, 0, 0], 0.5 ** np.arange(8))


def test_ma_decay_matches_spectral_radius():
    rng = np.random.default_rng(11)
    coefs, _ = random_stable_var(rng, 3, 1)
    lam = np.max(np.abs(np.linalg.eigvals(coefs[0])))
    A = ma_coefficients(coefs, 200)
    norms = np.array([np.linalg.norm(a, 2) for a in A])
    rate = (norms[199] / norms[150]) ** (1 / 49)
    assert abs(rate - lam) < 1e-2


# --- gfevd -----------------------------------------------------------------

def test_gfevd_identity_for_independent_white_noise():
    t = gfevd(model_from(np.zeros((2, 2)), np.diag([1.0, 4.0])), 10)
    np.testing.assert_allclose(t.table, np.eye(2), atol=1e-15)


def test_gfevd_h1_diagonal_sigma_is_identity():
    rng = np.random.default_rng(5)
    coefs, _ = random_stable_var(rng, 4, 2)
    t = gfevd(model_from(coefs, np.diag([1.0, 2.0, 0.5, 3.0])), 1)
    np.testing.assert_allclose(t.table, np.eye(4), atol=1e-15)


BIVARIATE = np.array([[[0.5, 0.3], [0.0, 0.5]]])


def test_gfevd_bivariate_closed_form():
    t = gfevd(model_from(BIVARIATE, np.eye(2)), 10)
    np.testing.assert_allclose(t.table, companion_power_gfevd(BIVARIATE, np.eye(2), 10), atol=1e-12)
    np.testing.assert_allclose(t.table.sum(axis=1), 1, atol=1e-12)


def test_gfevd_bivariate_monte_carlo():
    rng = np.random.default_rng(MASTER_SEED)
    mc = monte_carlo_gfevd(BIVARIATE, np.eye(2), [10], 1_000_000, rng)[10]
    t = gfevd(model_from(BIVARIATE, np.eye(2)), 10)
    assert np.abs(t.table - mc).max() < 1e-2


def test_gfevd_permutation_invariance():
    rng = np.random.default_rng(8)
    coefs, sigma = random_stable_var(rng, 4, 2)
    base = gfevd(model_from(coefs, sigma), 10)
    perm = rng.permutation(4)
    pc = coefs[:, perm][:, :, perm]
    ps = sigma[np.ix_(perm, perm)]
    t = gfevd_from_params(pc, ps, 10)
    inv = np.argsort(perm)
    np.testing.assert_allclose(t.table[np.ix_(inv, inv)], base.table, atol=1e-12)


def test_gfevd_converges_in_horizon():
    rng = np.random.default_rng(21)
    for _ in range(10):
        coefs, sigma = random_stable_var(rng, 3, 1)
        m = model_from(coefs, sigma)
        assert np.abs(gfevd(m, 60).table - gfevd(m, 50).table).max() < 1e-6


def test_gfevd_rows_and_range():
    rng = np.random.default_rng(2)
    for _ in range(20):
        coefs, sigma = random_stable_var(rng, 3, 2)
        t = gfevd(model_from(coefs, sigma), 7)
        assert np.all(t.table >= 0) and np.all(t.table <= 1)
        np.testing.assert_allclose(t.table.sum(axis=1), 1, atol=1e-10)


def test_gfevd_rejects_bad_sigma():
    with pytest.raises(NumericalError):
        gfevd(model_from(np.zeros((2, 2)), [[1.0, 2.0], [2.0, 1.0]]), 5)
    with pytest.raises(DataError):
        gfevd(model_from(np.zeros((2, 2)), np.eye(2)), 0)


def test_cholesky_fevd_order_dependence():
    m = model_from(BIVARIATE, [[1.0, 0.6], [0.6, 1.0]])
    a = cholesky_fevd(m, 10, ["y0", "y1"])
    b = cholesky_fevd(m, 10, ["y1", "y0"])
    np.testing.assert_allclose(a.table.sum(axis=1), 1)
    assert a.table[0, 1] < b.table[0, 1]     # ordered first, y0 keeps more of its own variance
    # diagonal covariance: ordering is irrelevant and equals the generalized result
    d = model_from(BIVARIATE, np.eye(2))
    np.testing.assert_allclose(cholesky_fevd(d, 10).table, gfevd(d, 10).table, atol=1e-14)


def test_fevd_table_validation():
    with pytest.raises(DataError):
        FevdTable(("a", "b"), 1, np.eye(2), [[0.5, 0.4], [0, 1]])
    t = FevdTable.from_shares([[30.0, 70.0], [10.0, 90.0]], ["a", "b"])
    np.testing.assert_allclose(t.table, [[0.3, 0.7], [0.1, 0.9]])
