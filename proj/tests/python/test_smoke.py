"""Smoke tests for the python module: one light pass over each operation."""

import json
import math

import numpy as np
import pytest

import lcid


def test_l1_projection_and_prox():
    v = np.array([2.0, 1.0])
    assert np.allclose(lcid.project_l1_ball(v, 1.0), [1.0, 0.0], atol=1e-8)
    assert np.allclose(lcid.prox_inf_norm(v, 1.0), [1.0, 1.0], atol=1e-8)

    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.normal(size=rng.integers(1, 30))
        eta = float(rng.uniform(0.01, 5.0))
        residual = lcid.prox_inf_norm(x, eta) + lcid.project_l1_ball(x, eta) - x
        assert np.max(np.abs(residual)) <= 1e-12


def test_psd_kernels():
    m = np.array([[1.0, 2.0], [2.0, 1.0]])
    repaired = lcid.nearest_psd(m, 1e-8)
    assert np.allclose(repaired, [[1.5, 1.5], [1.5, 1.5]], atol=1e-6)

    root = lcid.psd_sqrt(np.diag([4.0, 9.0]))
    assert np.allclose(root, np.diag([2.0, 3.0]))

    q = lcid.orthogonal_factor(np.diag([2.0, 3.0]))
    assert np.allclose(q, np.eye(2), atol=1e-12)


def test_toeplitz_fit():
    coeffs, fitted = lcid.toeplitz_ls_fit([(np.array([[1.0, 2.0], [3.0, 5.0]]), 1.0)])
    assert np.allclose(coeffs, [3.0, 3.0, 2.0])
    assert np.allclose(fitted, [[3.0, 2.0], [3.0, 3.0]])


def test_coherence_and_bound():
    assert lcid.mutual_coherence(np.eye(3)) == 0.0
    assert lcid.coherence_condition(np.eye(3), 5)
    assert lcid.recovery_bound(40, 10, 1.0) == pytest.approx(0.7461, abs=1e-4)


def test_filtering_round_trip():
    u = np.array([1.0, -0.5, 2.0, 0.25])
    filtered = lcid.filter_fixed_denominator(u, np.array([-0.5]), 1.0)
    recovered = lcid.recover_input(filtered, np.array([-0.5]), 1.0)
    assert np.allclose(recovered, u, atol=1e-12)


def test_regressor_and_fim():
    u = np.array([0.0, 0.0, 1.0, 0.0])
    phi = lcid.build_regressor(u, 2, 3)
    assert np.allclose(phi, [[0, 0], [1, 0], [0, 1]])
    assert np.allclose(lcid.fim(phi, 1.0), np.eye(2))


def test_spectrum_and_realization():
    r = lcid.bandpass_autocorrelation(0.1, 0.3, 1.0, 50)
    assert r[0] == pytest.approx(0.2 / math.pi)
    floored = lcid.add_white_floor(r, 0.003)
    assert floored[0] == pytest.approx(r[0] + 0.003)

    target = lcid.gram_target_from_spectrum(floored, 6, 50)
    assert target.shape == (6, 6)
    assert np.allclose(target, target.T)

    u = lcid.realize_input_fdm(floored, 100, 40, seed=7)
    assert u.shape == (139,)
    phi = lcid.build_regressor(u, 40, 100)
    assert lcid.mutual_coherence(phi) >= 0.9

    again = lcid.realize_input_fdm(floored, 100, 40, seed=7)
    assert np.array_equal(u, again)


def test_design_white_target():
    result = lcid.run_lcid(4.0 * np.eye(2), 4)
    assert result.mu_h <= 1e-6
    gram = result.phi.T @ result.phi
    assert np.linalg.norm(gram - 4.0 * np.eye(2)) / np.linalg.norm(4.0 * np.eye(2)) <= 1e-6
    assert result.converged
    assert result.trace.shape[1] == 9


def test_estimators():
    rng = np.random.default_rng(1)
    gen = rng.normal(size=17)
    phi = lcid.build_regressor(gen, 6, 12)
    theta0 = np.zeros(6)
    theta0[1] = 1.4
    theta0[4] = -0.9
    y = phi @ theta0

    est = lcid.omp(phi, y, 2)
    assert est.support == [1, 4]
    assert np.allclose(est.theta, theta0, atol=1e-8)

    refit = lcid.ls_refit(phi, y, [1, 4])
    assert np.allclose(refit.theta, theta0, atol=1e-8)

    leading = np.zeros(6)
    leading[:3] = [1.0, -0.7, 0.4]
    picked = lcid.order_select_ls(phi, phi @ leading, "bic")
    assert picked.sparsity == 3

    x_hat, noise_cov = lcid.transformed_ls(phi, np.eye(6), y)
    assert np.allclose(x_hat, theta0, atol=1e-8)
    assert noise_cov.shape == (6, 6)

    combined = lcid.lcid_estimate(x_hat, np.eye(6), phi, y, mode="fixed-s", s=2)
    assert combined.support == [1, 4]

    lam = lcid.cross_validate(
        lambda a, b, l: lcid.ladmm_lasso(a, b, l), phi, y, grid_size=8
    )
    assert lam > 0

    dense = lcid.ladmm_lasso(phi, y, 1e-9)
    assert np.allclose(dense, theta0, atol=1e-5)


def test_metrics():
    theta0 = lcid.generate_theta0(10, 4, 256, 3)
    assert np.count_nonzero(theta0[4:]) == 0
    assert lcid.v_app(theta0, theta0, eta=0.1, grid_size=256) == 0.0
    assert lcid.nrmse(np.zeros(10), theta0) == pytest.approx(1.0)
    assert abs(lcid.desired_sensitivity(0.1, math.pi)) == pytest.approx(1.1)

    phi = lcid.build_regressor(np.random.default_rng(2).normal(size=14), 5, 10)
    sigma2 = lcid.snr_to_sigma2(0.0, phi, theta0[:5] + 0.1)
    assert sigma2 == pytest.approx(np.linalg.norm(phi @ (theta0[:5] + 0.1)) ** 2 / 10)


def test_benchmark_sweep():
    scenario = {
        "n_theta": 10,
        "n": 30,
        "s": 3,
        "snr_list": [10],
        "mc_runs": 2,
        "seed": 5,
        "spectrum": {"type": "bandpass", "w1": 0.2, "w2": 0.9, "order": 12, "floor": 0.02},
        "grid_size": 128,
    }
    records = lcid.run_benchmark(json.dumps(scenario), methods=["OMP", "LCID-OMP"], jobs=2)
    assert len(records) == 4
    assert {r["method"] for r in records} == {"OMP", "LCID-OMP"}
    assert all(r["status"] == "ok" for r in records)
    lcid_rows = [r for r in records if r["method"] == "LCID-OMP"]
    assert all(r["mu_h"] < r["mu_phi"] for r in lcid_rows)
