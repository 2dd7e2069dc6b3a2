import json
import math

import numpy as np
import pytest

import misscov


def random_spd(rng, p):
    a = rng.standard_normal((p, p))
    return a @ a.T + p * np.eye(p)


def test_scm_and_em_agree_on_complete_data():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((4, 50))
    s = misscov.scm(x)
    np.testing.assert_allclose(s, x @ x.T / 50, rtol=1e-12)
    r = misscov.em_covariance(x)
    assert r["iterations"] == 1
    np.testing.assert_array_equal(r["sigma"], s)


def test_em_with_missing_entries():
    rng = np.random.default_rng(1)
    x = rng.multivariate_normal(np.zeros(3), random_spd(rng, 3), size=300).T
    x[rng.random(x.shape) < 0.2] = np.nan
    x[0, np.isnan(x).all(axis=0)] = 0.0
    r = misscov.em_covariance(x)
    assert r["converged"]
    ll = r["loglik_history"]
    assert all(b >= a - 1e-9 * abs(a) for a, b in zip(ll, ll[1:]))
    assert math.isclose(misscov.observed_loglik(x, r["sigma"]), ll[-1], rel_tol=1e-9)


def test_geometry():
    rng = np.random.default_rng(2)
    a, b = random_spd(rng, 3), random_spd(rng, 3)
    assert misscov.air_distance(a, a) == pytest.approx(0.0, abs=1e-12)
    assert misscov.air_distance(a, b) == pytest.approx(misscov.air_distance(b, a), rel=1e-12)
    m = misscov.karcher_mean([a, b])
    assert misscov.air_distance(a, m) == pytest.approx(misscov.air_distance(m, b), rel=1e-8)
    full = misscov.masked_karcher_mean([a, b], [[0, 1, 2], [0, 1, 2]])
    np.testing.assert_allclose(full, m, rtol=1e-6)


def test_knn_example():
    candidates = np.array([[0.0, 1.0], [0.0, 1.0], [0.0, 1.0], [0.0, 3.0]])
    x = np.array([[0.0], [0.0], [0.0], [np.nan]])
    assert misscov.knn_impute(x, candidates, k=2)[3, 0] == 0.6


def test_simulate_and_classify():
    trials, labels = misscov.simulate("separated", seed=3)
    assert len(trials) == 400 and trials[0].shape == (16, 103)
    covs = [misscov.scm(t) for t in trials]
    train = list(range(0, 400, 2))
    test = list(range(1, 400, 2))
    pred = misscov.mdrm_fit_predict([covs[i] for i in train], [labels[i] for i in train], [covs[i] for i in test])
    acc = np.mean([p == labels[i] for p, i in zip(pred, test)])
    assert acc >= 0.95


def test_benchmark_and_errors():
    config = {"dataset": {"trials_per_class": [10, 10]}, "ratios": [0], "folds": 2, "seed": 1}
    rows = misscov.run_benchmark(json.dumps(config))
    assert len(rows) == 3 * 2
    config["pipelines"] = ["knn_scm"]
    with pytest.raises(misscov.ApplicabilityError):
        misscov.run_benchmark(json.dumps(config))
    with pytest.raises(misscov.ConfigError):
        misscov.run_benchmark(json.dumps({"bogus": 1}))
    with pytest.raises(misscov.Error):
        misscov.scm(np.array([[1.0, np.nan]]))
