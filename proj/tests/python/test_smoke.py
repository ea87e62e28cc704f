import math

import numpy as np
import pytest

import spectral_damp as sd


def test_shrinkage_identity():
    rng = np.random.default_rng(0)
    for lam, delta in rng.uniform(0.01, 10.0, size=(50, 2)):
        p = sd.shrinkage_from_delta(delta)
        lhs = 1.0 / (lam + delta)
        rhs = (1.0 / p.kappa) / (p.beta * lam + 1.0 - p.beta)
        assert abs(lhs - rhs) < 1e-12


def test_optimal_damping():
    p = sd.optimal_damping(1.0)
    assert p.beta == pytest.approx(0.5)
    assert p.delta == pytest.approx(1.0)


def test_dense_eigh_matches_numpy():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(30, 30))
    a = (a + a.T) / 2
    values, vectors = sd.dense_eigh(a)
    np.testing.assert_allclose(values, np.sort(np.linalg.eigvalsh(a))[::-1], atol=1e-10)
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(30), atol=1e-10)


def test_lanczos_full_spectrum():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(40, 40))
    a = (a + a.T) / 2
    d = sd.lanczos(a, 40, seed=3)
    np.testing.assert_allclose(d.ritz_values, np.sort(np.linalg.eigvalsh(a))[::-1], atol=1e-9)


def test_lanczos_callable():
    diag = np.arange(1.0, 21.0)
    d = sd.lanczos_operator(lambda v: diag * v, 20, 20, 0)
    assert d.ritz_values[0] == pytest.approx(20.0)


def test_overlap_prediction_threshold():
    spec = sd.SpikedEnsembleSpec(dim=1024, batch_size=100, noise_scale=1.0)
    s = math.sqrt(10.24)
    assert sd.overlap_prediction(2 * s, spec) == pytest.approx(0.75)
    assert sd.overlap_prediction(0.5 * s, spec) == 0.0


def test_fluctuation_is_symmetric_semicircle():
    spec = sd.SpikedEnsembleSpec(dim=200, batch_size=50, noise_scale=1.0)
    x = sd.sample_fluctuation(spec, 4)
    assert np.allclose(x, x.T)
    law = sd.SemicircleLaw.from_spec(spec)
    assert sd.esd_ks_distance(np.linalg.eigvalsh(x), law) < 0.1


def test_variance_estimate_zero_for_identical():
    h = np.diag(np.arange(1.0, 6.0))
    sigma2, per_probe = sd.estimate_variance([h, h, h], n_probes=4, seed=1)
    assert sigma2 == pytest.approx(0.0, abs=1e-12)
    assert len(per_probe) == 4


def test_softmax_gradient_finite_difference():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(12, 3))
    y = list(rng.integers(0, 4, size=12))
    model = sd.SoftmaxRegression(3, 4)
    w = rng.normal(size=model.param_count) * 0.1
    _, g, _ = model.loss_grad(w, x, y)
    h = 1e-6
    for i in range(model.param_count):
        e = np.zeros_like(w)
        e[i] = h
        fd = (model.loss_grad(w + e, x, y)[0] - model.loss_grad(w - e, x, y)[0]) / (2 * h)
        assert g[i] == pytest.approx(fd, abs=1e-7)


def test_schedule_breakpoints():
    assert sd.schedule_lr("linear_decay", 0.1, 100, 50) == pytest.approx(0.1)
    assert sd.schedule_lr("linear_decay", 0.1, 100, 95) == pytest.approx(0.001)
    assert sd.schedule_lr("warmup", 0.1, 100, 30) == pytest.approx(0.5)


def test_stability_sweep():
    grid = [round(0.1 * i, 10) for i in range(1, 11)]
    assert sd.largest_stable_gd_lr(list(np.linspace(0.4, 4.0, 20)), grid, 2000, 0) == pytest.approx(0.4)


def test_run_config_synthetic():
    cfg = """
name = smoke
dataset = synthetic
n_train = 64
n_test = 32
synthetic_dim = 5
synthetic_classes = 3
model = softmax_regression
optimizer = lanczos_opt
lanczos_steps = 5
lr = 0.1
damping = 0.1
eta = 1, 3
epochs = 3
seeds = 0
"""
    runs = sd.run_config(cfg)
    assert len(runs) == 2
    assert [e["epoch"] for e in runs[0]["epochs"]] == [0, 1, 2, 3]
    assert all(0.0 <= e["train_err"] <= 1.0 for e in runs[0]["epochs"])


def test_config_errors():
    with pytest.raises(ValueError):
        sd.run_config("bogus_key = 1\nseeds = 0\n")
