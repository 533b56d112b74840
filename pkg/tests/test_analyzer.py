import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import wls_normal_equations
from semxai.analyzer import (
    AnalyzerConfig,
    NonFiniteInstance,
    explain_instance,
    fit_surrogate,
    kernel_weights,
    rank_features,
    sample_perturbations,
    weighted_least_squares,
)


def test_single_row_is_instance():
    x = np.array([0.3, -1.0])
    assert np.array_equal(sample_perturbations(x, 1, 1.0, 5), x[None, :])


def test_sampling_deterministic_and_calibrated():
    x = np.array([1.0, -2.0, 0.5])
    s1 = sample_perturbations(x, 1000, 1.0, 11)
    assert np.array_equal(s1, sample_perturbations(x, 1000, 1.0, 11))
    assert np.all(np.abs(s1.mean(axis=0) - x) < 0.1)
    std = s1.std(axis=0, ddof=1)
    assert np.all((std > 0.9) & (std < 1.1))
    with pytest.raises(NonFiniteInstance):
        sample_perturbations([np.inf, 0.0], 5, 1.0, 0)
    with pytest.raises(ValueError):
        sample_perturbations([0.0, 0.0], 5, [1.0, 0.0], 0)


def linear_case(n=5000, seed=3):
    x = np.zeros(2)
    samples = sample_perturbations(x, n, 1.0, seed)
    outputs = 2 * samples[:, 0] - samples[:, 1] + 5
    return x, samples, outputs


def test_linear_black_box_recovered():
    x, samples, outputs = linear_case()
    width = 0.75 * np.sqrt(2)
    expl = fit_surrogate(samples, outputs, x, width, 2, ["v1", "v2"])
    coef = np.array([expl.coefficients["v1"], expl.coefficients["v2"]])
    assert np.all(np.abs(coef - [2, -1]) / [2, 1] < 0.05)
    ref, ref_b = wls_normal_equations(samples, outputs, kernel_weights(samples, x, width), 1e-6)
    assert np.allclose(coef, ref, rtol=0, atol=1e-8) and abs(expl.intercept - ref_b) < 1e-8
    assert expl.ranking == ["v1", "v2"] and expl.fidelity >= 0.99
    assert fit_surrogate(samples, outputs, x, width, 1, ["v1", "v2"]).ranking == ["v1"]


def test_constant_black_box():
    x, samples, _ = linear_case(500)
    expl = fit_surrogate(samples, np.full(500, 4.2), x, 1.0, 2)
    assert max(abs(c) for c in expl.coefficients.values()) <= 1e-6
    assert abs(expl.intercept - 4.2) < 1e-9


def test_rank_features_rules():
    assert [f for f, _ in rank_features({"A": 0.5, "B": -2.0, "C": 0.0})] == ["B", "A", "C"]
    assert [f for f, _ in rank_features({"C": 0.0, "A": 0.0, "B": 0.0})] == ["A", "B", "C"]
    assert rank_features({"B": -1.0, "A": 1.0}) == [("A", 1.0), ("B", -1.0)]


def test_explain_instance_deterministic():
    rng = np.random.default_rng(0)
    w = rng.normal(size=5)
    predict = lambda X: X @ w + 1.0
    x = rng.normal(size=5)
    cfg = AnalyzerConfig(n_samples=400, top_k_features=3, seed=9)
    args = (predict, x, np.zeros(5), np.full(5, 2.0), cfg, list("ABCDE"))
    e1, e2 = explain_instance(*args), explain_instance(*args)
    assert e1.coefficients == e2.coefficients and e1.ranking == e2.ranking
    top = sorted(range(5), key=lambda i: (-abs(w[i]), i))[:3]
    assert e1.ranking == ["ABCDE"[i] for i in top]
    # with every feature kept the fit is exact; coefficients are per
    # standard deviation, so a scale of 2 doubles them
    full = explain_instance(predict, x, np.zeros(5), np.full(5, 2.0),
                            AnalyzerConfig(n_samples=400, top_k_features=5, seed=9), list("ABCDE"))
    for i in range(5):
        assert abs(full.coefficients["ABCDE"[i]] - 2 * w[i]) < 1e-6


def test_config_validation():
    with pytest.raises(ValueError):
        AnalyzerConfig(n_samples=5)
    with pytest.raises(ValueError):
        AnalyzerConfig(kernel_width=0.0)
    assert AnalyzerConfig().width_for(4) == 1.5


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 49))
def test_duplicate_row_half_weight_identity(seed, row):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 3))
    y = X @ rng.normal(size=3) + rng.normal(size=50)
    w = rng.random(50) + 0.1
    coef, b = weighted_least_squares(X, y, w)
    X2 = np.vstack([X, X[row]])
    y2 = np.append(y, y[row])
    w2 = np.append(w, w[row] / 2)
    w2[row] /= 2
    coef2, b2 = weighted_least_squares(X2, y2, w2)
    assert np.allclose(coef, coef2, atol=1e-10) and abs(b - b2) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_wls_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 4))
    y = rng.normal(size=30)
    w = rng.random(30)
    coef, b = weighted_least_squares(X, y, w, 1e-3)
    ref, ref_b = wls_normal_equations(X, y, w, 1e-3)
    assert np.allclose(coef, ref, atol=1e-9) and abs(b - ref_b) < 1e-9
