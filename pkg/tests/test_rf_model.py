import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gibbs_ic.data_gen import make_teacher
from gibbs_ic.rf_model import (
    ACTIVATIONS,
    CENTERED_QUADRATIC,
    design_matrix,
    empirical_logloss,
    empirical_mse,
    get_activation,
    init_features,
    population_risk_mc,
)


def loop_design(f, X, F):
    d = X.shape[1]
    out = np.empty((X.shape[0], F.shape[1]))
    for i in range(X.shape[0]):
        for j in range(F.shape[1]):
            out[i, j] = f(np.array([X[i] @ F[:, j] / np.sqrt(d)]))[0]
    return out


def loop_mse(w, B, Y):
    total = 0.0
    for i in range(len(Y)):
        total += (Y[i] - B[i] @ w) ** 2
    return total / len(Y)


def test_init_features_shape_and_determinism():
    m1 = init_features(400, 600, feature_seed=5)
    m2 = init_features(400, 600, feature_seed=5)
    assert m1.F.shape == (400, 600)
    assert np.array_equal(m1.F, m2.F)


def test_init_features_scalar():
    m = init_features(1, 1, feature_seed=0)
    assert m.F.shape == (1, 1)


def test_init_features_rejects_zero_dims():
    with pytest.raises(ValueError):
        init_features(0, 5, 1)
    with pytest.raises(ValueError):
        init_features(5, 0, 1)


def test_feature_column_variance_clt():
    d = 100_000
    m = init_features(d, 3, feature_seed=9)
    for j in range(3):
        assert abs(m.F[:, j].var() - 1.0) < 3 * np.sqrt(2.0 / d)


def test_design_matrix_zero_row_centered_quadratic():
    m = init_features(4, 6, 0, activation=CENTERED_QUADRATIC)
    X = np.zeros((2, 4))
    B = design_matrix(m, X).B
    assert np.allclose(B, -1.0 / np.sqrt(2.0))


def test_design_matrix_relu_zero_input():
    m = init_features(3, 5, 1, activation=get_activation("relu"))
    B = design_matrix(m, np.zeros((4, 3))).B
    assert np.all(B == 0.0)


def test_design_matrix_matches_scalar_loop():
    rng = np.random.default_rng(3)
    m = init_features(2, 2, 7, activation=get_activation("sigmoid"))
    X = rng.standard_normal((3, 2))
    B = design_matrix(m, X).B
    assert np.allclose(B, loop_design(m.activation.f, X, m.F), atol=0, rtol=1e-15)


def test_design_matrix_dimension_mismatch():
    m = init_features(4, 2, 0)
    with pytest.raises(ValueError):
        design_matrix(m, np.zeros((3, 5)))


def test_logloss_zero_residual():
    B = np.eye(3)
    w = np.array([1.0, 2.0, 3.0])
    assert empirical_logloss(w, B, B @ w, sigma2=1.0) == pytest.approx(0.9189385332046727, abs=1e-15)


def test_logloss_single_sample_plugin():
    # residual^2 = 2 sigma2 -> 1 + log(2 pi sigma2)/2 for any sigma2
    for s2 in (0.3, 1.0, 4.0):
        B = np.array([[1.0]])
        Y = np.array([np.sqrt(2 * s2)])
        got = empirical_logloss(np.zeros(1), B, Y, s2)
        assert got == pytest.approx(1.0 + 0.5 * np.log(2 * np.pi * s2), rel=1e-12)


def test_mse_and_logloss_match_loop_oracle():
    rng = np.random.default_rng(8)
    B = rng.standard_normal((7, 4))
    w = rng.standard_normal(4)
    Y = rng.standard_normal(7)
    assert empirical_mse(w, B, Y) == pytest.approx(loop_mse(w, B, Y), rel=1e-12)
    s2 = 0.7
    expect = loop_mse(w, B, Y) / (2 * s2) + 0.5 * np.log(2 * np.pi * s2)
    assert empirical_logloss(w, B, Y, s2) == pytest.approx(expect, rel=1e-12)


def test_mse_trivial_values():
    B = np.eye(2)
    Y = np.array([3.0, 4.0])
    assert empirical_mse(Y, B, Y) == 0.0
    assert empirical_mse(np.zeros(2), B, Y) == pytest.approx((9 + 16) / 2)


@given(
    w=arrays(np.float64, 3, elements=st.floats(-5, 5)),
    s2=st.floats(0.01, 10.0),
)
@settings(max_examples=50, deadline=None)
def test_logloss_mse_affine_relation(w, s2):
    rng = np.random.default_rng(0)
    B = rng.standard_normal((5, 3))
    Y = rng.standard_normal(5)
    lhs = empirical_logloss(w, B, Y, s2) - empirical_mse(w, B, Y) / (2 * s2)
    assert lhs == pytest.approx(0.5 * np.log(2 * np.pi * s2), rel=1e-12)


def test_centered_quadratic_moment_conditions():
    m1, m2, mp1 = CENTERED_QUADRATIC.gaussian_moments()
    assert abs(m1) < 1e-8
    assert abs(m2 - 1.0) < 1e-8
    assert abs(mp1) < 1e-8


def test_standardized_activations_zero_mean_unit_power():
    for name in ("relu_std", "sigmoid_std"):
        m1, m2, _ = ACTIVATIONS[name].gaussian_moments()
        assert abs(m1) < 1e-9
        assert abs(m2 - 1.0) < 1e-9


def test_population_risk_deterministic_and_floor():
    teacher = make_teacher(d=5, noise_var=0.3, seed=1)
    model = init_features(5, 5, feature_seed=2, activation=get_activation("identity"))
    # weights reproducing the teacher exactly: (F/sqrt(d)) w0 = w*
    w0 = np.linalg.solve(model.F / np.sqrt(5), teacher.w_star)
    a = population_risk_mc(w0, model, teacher, m=20_000, seed=5, sigma2=0.3)
    b = population_risk_mc(w0, model, teacher, m=20_000, seed=5, sigma2=0.3)
    assert a == b
    assert a.mse == pytest.approx(0.3, abs=4 * a.mse_se)


def test_population_risk_mc_self_consistency():
    teacher = make_teacher(d=6, noise_var=0.2, seed=3)
    model = init_features(6, 10, feature_seed=4)
    w = np.full(10, 0.1)
    small = population_risk_mc(w, model, teacher, m=10_000, seed=9)
    big = population_risk_mc(w, model, teacher, m=1_000_000, seed=10)
    assert abs(small.mse - big.mse) <= 4 * np.hypot(small.mse_se, big.mse_se)
