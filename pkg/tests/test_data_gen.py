import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbs_ic.data_gen import (
    HOLDOUT_SEED_XOR,
    Dataset,
    dump_dataset_csv,
    holdout_seed,
    make_teacher,
    sample_dataset,
)


def test_teacher_unit_norm():
    t = make_teacher(d=400, noise_var=0.1, seed=7)
    assert abs(t.w_star @ t.w_star - 1.0) < 1e-12
    assert t.d == 400


def test_teacher_one_dimensional_is_sign():
    t = make_teacher(d=1, noise_var=0.2, seed=5)
    assert t.w_star[0] in (1.0, -1.0)


def test_teacher_deterministic():
    a = make_teacher(d=12, noise_var=0.3, seed=99)
    b = make_teacher(d=12, noise_var=0.3, seed=99)
    assert np.array_equal(a.w_star, b.w_star)


@pytest.mark.parametrize("d,noise", [(0, 0.1), (3, 0.0), (3, -1.0)])
def test_teacher_rejects_bad_args(d, noise):
    with pytest.raises(ValueError):
        make_teacher(d, noise, seed=0)


def test_dataset_shapes_and_determinism():
    t = make_teacher(d=7, noise_var=0.25, seed=3)
    a = sample_dataset(t, n=200, seed=11)
    b = sample_dataset(t, n=200, seed=11)
    assert a.X.shape == (200, 7) and a.Y.shape == (200,)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.Y, b.Y)
    c = sample_dataset(t, n=200, seed=12)
    assert not np.array_equal(a.Y, c.Y)


def test_dataset_rejects_n_zero():
    t = make_teacher(d=2, noise_var=0.1, seed=0)
    with pytest.raises(ValueError):
        sample_dataset(t, n=0, seed=0)


def test_vanishing_noise_recovers_linear_map():
    t = make_teacher(d=6, noise_var=1e-12, seed=4)
    ds = sample_dataset(t, n=5, seed=8)
    assert np.max(np.abs(ds.Y - ds.X @ t.w_star)) < 1e-5


def test_label_mean_and_variance_match_theory():
    # Var(y) = ||w*||^2 + noise_var; CLT bounds at 3 standard errors
    t = make_teacher(d=10, noise_var=0.5, seed=21)
    n = 100_000
    ds = sample_dataset(t, n=n, seed=22)
    var_y = 1.0 + 0.5
    assert abs(ds.Y.mean()) < 3 * np.sqrt(var_y / n)
    se_var = np.sqrt(2.0 / n) * var_y  # Gaussian chi-square variance of the sample variance
    assert abs(ds.Y.var() - var_y) < 3 * se_var


def test_immutable_arrays():
    t = make_teacher(d=3, noise_var=0.1, seed=1)
    ds = sample_dataset(t, n=4, seed=2)
    with pytest.raises(ValueError):
        ds.X[0, 0] = 5.0
    with pytest.raises(ValueError):
        t.w_star[0] = 5.0


def test_holdout_seed_namespace():
    assert holdout_seed(123) == 123 ^ HOLDOUT_SEED_XOR
    assert holdout_seed(holdout_seed(123)) == 123
    t = make_teacher(d=4, noise_var=0.1, seed=0)
    train = sample_dataset(t, 10, seed=55)
    test = sample_dataset(t, 10, seed=holdout_seed(55))
    assert not np.array_equal(train.X, test.X)


@given(seed=st.integers(min_value=-(2**63), max_value=2**63 - 1))
@settings(max_examples=20, deadline=None)
def test_any_64bit_seed_accepted(seed):
    t = make_teacher(d=2, noise_var=0.1, seed=seed)
    ds = sample_dataset(t, n=3, seed=seed)
    assert np.all(np.isfinite(ds.Y))


def test_csv_dump_format(tmp_path):
    t = make_teacher(d=2, noise_var=0.1, seed=1)
    ds = sample_dataset(t, n=3, seed=2)
    path = tmp_path / "ds.csv"
    dump_dataset_csv(ds, str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x_0,x_1,y"
    assert len(lines) == 4
    # 17 significant digits round-trip to the exact float
    cells = lines[1].split(",")
    assert float(cells[0]) == ds.X[0, 0]
    assert float(cells[2]) == ds.Y[0]
