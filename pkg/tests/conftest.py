import numpy as np
import pytest

from gibbs_ic.data_gen import make_teacher, sample_dataset
from gibbs_ic.gibbs import GaussianPrior, posterior
from gibbs_ic.rf_model import design_matrix, get_activation, init_features


@pytest.fixture(scope="session")
def small_rf():
    """One modest random-feature fit shared by read-only tests."""
    teacher = make_teacher(d=30, noise_var=0.1, seed=1)
    ds = sample_dataset(teacher, n=60, seed=2)
    model = init_features(30, 20, feature_seed=3, activation=get_activation("relu"))
    B = design_matrix(model, ds.X).B
    prior = GaussianPrior(lam=0.1, sigma2=0.5, p=20)
    post = posterior(B, ds.Y, prior, ds.n)
    return dict(teacher=teacher, ds=ds, model=model, B=B, prior=prior, post=post)
