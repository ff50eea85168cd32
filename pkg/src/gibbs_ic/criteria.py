"""Information criteria: classical AIC/BIC and their Gibbs-posterior counterparts.

All criteria follow the 1/n scaling convention (no factor of 2) with natural
logarithms, so every criterion is directly comparable to per-sample risks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np
from scipy.linalg import cho_solve

from . import gibbs, rmt
from .data_gen import holdout_seed, make_teacher, rng_from, sample_dataset
from .gibbs import GaussianPrior
from .rf_model import design_matrix, empirical_logloss, get_activation, init_features
from .samplers import mala_run, posterior_estimate, rf_loss_spec


def aic_classical(loglik_hat: float, n: int, p: int) -> float:
    """-loglik/n + p/n, with loglik_hat the total log-likelihood at the MLE."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return -loglik_hat / n + p / n


def bic_classical(loglik_hat: float, n: int, p: int) -> float:
    """-loglik/n + p log(n) / (2n)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return -loglik_hat / n + p * math.log(n) / (2.0 * n)


def aic_plus(l_e_gibbs: float, i_skl: float, beta: float) -> float:
    """Gibbs training risk plus the information penalty i_skl / beta."""
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    return l_e_gibbs + i_skl / beta


def bic_plus_exact(l_e_gibbs: float, kl_post_prior: float, n: int) -> float:
    """Gibbs training risk plus D(posterior || prior)/n."""
    return l_e_gibbs + kl_post_prior / n


def bic_minus_exact(prior_risk: float, kl_prior_post: float, n: int) -> float:
    """Prior-expected training risk minus D(prior || posterior)/n.

    Equals -(1/n) log marginal likelihood exactly, with no sampling involved.
    """
    return prior_risk - kl_prior_post / n


@dataclass(frozen=True)
class BicPlusOver:
    """Over-parameterized criterion value with its two penalty pieces."""

    value: float
    l2_term: float
    covariance_term: float


def bic_plus_over(l_e_gibbs: float, w_lambda_norm2: float, lam: float, sigma2: float, r: float) -> BicPlusOver:
    """L_E + (lam/(2 sigma2)) ||W_hat||^2 + [ -(lam/8) F(1/lam, r) + (1/2) V(1/lam, r) ]."""
    if not (lam > 0 and sigma2 > 0 and r > 0):
        raise ValueError("need lam, sigma2, r > 0")
    gamma = 1.0 / lam
    l2 = lam / (2.0 * sigma2) * w_lambda_norm2
    cov = -lam / 8.0 * rmt.f_func(gamma, r) + 0.5 * rmt.v_func(gamma, r)
    return BicPlusOver(value=l_e_gibbs + l2 + cov, l2_term=l2, covariance_term=cov)


def bic_minus_over(
    prior_risk: float,
    w_hat: np.ndarray,
    sigma_w: np.ndarray,
    B: np.ndarray,
    lam: float,
    n: int,
    r: float,
) -> float:
    """Asymptotic counterpart of bic_minus_exact for the random-feature model."""
    B = np.asarray(B, dtype=float)
    p = w_hat.shape[0]
    c = gibbs._chol(sigma_w)
    quad = float(w_hat @ cho_solve(c, w_hat))
    tr = p + float(np.sum(B * B)) / (lam * n)
    return prior_risk - quad / (2.0 * n) - tr / (2.0 * n) + 0.5 * rmt.v_func(1.0 / lam, r) + p / (2.0 * n)


@dataclass(frozen=True)
class GibbsModelConfig:
    """Everything needed to instantiate teacher + features + posterior for one model size."""

    n: int
    d: int
    p: int
    activation: str
    noise_var: float
    sigma2: float
    lam: float

    def prior(self) -> GaussianPrior:
        return GaussianPrior(lam=self.lam, sigma2=self.sigma2, p=self.p)


@dataclass(frozen=True)
class IsklEstimate:
    i_skl: float
    gen_error: float
    std_error: float
    n_replicates: int


def _population_logloss_exact_linear(model, teacher, mean, cov, sigma2):
    # identity activation: b(x) = x'F/sqrt(d), so the squared error integrates exactly
    ft = model.F / np.sqrt(model.d)
    resid = teacher.w_star - ft @ mean
    tr = float(np.sum((ft @ cov) * ft))
    mse = float(resid @ resid) + tr + teacher.noise_var
    return mse / (2.0 * sigma2) + 0.5 * np.log(2.0 * np.pi * sigma2)


def i_skl_estimate(
    cfg: GibbsModelConfig,
    m_replicates: int,
    seed: int,
    method: str = "draw",
    sampler_eta: float = 0.01,
    sampler_steps: int = 2000,
    holdout: int = 2000,
) -> IsklEstimate:
    """Estimate the symmetrized-KL penalty via the generalization error.

    Averages L_P(W) - L_E(W) over `m_replicates` fresh training sets, with W
    from the Gibbs posterior, and reports i_skl = beta * gen (beta = n).

    method: "draw" uses one exact posterior sample per replicate, "mala"
    averages over retained MALA samples, and "exact" integrates the posterior
    in closed form (lowest variance). All three target the same expectation.
    """
    if m_replicates < 2:
        raise ValueError(f"need at least 2 replicates, got {m_replicates}")
    if method not in ("draw", "mala", "exact"):
        raise ValueError(f"unknown method {method!r}")
    activation = get_activation(cfg.activation)
    teacher = make_teacher(cfg.d, cfg.noise_var, rng_from(seed, 0x7EA0).integers(2**63))
    model = init_features(cfg.d, cfg.p, rng_from(seed, 0xFEA0).integers(2**63), activation)
    prior = cfg.prior()
    exact_linear = activation.name == "identity"

    gens = np.empty(m_replicates)
    for j in range(m_replicates):
        ds_seed = int(rng_from(seed, 0xDA7A, j).integers(2**63))
        ds = sample_dataset(teacher, cfg.n, ds_seed)
        B = design_matrix(model, ds.X).B
        post = gibbs.posterior(B, ds.Y, prior, cfg.n)

        if not exact_linear:
            test = sample_dataset(teacher, holdout, holdout_seed(ds_seed))
            B_test = design_matrix(model, test.X).B

        if method == "exact":
            train = gibbs.posterior_expected_risk(B, ds.Y, post)
            if exact_linear:
                pop = _population_logloss_exact_linear(model, teacher, post.mean, post.cov, cfg.sigma2)
                # control variate: L_P(w*) - L_E(w*) has mean zero over datasets
                # and cancels most of the dataset-level loss fluctuation
                lp_star = teacher.noise_var / (2.0 * cfg.sigma2) + 0.5 * np.log(2.0 * np.pi * cfg.sigma2)
                le_star = empirical_logloss(
                    np.linalg.lstsq(model.F / np.sqrt(model.d), teacher.w_star, rcond=None)[0],
                    B, ds.Y, cfg.sigma2)
                gens[j] = (pop - lp_star) - (train - le_star)
                continue
            else:
                resid = test.Y - B_test @ post.mean
                tr = float(np.sum((B_test @ post.cov) * B_test))
                pop = (float(resid @ resid) + tr) / (2.0 * cfg.sigma2 * holdout) \
                    + 0.5 * np.log(2.0 * np.pi * cfg.sigma2)
        else:
            if method == "draw":
                w = post.draw(rng_from(seed, 0xD0, j), size=1)[0]
                ws = w[None, :]
            else:
                spec = rf_loss_spec(B, ds.Y, prior, cfg.n)
                run = mala_run(spec, np.zeros(cfg.p), sampler_eta, sampler_steps,
                               sampler_steps // 2, 10, seed=ds_seed)
                ws = run.samples
            train = float(np.mean([empirical_logloss(w, B, ds.Y, cfg.sigma2) for w in ws]))
            if exact_linear:
                ft = model.F / np.sqrt(model.d)
                mses = [float(np.sum((teacher.w_star - ft @ w) ** 2)) + teacher.noise_var for w in ws]
                pop = float(np.mean(mses)) / (2.0 * cfg.sigma2) + 0.5 * np.log(2.0 * np.pi * cfg.sigma2)
            else:
                pop = float(np.mean([empirical_logloss(w, B_test, test.Y, cfg.sigma2) for w in ws]))
        gens[j] = pop - train

    gen = float(gens.mean())
    se = float(gens.std(ddof=1) / np.sqrt(m_replicates))
    return IsklEstimate(i_skl=cfg.n * gen, gen_error=gen, std_error=se, n_replicates=m_replicates)


def wbic_baseline(
    B: np.ndarray,
    Y: np.ndarray,
    prior: GaussianPrior,
    n: int,
    seed: int,
    method: str = "mala",
    eta: float = 0.01,
    steps: int = 2000,
) -> float:
    """Tempered-posterior estimate of the marginal likelihood (external baseline).

    Averages the per-sample negative log-likelihood over the posterior at
    inverse temperature beta* = n / log n.
    """
    if n < 3:
        raise ValueError(f"WBIC needs n >= 3, got {n}")
    beta_star = n / math.log(n)
    if method == "closed_form":
        # tempering by 1/log n keeps the ridge mean at lam' = lam log n and
        # inflates the posterior covariance by log n
        log_n = math.log(n)
        tempered = GaussianPrior(lam=prior.lam * log_n, sigma2=prior.sigma2, p=prior.p)
        post = gibbs.posterior(B, Y, tempered, n)
        resid = Y - B @ post.mean
        tr = log_n * float(np.sum((B @ post.cov) * B))
        return (float(resid @ resid) + tr) / (2.0 * prior.sigma2 * n) \
            + 0.5 * math.log(2.0 * math.pi * prior.sigma2)
    if method != "mala":
        raise ValueError(f"unknown method {method!r}")
    spec = rf_loss_spec(B, Y, prior, n, beta=beta_star)
    run = mala_run(spec, np.zeros(prior.p), eta, steps, steps // 2, 10, seed=seed)
    return posterior_estimate(run, "empirical_risk", loss=spec)


@dataclass(frozen=True)
class CriterionReport:
    """Per-(p, seed) values of every criterion plus the decomposition terms."""

    p: int
    n: int
    seed: int
    train_logloss: float
    train_mse: float
    test_mse: float
    aic: float
    bic: float
    aic_plus: float
    bic_plus_exact: float
    bic_minus_exact: float
    bic_plus_over: float
    bic_minus_over: float
    wbic: float
    l2_term: float
    covariance_term: float
    kl_post_prior_over_n: float
    kl_prior_post_over_n: float
    i_skl_estimate: float
    gen_error_estimate: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"non-finite report field {f.name} = {v}")
        expect = self.train_logloss + self.kl_post_prior_over_n
        if self.bic_plus_exact != expect:
            raise ValueError("bic_plus_exact must equal train_logloss + kl_post_prior_over_n as summed")


@dataclass(frozen=True)
class SelectedModel:
    index: int
    p: int
    value: float


def select_model(reports: list, criterion: str) -> SelectedModel:
    """Argmin of the named criterion over the rows; ties break toward smaller p."""
    if not reports:
        raise ValueError("cannot select from an empty report list")
    try:
        keyed = [(float(getattr(row, criterion)), int(row.p), i) for i, row in enumerate(reports)]
    except AttributeError:
        raise ValueError(f"criterion {criterion!r} missing from reports") from None
    value, p, idx = min(keyed)
    return SelectedModel(index=idx, p=p, value=value)
