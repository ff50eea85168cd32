"""Closed-form Gaussian posterior for the random-feature model.

With prior w ~ N(0, sigma2/(lam n) I) and Gaussian likelihood at scale
sigma2, the posterior at inverse temperature beta = n is

    N(W_hat, Sigma_w),  W_hat = (lam n I + B'B)^{-1} B'Y,
                        Sigma_w = sigma2 (lam n I + B'B)^{-1}.

This module also provides both KL divergences between posterior and prior,
the prior-expected empirical risk, and a dense-Gaussian evaluation of the
log marginal likelihood used as an exact oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve


class FactorizationError(RuntimeError):
    """A symmetric factorization failed; carries the offending pivot."""


@dataclass(frozen=True)
class GaussianPrior:
    """Zero-mean isotropic prior with covariance sigma2/(lam n) I_p."""

    lam: float
    sigma2: float
    p: int

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")

    def variance(self, n: int) -> float:
        return self.sigma2 / (self.lam * n)


@dataclass(frozen=True)
class GibbsPosterior:
    mean: np.ndarray  # W_hat, length p
    cov: np.ndarray  # Sigma_w, p x p
    lam: float
    sigma2: float
    n: int

    @property
    def p(self) -> int:
        return self.mean.shape[0]

    def draw(self, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        """Exact posterior samples, shape (size, p)."""
        return rng.multivariate_normal(self.mean, self.cov, size=size, method="cholesky")


def _chol(A: np.ndarray):
    try:
        return cho_factor(A, lower=True)
    except LinAlgError as exc:
        evals = np.linalg.eigvalsh(A)
        raise FactorizationError(f"matrix not positive definite (min eigenvalue {evals[0]:.3e}): {exc}") from exc


def posterior(B: np.ndarray, Y: np.ndarray, prior: GaussianPrior, n: int) -> GibbsPosterior:
    """Mean via an SPD solve (no explicit inverse); covariance via the same factor."""
    B = np.asarray(B, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if B.shape != (n, prior.p):
        raise ValueError(f"B must be {n} x {prior.p}, got {B.shape}")
    lam_n = prior.lam * n
    A = B.T @ B
    A[np.diag_indices_from(A)] += lam_n
    cond_est = (lam_n + np.abs(A).sum(axis=0).max()) / lam_n
    if cond_est > 1e12:
        warnings.warn(f"posterior system badly conditioned (estimate {cond_est:.2e})", RuntimeWarning)
    c = _chol(A)
    mean = cho_solve(c, B.T @ Y)
    cov = prior.sigma2 * cho_solve(c, np.eye(prior.p))
    cov = 0.5 * (cov + cov.T)
    return GibbsPosterior(mean=mean, cov=cov, lam=prior.lam, sigma2=prior.sigma2, n=int(n))


def gaussian_kl(mean1: np.ndarray, cov1: np.ndarray, mean2: np.ndarray, cov2: np.ndarray) -> float:
    """KL( N(mean1, cov1) || N(mean2, cov2) ) with log-dets from Cholesky factors."""
    mean1 = np.asarray(mean1, dtype=float)
    mean2 = np.asarray(mean2, dtype=float)
    p = mean1.shape[0]
    if mean2.shape[0] != p or cov1.shape != (p, p) or cov2.shape != (p, p):
        raise ValueError("dimension mismatch between means/covariances")
    c2 = _chol(cov2)
    dm = mean2 - mean1
    quad = float(dm @ cho_solve(c2, dm))
    tr = float(np.trace(cho_solve(c2, cov1)))
    logdet2 = 2.0 * float(np.sum(np.log(np.diag(c2[0]))))
    c1 = _chol(cov1)
    logdet1 = 2.0 * float(np.sum(np.log(np.diag(c1[0]))))
    return 0.5 * (quad + tr - p + logdet2 - logdet1)


def _logdet_ratio(post: GibbsPosterior, prior: GaussianPrior) -> float:
    """log det(prior cov) - log det(Sigma_w) = log det(I + B'B/(lam n))."""
    c = _chol(post.cov)
    logdet_post = 2.0 * float(np.sum(np.log(np.diag(c[0]))))
    logdet_prior = post.p * np.log(prior.variance(post.n))
    return logdet_prior - logdet_post


def kl_posterior_prior(post: GibbsPosterior, prior: GaussianPrior) -> float:
    """D(posterior || prior) in closed form."""
    lam_n_over_s2 = prior.lam * post.n / prior.sigma2
    quad = lam_n_over_s2 * float(post.mean @ post.mean)
    tr = lam_n_over_s2 * float(np.trace(post.cov))
    return 0.5 * (quad + _logdet_ratio(post, prior) + tr - post.p)


def kl_prior_posterior(post: GibbsPosterior, prior: GaussianPrior) -> float:
    """D(prior || posterior) in closed form.

    Uses Sigma_w^{-1} = (lam n I + B'B)/sigma2, so the trace term is
    tr((sigma2/(lam n)) Sigma_w^{-1}) = tr(I + B'B/(lam n)).
    """
    c = _chol(post.cov)
    quad = float(post.mean @ cho_solve(c, post.mean))
    prior_var = prior.variance(post.n)
    tr = prior_var * float(np.trace(cho_solve(c, np.eye(post.p))))
    return 0.5 * (quad - _logdet_ratio(post, prior) + tr - post.p)


def prior_expected_risk(B: np.ndarray, Y: np.ndarray, prior: GaussianPrior, n: int) -> float:
    """E_prior[L_E(W)] = (||Y||^2 + prior_var tr(B'B))/(2 sigma2 n) + log(2 pi sigma2)/2.

    The cross term vanishes because the prior has zero mean.
    """
    B = np.asarray(B, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if B.shape[0] != Y.shape[0] or B.shape[1] != prior.p:
        raise ValueError(f"shape mismatch: B {B.shape}, Y {Y.shape}, p={prior.p}")
    prior_var = prior.variance(n)
    quad = float(Y @ Y) + prior_var * float(np.sum(B * B))
    return quad / (2.0 * prior.sigma2 * n) + 0.5 * np.log(2.0 * np.pi * prior.sigma2)


def posterior_expected_risk(B: np.ndarray, Y: np.ndarray, post: GibbsPosterior) -> float:
    """E_posterior[L_E(W)] = ||Y - B W_hat||^2/(2 s2 n) + tr(B Sigma_w B')/(2 s2 n) + log(2 pi s2)/2."""
    B = np.asarray(B, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = post.n
    resid = Y - B @ post.mean
    tr = float(np.sum((B @ post.cov) * B))
    return (float(resid @ resid) + tr) / (2.0 * post.sigma2 * n) + 0.5 * np.log(2.0 * np.pi * post.sigma2)


def log_marginal_exact(B: np.ndarray, Y: np.ndarray, prior: GaussianPrior, n: int) -> float:
    """log m(z^n) = log N(Y; 0, sigma2 I_n + prior_var B B') via a dense n x n factorization."""
    B = np.asarray(B, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if n > 2000:
        raise ValueError(f"dense marginal oracle limited to n <= 2000, got {n}")
    if B.shape[0] != n or Y.shape[0] != n:
        raise ValueError(f"shape mismatch: B {B.shape}, Y {Y.shape}, n={n}")
    cov = prior.variance(n) * (B @ B.T)
    cov[np.diag_indices_from(cov)] += prior.sigma2
    c = _chol(cov)
    logdet = 2.0 * float(np.sum(np.log(np.diag(c[0]))))
    quad = float(Y @ cho_solve(c, Y))
    return -0.5 * (n * np.log(2.0 * np.pi) + logdet + quad)
