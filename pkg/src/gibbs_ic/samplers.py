"""SGLD and MALA samplers targeting the Gibbs distribution.

The target is P(w) proportional to exp(-beta * F(w)) with the
prior-augmented per-sample loss F(w) = L_E(w) - (1/beta) log pi(w).

Temperature convention (worth stating once, precisely): the SGLD update is

    w' = w - eta * grad F(w) + sqrt(2 eta / beta) * zeta,

and MALA uses that same update as its proposal, i.e. a Gaussian with mean
w - eta * grad F(w) and covariance (2 eta / beta) I. The accept/reject step
scores states with the potential g = beta * F, so the chain is exactly
invariant for exp(-beta F); equivalently this is textbook MALA on g with
step size h = eta / beta. Writing the drift with grad F (not grad g) is
what makes SGLD and MALA share one update formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data_gen import rng_from
from .gibbs import GaussianPrior


@dataclass(frozen=True)
class LossSpec:
    """Value/gradient oracles of F(w) = L_E(w) - (1/beta) log pi(w)."""

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    beta: float
    n: int
    # L_E alone (no prior term); used when estimating posterior risk from samples
    empirical_risk: Callable[[np.ndarray], float] | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")


@dataclass(frozen=True)
class SamplerRun:
    samples: np.ndarray  # (n_retained, dim), post burn-in and thinned
    acceptance_rate: float
    steps: int
    burn_in: int
    thinning: int
    eta: float
    seed: int
    final_state: np.ndarray
    trajectory: np.ndarray | None = field(default=None, repr=False)  # (steps, 3): loss, |w|, accepted

    def __post_init__(self):
        expect = (self.steps - self.burn_in) // self.thinning
        if self.samples.shape[0] != expect:
            raise ValueError(f"retained {self.samples.shape[0]} samples, expected {expect}")
        if not 0.0 <= self.acceptance_rate <= 1.0:
            raise ValueError(f"acceptance_rate out of [0,1]: {self.acceptance_rate}")


def rf_loss_spec(B: np.ndarray, Y: np.ndarray, prior: GaussianPrior, n: int, beta: float | None = None) -> LossSpec:
    """Prior-augmented loss for the random-feature model at inverse temperature beta (default n)."""
    B = np.asarray(B, dtype=float)
    Y = np.asarray(Y, dtype=float)
    beta = float(n if beta is None else beta)
    s2 = prior.sigma2
    lam_n = prior.lam * n
    p = prior.p
    log_norm = 0.5 * p * np.log(2.0 * np.pi * s2 / lam_n)  # -log pi normalization
    log_lik_const = 0.5 * np.log(2.0 * np.pi * s2)

    def emp_risk(w):
        r = Y - B @ w
        return float(r @ r) / (2.0 * s2 * n) + log_lik_const

    def value(w):
        return emp_risk(w) + (lam_n * float(w @ w) / (2.0 * s2) + log_norm) / beta

    def grad(w):
        return (B.T @ (B @ w - Y)) / (s2 * n) + (lam_n / (s2 * beta)) * w

    return LossSpec(value=value, grad=grad, beta=beta, n=int(n), empirical_risk=emp_risk)


def gaussian_target_spec(mean: np.ndarray, precision: np.ndarray, beta: float = 1.0) -> LossSpec:
    """Loss whose Gibbs distribution at inverse temperature beta is N(mean, precision^{-1}).

    Handy for sampler fidelity tests; precision may be a scalar, a vector
    (diagonal), or a full matrix.
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    prec = np.asarray(precision, dtype=float)

    if prec.ndim == 2:
        def quad(d):
            return float(d @ (prec @ d))

        def gradq(d):
            return prec @ d
    else:
        def quad(d):
            return float(np.sum(prec * d * d))

        def gradq(d):
            return prec * d

    return LossSpec(
        value=lambda w: quad(w - mean) / (2.0 * beta),
        grad=lambda w: gradq(w - mean) / beta,
        beta=float(beta),
        n=1,
    )


def sgld_step(w: np.ndarray, loss: LossSpec, eta: float, noise: np.ndarray) -> np.ndarray:
    """One update: w - eta grad F(w) + sqrt(2 eta / beta) noise."""
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    g = loss.grad(w)
    if not np.all(np.isfinite(g)):
        raise RuntimeError(f"non-finite gradient at |w| = {np.linalg.norm(w):.3e}")
    return w - eta * g + np.sqrt(2.0 * eta / loss.beta) * noise


def _check_schedule(steps: int, burn_in: int, thinning: int):
    if not (steps > burn_in >= 0):
        raise ValueError(f"need steps > burn_in >= 0, got steps={steps}, burn_in={burn_in}")
    if thinning < 1:
        raise ValueError(f"thinning must be >= 1, got {thinning}")


def sgld_run(
    loss: LossSpec,
    init: np.ndarray,
    eta: float,
    steps: int,
    burn_in: int,
    thinning: int,
    seed: int,
    record_trajectory: bool = False,
) -> SamplerRun:
    """Iterate sgld_step, retaining every `thinning`-th state after burn-in."""
    _check_schedule(steps, burn_in, thinning)
    rng = rng_from(seed, 0x56_1D)
    w = np.array(init, dtype=float)
    retained = []
    traj = np.empty((steps, 3)) if record_trajectory else None
    scale = np.sqrt(2.0 * eta / loss.beta)
    for t in range(1, steps + 1):
        g = loss.grad(w)
        if not np.all(np.isfinite(g)):
            raise RuntimeError(f"non-finite gradient at step {t} (|w| = {np.linalg.norm(w):.3e}); "
                               "reduce eta or rescale the loss")
        w = w - eta * g + scale * rng.standard_normal(w.shape[0])
        if traj is not None:
            traj[t - 1] = (loss.value(w), np.linalg.norm(w), 1.0)
        if t > burn_in and (t - burn_in) % thinning == 0:
            retained.append(w.copy())
    return SamplerRun(
        samples=np.array(retained),
        acceptance_rate=1.0,
        steps=steps,
        burn_in=burn_in,
        thinning=thinning,
        eta=float(eta),
        seed=int(seed),
        final_state=w,
        trajectory=traj,
    )


def mala_run(
    loss: LossSpec,
    init: np.ndarray,
    eta: float,
    steps: int,
    burn_in: int,
    thinning: int,
    seed: int,
    record_trajectory: bool = False,
) -> SamplerRun:
    """Metropolis-adjusted Langevin chain; see the module docstring for the convention."""
    _check_schedule(steps, burn_in, thinning)
    if not eta > 0:
        raise ValueError(f"eta must be > 0 for MALA, got {eta}")
    rng = rng_from(seed, 0x3A1A)
    beta = loss.beta
    w = np.array(init, dtype=float)
    g_cur = beta * loss.value(w)
    grad_cur = loss.grad(w)
    retained = []
    traj = np.empty((steps, 3)) if record_trajectory else None
    scale = np.sqrt(2.0 * eta / beta)
    quarter = beta / (4.0 * eta)
    accepted = 0
    for t in range(1, steps + 1):
        zeta = rng.standard_normal(w.shape[0])
        prop = w - eta * grad_cur + scale * zeta
        grad_prop = loss.grad(prop)
        if not np.all(np.isfinite(grad_prop)):
            raise RuntimeError(f"non-finite gradient at step {t} (proposal |w| = {np.linalg.norm(prop):.3e})")
        g_prop = beta * loss.value(prop)
        fwd = prop - w + eta * grad_cur  # = scale * zeta
        rev = w - prop + eta * grad_prop
        log_alpha = (g_cur - g_prop) + quarter * (float(fwd @ fwd) - float(rev @ rev))
        took = np.log(rng.uniform()) < log_alpha
        if took:
            w, g_cur, grad_cur = prop, g_prop, grad_prop
            accepted += 1
        if traj is not None:
            traj[t - 1] = (g_cur / beta, np.linalg.norm(w), float(took))
        if t > burn_in and (t - burn_in) % thinning == 0:
            retained.append(w.copy())
    return SamplerRun(
        samples=np.array(retained),
        acceptance_rate=accepted / steps,
        steps=steps,
        burn_in=burn_in,
        thinning=thinning,
        eta=float(eta),
        seed=int(seed),
        final_state=w,
        trajectory=traj,
    )


def posterior_estimate(run: SamplerRun, statistic: str, loss: LossSpec | None = None):
    """Plug-in average over retained samples.

    statistic: "mean" (vector average), "l2_norm" (mean of ||w||^2),
    "empirical_risk" (mean of L_E over samples; requires `loss`),
    or "final" (last retained sample).
    """
    if run.samples.shape[0] == 0:
        raise ValueError("sampler run retained no samples")
    if statistic == "mean":
        return run.samples.mean(axis=0)
    if statistic == "l2_norm":
        return float(np.mean(np.sum(run.samples**2, axis=1)))
    if statistic == "final":
        return run.samples[-1]
    if statistic == "empirical_risk":
        if loss is None or loss.empirical_risk is None:
            raise ValueError("empirical_risk statistic needs a LossSpec with an empirical_risk oracle")
        return float(np.mean([loss.empirical_risk(w) for w in run.samples]))
    raise ValueError(f"unknown statistic {statistic!r}")


def dump_trajectory_csv(run: SamplerRun, path: str) -> None:
    """Write `step,loss,weight_norm,accepted` (requires record_trajectory=True)."""
    if run.trajectory is None:
        raise ValueError("run was not recorded with record_trajectory=True")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("step,loss,weight_norm,accepted\n")
        for i, (lv, wn, acc) in enumerate(run.trajectory, start=1):
            fh.write(f"{i},{lv:.17g},{wn:.17g},{int(acc)}\n")
