"""Sweep orchestration over the p-grid, with CSV persistence.

Rows are pure functions of (config, lambda, p, seed_index); the pool only
changes who computes them, never what they contain. BLAS is pinned to one
thread per row so the bytes are identical for any --jobs value.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from . import gibbs
from .config import SweepConfig
from .criteria import (
    CriterionReport,
    aic_classical,
    bic_classical,
    bic_minus_exact,
    bic_minus_over,
    bic_plus_exact,
    bic_plus_over,
    wbic_baseline,
)
from .data_gen import holdout_seed, make_teacher, rng_from, sample_dataset
from .gibbs import GaussianPrior
from .rf_model import design_matrix, get_activation, init_features
from .samplers import mala_run, rf_loss_spec, sgld_run

CSV_HEADER = ("p,seed,train_mse,test_mse,train_logloss,aic,bic,aic_plus,"
              "bic_plus_exact,bic_minus_exact,bic_plus_over,bic_minus_over,wbic,"
              "l2_term,cov_term,kl_post_prior,kl_prior_post,i_skl,gen_err,wallclock_ms")

_CSV_FIELDS = ("train_mse", "test_mse", "train_logloss", "aic", "bic", "aic_plus",
               "bic_plus_exact", "bic_minus_exact", "bic_plus_over", "bic_minus_over",
               "wbic", "l2_term", "covariance_term", "kl_post_prior_over_n",
               "kl_prior_post_over_n", "i_skl_estimate", "gen_error_estimate")


@dataclass(frozen=True)
class SweepResult:
    rows: tuple  # CriterionReport, sorted by (p, seed)
    config_hash: str
    lam: float
    wallclock_ms: tuple  # measured per row, aligned with rows
    failures: tuple = ()  # (p, seed, message)


def _derived_seed(master: int, *path: int) -> int:
    return int(rng_from(master, *path).integers(2**63))


def _spectral_norm_sq(B: np.ndarray, iters: int = 60) -> float:
    """Deterministic power iteration for the top eigenvalue of B'B."""
    v = np.ones(B.shape[1]) / np.sqrt(B.shape[1])
    for _ in range(iters):
        w = B.T @ (B @ v)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
    return float(v @ (B.T @ (B @ v)))


def _row_eta(cfg: SweepConfig, lam: float, n: int, s_max_sq: float) -> float:
    s = cfg.sampler
    if not s.auto_step:
        return s.eta
    stable = s.safety * 2.0 * cfg.sigma2 * n / (lam * n + s_max_sq)
    return min(s.eta, stable)


def _row_schedule(cfg: SweepConfig, lam: float, p: int, eta: float) -> tuple[int, int]:
    """(steps, burn_in) for one row.

    When adapt_steps is on, the budget is ~3.5 relaxation times of the
    slowest mode that can influence predictions: modes at the lower bulk
    edge of the Gram spectrum, a distance n*var_f*(1-sqrt r)^2 from zero.
    Rows near the interpolation threshold (edge at zero) get the ceiling;
    rows far from it converge in far fewer steps.
    """
    s = cfg.sampler
    if not s.adapt_steps:
        return s.steps, s.burn_in
    m1, m2, _ = get_activation(cfg.activation).gaussian_moments()
    var_f = m2 - m1 * m1
    r = p / cfg.n
    edge = cfg.n * var_f * (1.0 - np.sqrt(r)) ** 2
    tau = cfg.sigma2 * cfg.n / (eta * (lam * cfg.n + edge))
    steps = int(np.clip(3.5 * tau, s.steps_min, s.steps))
    return steps, steps // 2


def compute_row(cfg: SweepConfig, lam: float, p: int, seed_idx: int) -> tuple[CriterionReport, float]:
    """One (p, seed) cell: fit, sample, and evaluate every criterion."""
    t0 = time.perf_counter()
    with threadpool_limits(limits=1):
        report = _compute_row_inner(cfg, lam, p, seed_idx)
    return report, (time.perf_counter() - t0) * 1e3


def _compute_row_inner(cfg: SweepConfig, lam: float, p: int, seed_idx: int) -> CriterionReport:
    n, d, s2 = cfg.n, cfg.d, cfg.sigma2
    activation = get_activation(cfg.activation)

    teacher = make_teacher(d, cfg.noise_var, _derived_seed(cfg.master_seed, 0x7EAC, seed_idx))
    ds_seed = _derived_seed(cfg.master_seed, 0xD5, seed_idx)
    train = sample_dataset(teacher, n, ds_seed)
    test = sample_dataset(teacher, cfg.holdout, holdout_seed(ds_seed))

    model = init_features(d, p, _derived_seed(cfg.master_seed, 0xFE, p, seed_idx), activation)
    B = design_matrix(model, train.X).B
    B_test = design_matrix(model, test.X).B
    Y, Y_test = train.Y, test.Y

    prior = GaussianPrior(lam=lam, sigma2=s2, p=p)
    post = gibbs.posterior(B, Y, prior, n)
    needs_chain = cfg.sampler.kind != "exact" or cfg.wbic_method == "mala"
    eta = _row_eta(cfg, lam, n, _spectral_norm_sq(B)) if needs_chain else cfg.sampler.eta
    steps_row, burn_row = _row_schedule(cfg, lam, p, eta)

    # Gibbs-side statistics, averaged over retained samples
    ws = _draw_samples(cfg, lam, B, Y, prior, post, p, seed_idx, eta, steps_row, burn_row)
    pred_train = ws @ B.T  # (k, n)
    pred_test = ws @ B_test.T
    sq_train = np.mean((Y[None, :] - pred_train) ** 2, axis=1)
    sq_test = np.mean((Y_test[None, :] - pred_test) ** 2, axis=1)
    log_c = 0.5 * np.log(2.0 * np.pi * s2)
    train_mse = float(np.mean(sq_train))
    test_mse = float(np.mean(sq_test))
    train_logloss = train_mse / (2.0 * s2) + log_c
    test_logloss = test_mse / (2.0 * s2) + log_c
    gen_err = test_logloss - train_logloss
    i_skl = n * gen_err

    # classical criteria at the (minimum-norm) MLE
    w_mle = np.linalg.lstsq(B, Y, rcond=None)[0]
    resid = Y - B @ w_mle
    loglik_hat = -(float(resid @ resid) / (2.0 * s2) + n * log_c)
    aic = aic_classical(loglik_hat, n, p)
    bic = bic_classical(loglik_hat, n, p)

    kl_pp = gibbs.kl_posterior_prior(post, prior) / n
    kl_pr = gibbs.kl_prior_posterior(post, prior) / n
    prior_risk = gibbs.prior_expected_risk(B, Y, prior, n)
    bicp = bic_plus_exact(train_logloss, kl_pp * n, n)
    bicm = bic_minus_exact(prior_risk, kl_pr * n, n)

    # the over-parameterized decomposition uses the sampled weight norm, the
    # same substitution the sweep's training-risk term already relies on
    r = p / n
    w_norm2 = float(np.mean(np.sum(ws * ws, axis=1)))
    over = bic_plus_over(train_logloss, w_norm2, lam, s2, r)
    bicm_over = bic_minus_over(prior_risk, post.mean, post.cov, B, lam, n, r)

    wbic = wbic_baseline(
        B, Y, prior, n,
        seed=_derived_seed(cfg.master_seed, 0x3B1C, p, seed_idx),
        method=cfg.wbic_method,
        eta=eta,
        steps=steps_row,
    )

    return CriterionReport(
        p=p, n=n, seed=seed_idx,
        train_logloss=train_logloss, train_mse=train_mse, test_mse=test_mse,
        aic=aic, bic=bic,
        aic_plus=train_logloss + gen_err,
        bic_plus_exact=bicp, bic_minus_exact=bicm,
        bic_plus_over=over.value, bic_minus_over=bicm_over,
        wbic=wbic,
        l2_term=over.l2_term, covariance_term=over.covariance_term,
        kl_post_prior_over_n=kl_pp, kl_prior_post_over_n=kl_pr,
        i_skl_estimate=i_skl, gen_error_estimate=gen_err,
    )


def _draw_samples(cfg, lam, B, Y, prior, post, p, seed_idx, eta, steps, burn_in):
    s = cfg.sampler
    if s.kind == "exact":
        n_keep = (steps - burn_in) // s.thinning
        rng = rng_from(cfg.master_seed, 0xE7AC, p, seed_idx)
        return post.draw(rng, size=n_keep)
    spec = rf_loss_spec(B, Y, prior, cfg.n)
    seed = _derived_seed(cfg.master_seed, 0x5A, p, seed_idx)
    runner = mala_run if s.kind == "mala" else sgld_run
    run = runner(spec, np.zeros(p), eta, steps, burn_in, s.thinning, seed)
    return run.samples


def _row_task(args):
    cfg, lam, p, seed_idx = args
    try:
        report, ms = compute_row(cfg, lam, p, seed_idx)
        return (p, seed_idx, report, ms, None)
    except Exception as exc:  # isolate the failing row, keep the sweep alive
        return (p, seed_idx, None, 0.0, f"{type(exc).__name__}: {exc}")


def run_sweep(cfg: SweepConfig, lam: float | None = None, jobs: int = 1, progress: bool = False) -> SweepResult:
    """All (p, seed) rows for a single lambda; deterministic for any jobs count."""
    lam = cfg.lambdas[0] if lam is None else lam
    tasks = [(cfg, lam, p, si) for p in cfg.p_grid for si in cfg.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_row_task, tasks, chunksize=1))
    else:
        outcomes = []
        for i, t in enumerate(tasks):
            outcomes.append(_row_task(t))
            if progress and (i + 1) % 25 == 0:
                print(f"  {i + 1}/{len(tasks)} rows done", flush=True)
    outcomes.sort(key=lambda o: (o[0], o[1]))
    rows, clocks, failures = [], [], []
    for p, si, report, ms, err in outcomes:
        if err is None:
            rows.append(report)
            clocks.append(ms)
        else:
            failures.append((p, si, err))
    return SweepResult(rows=tuple(rows), config_hash=cfg.hash(), lam=lam,
                       wallclock_ms=tuple(clocks), failures=tuple(failures))


def run_sweep_multi(cfg: SweepConfig, jobs: int = 1, progress: bool = False) -> dict[float, SweepResult]:
    return {lam: run_sweep(cfg, lam=lam, jobs=jobs, progress=progress) for lam in cfg.lambdas}


def write_csv(result: SweepResult, path: str, include_timing: bool = False) -> None:
    """Fixed column order, 17 significant digits, LF newlines, UTF-8.

    The wallclock column is written as 0 unless include_timing is set, so a
    rerun of the same config reproduces the file byte-for-byte; measured
    times stay available on the SweepResult itself.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for row, ms in zip(result.rows, result.wallclock_ms):
            vals = [str(row.p), str(row.seed)]
            vals += [f"{getattr(row, name):.17g}" for name in _CSV_FIELDS]
            vals.append(f"{ms:.17g}" if include_timing else "0")
            fh.write(",".join(vals) + "\n")


def read_csv(path: str, n: int = 0) -> list[CriterionReport]:
    """Read rows back; the wallclock column is dropped (it is not a report field)."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}")
        for line in fh:
            cells = line.rstrip("\n").split(",")
            p, seed = int(cells[0]), int(cells[1])
            values = dict(zip(_CSV_FIELDS, (float(c) for c in cells[2:-1])))
            out.append(CriterionReport(p=p, n=n, seed=seed, **values))
    return out
