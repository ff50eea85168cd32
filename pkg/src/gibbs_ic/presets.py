"""Preset experiment configurations and the non-sweep harnesses.

Each figure id maps to a self-contained run that writes CSV data and an SVG
next to it. The sweep presets default to 50 seeds; pass seeds to shrink.
"""

from __future__ import annotations

import os
from dataclasses import replace

import numpy as np

from .config import SamplerSettings, SweepConfig
from .data_gen import rng_from
from .gibbs import GaussianPrior, posterior
from .plots import emit_plot
from .rf_model import design_matrix, get_activation, init_features
from .rmt import covariance_term_finite, f_func, v_func
from .samplers import dump_trajectory_csv, mala_run, rf_loss_spec, sgld_run
from .sweep import run_sweep, write_csv


def overparam_config(lambdas=(0.001,), seeds: int = 50) -> SweepConfig:
    """Double-descent setting: n=200 samples from a d=400 teacher, ReLU features."""
    return SweepConfig(
        regime="overparam",
        n=200, d=400, noise_var=0.1, sigma2=0.05**2,
        lambdas=tuple(lambdas),
        p_grid=tuple(range(40, 1001, 40)),
        activation="relu",
        sampler=SamplerSettings(kind="mala", eta=0.01, steps=24_000, burn_in=12_000,
                                thinning=50, auto_step=True, safety=0.5,
                                adapt_steps=True, steps_min=3000),
        seeds=tuple(range(seeds)),
        master_seed=20240,
        holdout=1000,
        wbic_method="closed_form",
    )


def classic_config(lam: float = 0.001, seeds: int = 50) -> SweepConfig:
    """Large-n setting: n=600 samples from a d=80 teacher, grid straddling d.

    The mostly-linear standardized sigmoid gives the model family a capacity
    knee at p = d, and the likelihood scale is calibrated (sigma2 = 0.8, not
    the teacher's 0.2) so the criteria trade off fit and complexity on the
    scale the classic selection picture assumes.
    """
    return SweepConfig(
        regime="classic",
        n=600, d=80, noise_var=0.2, sigma2=0.8,
        lambdas=(lam,),
        p_grid=tuple(range(30, 121, 10)),
        activation="sigmoid_std",
        sampler=SamplerSettings(kind="mala", eta=0.01, steps=2000, burn_in=1000,
                                thinning=10, auto_step=True, safety=0.2),
        seeds=tuple(range(seeds)),
        master_seed=6080,
        holdout=2000,
    )


def sampler_bench_config() -> dict:
    """One stiff RF instance for comparing MALA and SGLD against the closed form."""
    return dict(n=200, d=400, p=600, lam=0.01, sigma2=1.0, noise_var=0.1,
                activation="relu", eta=0.01, steps=20_000, burn_in=10_000,
                thinning=10, runs=3, master_seed=777)


def covariance_check_config() -> dict:
    """Finite covariance term vs its closed-form limit across activations."""
    return dict(n=200, d=1600, lams=(0.1, 0.01), rs=(0.5, 1.0, 2.0, 3.0, 5.0),
                activations=("centered_quadratic", "relu_std", "sigmoid_std"),
                n_seeds=10, master_seed=616)


def run_covariance_check(cfg: dict | None = None) -> list[dict]:
    """Seed-averaged finite covariance term against (1/2)V(1/lam,r) - (lam/8)F(1/lam,r)."""
    cfg = covariance_check_config() if cfg is None else cfg
    n, d = cfg["n"], cfg["d"]
    out = []
    for act_idx, act_name in enumerate(cfg["activations"]):
        act = get_activation(act_name)
        for lam in cfg["lams"]:
            for r in cfg["rs"]:
                p = int(round(r * n))
                asym = 0.5 * v_func(1.0 / lam, r) - lam / 8.0 * f_func(1.0 / lam, r)
                vals = []
                for s in range(cfg["n_seeds"]):
                    rng = rng_from(cfg["master_seed"], act_idx, int(lam * 1e6), p, s)
                    X = rng.standard_normal((n, d))
                    F = rng.standard_normal((d, p))
                    B = act.f(X @ F / np.sqrt(d))
                    vals.append(covariance_term_finite(B, lam, n))
                finite = float(np.mean(vals))
                out.append(dict(activation=act_name, lam=lam, r=r, p=p,
                                finite=finite, asymptotic=asym,
                                rel_err=abs(finite - asym) / abs(asym),
                                finite_std=float(np.std(vals, ddof=1))))
    return out


def write_covariance_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("activation,lam,r,p,finite,asymptotic,rel_err,finite_std\n")
        for row in rows:
            fh.write(f"{row['activation']},{row['lam']:.17g},{row['r']:.17g},{row['p']},"
                     f"{row['finite']:.17g},{row['asymptotic']:.17g},"
                     f"{row['rel_err']:.17g},{row['finite_std']:.17g}\n")


def run_sampler_bench(cfg: dict | None = None, out_dir: str | None = None) -> dict:
    """MALA vs SGLD on one posterior: plateaus, norms, acceptance, closed form."""
    cfg = sampler_bench_config() if cfg is None else cfg
    n, d, p = cfg["n"], cfg["d"], cfg["p"]
    act = get_activation(cfg["activation"])
    master = cfg["master_seed"]
    from .data_gen import make_teacher, sample_dataset  # local to avoid cycle noise

    teacher = make_teacher(d, cfg["noise_var"], int(rng_from(master, 1).integers(2**63)))
    ds = sample_dataset(teacher, n, int(rng_from(master, 2).integers(2**63)))
    model = init_features(d, p, int(rng_from(master, 3).integers(2**63)), act)
    B = design_matrix(model, ds.X).B
    prior = GaussianPrior(lam=cfg["lam"], sigma2=cfg["sigma2"], p=p)
    post = posterior(B, ds.Y, prior, n)
    spec = rf_loss_spec(B, ds.Y, prior, n)

    runs = {"mala": [], "sgld": []}
    for kind, runner in (("mala", mala_run), ("sgld", sgld_run)):
        for k in range(cfg["runs"]):
            runs[kind].append(runner(
                spec, np.zeros(p), cfg["eta"], cfg["steps"], cfg["burn_in"],
                cfg["thinning"], seed=int(rng_from(master, 4, k).integers(2**63)),
                record_trajectory=True,
            ))
    result = dict(config=cfg, posterior=post, runs=runs, B=B, Y=ds.Y)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for kind in runs:
            dump_trajectory_csv(runs[kind][0], os.path.join(out_dir, f"trajectory_{kind}.csv"))
        _plot_bench(result, os.path.join(out_dir, "sampler_bench.svg"))
    return result


def _plot_bench(result: dict, path: str) -> None:
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    for kind, color in (("mala", "C0"), ("sgld", "C1")):
        for i, run in enumerate(result["runs"][kind]):
            traj = run.trajectory
            ax1.plot(traj[:, 0], color=color, alpha=0.7, label=kind if i == 0 else None)
            ax2.plot(traj[:, 1], color=color, alpha=0.7, label=kind if i == 0 else None)
    ref = np.linalg.norm(result["posterior"].mean)
    ax2.axhline(ref, ls="--", color="k", label="|posterior mean|")
    ax1.set_xlabel("step"), ax1.set_ylabel("loss"), ax1.set_yscale("log")
    ax2.set_xlabel("step"), ax2.set_ylabel("weight norm")
    ax1.legend(fontsize=8), ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


FIGURE_IDS = ("fig1-left", "fig1-right", "fig2-left", "fig3", "fig4", "fig5", "fig6", "fig7")


def reproduce(fig_id: str, out_dir: str, seeds: int | None = None, jobs: int = 1) -> list[str]:
    """Run the preset behind one figure id; returns the paths written."""
    if fig_id not in FIGURE_IDS:
        raise ValueError(f"unknown figure id {fig_id!r}; known: {FIGURE_IDS}")
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def sweep_and_plot(cfg, lam, tag, figures):
        result = run_sweep(cfg, lam=lam, jobs=jobs, progress=True)
        csv_path = os.path.join(out_dir, f"{tag}.csv")
        write_csv(result, csv_path)
        written.append(csv_path)
        for figure in figures:
            svg = os.path.join(out_dir, f"{tag}_{figure}.svg")
            emit_plot(result, figure, svg)
            written.append(svg)

    n_seeds = 50 if seeds is None else seeds
    if fig_id == "fig1-left":
        sweep_and_plot(overparam_config(seeds=n_seeds), 0.001, "overparam_lam0.001", ["loss_curves"])
    elif fig_id in ("fig1-right", "fig2-left"):
        sweep_and_plot(overparam_config(seeds=n_seeds), 0.001, "overparam_lam0.001", ["criteria_comparison"])
    elif fig_id == "fig3":
        cfg = overparam_config(lambdas=(0.01, 0.001, 0.0001), seeds=n_seeds)
        for lam in cfg.lambdas:
            sweep_and_plot(cfg, lam, f"overparam_lam{lam:g}", ["kl_vs_iskl"])
    elif fig_id == "fig4":
        cfg = overparam_config(lambdas=(0.001, 0.0001), seeds=n_seeds)
        for lam in cfg.lambdas:
            sweep_and_plot(cfg, lam, f"overparam_lam{lam:g}", ["bic_decomposition"])
    elif fig_id == "fig5":
        sweep_and_plot(classic_config(seeds=n_seeds), None, "classic",
                       ["criteria_comparison", "loss_curves"])
    elif fig_id == "fig6":
        rows = run_covariance_check()
        csv_path = os.path.join(out_dir, "covariance_check.csv")
        write_covariance_csv(rows, csv_path)
        svg = os.path.join(out_dir, "covariance_check.svg")
        emit_plot(rows, "rmt_covariance", svg)
        written += [csv_path, svg]
    elif fig_id == "fig7":
        run_sampler_bench(out_dir=out_dir)
        written += [os.path.join(out_dir, f)
                    for f in ("trajectory_mala.csv", "trajectory_sgld.csv", "sampler_bench.svg")]
    return written
