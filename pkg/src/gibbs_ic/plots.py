"""Static SVG figures: mean over seeds with a +/-1 std band per p."""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIGURES = ("loss_curves", "criteria_comparison", "bic_decomposition", "kl_vs_iskl", "rmt_covariance")


def seed_mean_std(rows, field: str):
    """(p values, mean per p, std per p) of one report field, grouped by p."""
    ps = sorted({row.p for row in rows})
    means, stds = [], []
    for p in ps:
        vals = np.array([getattr(r, field) for r in rows if r.p == p])
        means.append(vals.mean())
        stds.append(vals.std(ddof=0))
    return np.array(ps), np.array(means), np.array(stds)


def _band(ax, rows, field, label, color=None):
    ps, mu, sd = seed_mean_std(rows, field)
    line, = ax.plot(ps, mu, label=label, color=color)
    ax.fill_between(ps, mu - sd, mu + sd, alpha=0.2, color=line.get_color())
    return ps, mu


def emit_plot(result, figure: str, path: str) -> None:
    """Render one named figure from a SweepResult (or rmt-check rows) to SVG."""
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; known: {FIGURES}")
    if figure == "rmt_covariance":
        _plot_rmt_covariance(result, path)
        return
    rows = list(result.rows) if hasattr(result, "rows") else list(result)
    if not rows:
        raise ValueError("empty sweep result; nothing to plot")
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    if figure == "loss_curves":
        _band(ax, rows, "train_mse", "train MSE")
        ps, mu = _band(ax, rows, "test_mse", "test MSE")
        peak = ps[int(np.argmax(mu))]
        ax.axvline(peak, ls=":", color="gray")
        ax.annotate(f"peak p={peak}", (peak, mu.max()), textcoords="offset points", xytext=(6, -4))
        ax.set_yscale("log")
        ax.set_ylabel("MSE")
    elif figure == "criteria_comparison":
        for f, lbl in [("aic", "AIC"), ("bic", "BIC"), ("aic_plus", "AIC+"),
                       ("bic_plus_exact", "BIC+ (exact)"), ("bic_minus_exact", "BIC- (exact)"),
                       ("bic_plus_over", "BIC+ (over)"), ("bic_minus_over", "BIC- (over)"),
                       ("wbic", "WBIC")]:
            _band(ax, rows, f, lbl)
        ax.set_ylabel("criterion value")
    elif figure == "bic_decomposition":
        _band(ax, rows, "l2_term", "l2 term")
        _band(ax, rows, "covariance_term", "covariance term")
        _band(ax, rows, "train_logloss", "training loss")
        ax.set_ylabel("term value")
    elif figure == "kl_vs_iskl":
        _band(ax, rows, "kl_post_prior_over_n", "KL(posterior||prior)/n")
        _band(ax, rows, "gen_error_estimate", "I_SKL/n (gen. error)")
        ax.set_ylabel("penalty value")
    ax.set_xlabel("parameter dimension p")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _plot_rmt_covariance(rows, path: str) -> None:
    """rows: dicts with activation, lam, r, finite, asymptotic (from the rmt check)."""
    rows = list(rows)
    if not rows:
        raise ValueError("empty covariance-check table; nothing to plot")
    acts = sorted({row["activation"] for row in rows})
    lams = sorted({row["lam"] for row in rows}, reverse=True)
    fig, axes = plt.subplots(1, len(acts), figsize=(4.0 * len(acts), 3.6), squeeze=False)
    for ax, act in zip(axes[0], acts):
        for lam in lams:
            sub = sorted((row for row in rows if row["activation"] == act and row["lam"] == lam),
                         key=lambda row: row["r"])
            rs = [row["r"] for row in sub]
            ax.plot(rs, [row["finite"] for row in sub], "o-", label=f"finite, lam={lam}")
            ax.plot(rs, [row["asymptotic"] for row in sub], "--", label=f"asymptotic, lam={lam}")
        ax.set_title(act)
        ax.set_xlabel("r = p/n")
        ax.legend(fontsize=7)
    axes[0][0].set_ylabel("covariance term")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
