"""Figure rendering for experiment reports.

Renders matplotlib figures next to the delimited output: predicted vs
target curves per method, the smoothing-sweep RMSE curve, and gamma RMSE
vs sample size.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_COLORS = {"standard": "tab:blue", "pathwise": "tab:orange", "lrm": "tab:green",
           "delta_pathwise": "tab:orange", "delta_lrm": "tab:green",
           "pw_lr": "tab:red"}


def _avg_reports(reports):
    return [r for r in reports if r.replication is None]


def _panel_figure(reports, attr_pred, attr_oracle, ylabel, title, path):
    avgs = _avg_reports(reports)
    if not avgs:
        return None
    fig, axes = plt.subplots(1, len(avgs), figsize=(4.2 * len(avgs), 3.4),
                             sharey=True, squeeze=False)
    for ax, rpt in zip(axes[0], avgs):
        ax.plot(rpt.grid, getattr(rpt, attr_oracle), "k-", lw=1.2,
                label="target")
        ax.plot(rpt.grid, getattr(rpt, attr_pred), ".",
                color=_COLORS.get(rpt.method, "tab:purple"), ms=3,
                label="predicted")
        rmse = {"pred_price": rpt.price_rmse, "pred_delta": rpt.delta_rmse,
                "pred_gamma": rpt.gamma_rmse}[attr_pred]
        ax.set_title(f"{rpt.method} (RMSE {rmse:.4g})", fontsize=10)
        ax.set_xlabel("spot")
        ax.legend(fontsize=8)
    axes[0][0].set_ylabel(ylabel)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_experiment(reports, cfg, outdir):
    """Predicted-vs-target price/delta (and gamma) panels; returns paths."""
    outdir = Path(outdir)
    name = cfg["experiment"]
    paths = []
    p = _panel_figure(reports, "pred_price", "oracle_price", "price",
                      f"{name}: prices", outdir / f"{name}_prices.png")
    if p:
        paths.append(p)
    p = _panel_figure(reports, "pred_delta", "oracle_delta", "delta",
                      f"{name}: deltas", outdir / f"{name}_deltas.png")
    if p:
        paths.append(p)
    if any(r.pred_gamma is not None for r in reports):
        p = _panel_figure(reports, "pred_gamma", "oracle_gamma", "gamma",
                          f"{name}: gammas", outdir / f"{name}_gammas.png")
        if p:
            paths.append(p)
    return paths


def render_sweep(rows, outdir):
    """Price RMSE%% vs smoothing width, with reference lines."""
    outdir = Path(outdir)
    eps_rows = [r for r in rows if r["eps_multiplier"] is not None]
    refs = {r["label"]: r for r in rows if r["eps_multiplier"] is None}
    if not eps_rows:
        return []
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    xs = [r["eps_multiplier"] for r in eps_rows]
    ys = [r["price_rmse_pct"] for r in eps_rows]
    ax.plot(xs, ys, "o-", color="tab:orange", label="smoothed pathwise DML")
    for label, color in (("standard", "tab:blue"), ("lrm", "tab:green")):
        if label in refs:
            ax.axhline(refs[label]["price_rmse_pct"], color=color, ls="--",
                       label=f"{label} reference")
    ax.set_xscale("log")
    ax.set_xlabel("smoothing width (multiples of vol*sqrt(T))")
    ax.set_ylabel("price RMSE (% of price)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / "smoothing_sweep.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return [path]


def render_gamma_sizes(summary_rows, outdir):
    """Gamma RMSE vs training sample size, one line per method.

    summary_rows: dicts with method, m, gamma_rmse (replication-averaged).
    """

    outdir = Path(outdir)
    methods = sorted({r["method"] for r in summary_rows})
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for method in methods:
        pts = sorted((r["m"], r["gamma_rmse"]) for r in summary_rows
                     if r["method"] == method)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-",
                color=_COLORS.get(method, "tab:purple"), label=method)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("training sample size")
    ax.set_ylabel("gamma RMSE")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = outdir / "gamma_rmse_vs_size.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return [path]
