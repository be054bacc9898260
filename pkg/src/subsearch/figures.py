"""Optional matplotlib rendering of report artifacts.

Figures are written next to the delimited outputs when the CLI is invoked
with --plot; nothing here is imported on the core solve/report path.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def render_schedule(sol, d, path) -> None:
    """Subsidy policy with the feasibility corridor and cutoff markers."""
    params = sol.params
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    t = np.linspace(0.0, 1.0, 600)
    if params.p > 0:
        ax.plot(t, np.minimum(t / params.p, params.c * 1.3), color="0.65", lw=1.0,
                label="break-even s = t/p")
    ax.plot(t, np.maximum(params.c - params.u * t, 0.0), color="0.8", lw=1.0,
            label="inspect-worthiness s = c - u t")
    ax.axhline(params.c, color="0.5", ls="--", lw=0.8)

    t0, t1 = sol.t_lower, sol.t_upper
    if t0 > 0:
        ax.plot([0, t0], [0, 0], color="k", lw=2.0)
    grid = sol.schedule.grid
    if len(grid) > 1:
        ax.plot(grid[:, 0], grid[:, 1], color="k", lw=2.0)
    if sol.pooling_active and t1 < 1.0:
        ax.plot([t1, 1.0], [params.c, params.c], color="k", lw=2.0)
        ax.plot([t1], [grid[-1, 1]], marker="o", mfc="white", mec="k", ms=5, ls="none")
        ax.plot([t1], [params.c], marker="o", color="k", ms=5, ls="none")
    if t0 > 0:
        ax.plot([t0], [0.0], marker="o", mfc="white", mec="k", ms=5, ls="none")
        if len(grid):
            ax.plot([t0], [grid[0, 1]], marker="o", color="k", ms=5, ls="none")
    ax.set_xlabel("type t")
    ax.set_ylabel("subsidy s")
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, params.c * 1.35)
    ax.legend(loc="upper left", fontsize=8, frameon=False)
    ax.set_title(f"SIS schedule (n={params.n}, c={params.c}, p={params.p}, u={params.u})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_attention(report, path) -> None:
    """Empirical inspection frequency by type bin against the closed form."""
    rows = report.attention_by_type_bin
    centers = [r[0] for r in rows]
    freq = [r[1] for r in rows]
    se = [3 * r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.errorbar(centers, freq, yerr=se, fmt="o", ms=3, lw=0.8, capsize=2,
                label="empirical (3 s.e.)")
    ax.plot(centers, report.closed_form_attention, color="k", lw=1.4,
            label="closed form (bin average)")
    ax.set_xlabel("type t")
    ax.set_ylabel("inspection probability")
    ax.legend(loc="upper left", fontsize=8, frameon=False)
    ax.set_title(f"Attention, {report.replications} replications, seed {report.rng_seed}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep(result, path) -> None:
    """Welfare quantities along the swept axis."""
    xs = [row["axis_value"] for row in result.rows]
    panels = [
        ("search_intensity", "search intensity n*Q"),
        ("match_probability", "match probability"),
        ("consumer_surplus", "consumer surplus"),
        ("producer_surplus_per_firm", "producer surplus / firm"),
    ]
    fig, axes = plt.subplots(2, 2, figsize=(8.2, 5.6))
    for ax, (key, label) in zip(axes.ravel(), panels):
        ax.plot(xs, [row[key] for row in result.rows], marker="o", ms=3, color="k", lw=1.2)
        ax.set_xlabel(result.axis)
        ax.set_ylabel(label)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_platform(sweep, path) -> None:
    """Revenue, demand, and branch decomposition across prices."""
    fig, axes = plt.subplots(1, 2, figsize=(8.8, 4.0))
    ax = axes[0]
    ax.plot(sweep.prices, sweep.revenue, color="k", lw=1.4, label="R(p)")
    ax.axvline(sweep.p_star, color="0.4", ls="--", lw=0.9, label=f"p* = {sweep.p_star:.4g}")
    ax.set_xlabel("token price p")
    ax.set_ylabel("platform revenue")
    ax.legend(fontsize=8, frameon=False)
    ax = axes[1]
    sep = [pair[0] for pair in sweep.decomposition]
    pool = [pair[1] for pair in sweep.decomposition]
    ax.plot(sweep.prices, sep, lw=1.2, label="separating branch")
    ax.plot(sweep.prices, pool, lw=1.2, label="pooling branch")
    ax.plot(sweep.prices, sweep.demand, lw=1.0, ls=":", color="0.5", label="D(p)")
    ax.set_xlabel("token price p")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
