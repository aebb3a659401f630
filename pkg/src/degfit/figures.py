"""Figure rendering for experiment reports.

Each renderer takes the in-memory experiment result and writes one PNG
next to the delimited output.  Uses the Agg backend so reports render
headless.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import ConsistencyResult, ScatterResult, TraceResult

_STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 130,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "axes.titlesize": 11,
    "legend.frameon": False,
}


def _regime_label(result) -> str:
    reg = result.regime if hasattr(result, "regime") else result.config.regime
    return f"{reg.kind}(r={reg.r})" if reg.kind == "finite" else reg.kind


def render_trace_figure(results: list[TraceResult] | TraceResult, path: str) -> str:
    """log10 distance-to-final-iterate vs iteration, one line per trace."""
    if isinstance(results, TraceResult):
        results = [results]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for res in results:
            pts = [(row.iteration, row.dist_inf) for row in res.rows if row.dist_inf > 0]
            if not pts:
                continue
            it = [p[0] for p in pts]
            ld = [math.log10(p[1]) for p in pts]
            ax.plot(it, ld, marker=".", markersize=3, label=f"{_regime_label(res)}, n={res.n}")
        ax.set_xlabel("iteration")
        ax.set_ylabel(r"$\log_{10}\,\|\theta^{(k)}-\hat\theta\|_\infty$")
        ax.set_title("fixed-point convergence")
        if ax.get_legend_handles_labels()[0]:
            ax.legend()
        fig.savefig(path, bbox_inches="tight")
        plt.close(fig)
    return path


def render_consistency_figure(result: ConsistencyResult, path: str) -> str:
    """Median fit error vs n (log-log) and the sqrt(n/log n)-scaled medians."""
    per_n = result.summary["per_n"]
    ns = sorted(int(k) for k in per_n)
    med = [per_n[str(n)].get("median_err", float("nan")) for n in ns]
    scaled = [per_n[str(n)].get("median_err_scaled", float("nan")) for n in ns]
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
        ax1.loglog(ns, med, marker="o", label="median error")
        if med and np.isfinite(med[0]):
            ref = [med[0] * math.sqrt((math.log(n) / n) / (math.log(ns[0]) / ns[0])) for n in ns]
            ax1.loglog(ns, ref, linestyle="--", label=r"$\propto\sqrt{\log n / n}$")
        ax1.set_xlabel("n")
        ax1.set_ylabel(r"$\|\hat\theta-\theta\|_\infty$")
        ax1.set_title(f"consistency, {_regime_label(result)}")
        ax1.legend()
        ax2.plot(ns, scaled, marker="o")
        ax2.set_xlabel("n")
        ax2.set_ylabel(r"median error $\cdot\sqrt{n/\log n}$")
        ax2.set_title("scaled error")
        fig.savefig(path, bbox_inches="tight")
        plt.close(fig)
    return path


def render_scatter_figure(result: ScatterResult, path: str) -> str:
    """Fitted vs true potentials with the identity line."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(4.6, 4.4))
        if result.theta_hat is not None:
            ax.scatter(result.theta_true, result.theta_hat, s=8, alpha=0.7)
            lo = float(min(result.theta_true.min(), result.theta_hat.min()))
            hi = float(max(result.theta_true.max(), result.theta_hat.max()))
            pad = 0.05 * (hi - lo) if hi > lo else 0.1
            ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], "k--", linewidth=0.8)
        ax.set_xlabel(r"true $\theta_i$")
        ax.set_ylabel(r"fitted $\hat\theta_i$")
        ax.set_title(f"potential recovery, {_regime_label(result)}, n={result.n}")
        fig.savefig(path, bbox_inches="tight")
        plt.close(fig)
    return path
