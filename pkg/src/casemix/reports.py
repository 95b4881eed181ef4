"""Figure rendering for the CLI report path.

The engine itself never plots; these helpers turn a finished sweep report
into PNG files next to the delimited output.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .sensitivity import SweepReport, case_mix_diff

_METRICS = (("total_output", "total treated N"),
            ("sum_utility", "sum of utilities"),
            ("min_utility", "minimum utility"))


def _x_of(row) -> float:
    return float(row.value[0] if isinstance(row.value, (tuple, list))
                 else row.value)


def sweep_metric_figure(report: SweepReport, path: str | Path) -> Path:
    """Line charts of N / sum u / min u against the swept parameter."""
    fig, axes = plt.subplots(3, 1, figsize=(7, 9), sharex=True)
    objectives = list(dict.fromkeys(r.objective for r in report.rows))
    for ax, (attr, label) in zip(axes, _METRICS):
        for obj in objectives:
            pts = [(_x_of(r), getattr(r, attr)) for r in report.rows
                   if r.objective == obj and r.status == "optimal"]
            if not pts:
                continue
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker="o", label=obj.upper())
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[0].legend()
    axes[0].set_title(f"{report.spec.template}: {report.spec.param} sweep")
    axes[-1].set_xlabel(report.spec.param
                        + (" (% of bound)" if report.spec.pct else ""))
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def case_mix_range_figure(report: SweepReport, path: str | Path) -> Path:
    """Per-group band between the smallest and largest case-mix share."""
    diff = case_mix_diff(report)
    fig, ax = plt.subplots(figsize=(10, 4.5))
    if diff:
        groups = list(report.bounds)
        groups = [g for g in groups if g in diff]
        lo = [diff[g]["min_pct"] for g in groups]
        hi = [diff[g]["max_pct"] for g in groups]
        xs = range(len(groups))
        ax.bar(xs, [h - l for l, h in zip(lo, hi)], bottom=lo, width=0.6,
               color="#4878d0", alpha=0.8)
        ax.scatter(xs, lo, color="#333333", s=12, zorder=3)
        ax.scatter(xs, hi, color="#333333", s=12, zorder=3)
        ax.set_xticks(list(xs))
        ax.set_xticklabels(groups, rotation=60, ha="right", fontsize=8)
    else:
        ax.text(0.5, 0.5, "no non-zeroed runs", ha="center", va="center",
                transform=ax.transAxes)
    ax.set_ylabel("case-mix share (%)")
    ax.set_title(f"{report.spec.template}: case-mix variation across the sweep")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_sweep_figures(report: SweepReport, outdir: str | Path,
                         stem: str) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return [
        sweep_metric_figure(report, outdir / f"{stem}_metrics.png"),
        case_mix_range_figure(report, outdir / f"{stem}_case_mix.png"),
    ]
