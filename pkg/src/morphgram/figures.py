"""Report figures rendered to files alongside the text reports.

Uses the Agg backend unconditionally: figures go to disk, never to a display.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_METRIC_COLORS = {"spearman": "#4878d0", "accuracy": "#ee854a", "purity": "#6acc64"}


def save_eval_figure(rows, path: str | Path) -> Path:
    """Horizontal bar chart of one eval run.

    ``rows`` are (dataset name, metric name, value, coverage) tuples, the
    same records the text report prints.
    """
    rows = list(rows)
    fig, ax = plt.subplots(figsize=(7.0, 1.0 + 0.5 * max(len(rows), 1)))
    ypos = range(len(rows))
    values = [r[2] for r in rows]
    colors = [_METRIC_COLORS.get(r[1], "#888888") for r in rows]
    ax.barh(list(ypos), values, color=colors)
    ax.set_yticks(list(ypos))
    ax.set_yticklabels([f"{name} ({metric})" for name, metric, _, _ in rows])
    ax.invert_yaxis()
    ax.set_xlabel("metric value")
    ax.set_xlim(min(0.0, min(values, default=0.0)), 1.0)
    for y, (_, _, value, coverage) in zip(ypos, rows):
        ax.text(value, y, f" {value:.3f} (cov {coverage:.0%})", va="center", fontsize=8)
    ax.set_title("intrinsic evaluation")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_bench_figure(arms, ratio: float, path: str | Path) -> Path:
    """Throughput comparison of the two bench arms.

    ``arms`` are (label, tokens_per_sec, wall_seconds) tuples.
    """
    arms = list(arms)
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    labels = [a[0] for a in arms]
    tps = [a[1] for a in arms]
    bars = ax.bar(labels, tps, color=["#ee854a", "#6acc64"][: len(arms)])
    for bar, (_, t, wall) in zip(bars, arms):
        ax.text(
            bar.get_x() + bar.get_width() / 2,
            bar.get_height(),
            f"{t:,.0f} tok/s\n{wall:.1f}s",
            ha="center",
            va="bottom",
            fontsize=8,
        )
    ax.set_ylabel("tokens / second")
    ax.set_title(f"training throughput (ratio {ratio:.2f}x)")
    ax.set_ylim(0, max(tps) * 1.25 if tps else 1.0)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
