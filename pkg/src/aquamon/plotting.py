"""Figure rendering for the CLI report paths.

Charts are written to files next to the delimited output; nothing here is
interactive.
"""

from __future__ import annotations

from datetime import datetime
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .standards import ReconciledRange  # noqa: E402


def save_series_figure(
    series: dict[str, list[tuple[datetime, float]]],
    path: str,
    title: str = "",
    safe_range: Optional[ReconciledRange] = None,
) -> None:
    """Line chart of one or more parameter series, with the reconciled safe
    range drawn as a shaded band when given (open-ended sides stay open)."""
    fig, ax = plt.subplots(figsize=(9, 4.5))
    for label, points in series.items():
        if not points:
            continue
        xs = [t for t, _ in points]
        ys = [v for _, v in points]
        ax.plot(xs, ys, marker="o", markersize=3, linewidth=1, label=label)
    if safe_range is not None:
        lo = safe_range.min
        hi = safe_range.max
        y0, y1 = ax.get_ylim()
        band_lo = lo if lo is not None else y0
        band_hi = hi if hi is not None else y1
        ax.axhspan(band_lo, band_hi, color="green", alpha=0.12, label="safe range")
        if lo is not None:
            ax.axhline(lo, color="green", linewidth=0.8, linestyle="--")
        if hi is not None:
            ax.axhline(hi, color="green", linewidth=0.8, linestyle="--")
    ax.set_xlabel("time (UTC)")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    if len(series) > 1 or safe_range is not None:
        ax.legend(loc="best", fontsize=8)
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_correlation_figure(
    pairs: Sequence[tuple[float, float]],
    path: str,
    label_a: str = "source A",
    label_b: str = "source B",
    r: Optional[float] = None,
) -> None:
    """Scatter of time-matched reading pairs from two collection methods."""
    fig, ax = plt.subplots(figsize=(5, 5))
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    ax.scatter(xs, ys, s=14, alpha=0.7)
    ax.set_xlabel(label_a)
    ax.set_ylabel(label_b)
    title = f"n={len(pairs)}"
    if r is not None:
        title += f", r={r:.3f}"
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
