"""Chart rendering for cost reports.

Figures render headlessly (Agg) and save deterministically: SVG ids are
salted with a fixed string and date metadata is stripped, so identical
reports produce identical bytes. Saving is atomic.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "shortnet"

import matplotlib.pyplot as plt
from matplotlib.figure import Figure

from .costmodel import CostReport
from .fsio import atomic_write_bytes

__all__ = ["comparison_figure", "layer_profile_figure", "save_figure"]

_BAR_COLOR = "#4878a8"


def comparison_figure(reports: Sequence[CostReport]) -> Figure:
    """Four-panel bar chart of model totals (compute, params, memory, traffic)."""
    if not reports:
        raise ValueError("at least one report is required")
    names = [r.model for r in reports]
    panels = [
        ("Flops (M)", [r.total_macs / 1e6 for r in reports]),
        ("#Params (M)", [r.total_params / 1e6 for r in reports]),
        ("Memory (MB)", [r.total_act_out_bytes / 2**20 for r in reports]),
        (
            "MemR+W (MB)",
            [(r.total_read_bytes + r.total_write_bytes) / 2**20 for r in reports],
        ),
    ]
    fig, axes = plt.subplots(2, 2, figsize=(10.0, 7.0))
    for ax, (title, values) in zip(axes.flat, panels):
        ax.bar(range(len(values)), values, color=_BAR_COLOR)
        ax.set_title(title, fontsize=10)
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
        ax.grid(axis="y", linewidth=0.4, alpha=0.5)
        ax.set_axisbelow(True)
    fig.suptitle("Model cost comparison")
    fig.tight_layout()
    return fig


def layer_profile_figure(report: CostReport) -> Figure:
    """Per-node compute and parameter profile for one model."""
    ids = [row.node_id for row in report.layers]
    macs_m = [row.macs / 1e6 for row in report.layers]
    params_k = [row.params / 1e3 for row in report.layers]
    fig, (ax_top, ax_bot) = plt.subplots(
        2, 1, figsize=(max(8.0, 0.22 * len(ids)), 6.0), sharex=True
    )
    x = range(len(ids))
    ax_top.bar(x, macs_m, color=_BAR_COLOR)
    ax_top.set_ylabel("MACs (M)")
    ax_bot.bar(x, params_k, color="#a85c48")
    ax_bot.set_ylabel("Params (K)")
    ax_bot.set_xticks(list(x))
    ax_bot.set_xticklabels(ids, rotation=90, fontsize=6)
    for ax in (ax_top, ax_bot):
        ax.grid(axis="y", linewidth=0.4, alpha=0.5)
        ax.set_axisbelow(True)
    fig.suptitle(f"Per-layer cost profile: {report.model}")
    fig.tight_layout()
    return fig


def save_figure(fig: Figure, path: str | Path) -> None:
    """Render ``fig`` to ``path`` (format from the suffix) atomically.

    Date metadata is suppressed for SVG and PDF so output bytes depend
    only on the figure content.
    """
    suffix = Path(path).suffix.lower().lstrip(".") or "png"
    metadata = None
    if suffix == "svg":
        metadata = {"Date": None}
    elif suffix == "pdf":
        metadata = {"CreationDate": None}
    buf = io.BytesIO()
    fig.savefig(buf, format=suffix, dpi=120, metadata=metadata)
    atomic_write_bytes(path, buf.getvalue())
