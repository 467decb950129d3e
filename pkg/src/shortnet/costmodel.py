"""Analytic cost accounting for shape-annotated network graphs.

Counting conventions (fixed, embedded in every report):

* Compute is counted in MACs, one per multiply-accumulate; MAdd counts
  two per MAC. BN, ReLU, and pooling arithmetic is excluded from both
  (well under 1% of any model here).
* Parameters: conv composites cost ``in * out * kh * kw`` conv weights
  plus ``2 * in`` BN scale/shift attributed to the same node; the
  classifier is affine, ``in * out + out``. Nothing else has weights.
* Activation memory sums the bytes every internal stage writes (BN
  output, ReLU output, conv output, pool output where present), 4 bytes
  per element. Traffic: per node, read = input activation bytes plus
  parameter bytes; write = the same stage-write bytes; MemR+W is the
  grand total of both.

All counters are exact integers; unit scaling and rounding happen only
in the renderers, via decimal half-up to two places.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .network import NetworkGraph, NodeRole

__all__ = [
    "CostConvention",
    "ConvCost",
    "conv_cost",
    "LayerCost",
    "CostReport",
    "network_cost",
    "ComparisonTable",
    "compare",
    "render_table",
    "TABLE_FORMATS",
]


@dataclass(frozen=True)
class CostConvention:
    """Counting policy knobs. Defaults match the module docstring."""

    bytes_per_element: int = 4
    madd_per_mac: int = 2

    def __post_init__(self) -> None:
        if self.bytes_per_element < 1:
            raise ValueError("bytes_per_element must be >= 1")
        if self.madd_per_mac < 1:
            raise ValueError("madd_per_mac must be >= 1")


DEFAULT_CONVENTION = CostConvention()


@dataclass(frozen=True)
class ConvCost:
    """Compute and weight counts for one conv composite."""

    macs: int
    madd: int
    conv_params: int
    bn_params: int

    @property
    def params(self) -> int:
        return self.conv_params + self.bn_params


def conv_cost(
    in_channels: int,
    out_channels: int,
    kernel_h: int,
    kernel_w: int,
    out_height: int,
    out_width: int,
    convention: CostConvention = DEFAULT_CONVENTION,
) -> ConvCost:
    """Cost of a BN + ReLU + conv composite.

    MACs are ``in * out * kh * kw * oh * ow``; weights are the conv
    kernel plus the BN scale/shift pair on the input channels.
    """
    for name, v in (
        ("in_channels", in_channels),
        ("out_channels", out_channels),
        ("kernel_h", kernel_h),
        ("kernel_w", kernel_w),
        ("out_height", out_height),
        ("out_width", out_width),
    ):
        if v < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    kernel = in_channels * out_channels * kernel_h * kernel_w
    macs = kernel * out_height * out_width
    return ConvCost(
        macs=macs,
        madd=convention.madd_per_mac * macs,
        conv_params=kernel,
        bn_params=2 * in_channels,
    )


@dataclass(frozen=True)
class LayerCost:
    """Per-node cost entry. Byte fields follow the module conventions."""

    node_id: str
    role: NodeRole
    params: int
    macs: int
    madd: int
    act_out_bytes: int
    read_bytes: int
    write_bytes: int

    def __post_init__(self) -> None:
        for name in ("params", "macs", "madd", "act_out_bytes", "read_bytes", "write_bytes"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class CostReport:
    """Per-node costs plus totals for one model."""

    model: str
    scheme: str
    convention: CostConvention
    layers: tuple[LayerCost, ...]
    total_params: int
    total_macs: int
    total_madd: int
    total_act_out_bytes: int
    total_read_bytes: int
    total_write_bytes: int

    @classmethod
    def tally(
        cls,
        model: str,
        scheme: str,
        convention: CostConvention,
        layers: Iterable[LayerCost],
    ) -> "CostReport":
        rows = tuple(layers)
        return cls(
            model=model,
            scheme=scheme,
            convention=convention,
            layers=rows,
            total_params=sum(r.params for r in rows),
            total_macs=sum(r.macs for r in rows),
            total_madd=sum(r.madd for r in rows),
            total_act_out_bytes=sum(r.act_out_bytes for r in rows),
            total_read_bytes=sum(r.read_bytes for r in rows),
            total_write_bytes=sum(r.write_bytes for r in rows),
        )

    @property
    def memory_mib(self) -> float:
        return self.total_act_out_bytes / 2**20

    @property
    def memrw_mib(self) -> float:
        return (self.total_read_bytes + self.total_write_bytes) / 2**20

    def layer(self, node_id: str) -> LayerCost:
        for row in self.layers:
            if row.node_id == node_id:
                return row
        raise KeyError(node_id)


def network_cost(
    graph: NetworkGraph, convention: CostConvention = DEFAULT_CONVENTION
) -> CostReport:
    """Compute a CostReport for a shape-annotated graph.

    Raises:
        ValueError: if the graph has no spatial annotations.
    """
    if not graph.is_shaped:
        raise ValueError(
            "graph is not shape-annotated; run propagate_shapes first"
        )
    bpe = convention.bytes_per_element
    out_hw = {n.node_id: (n.out_height, n.out_width) for n in graph.nodes}

    layers: list[LayerCost] = []
    for node in graph.nodes:
        if node.role is NodeRole.STEM:
            ih, iw = graph.config.input_shape[1], graph.config.input_shape[2]
        else:
            ih, iw = out_hw[graph.incoming(node.node_id)[0]]
        in_elems = node.in_channels * ih * iw
        oh, ow = node.out_height, node.out_width

        if node.role in (NodeRole.STEM, NodeRole.CONV):
            kernel = graph.config.stem.kernel if node.role is NodeRole.STEM else 3
            cc = conv_cost(
                node.in_channels, node.out_channels, kernel, kernel, oh, ow, convention
            )
            params, macs, madd = cc.params, cc.macs, cc.madd
            stage_writes = 2 * in_elems + node.out_channels * oh * ow
        elif node.role is NodeRole.TRANSITION:
            # 1x1 conv runs at the incoming resolution; the 2x2 pool halves it.
            cc = conv_cost(
                node.in_channels, node.out_channels, 1, 1, ih, iw, convention
            )
            params, macs, madd = cc.params, cc.macs, cc.madd
            stage_writes = (
                2 * in_elems
                + node.out_channels * ih * iw
                + node.out_channels * oh * ow
            )
        elif node.role is NodeRole.GLOBAL_POOL:
            params = macs = madd = 0
            stage_writes = node.out_channels
        elif node.role is NodeRole.CLASSIFIER:
            params = node.in_channels * node.out_channels + node.out_channels
            macs = node.in_channels * node.out_channels
            madd = convention.madd_per_mac * macs
            stage_writes = node.out_channels
        else:  # pragma: no cover - enum is closed
            raise ValueError(f"unhandled role {node.role!r}")

        layers.append(
            LayerCost(
                node_id=node.node_id,
                role=node.role,
                params=params,
                macs=macs,
                madd=madd,
                act_out_bytes=stage_writes * bpe,
                read_bytes=(in_elems + params) * bpe,
                write_bytes=stage_writes * bpe,
            )
        )

    return CostReport.tally(
        model=graph.config.name,
        scheme=graph.config.scheme.token,
        convention=convention,
        layers=layers,
    )


# --------------------------------------------------------------------------
# rendering


TABLE_FORMATS = ("text", "csv", "markdown")

_TWO_PLACES = Decimal("0.01")


def format_quantity(value: int, divisor: int) -> str:
    """Scale an exact counter and render with two half-up decimals.

    Exact zeros render as "0"; nothing renders blank.
    """
    if value == 0:
        return "0"
    scaled = (Decimal(value) / Decimal(divisor)).quantize(
        _TWO_PLACES, rounding=ROUND_HALF_UP
    )
    return str(scaled)


def render_table(
    headers: Sequence[str], rows: Sequence[Sequence[str]], fmt: str
) -> str:
    """Render string cells as aligned text, RFC-4180 CSV, or markdown."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(headers)
        writer.writerows(rows)
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(headers) + " |"]
        lines.append("| " + " | ".join("---" for _ in headers) + " |")
        lines.extend("| " + " | ".join(row) + " |" for row in rows)
        return "\n".join(lines) + "\n"
    if fmt == "text":
        widths = [len(h) for h in headers]
        for row in rows:
            for i, cell in enumerate(row):
                widths[i] = max(widths[i], len(cell))
        def line(cells: Sequence[str]) -> str:
            return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
        out = [line(headers), line(["-" * w for w in widths])]
        out.extend(line(row) for row in rows)
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown table format {fmt!r}; expected one of {TABLE_FORMATS}")


@dataclass(frozen=True)
class ComparisonTable:
    """Side-by-side model totals, pre-scaled to display units.

    Columns: Flops in mega-MACs, MAdd in billions, Memory and MemR+W in
    MiB, params in millions. Row order follows the input report order.
    """

    headers: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def render(self, fmt: str = "text") -> str:
        return render_table(self.headers, self.rows, fmt)


_COMPARE_HEADERS = (
    "Model",
    "Flops (M)",
    "MAdd (G)",
    "Memory (MB)",
    "#Params (M)",
    "MemR+W (MB)",
)


def compare(reports: Sequence[CostReport]) -> ComparisonTable:
    """Build a comparison table from one or more cost reports."""
    if not reports:
        raise ValueError("at least one report is required")
    rows = []
    for r in reports:
        rows.append(
            (
                r.model,
                format_quantity(r.total_macs, 10**6),
                format_quantity(r.total_madd, 10**9),
                format_quantity(r.total_act_out_bytes, 2**20),
                format_quantity(r.total_params, 10**6),
                format_quantity(r.total_read_bytes + r.total_write_bytes, 2**20),
            )
        )
    return ComparisonTable(headers=_COMPARE_HEADERS, rows=tuple(rows))
