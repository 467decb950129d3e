"""Command-line surface.

Subcommands: describe (per-layer cost table), compare (side-by-side
totals), export (GraphDocument JSON), graph (DOT), validate (structural
check of a preset, config file, or exported document).

Models are selected by preset name or by a JSON config file using the
same dialect as the document's "model" object. Input geometry can be
overridden with --channels/--height/--width. File output is atomic and
byte-deterministic; exit code 0 means the requested artifact was fully
produced, 1 an operational failure, 2 an unusable request.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import costmodel, serialize
from .fsio import atomic_write_bytes
from .network import (
    PRESETS,
    BlockConfig,
    NetworkConfig,
    NetworkGraph,
    ShapeError,
    StemSpec,
    build_network,
    preset_names,
    validate,
)
from .topology import ConnectionScheme

__all__ = ["main"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class _CliError(Exception):
    def __init__(self, message: str, exit_code: int = EXIT_FAILURE):
        super().__init__(message)
        self.exit_code = exit_code


def _config_from_file(path: Path) -> NetworkConfig:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise _CliError(f"cannot read {path}: {exc}", EXIT_USAGE) from None
    except json.JSONDecodeError as exc:
        raise _CliError(f"{path} is not valid JSON: {exc}", EXIT_USAGE) from None
    if not isinstance(data, dict):
        raise _CliError(f"{path} must hold a JSON object", EXIT_USAGE)
    try:
        stem = data.get("stem", {})
        return NetworkConfig(
            name=data.get("name", path.stem),
            scheme=ConnectionScheme.from_token(data["scheme"]),
            blocks=tuple(
                BlockConfig(
                    num_layers=b["num_layers"], growth_rate=b["growth_rate"]
                )
                for b in data["blocks"]
            ),
            compression=data.get("compression", 0.5),
            stem=StemSpec(
                kernel=stem.get("kernel", 7),
                stride=stem.get("stride", 1),
                out_channels=stem.get("out_channels", 64),
            ),
            num_classes=data.get("num_classes", 10),
            input_shape=tuple(data.get("input_shape", (3, 32, 32))),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise _CliError(f"bad config in {path}: {exc}", EXIT_USAGE) from None


def _resolve(selector: str, args: argparse.Namespace) -> NetworkGraph:
    config = PRESETS.get(selector)
    if config is None:
        path = Path(selector)
        if path.exists():
            config = _config_from_file(path)
        else:
            raise _CliError(
                f"unknown model {selector!r}; available presets: "
                f"{', '.join(preset_names())} (or pass a JSON config file path)",
                EXIT_USAGE,
            )
    c, h, w = config.input_shape
    shape = (
        args.channels if args.channels is not None else c,
        args.height if args.height is not None else h,
        args.width if args.width is not None else w,
    )
    try:
        return build_network(replace(config, input_shape=shape))
    except (ShapeError, ValueError) as exc:
        raise _CliError(str(exc), EXIT_USAGE) from None


def _emit_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    _emit_bytes(text.encode("utf-8"), out)


def _emit_bytes(data: bytes, out: str) -> None:
    try:
        atomic_write_bytes(out, data)
    except OSError as exc:
        raise _CliError(f"cannot write {out}: {exc}", EXIT_FAILURE) from None


def _save_figure(fig, out: str) -> None:
    from . import figures

    try:
        figures.save_figure(fig, out)
    except OSError as exc:
        raise _CliError(f"cannot write {out}: {exc}", EXIT_FAILURE) from None


def _cmd_describe(args: argparse.Namespace) -> int:
    graph = _resolve(args.model, args)
    report = costmodel.network_cost(graph)
    rows = []
    for node, cost in zip(graph.nodes, report.layers):
        sources = graph.incoming(node.node_id)
        rows.append(
            (
                node.node_id,
                node.role.value,
                ",".join(sources) if sources else "-",
                str(node.in_channels),
                str(node.out_channels),
                f"{node.out_height}x{node.out_width}",
                str(cost.params),
                str(cost.macs),
            )
        )
    rows.append(
        (
            "TOTAL",
            "-",
            "-",
            "-",
            "-",
            "-",
            str(report.total_params),
            str(report.total_macs),
        )
    )
    headers = (
        "node",
        "role",
        "predecessors",
        "in_ch",
        "out_ch",
        "out_hw",
        "params",
        "macs",
    )
    _emit_text(costmodel.render_table(headers, rows, args.format), args.out)
    if args.figure:
        from . import figures

        _save_figure(figures.layer_profile_figure(report), args.figure)
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    graphs = [_resolve(m, args) for m in args.models]
    reports = [costmodel.network_cost(g) for g in graphs]
    table = costmodel.compare(reports)
    _emit_text(table.render(args.format), args.out)
    if args.figure:
        from . import figures

        _save_figure(figures.comparison_figure(reports), args.figure)
    return EXIT_OK


def _cmd_export(args: argparse.Namespace) -> int:
    graph = _resolve(args.model, args)
    _emit_bytes(serialize.export_json(graph), args.out)
    return EXIT_OK


def _cmd_graph(args: argparse.Namespace) -> int:
    graph = _resolve(args.model, args)
    _emit_bytes(serialize.export_dot(graph), args.out)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    target = args.target
    path = Path(target)
    if target not in PRESETS and path.exists():
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise _CliError(f"cannot read {path}: {exc}", EXIT_FAILURE) from None
        looks_like_document = b'"format_version"' in raw
        if looks_like_document:
            try:
                graph = serialize.import_json(raw)
            except serialize.DocumentError as exc:
                print(f"invalid: {path}: {exc}", file=sys.stderr)
                return EXIT_FAILURE
        else:
            graph = _resolve(target, args)
    else:
        graph = _resolve(target, args)
    violations = validate(graph)
    if violations:
        for v in violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_FAILURE
    print(
        f"ok: {graph.config.name}: {len(graph.nodes)} nodes, "
        f"{len(graph.edges)} edges"
    )
    return EXIT_OK


def _add_shape_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--channels", type=int, metavar="C", help="override input channels"
    )
    parser.add_argument(
        "--height", type=int, metavar="H", help="override input height"
    )
    parser.add_argument("--width", type=int, metavar="W", help="override input width")


def _add_table_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=costmodel.TABLE_FORMATS,
        default="text",
        help="table rendering (default: text)",
    )
    parser.add_argument(
        "--out", metavar="PATH", help="write the table to PATH instead of stdout"
    )
    parser.add_argument(
        "--figure",
        metavar="PATH",
        help="also render a chart to PATH (.png/.svg/.pdf)",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shortnet",
        description=(
            "Generate block-connection topologies, compute analytic cost "
            "reports, and export architecture graphs."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="per-layer cost table for one model")
    p.add_argument("model", help="preset name or config file path")
    _add_table_flags(p)
    _add_shape_flags(p)
    p.set_defaults(handler=_cmd_describe)

    p = sub.add_parser("compare", help="side-by-side totals for several models")
    p.add_argument("models", nargs="+", help="preset names or config file paths")
    _add_table_flags(p)
    _add_shape_flags(p)
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser("export", help="write a GraphDocument JSON file")
    p.add_argument("model", help="preset name or config file path")
    p.add_argument("--out", required=True, metavar="PATH")
    _add_shape_flags(p)
    p.set_defaults(handler=_cmd_export)

    p = sub.add_parser("graph", help="write a DOT rendering of the graph")
    p.add_argument("model", help="preset name or config file path")
    p.add_argument("--out", required=True, metavar="PATH")
    _add_shape_flags(p)
    p.set_defaults(handler=_cmd_graph)

    p = sub.add_parser(
        "validate",
        help="check a preset, config file, or exported document",
    )
    p.add_argument("target", help="preset name, config file, or document file")
    _add_shape_flags(p)
    p.set_defaults(handler=_cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    for dim in ("channels", "height", "width"):
        value = getattr(args, dim, None)
        if value is not None and value < 1:
            print(f"error: --{dim} must be >= 1, got {value}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.handler(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
