"""Interchange formats for network graphs.

JSON is the machine contract: a versioned GraphDocument embedding the
model config echo plus fully annotated nodes and edges, so a consumer
can rebuild and cross-check the model without this package's code. DOT
is for human inspection.

Document bytes are deterministic: sorted keys, two-space indent, UTF-8,
no locale dependence. The JSON Schema ships with the package at
``shortnet/schemas/graph_document.v1.json``.
"""

from __future__ import annotations

import json
from importlib import resources

import jsonschema

from .network import (
    BlockConfig,
    GraphNode,
    NetworkConfig,
    NetworkGraph,
    NodeRole,
    StemSpec,
    validate,
)
from .topology import ConnectionScheme

__all__ = [
    "FORMAT_VERSION",
    "DocumentError",
    "graph_document",
    "export_json",
    "import_json",
    "export_dot",
    "document_schema",
]

FORMAT_VERSION = "1"


class DocumentError(ValueError):
    """A document failed to parse or validate.

    ``path`` locates the offending element when one is known, as a
    JSONPath-style string ("$.nodes[3].role").
    """

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message if path is None else f"{path}: {message}")
        self.path = path


def document_schema() -> dict:
    """Load the GraphDocument JSON Schema shipped with the package."""
    text = (
        resources.files("shortnet")
        .joinpath("schemas/graph_document.v1.json")
        .read_text(encoding="utf-8")
    )
    return json.loads(text)


def graph_document(graph: NetworkGraph) -> dict:
    """Build the document dict for a shape-annotated graph."""
    if not graph.edges:
        raise ValueError("graph has no edges; refusing to serialize")
    if not graph.is_shaped:
        raise ValueError("graph is not shape-annotated; run propagate_shapes first")
    cfg = graph.config
    return {
        "format_version": FORMAT_VERSION,
        "model": {
            "name": cfg.name,
            "scheme": cfg.scheme.token,
            "blocks": [
                {"num_layers": b.num_layers, "growth_rate": b.growth_rate}
                for b in cfg.blocks
            ],
            "compression": cfg.compression,
            "stem": {
                "kernel": cfg.stem.kernel,
                "stride": cfg.stem.stride,
                "out_channels": cfg.stem.out_channels,
            },
            "num_classes": cfg.num_classes,
            "input_shape": list(cfg.input_shape),
        },
        "nodes": [
            {
                "node_id": n.node_id,
                "role": n.role.value,
                "block": n.block,
                "layer": n.layer,
                "in_channels": n.in_channels,
                "out_channels": n.out_channels,
                "out_height": n.out_height,
                "out_width": n.out_width,
            }
            for n in graph.nodes
        ],
        "edges": [[src, dst] for src, dst in graph.edges],
    }


def export_json(graph: NetworkGraph) -> bytes:
    """Serialize a graph to deterministic UTF-8 JSON bytes."""
    doc = graph_document(graph)
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def import_json(data: bytes | str) -> NetworkGraph:
    """Parse and validate a GraphDocument back into a NetworkGraph.

    Raises:
        DocumentError: on malformed JSON, an unsupported format_version,
            schema violations (with the offending path), or a document
            whose graph fails structural validation.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentError(f"document is not UTF-8: {exc}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from None

    if not isinstance(doc, dict):
        raise DocumentError("document root must be an object", path="$")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DocumentError(
            f"unsupported format_version {version!r}; this reader supports "
            f"{FORMAT_VERSION!r}"
        )

    validator = jsonschema.Draft202012Validator(document_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise DocumentError(first.message, path=first.json_path)

    model = doc["model"]
    config = NetworkConfig(
        name=model["name"],
        scheme=ConnectionScheme.from_token(model["scheme"]),
        blocks=tuple(
            BlockConfig(num_layers=b["num_layers"], growth_rate=b["growth_rate"])
            for b in model["blocks"]
        ),
        compression=model["compression"],
        stem=StemSpec(
            kernel=model["stem"]["kernel"],
            stride=model["stem"]["stride"],
            out_channels=model["stem"]["out_channels"],
        ),
        num_classes=model["num_classes"],
        input_shape=tuple(model["input_shape"]),
    )
    nodes = tuple(
        GraphNode(
            node_id=n["node_id"],
            role=NodeRole(n["role"]),
            block=n["block"],
            layer=n["layer"],
            in_channels=n["in_channels"],
            out_channels=n["out_channels"],
            out_height=n["out_height"],
            out_width=n["out_width"],
        )
        for n in doc["nodes"]
    )
    edges = tuple((src, dst) for src, dst in doc["edges"])
    graph = NetworkGraph(config=config, nodes=nodes, edges=edges)

    violations = validate(graph)
    if violations:
        raise DocumentError(
            "document graph fails validation: " + "; ".join(violations)
        )
    return graph


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


_ROLE_TAG = {
    NodeRole.STEM: "stem",
    NodeRole.CONV: "conv 3x3",
    NodeRole.TRANSITION: "transition 1x1+pool",
    NodeRole.GLOBAL_POOL: "global avg pool",
    NodeRole.CLASSIFIER: "classifier",
}


def export_dot(graph: NetworkGraph) -> bytes:
    """Render the graph as a deterministic DOT digraph.

    Node labels carry the role, channel fan-in/out, and output size.
    """
    if not graph.edges:
        raise ValueError("graph has no edges; refusing to serialize")
    cfg = graph.config
    lines = [
        f'digraph "{_dot_escape(cfg.name)}" {{',
        "  rankdir=TB;",
        '  node [shape=box, fontname="Helvetica"];',
    ]
    for n in graph.nodes:
        tag = _ROLE_TAG[n.role]
        if n.role is NodeRole.STEM:
            tag = f"stem {cfg.stem.kernel}x{cfg.stem.kernel}/{cfg.stem.stride}"
        size = (
            f" @{n.out_height}x{n.out_width}" if n.out_height is not None else ""
        )
        label = f"{n.node_id}\\n{tag}\\n{n.in_channels}->{n.out_channels}{size}"
        lines.append(f'  "{_dot_escape(n.node_id)}" [label="{label}"];')
    for src, dst in graph.edges:
        lines.append(f'  "{_dot_escape(src)}" -> "{_dot_escape(dst)}";')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")
