"""Network graph assembly.

Builds the full architecture DAG for a configured model: a stem
composite, a run of connection-ruled blocks separated by compressing
transitions, then global average pooling and an affine classifier.

Every composite is a node; node ids are deterministic:

* ``stem``          BN + ReLU + 7x7 conv on the raw input
* ``b{i}.l{n}``     BN + ReLU + 3x3 conv, layer ``n`` of block ``i``
* ``t{i}``          BN + ReLU + 1x1 conv + 2x2 average pool after block ``i``
* ``gap``           global average pool
* ``cls``           affine classifier (the only node with a bias)

Block ``i``'s input tensor feeds only layer 1 of that block; layers
``n >= 2`` read the concatenation of the in-block outputs chosen by the
connection scheme; the trailing transition reads the concatenation of
all ``L * k`` in-block conv outputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .topology import ConnectionScheme, predecessors

__all__ = [
    "NodeRole",
    "StemSpec",
    "BlockConfig",
    "NetworkConfig",
    "GraphNode",
    "NetworkGraph",
    "ShapeError",
    "build_network",
    "propagate_shapes",
    "validate",
    "preset",
    "preset_names",
    "PRESETS",
]


class ShapeError(ValueError):
    """A spatial dimension collapsed below 1 during shape propagation."""


class NodeRole(str, enum.Enum):
    """What a graph node computes."""

    STEM = "stem"
    CONV = "conv"
    TRANSITION = "transition"
    GLOBAL_POOL = "global_pool"
    CLASSIFIER = "classifier"


@dataclass(frozen=True)
class StemSpec:
    """Input composite: BN + ReLU + square conv, padding-preserving.

    Output spatial size per axis is ``floor((size - 1) / stride) + 1``.
    """

    kernel: int = 7
    stride: int = 1
    out_channels: int = 64

    def __post_init__(self) -> None:
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ValueError(f"stem kernel must be odd and >= 1, got {self.kernel}")
        if self.stride < 1:
            raise ValueError(f"stem stride must be >= 1, got {self.stride}")
        if self.out_channels < 1:
            raise ValueError(
                f"stem out_channels must be >= 1, got {self.out_channels}"
            )


@dataclass(frozen=True)
class BlockConfig:
    """One block: ``num_layers`` composites, each emitting ``growth_rate`` channels."""

    num_layers: int
    growth_rate: int

    def __post_init__(self) -> None:
        if self.num_layers < 1:
            raise ValueError(f"num_layers must be >= 1, got {self.num_layers}")
        if self.growth_rate < 1:
            raise ValueError(f"growth_rate must be >= 1, got {self.growth_rate}")


@dataclass(frozen=True)
class NetworkConfig:
    """Complete model description.

    Attributes:
        name: model identifier, echoed into exports and reports.
        scheme: block wiring rule.
        blocks: per-block layer counts and growth rates, in order.
        compression: transition channel multiplier in (0, 1]; a
            transition after a block with ``L * k`` concatenated channels
            emits ``floor(compression * L * k)``.
        stem: input composite description.
        num_classes: classifier output width.
        input_shape: (channels, height, width) of the expected input.
    """

    name: str
    scheme: ConnectionScheme
    blocks: tuple[BlockConfig, ...]
    compression: float = 0.5
    stem: StemSpec = field(default_factory=StemSpec)
    num_classes: int = 10
    input_shape: tuple[int, int, int] = (3, 32, 32)

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("name must be non-empty")
        if not self.blocks:
            raise ValueError("at least one block is required")
        if not 0.0 < self.compression <= 1.0:
            raise ValueError(
                f"compression must be in (0, 1], got {self.compression}"
            )
        if self.num_classes < 1:
            raise ValueError(f"num_classes must be >= 1, got {self.num_classes}")
        if len(self.input_shape) != 3 or any(d < 1 for d in self.input_shape):
            raise ValueError(
                f"input_shape must be three positive ints, got {self.input_shape}"
            )


@dataclass(frozen=True)
class GraphNode:
    """One composite in the network DAG.

    ``block`` and ``layer`` are 1-based and None outside blocks
    (``layer`` is also None for transitions). ``out_height`` and
    ``out_width`` are None until shapes are propagated.
    """

    node_id: str
    role: NodeRole
    block: int | None
    layer: int | None
    in_channels: int
    out_channels: int
    out_height: int | None = None
    out_width: int | None = None


@dataclass(frozen=True)
class NetworkGraph:
    """Topologically ordered nodes plus directed edges, with the config attached."""

    config: NetworkConfig
    nodes: tuple[GraphNode, ...]
    edges: tuple[tuple[str, str], ...]

    def node(self, node_id: str) -> GraphNode:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise KeyError(node_id)

    def incoming(self, node_id: str) -> tuple[str, ...]:
        """Source ids of edges into ``node_id``, in edge order."""
        return tuple(src for src, dst in self.edges if dst == node_id)

    @property
    def is_shaped(self) -> bool:
        return all(n.out_height is not None for n in self.nodes)


def _assemble(config: NetworkConfig) -> NetworkGraph:
    """Build nodes and edges without spatial annotations."""
    nodes: list[GraphNode] = []
    edges: list[tuple[str, str]] = []

    c_in = config.input_shape[0]
    nodes.append(
        GraphNode(
            node_id="stem",
            role=NodeRole.STEM,
            block=None,
            layer=None,
            in_channels=c_in,
            out_channels=config.stem.out_channels,
        )
    )

    feed_id = "stem"
    feed_channels = config.stem.out_channels
    for bi, block in enumerate(config.blocks, start=1):
        k = block.growth_rate
        for n in range(1, block.num_layers + 1):
            node_id = f"b{bi}.l{n}"
            if n == 1:
                sources = (feed_id,)
                in_channels = feed_channels
            else:
                preds = predecessors(config.scheme, n).predecessors
                sources = tuple(f"b{bi}.l{p}" for p in preds)
                in_channels = k * len(preds)
            nodes.append(
                GraphNode(
                    node_id=node_id,
                    role=NodeRole.CONV,
                    block=bi,
                    layer=n,
                    in_channels=in_channels,
                    out_channels=k,
                )
            )
            edges.extend((src, node_id) for src in sources)

        t_in = block.num_layers * k
        t_out = int(config.compression * t_in)
        if t_out < 1:
            raise ValueError(
                f"transition t{bi} would emit {t_out} channels; "
                f"raise compression or growth_rate"
            )
        t_id = f"t{bi}"
        nodes.append(
            GraphNode(
                node_id=t_id,
                role=NodeRole.TRANSITION,
                block=bi,
                layer=None,
                in_channels=t_in,
                out_channels=t_out,
            )
        )
        edges.extend(
            (f"b{bi}.l{n}", t_id) for n in range(1, block.num_layers + 1)
        )
        feed_id, feed_channels = t_id, t_out

    nodes.append(
        GraphNode(
            node_id="gap",
            role=NodeRole.GLOBAL_POOL,
            block=None,
            layer=None,
            in_channels=feed_channels,
            out_channels=feed_channels,
        )
    )
    edges.append((feed_id, "gap"))
    nodes.append(
        GraphNode(
            node_id="cls",
            role=NodeRole.CLASSIFIER,
            block=None,
            layer=None,
            in_channels=feed_channels,
            out_channels=config.num_classes,
        )
    )
    edges.append(("gap", "cls"))

    return NetworkGraph(config=config, nodes=tuple(nodes), edges=tuple(edges))


def propagate_shapes(
    graph: NetworkGraph, input_shape: tuple[int, int, int] | None = None
) -> NetworkGraph:
    """Annotate every node with its output spatial size.

    Args:
        graph: assembled graph; existing annotations are recomputed.
        input_shape: (channels, height, width) to propagate. Defaults to
            the graph config's input_shape. Channels must match the
            stem's declared input.

    Returns:
        A new graph with ``out_height``/``out_width`` set on every node
        and the config's input_shape updated to match.

    Raises:
        ShapeError: if any pooling stage would produce a dimension < 1.
        ValueError: if the channel count disagrees with the stem.
    """
    shape = input_shape if input_shape is not None else graph.config.input_shape
    c, h, w = shape
    stem_node = graph.node("stem")
    if c != stem_node.in_channels:
        raise ValueError(
            f"input has {c} channels but the stem expects {stem_node.in_channels}"
        )
    if h < 1 or w < 1:
        raise ShapeError(f"input spatial size {h}x{w} must be at least 1x1")

    stride = graph.config.stem.stride
    out_shape: dict[str, tuple[int, int]] = {}
    new_nodes: list[GraphNode] = []
    for node in graph.nodes:
        if node.role is NodeRole.STEM:
            oh = (h - 1) // stride + 1
            ow = (w - 1) // stride + 1
        elif node.role is NodeRole.CONV:
            # padding-preserving 3x3: same size as the (shared) source size
            oh, ow = out_shape[graph.incoming(node.node_id)[0]]
        elif node.role is NodeRole.TRANSITION:
            ih, iw = out_shape[graph.incoming(node.node_id)[0]]
            oh, ow = ih // 2, iw // 2
            if oh < 1 or ow < 1:
                raise ShapeError(
                    f"spatial size collapsed to {oh}x{ow} at {node.node_id}; "
                    f"input {h}x{w} is too small for "
                    f"{len(graph.config.blocks)} blocks"
                )
        else:  # GLOBAL_POOL and CLASSIFIER both emit 1x1
            oh, ow = 1, 1
        out_shape[node.node_id] = (oh, ow)
        new_nodes.append(replace(node, out_height=oh, out_width=ow))

    new_config = replace(graph.config, input_shape=(c, h, w))
    return NetworkGraph(
        config=new_config, nodes=tuple(new_nodes), edges=graph.edges
    )


def build_network(config: NetworkConfig) -> NetworkGraph:
    """Assemble and shape-annotate the graph for ``config``."""
    return propagate_shapes(_assemble(config))


# --------------------------------------------------------------------------
# structural validation


_ROLE_ID_HINT = {
    NodeRole.STEM: "stem",
    NodeRole.GLOBAL_POOL: "gap",
    NodeRole.CLASSIFIER: "cls",
}


def validate(graph: NetworkGraph) -> list[str]:
    """Check structural invariants; return one message per violation.

    Verifies: unique deterministic node ids, edges referencing known
    nodes, acyclicity, channel bookkeeping (every node's in_channels
    equals the sum of its sources' out_channels), and that conv wiring
    matches the configured connection scheme. An empty list means the
    graph is well formed.
    """
    violations: list[str] = []
    ids = [n.node_id for n in graph.nodes]
    by_id = {n.node_id: n for n in graph.nodes}
    if len(by_id) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        violations.append(f"duplicate node ids: {', '.join(dupes)}")

    for node in graph.nodes:
        expected: str | None
        if node.role is NodeRole.CONV:
            expected = f"b{node.block}.l{node.layer}"
        elif node.role is NodeRole.TRANSITION:
            expected = f"t{node.block}"
        else:
            expected = _ROLE_ID_HINT.get(node.role)
        if expected is not None and node.node_id != expected:
            violations.append(
                f"node id {node.node_id!r} does not match its role "
                f"(expected {expected!r})"
            )

    known = set(by_id)
    for src, dst in graph.edges:
        for end in (src, dst):
            if end not in known:
                violations.append(f"edge ({src!r}, {dst!r}) references unknown node {end!r}")

    # Kahn topological pass over well-formed edges only
    good_edges = [(s, d) for s, d in graph.edges if s in known and d in known]
    indeg = {i: 0 for i in known}
    for _, d in good_edges:
        indeg[d] += 1
    queue = [i for i in ids if indeg.get(i) == 0]
    seen = 0
    while queue:
        cur = queue.pop()
        seen += 1
        for s, d in good_edges:
            if s == cur:
                indeg[d] -= 1
                if indeg[d] == 0:
                    queue.append(d)
    if seen != len(known):
        stuck = sorted(i for i, d in indeg.items() if d > 0)
        violations.append(f"graph contains a cycle through: {', '.join(stuck)}")

    for node in graph.nodes:
        srcs = [by_id[s] for s, d in good_edges if d == node.node_id]
        if node.role is NodeRole.STEM:
            if srcs:
                violations.append(f"stem must have no incoming edges, has {len(srcs)}")
            continue
        total = sum(s.out_channels for s in srcs)
        if total != node.in_channels:
            violations.append(
                f"channel mismatch at {node.node_id}: in_channels "
                f"{node.in_channels} but sources provide {total}"
            )

    scheme = graph.config.scheme
    for node in graph.nodes:
        if node.role is not NodeRole.CONV:
            continue
        actual = sorted(s for s, d in good_edges if d == node.node_id)
        if node.layer == 1:
            feed = "stem" if node.block == 1 else f"t{node.block - 1}"
            want = [feed]
        else:
            want = sorted(
                f"b{node.block}.l{p}"
                for p in predecessors(scheme, node.layer).predecessors
            )
        if actual != want:
            violations.append(
                f"wiring violates {scheme.token} at {node.node_id}: "
                f"sources {actual} != expected {want}"
            )

    return violations


# --------------------------------------------------------------------------
# presets


def _preset(name: str, scheme: ConnectionScheme, layers: tuple[int, ...]) -> NetworkConfig:
    return NetworkConfig(
        name=name,
        scheme=scheme,
        blocks=tuple(BlockConfig(num_layers=n, growth_rate=32) for n in layers),
    )


_LAYERS_43 = (8, 10, 12, 8)
_LAYERS_53 = (8, 12, 16, 8)

PRESETS: dict[str, NetworkConfig] = {
    cfg.name: cfg
    for cfg in (
        _preset("baseline-43", ConnectionScheme.DENSE, _LAYERS_43),
        _preset("shortnet1-43", ConnectionScheme.SHORT1, _LAYERS_43),
        _preset("shortnet2-43", ConnectionScheme.SHORT2, _LAYERS_43),
        _preset("baseline-53", ConnectionScheme.DENSE, _LAYERS_53),
        _preset("shortnet1-53", ConnectionScheme.SHORT1, _LAYERS_53),
        _preset("shortnet2-53", ConnectionScheme.SHORT2, _LAYERS_53),
    )
}


def preset_names() -> tuple[str, ...]:
    return tuple(PRESETS)


def preset(name: str) -> NetworkConfig:
    """Look up a built-in model configuration by name.

    Raises:
        KeyError: with the valid names, if ``name`` is unknown.
    """
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}"
        ) from None
