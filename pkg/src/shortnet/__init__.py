"""Connection-topology generator and analytic cost model for densely
connected convolutional networks.

The library builds architecture DAGs for three block wiring rules
(dense, parity-reduced, offset-reduced), infers shapes, computes exact
parameter/compute/memory accounting, and exports the graphs as
versioned JSON documents or DOT renderings. See the README for the
command-line surface.
"""

from .costmodel import (
    ComparisonTable,
    ConvCost,
    CostConvention,
    CostReport,
    LayerCost,
    compare,
    conv_cost,
    network_cost,
)
from .network import (
    BlockConfig,
    GraphNode,
    NetworkConfig,
    NetworkGraph,
    NodeRole,
    PRESETS,
    ShapeError,
    StemSpec,
    build_network,
    preset,
    preset_names,
    propagate_shapes,
    validate,
)
from .serialize import (
    DocumentError,
    export_dot,
    export_json,
    graph_document,
    import_json,
)
from .topology import (
    ConnectionScheme,
    PredecessorSet,
    connection_count,
    predecessors,
)

__version__ = "0.1.0"

__all__ = [
    "BlockConfig",
    "ComparisonTable",
    "ConnectionScheme",
    "ConvCost",
    "CostConvention",
    "CostReport",
    "DocumentError",
    "GraphNode",
    "LayerCost",
    "NetworkConfig",
    "NetworkGraph",
    "NodeRole",
    "PRESETS",
    "PredecessorSet",
    "ShapeError",
    "StemSpec",
    "build_network",
    "compare",
    "connection_count",
    "conv_cost",
    "export_dot",
    "export_json",
    "graph_document",
    "import_json",
    "network_cost",
    "predecessors",
    "preset",
    "preset_names",
    "propagate_shapes",
    "validate",
    "__version__",
]
