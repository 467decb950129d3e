"""Graph assembly tests: structure, shapes, presets, validation."""

import dataclasses

import pytest

import shortnet as sn
from shortnet import (
    BlockConfig,
    ConnectionScheme,
    NetworkConfig,
    NetworkGraph,
    NodeRole,
    ShapeError,
    StemSpec,
    build_network,
    propagate_shapes,
    validate,
)


def small_config(scheme=ConnectionScheme.DENSE, layers=(4, 4), **kwargs):
    return NetworkConfig(
        name="test",
        scheme=scheme,
        blocks=tuple(BlockConfig(num_layers=n, growth_rate=32) for n in layers),
        **kwargs,
    )


class TestPresets:
    def test_names(self):
        assert sn.preset_names() == (
            "baseline-43",
            "shortnet1-43",
            "shortnet2-43",
            "baseline-53",
            "shortnet1-53",
            "shortnet2-53",
        )

    def test_unknown_name_lists_presets(self):
        with pytest.raises(KeyError, match="baseline-43"):
            sn.preset("nosuch-99")

    def test_depth_43_blocks(self):
        cfg = sn.preset("baseline-43")
        assert tuple(b.num_layers for b in cfg.blocks) == (8, 10, 12, 8)
        assert all(b.growth_rate == 32 for b in cfg.blocks)

    def test_depth_53_blocks(self):
        cfg = sn.preset("shortnet2-53")
        assert tuple(b.num_layers for b in cfg.blocks) == (8, 12, 16, 8)

    def test_shared_settings(self):
        for name in sn.preset_names():
            cfg = sn.preset(name)
            assert cfg.compression == 0.5
            assert cfg.num_classes == 10
            assert cfg.input_shape == (3, 32, 32)
            assert cfg.stem == StemSpec(kernel=7, stride=1, out_channels=64)


class TestStructure:
    def test_baseline43_counts(self, graphs):
        g = graphs["baseline-43"]
        assert len(g.nodes) == 45
        assert len(g.edges) == 211
        roles = [n.role for n in g.nodes]
        assert roles.count(NodeRole.STEM) == 1
        assert roles.count(NodeRole.CONV) == 38
        assert roles.count(NodeRole.TRANSITION) == 4
        assert roles.count(NodeRole.GLOBAL_POOL) == 1
        assert roles.count(NodeRole.CLASSIFIER) == 1

    def test_node_ids(self, graphs):
        g = graphs["baseline-43"]
        ids = [n.node_id for n in g.nodes]
        assert ids[0] == "stem"
        assert ids[1] == "b1.l1"
        assert "t4" in ids
        assert ids[-2:] == ["gap", "cls"]

    def test_edge_count_decomposition(self, graphs):
        # internal wiring + one conv->transition edge per layer
        # + one block-input edge per block + t4->gap + gap->cls
        g = graphs["baseline-43"]
        layers = (8, 10, 12, 8)
        internal = sum(n * (n - 1) // 2 for n in layers)
        assert len(g.edges) == internal + sum(layers) + len(layers) + 2

    def test_transition_channels(self, graphs):
        g = graphs["baseline-43"]
        expected = {"t1": (256, 128), "t2": (320, 160), "t3": (384, 192), "t4": (256, 128)}
        for tid, (t_in, t_out) in expected.items():
            node = g.node(tid)
            assert (node.in_channels, node.out_channels) == (t_in, t_out)

    def test_block_input_feeds_only_layer_one(self, graphs):
        for g in graphs.values():
            for bi in range(1, len(g.config.blocks) + 1):
                feed = "stem" if bi == 1 else f"t{bi - 1}"
                consumers = [dst for src, dst in g.edges if src == feed]
                conv_consumers = [d for d in consumers if d.startswith("b")]
                assert conv_consumers == [f"b{bi}.l1"]

    def test_no_cross_block_conv_edges(self, graphs):
        for g in graphs.values():
            for src, dst in g.edges:
                if src.startswith("b") and dst.startswith("b"):
                    assert src.split(".")[0] == dst.split(".")[0]

    def test_shortnet2_43_b1l8_fan_in(self, graphs):
        g = graphs["shortnet2-43"]
        node = g.node("b1.l8")
        assert node.in_channels == 96
        assert g.incoming("b1.l8") == ("b1.l1", "b1.l5", "b1.l7")

    def test_incoming_sources_ascend(self, graphs):
        for g in graphs.values():
            for node in g.nodes:
                if node.role is NodeRole.CONV and node.layer > 1:
                    sources = g.incoming(node.node_id)
                    assert list(sources) == sorted(
                        sources, key=lambda s: int(s.split("l")[-1])
                    )

    def test_scheme_fan_in_monotonicity(self, graphs):
        for depth in ("43", "53"):
            totals = {
                scheme: sum(
                    n.in_channels
                    for n in graphs[f"{scheme}-{depth}"].nodes
                    if n.role is NodeRole.CONV
                )
                for scheme in ("baseline", "shortnet1", "shortnet2")
            }
            assert totals["baseline"] > totals["shortnet1"] > totals["shortnet2"]

    def test_build_deterministic(self):
        cfg = sn.preset("shortnet1-53")
        assert build_network(cfg) == build_network(cfg)


class TestShapes:
    def test_block_resolutions(self, graphs):
        g = graphs["baseline-43"]
        expected = {1: 32, 2: 16, 3: 8, 4: 4}
        for node in g.nodes:
            if node.role is NodeRole.CONV:
                assert node.out_height == node.out_width == expected[node.block]

    def test_final_feature_map(self, graphs):
        for name, g in graphs.items():
            t4 = g.node("t4")
            assert (t4.out_channels, t4.out_height, t4.out_width) == (128, 2, 2), name

    def test_head_shapes(self, graphs):
        g = graphs["baseline-53"]
        assert (g.node("gap").out_height, g.node("gap").out_width) == (1, 1)
        cls = g.node("cls")
        assert (cls.in_channels, cls.out_channels) == (128, 10)

    def test_stem_stride_arithmetic(self):
        cfg = small_config(
            layers=(4,), stem=StemSpec(kernel=7, stride=2, out_channels=64)
        )
        g = build_network(cfg)
        assert (g.node("stem").out_height, g.node("stem").out_width) == (16, 16)

    def test_transition_shapes_scheme_independent(self, graphs):
        for depth in ("43", "53"):
            shapes = {
                scheme: [
                    (n.node_id, n.out_height, n.out_width)
                    for n in graphs[f"{scheme}-{depth}"].nodes
                    if n.role is NodeRole.TRANSITION
                ]
                for scheme in ("baseline", "shortnet1", "shortnet2")
            }
            assert shapes["baseline"] == shapes["shortnet1"] == shapes["shortnet2"]

    def test_8x8_input_collapses_at_t4(self):
        cfg = dataclasses.replace(sn.preset("baseline-43"), input_shape=(3, 8, 8))
        with pytest.raises(ShapeError, match="t4"):
            build_network(cfg)

    def test_single_axis_collapse(self):
        cfg = dataclasses.replace(sn.preset("baseline-43"), input_shape=(3, 8, 32))
        with pytest.raises(ShapeError):
            build_network(cfg)

    def test_repropagation_override(self, graphs):
        g = propagate_shapes(graphs["baseline-43"], (3, 64, 64))
        assert g.config.input_shape == (3, 64, 64)
        assert (g.node("stem").out_height, g.node("stem").out_width) == (64, 64)
        assert (g.node("t4").out_height, g.node("t4").out_width) == (4, 4)

    def test_repropagation_channel_mismatch(self, graphs):
        with pytest.raises(ValueError, match="channels"):
            propagate_shapes(graphs["baseline-43"], (4, 32, 32))

    def test_is_shaped_flag(self):
        g = build_network(small_config())
        assert g.is_shaped
        stripped = NetworkGraph(
            config=g.config,
            nodes=tuple(
                dataclasses.replace(n, out_height=None, out_width=None)
                for n in g.nodes
            ),
            edges=g.edges,
        )
        assert not stripped.is_shaped


class TestValidate:
    @pytest.mark.parametrize(
        "name",
        (
            "baseline-43",
            "shortnet1-43",
            "shortnet2-43",
            "baseline-53",
            "shortnet1-53",
            "shortnet2-53",
        ),
    )
    def test_presets_clean(self, graphs, name):
        assert validate(graphs[name]) == []

    def test_detects_channel_mismatch(self, graphs):
        g = graphs["baseline-43"]
        tampered = NetworkGraph(
            config=g.config,
            nodes=tuple(
                dataclasses.replace(n, in_channels=999)
                if n.node_id == "b1.l3"
                else n
                for n in g.nodes
            ),
            edges=g.edges,
        )
        assert any("channel mismatch at b1.l3" in v for v in validate(tampered))

    def test_detects_cycle(self, graphs):
        g = graphs["baseline-43"]
        cyclic = NetworkGraph(
            config=g.config, nodes=g.nodes, edges=g.edges + (("b1.l2", "b1.l1"),)
        )
        assert any("cycle" in v for v in validate(cyclic))

    def test_detects_dangling_edge(self, graphs):
        g = graphs["baseline-43"]
        dangling = NetworkGraph(
            config=g.config, nodes=g.nodes, edges=g.edges + (("b9.l9", "gap"),)
        )
        assert any("unknown node 'b9.l9'" in v for v in validate(dangling))

    def test_detects_duplicate_ids(self, graphs):
        g = graphs["baseline-43"]
        doubled = NetworkGraph(
            config=g.config, nodes=g.nodes + (g.nodes[1],), edges=g.edges
        )
        assert any("duplicate node ids" in v for v in validate(doubled))

    def test_detects_wiring_violation(self, graphs):
        g = graphs["shortnet1-43"]
        # claim the graph follows the offset rule; parity wiring must trip it
        relabeled = NetworkGraph(
            config=dataclasses.replace(g.config, scheme=ConnectionScheme.SHORT2),
            nodes=g.nodes,
            edges=g.edges,
        )
        assert any("wiring violates short2" in v for v in validate(relabeled))


class TestConfigValidation:
    def test_rejects_empty_blocks(self):
        with pytest.raises(ValueError, match="block"):
            NetworkConfig(name="x", scheme=ConnectionScheme.DENSE, blocks=())

    @pytest.mark.parametrize("compression", (0.0, -0.5, 1.5))
    def test_rejects_bad_compression(self, compression):
        with pytest.raises(ValueError, match="compression"):
            small_config(compression=compression)

    def test_rejects_bad_classes(self):
        with pytest.raises(ValueError, match="num_classes"):
            small_config(num_classes=0)

    @pytest.mark.parametrize("shape", ((3, 32), (3, 0, 32), (0, 32, 32)))
    def test_rejects_bad_input_shape(self, shape):
        with pytest.raises(ValueError, match="input_shape"):
            small_config(input_shape=shape)

    def test_rejects_bad_block(self):
        with pytest.raises(ValueError, match="num_layers"):
            BlockConfig(num_layers=0, growth_rate=32)
        with pytest.raises(ValueError, match="growth_rate"):
            BlockConfig(num_layers=4, growth_rate=0)

    def test_rejects_bad_stem(self):
        with pytest.raises(ValueError, match="kernel"):
            StemSpec(kernel=4)
        with pytest.raises(ValueError, match="stride"):
            StemSpec(stride=0)

    def test_rejects_vanishing_transition(self):
        cfg = NetworkConfig(
            name="x",
            scheme=ConnectionScheme.DENSE,
            blocks=(BlockConfig(num_layers=1, growth_rate=1),),
        )
        with pytest.raises(ValueError, match="transition t1"):
            build_network(cfg)

    def test_frozen_types(self):
        cfg = small_config()
        with pytest.raises(dataclasses.FrozenInstanceError):
            cfg.name = "other"
