"""Command-line tests: subcommand behavior, formats, files, exit codes."""

import csv
import io
import json
import shutil
import subprocess

import pytest

import shortnet as sn
from shortnet.cli import main

SIX = [
    "baseline-43",
    "shortnet1-43",
    "shortnet2-43",
    "baseline-53",
    "shortnet1-53",
    "shortnet2-53",
]


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestDescribe:
    def test_row_count(self, capsys):
        code, out, _ = run(["describe", "baseline-43", "--format", "csv"], capsys)
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert len(rows) == 1 + 45 + 1  # header + nodes + totals

    def test_totals_match_cost_model(self, capsys, reports):
        code, out, _ = run(["describe", "baseline-53", "--format", "csv"], capsys)
        assert code == 0
        total = list(csv.reader(io.StringIO(out)))[-1]
        assert total[0] == "TOTAL"
        assert int(total[6]) == reports["baseline-53"].total_params
        assert int(total[7]) == reports["baseline-53"].total_macs

    def test_offset_rule_predecessor_cell(self, capsys):
        code, out, _ = run(["describe", "shortnet2-43", "--format", "csv"], capsys)
        assert code == 0
        rows = {r[0]: r for r in csv.reader(io.StringIO(out))}
        assert rows["b1.l8"][2] == "b1.l1,b1.l5,b1.l7"

    def test_text_format_has_all_nodes(self, capsys):
        code, out, _ = run(["describe", "shortnet1-43"], capsys)
        assert code == 0
        assert out.splitlines()[0].split()[0] == "node"
        assert "b4.l8" in out and "TOTAL" in out

    def test_unknown_preset_exits_2(self, capsys):
        code, out, err = run(["describe", "nosuch-99"], capsys)
        assert code == 2
        assert out == ""
        for name in SIX:
            assert name in err

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "table.md"
        code, out, _ = run(
            ["describe", "baseline-43", "--format", "markdown", "--out", str(target)],
            capsys,
        )
        assert code == 0 and out == ""
        assert target.read_text(encoding="utf-8").startswith("| node |")


class TestCompare:
    def test_six_rows_csv(self, capsys):
        code, out, _ = run(["compare", *SIX, "--format", "csv"], capsys)
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert [r[0] for r in rows[1:]] == SIX

    def test_crlf_line_endings(self, capsys):
        _, out, _ = run(["compare", "baseline-43", "--format", "csv"], capsys)
        assert out.count("\r\n") == 2

    def test_deterministic_bytes(self, capsys):
        _, first, _ = run(["compare", *SIX, "--format", "csv"], capsys)
        _, second, _ = run(["compare", *SIX, "--format", "csv"], capsys)
        assert first == second

    def test_single_model(self, capsys):
        code, out, _ = run(["compare", "shortnet2-53"], capsys)
        assert code == 0
        assert len(out.splitlines()) == 3

    def test_markdown(self, capsys):
        code, out, _ = run(["compare", "baseline-43", "--format", "markdown"], capsys)
        assert code == 0
        assert out.startswith("| Model |")

    def test_unresolvable_aborts_before_output(self, capsys):
        code, out, err = run(["compare", "baseline-43", "nosuch-99"], capsys)
        assert code == 2
        assert out == ""
        assert "nosuch-99" in err

    def test_geometry_override_changes_costs(self, capsys, graphs):
        _, default_out, _ = run(["compare", "baseline-43", "--format", "csv"], capsys)
        code, big_out, _ = run(
            ["compare", "baseline-43", "--format", "csv", "--height", "64", "--width", "64"],
            capsys,
        )
        assert code == 0
        expected = sn.network_cost(sn.propagate_shapes(graphs["baseline-43"], (3, 64, 64)))
        big_flops = list(csv.reader(io.StringIO(big_out)))[1][1]
        assert big_flops == f"{expected.total_macs / 10**6:.2f}"
        assert big_out != default_out

    def test_collapsing_geometry_exits_2(self, capsys):
        code, _, err = run(
            ["compare", "baseline-43", "--height", "8", "--width", "8"], capsys
        )
        assert code == 2
        assert "t4" in err

    def test_nonpositive_dimension_exits_2(self, capsys):
        code, _, err = run(["compare", "baseline-43", "--height", "0"], capsys)
        assert code == 2
        assert "--height" in err


class TestExportAndGraph:
    def test_export_round_trips(self, capsys, tmp_path, graphs):
        target = tmp_path / "model.json"
        code, _, _ = run(["export", "shortnet1-53", "--out", str(target)], capsys)
        assert code == 0
        assert sn.import_json(target.read_bytes()) == graphs["shortnet1-53"]

    def test_export_identical_across_runs(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(["export", "shortnet1-53", "--out", str(a)], capsys)
        run(["export", "shortnet1-53", "--out", str(b)], capsys)
        assert a.read_bytes() == b.read_bytes()

    def test_export_missing_directory_exits_1(self, capsys, tmp_path):
        target = tmp_path / "absent" / "model.json"
        code, _, err = run(["export", "baseline-43", "--out", str(target)], capsys)
        assert code == 1
        assert "model.json" in err
        assert not target.exists()
        assert list(tmp_path.iterdir()) == []

    def test_export_over_directory_leaves_no_partials(self, capsys, tmp_path):
        code, _, err = run(["export", "baseline-43", "--out", str(tmp_path)], capsys)
        assert code == 1
        assert str(tmp_path) in err
        assert list(tmp_path.iterdir()) == []

    def test_graph_writes_dot(self, capsys, tmp_path):
        target = tmp_path / "model.dot"
        code, _, _ = run(["graph", "baseline-43", "--out", str(target)], capsys)
        assert code == 0
        text = target.read_text(encoding="utf-8")
        assert text.startswith('digraph "baseline-43"')
        assert '"gap" -> "cls";' in text


class TestValidate:
    def test_preset_ok(self, capsys):
        code, out, _ = run(["validate", "baseline-53"], capsys)
        assert code == 0
        assert out.startswith("ok: baseline-53: 51 nodes, 292 edges")

    def test_document_file_ok(self, capsys, tmp_path):
        target = tmp_path / "doc.json"
        run(["export", "shortnet2-43", "--out", str(target)], capsys)
        code, out, _ = run(["validate", str(target)], capsys)
        assert code == 0
        assert out.startswith("ok: shortnet2-43")

    def test_tampered_document_fails(self, capsys, tmp_path, graphs):
        doc = sn.graph_document(graphs["baseline-43"])
        doc["edges"].append(["b9.l9", "gap"])
        target = tmp_path / "bad.json"
        target.write_text(json.dumps(doc), encoding="utf-8")
        code, _, err = run(["validate", str(target)], capsys)
        assert code == 1
        assert "b9.l9" in err

    def test_config_file_target(self, capsys, tmp_path):
        config = {
            "scheme": "short2",
            "blocks": [{"num_layers": 8, "growth_rate": 32}],
        }
        target = tmp_path / "custom.json"
        target.write_text(json.dumps(config), encoding="utf-8")
        code, out, _ = run(["validate", str(target)], capsys)
        assert code == 0
        assert out.startswith("ok: custom:")


class TestConfigFileModels:
    def test_describe_custom_config(self, capsys, tmp_path):
        config = {
            "name": "tiny",
            "scheme": "short1",
            "blocks": [
                {"num_layers": 8, "growth_rate": 16},
                {"num_layers": 8, "growth_rate": 16},
            ],
            "num_classes": 5,
        }
        target = tmp_path / "tiny.json"
        target.write_text(json.dumps(config), encoding="utf-8")
        code, out, _ = run(["describe", str(target), "--format", "csv"], capsys)
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert len(rows) == 1 + (1 + 8 + 1 + 8 + 1 + 2) + 1

    def test_bad_config_exits_2(self, capsys, tmp_path):
        target = tmp_path / "broken.json"
        target.write_text('{"scheme": "short9", "blocks": []}', encoding="utf-8")
        code, _, err = run(["describe", str(target)], capsys)
        assert code == 2
        assert "broken.json" in err

    def test_unparseable_config_exits_2(self, capsys, tmp_path):
        target = tmp_path / "mangled.json"
        target.write_text("{not json", encoding="utf-8")
        code, _, err = run(["compare", str(target)], capsys)
        assert code == 2
        assert "mangled.json" in err


class TestUsageErrors:
    def test_no_arguments(self, capsys):
        code, _, err = run([], capsys)
        assert code == 2
        assert "usage" in err

    def test_unknown_subcommand(self, capsys):
        code, _, err = run(["frobnicate"], capsys)
        assert code == 2
        assert "usage" in err

    def test_unknown_flag(self, capsys):
        code, _, err = run(["compare", "baseline-43", "--verbose"], capsys)
        assert code == 2
        assert "usage" in err


class TestFigures:
    def test_compare_figure(self, capsys, tmp_path):
        target = tmp_path / "chart.png"
        code, _, _ = run(
            ["compare", *SIX[:3], "--figure", str(target)], capsys
        )
        assert code == 0
        assert target.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_describe_figure(self, capsys, tmp_path):
        target = tmp_path / "profile.svg"
        code, _, _ = run(["describe", "shortnet2-43", "--figure", str(target)], capsys)
        assert code == 0
        assert b"<svg" in target.read_bytes()

    def test_figure_write_failure_exits_1(self, capsys, tmp_path):
        target = tmp_path / "absent" / "chart.png"
        code, _, err = run(["compare", "baseline-43", "--figure", str(target)], capsys)
        assert code == 1
        assert "chart.png" in err


@pytest.mark.skipif(shutil.which("shortnet") is None, reason="entry point not on PATH")
def test_console_entry_point():
    proc = subprocess.run(
        ["shortnet", "compare", "baseline-43", "--format", "csv"],
        capture_output=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith(b"Model,Flops (M)")
