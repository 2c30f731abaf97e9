"""CLI behavior: exit codes, validation output, simulate/layout artifacts."""

import json

import pytest

from qnetsim.cli import main
from qnetsim.serialization import export_simulation, export_templates, export_topology

from workspace_fixtures import GOLDEN_DIR, WORKSPACES


@pytest.fixture
def ws3_files(tmp_path):
    topo, store, cfg = WORKSPACES["ws3"]()
    paths = {}
    for kind, text in (("topology", export_topology(topo)),
                       ("templates", export_templates(store)),
                       ("simulation", export_simulation(cfg))):
        p = tmp_path / f"{kind}.json"
        p.write_text(text, encoding="utf-8")
        paths[kind] = str(p)
    return paths


def test_validate_ok(ws3_files, capsys):
    code = main(["validate", ws3_files["topology"], ws3_files["templates"]])
    assert code == 0
    assert capsys.readouterr().err == ""


def test_validate_duplicate_names(tmp_path, ws3_files, capsys):
    bad = GOLDEN_DIR / "malformed" / "dup_names_topology.json"
    code = main(["validate", str(bad), ws3_files["templates"]])
    assert code == 1
    err = capsys.readouterr().err
    assert "nodes[1].name" in err
    assert "InvariantViolation" in err


def test_validate_cross_reference(tmp_path, capsys):
    topo, store, _ = WORKSPACES["ws3"]()
    topo_path = tmp_path / "topo.json"
    topo_path.write_text(export_topology(topo), encoding="utf-8")
    from qnetsim.templates import default_store
    bare = tmp_path / "bare_templates.json"
    bare.write_text(export_templates(default_store()), encoding="utf-8")
    code = main(["validate", str(topo_path), str(bare)])
    assert code == 1
    assert "DanglingReference" in capsys.readouterr().err


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate"])  # missing arguments
    assert exc.value.code == 2


def test_layout_writes_positions(ws3_files, tmp_path):
    out = tmp_path / "positions.json"
    code = main(["layout", ws3_files["topology"], "--seed", "3",
                 "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert len(doc["positions"]) == 7  # 4 routers + 3 BSM nodes
    code = main(["layout", ws3_files["topology"], "--seed", "3",
                 "--out", str(out) + ".b"])
    assert json.loads((tmp_path / "positions.json.b").read_text()) == doc


def test_simulate_writes_run_and_is_deterministic(ws3_files, tmp_path, capsys):
    root_a = tmp_path / "runs_a"
    root_b = tmp_path / "runs_b"
    for root in (root_a, root_b):
        code = main(["simulate", ws3_files["topology"], ws3_files["templates"],
                     ws3_files["simulation"], "--output-root", str(root)])
        assert code == 0
    out = capsys.readouterr().out
    assert "node" in out and "line4-bench" in out
    a = (root_a / "line4-bench" / "results.json").read_bytes()
    b = (root_b / "line4-bench" / "results.json").read_bytes()
    assert a == b


def test_simulate_seed_override_changes_report(ws3_files, tmp_path):
    root = tmp_path / "runs"
    main(["simulate", ws3_files["topology"], ws3_files["templates"],
          ws3_files["simulation"], "--output-root", str(root)])
    main(["simulate", ws3_files["topology"], ws3_files["templates"],
          ws3_files["simulation"], "--output-root", str(root), "--force",
          "--seed", "4242"])
    doc = json.loads((root / "line4-bench" / "results.json").read_text())
    assert doc["totals"]["seed"] == 4242  # effective seed echoed


def test_simulate_run_exists_without_force(ws3_files, tmp_path, capsys):
    root = tmp_path / "runs"
    assert main(["simulate", ws3_files["topology"], ws3_files["templates"],
                 ws3_files["simulation"], "--output-root", str(root)]) == 0
    code = main(["simulate", ws3_files["topology"], ws3_files["templates"],
                 ws3_files["simulation"], "--output-root", str(root)])
    assert code == 1
    assert "RunExists" in capsys.readouterr().err


def test_missing_file_is_domain_error(tmp_path, capsys):
    code = main(["validate", str(tmp_path / "nope.json"),
                 str(tmp_path / "nope2.json")])
    assert code == 1
