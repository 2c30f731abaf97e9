"""Serialization tests: golden bytes, round trips, error paths, run directories."""

import random

import pytest

from qnetsim.errors import (
    CyclicReference,
    DanglingReference,
    InvariantViolation,
    ParseError,
    RunExists,
    SchemaError,
    ShapeMismatch,
)
from qnetsim.randreq import SimulationConfig, run_simulation
from qnetsim.serialization import (
    WorkspaceFiles,
    check_workspace,
    export_results,
    export_simulation,
    export_templates,
    export_topology,
    import_simulation,
    import_templates,
    import_topology,
    write_results,
)
from qnetsim.templates import default_store
from qnetsim.topology import NodeType, Topology

from workspace_fixtures import GOLDEN_DIR, WORKSPACES


# -- golden files ---------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(WORKSPACES))
def test_golden_byte_equality(name):
    topo, store, cfg = WORKSPACES[name]()
    for kind, text in (("topology", export_topology(topo)),
                       ("templates", export_templates(store)),
                       ("simulation", export_simulation(cfg))):
        golden = (GOLDEN_DIR / f"{name}_{kind}.json").read_text(encoding="utf-8")
        assert text == golden, f"{name} {kind} drifted from golden bytes"


@pytest.mark.parametrize("name", sorted(WORKSPACES))
def test_golden_round_trip(name):
    topo, store, cfg = WORKSPACES[name]()
    assert import_topology(export_topology(topo)) == topo
    assert import_templates(export_templates(store)) == store
    assert import_simulation(export_simulation(cfg)) == cfg
    for kind, text in (("topology", export_topology(topo)),
                       ("templates", export_templates(store)),
                       ("simulation", export_simulation(cfg))):
        reexport = {"topology": lambda t: export_topology(import_topology(t)),
                    "templates": lambda t: export_templates(import_templates(t)),
                    "simulation": lambda t: export_simulation(import_simulation(t)),
                    }[kind](text)
        assert reexport == text


def test_empty_topology_document():
    text = export_topology(Topology(""))
    doc = __import__("json").loads(text)
    assert doc == {"format": 1, "name": "", "nodes": [], "edges": [],
                   "cc_latency_ps": [], "qc_tdm": []}


def test_export_counts_match_model():
    # oracle: serialized entry counts vs in-memory counts
    topo, store, _ = WORKSPACES["ws2"]()
    doc = __import__("json").loads(export_topology(topo))
    assert len(doc["nodes"]) == len(topo.nodes) == 3
    assert len(doc["edges"]) == len(topo.edges) == 2
    assert len(doc["cc_latency_ps"]) == 3
    assert all(len(row) == 3 for row in doc["cc_latency_ps"])


def test_simulation_extras_preserved():
    _, _, cfg = WORKSPACES["ws5"]()
    text = export_simulation(cfg)
    back = import_simulation(text)
    assert back.extras == {"notes": "shared benchmark", "tags": ["star", 2]}
    assert export_simulation(back) == text


def test_template_import_normalizes_key_order():
    # oracle: structural equality after parse
    store = default_store()
    text = export_templates(store)
    doc = __import__("json").loads(text)
    scrambled = __import__("json").dumps(
        {"templates": doc["templates"], "format": doc["format"]})
    imported = import_templates(scrambled)
    assert imported == store
    assert export_templates(imported) == text


# -- malformed fixtures, one per error class ------------------------------------------

MALFORMED = GOLDEN_DIR / "malformed"

TOPOLOGY_CASES = [
    ("bad_json_topology.json", ParseError, None),
    ("missing_field_topology.json", SchemaError, "$.edges"),
    ("extra_field_topology.json", SchemaError, "$.color"),
    ("bad_format_topology.json", SchemaError, "format"),
    ("dup_names_topology.json", InvariantViolation, "nodes[1].name"),
    ("bad_matrix_dim_topology.json", SchemaError, "cc_latency_ps"),
    ("asymmetric_matrix_topology.json", InvariantViolation, "cc_latency_ps[1][0]"),
    ("dangling_endpoint_topology.json", InvariantViolation, "edges[0].b"),
    ("selfloop_topology.json", InvariantViolation, "edges[0]"),
    ("dup_edge_topology.json", InvariantViolation, "edges[1]"),
    ("nonzero_diag_topology.json", InvariantViolation, "cc_latency_ps[0][0]"),
    ("bsm_no_arms_topology.json", InvariantViolation, "nodes[0]"),
    ("bad_node_type_topology.json", SchemaError, "nodes[0].type"),
    ("negative_matrix_topology.json", InvariantViolation, "cc_latency_ps[0][1]"),
    ("tdm_float_topology.json", SchemaError, "qc_tdm[0][1]"),
    ("invalid_name_topology.json", InvariantViolation, "nodes[0].name"),
]

TEMPLATE_CASES = [
    ("bad_json_templates.json", ParseError, None),
    ("missing_params_templates.json", SchemaError, "templates[0].params.fidelity"),
    ("dup_id_templates.json", SchemaError, "templates[1].id"),
    ("dangling_templates.json", DanglingReference, "templates[0]"),
    ("cyclic_templates.json", CyclicReference, "templates[0]"),
    ("shape_mismatch_templates.json", ShapeMismatch, "templates[1]"),
    ("bad_value_templates.json", SchemaError, "templates[0].params"),
    ("bad_type_templates.json", SchemaError, "templates[0].type"),
]

SIMULATION_CASES = [
    ("bad_json_simulation.json", ParseError, None),
    ("negative_duration_simulation.json", SchemaError, "duration_s"),
    ("missing_seed_simulation.json", SchemaError, "seed"),
    ("bad_format_simulation.json", SchemaError, "format"),
]


@pytest.mark.parametrize("filename,error,path", TOPOLOGY_CASES)
def test_malformed_topology(filename, error, path):
    text = (MALFORMED / filename).read_text(encoding="utf-8")
    with pytest.raises(error) as err:
        import_topology(text)
    if path is not None:
        assert err.value.path == path


@pytest.mark.parametrize("filename,error,path", TEMPLATE_CASES)
def test_malformed_templates(filename, error, path):
    text = (MALFORMED / filename).read_text(encoding="utf-8")
    with pytest.raises(error) as err:
        import_templates(text)
    if path is not None:
        assert err.value.path == path


@pytest.mark.parametrize("filename,error,path", SIMULATION_CASES)
def test_malformed_simulation(filename, error, path):
    text = (MALFORMED / filename).read_text(encoding="utf-8")
    with pytest.raises(error) as err:
        import_simulation(text)
    if path is not None:
        assert err.value.path == path


def test_cross_file_reference_check():
    topo, store, _ = WORKSPACES["ws2"]()
    check_workspace(topo, store)
    lonely = default_store()
    topo2 = Topology("t")
    topo2.add_node("r1", NodeType.QUANTUM_ROUTER, "default_router", lonely)
    topo2.nodes[0].template_id = "vanished"
    with pytest.raises(DanglingReference) as err:
        check_workspace(topo2, lonely)
    assert err.value.path == "nodes[0].template"


# -- randomized round trips ------------------------------------------------------------


def random_topology(rng, store):
    topo = Topology(f"rand{rng.randrange(1000)}")
    n = rng.randrange(1, 8)
    for i in range(n):
        topo.add_node(f"n{i}", NodeType.QUANTUM_ROUTER, "default_router", store)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.35:
                topo.add_edge(f"n{i}", f"n{j}",
                              round(rng.uniform(100, 50_000), 3),
                              round(rng.uniform(0, 0.5), 4), store)
    routers = topo.routers()
    from qnetsim.topology import MatrixKind
    for _ in range(rng.randrange(0, 4)):
        if len(routers) >= 2:
            a, b = rng.sample(routers, 2)
            topo.set_matrix_entry(MatrixKind.CC_LATENCY, a, b,
                                  rng.randrange(0, 10**7))
            topo.set_matrix_entry(MatrixKind.QC_TDM, a, b, rng.randrange(0, 64))
    return topo


def test_randomized_documents_round_trip():
    rng = random.Random(777)
    store = default_store()
    for _ in range(1000):
        topo = random_topology(rng, store)
        text = export_topology(topo)
        back = import_topology(text)
        assert back == topo
        assert export_topology(back) == text


def test_randomized_template_stores_round_trip():
    from qnetsim.hardware import DetectorParams, MemoryParams
    from qnetsim.templates import (BsmTemplateParams, RouterTemplateParams,
                                   Template, TemplateStore, TemplateType)
    rng = random.Random(779)
    for _ in range(200):
        store = default_store()
        for k in range(rng.randrange(0, 6)):
            kind = rng.choice(list(TemplateType))
            tid = f"extra{k}"
            if kind is TemplateType.QUANTUM_MEMORY:
                params = MemoryParams(round(rng.uniform(0.1, 5), 3),
                                      round(rng.uniform(1e3, 1e7), 1),
                                      round(rng.random(), 4),
                                      round(rng.random(), 4))
            elif kind is TemplateType.DETECTOR:
                params = DetectorParams(round(rng.random(), 4),
                                        round(rng.uniform(0, 1e9), 1),
                                        round(rng.uniform(0, 1e4), 1),
                                        rng.randrange(1, 1000))
            elif kind is TemplateType.QUANTUM_ROUTER:
                params = RouterTemplateParams(rng.randrange(1, 100),
                                              "default_memory")
            else:
                params = BsmTemplateParams("default_detector",
                                           rng.randrange(1000, 10**6))
            store.upsert(Template(tid, kind, params))
        text = export_templates(store)
        back = import_templates(text)
        assert back == store
        assert export_templates(back) == text


def test_randomized_simulation_round_trip():
    rng = random.Random(778)
    for i in range(200):
        cfg = SimulationConfig(
            name=f"run-{i}", duration_s=round(rng.uniform(0.1, 500), 3),
            seed=rng.randrange(10**9),
            request_rate_hz=round(rng.uniform(0, 50), 3),
            memories_per_request=rng.randrange(1, 6),
            target_fidelity=round(rng.random(), 4),
            swap_success_prob=round(rng.random(), 4),
            extras={"k": rng.randrange(100)} if rng.random() < 0.5 else {})
        text = export_simulation(cfg)
        back = import_simulation(text)
        assert back == cfg
        assert export_simulation(back) == text


# -- results directory --------------------------------------------------------------


def run_files(name="ws2"):
    topo, store, cfg = WORKSPACES[name]()
    report = run_simulation(topo, store, cfg)
    files = WorkspaceFiles(topology_doc=export_topology(topo),
                           template_doc=export_templates(store),
                           simulation_doc=export_simulation(cfg))
    return report, files


def test_write_results_creates_run_directory(tmp_path):
    report, files = run_files()
    run_dir = write_results(report, tmp_path, files)
    names = sorted(p.name for p in run_dir.iterdir())
    assert names == ["results.json", "simulation.json", "templates.json",
                     "topology.json"]
    assert (run_dir / "topology.json").read_text(encoding="utf-8") == files.topology_doc


def test_write_results_refuses_overwrite(tmp_path):
    report, files = run_files()
    write_results(report, tmp_path, files)
    with pytest.raises(RunExists):
        write_results(report, tmp_path, files)


def test_write_results_force_overwrites(tmp_path):
    report, files = run_files()
    run_dir = write_results(report, tmp_path, files)
    (run_dir / "stale.txt").write_text("old", encoding="utf-8")
    run_dir = write_results(report, tmp_path, files, force=True)
    assert not (run_dir / "stale.txt").exists()
    assert (run_dir / "results.json").read_text(encoding="utf-8") == \
        export_results(report)


def test_results_document_shape():
    report, _ = run_files()
    doc = __import__("json").loads(export_results(report))
    assert doc["format"] == 1
    assert {"requests_generated", "requests_granted", "requests_completed",
            "requests_rejected", "pairs_completed", "avg_wait_time_ps",
            "seed"} == set(doc["totals"])
    assert [set(n) for n in doc["nodes"]] == [
        {"name", "avg_wait_time_ps", "reservations", "throughput_pairs_per_s"}] * 2
