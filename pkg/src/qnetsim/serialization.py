"""Bit-stable import/export of the four file kinds: topology, template,
simulation, and results documents.

Canonical text: UTF-8 JSON, 2-space indent, fixed key order, LF endings, one
trailing newline, integral floats emitted as ints. Exports depend only on
model content, so re-exporting an unchanged model is byte-identical.
"""

from __future__ import annotations

import json
import math
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

from .errors import (
    DanglingReference,
    InvariantViolation,
    IoError,
    ParseError,
    QnetError,
    RunExists,
    SchemaError,
)
from .hardware import DetectorParams, MemoryParams
from .randreq import SimulationConfig, SimulationReport
from .templates import (
    BsmTemplateParams,
    RouterTemplateParams,
    Template,
    TemplateStore,
    TemplateType,
)
from .topology import EdgeSpec, NodeSpec, NodeType, Topology, _NAME_RE

FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# canonical writer and schema helpers


def _canon(value: Any) -> Any:
    """Integral floats become ints so exports never dither between 0 and 0.0."""
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, dict):
        return {k: _canon(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_canon(v) for v in value]
    return value


def _dumps(doc: dict) -> str:
    return json.dumps(_canon(doc), indent=2, ensure_ascii=False) + "\n"


def _parse(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", path=f"line {exc.lineno}") from exc


def _require_object(value: Any, path: str, keys: list[str]) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"expected an object at {path}", path=path)
    missing = [k for k in keys if k not in value]
    if missing:
        raise SchemaError(f"missing field {missing[0]!r}", path=f"{path}.{missing[0]}")
    extra = [k for k in value if k not in keys]
    if extra:
        raise SchemaError(f"unexpected field {extra[0]!r}", path=f"{path}.{extra[0]}")
    return value


def _require_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError("expected a string", path=path)
    return value


def _require_number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("expected a number", path=path)
    if not math.isfinite(value):
        raise SchemaError("expected a finite number", path=path)
    return value


def _require_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError("expected an integer", path=path)
    return value


def _require_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"expected an array at {path}", path=path)
    return value


def _check_format(doc: dict, path: str = "format") -> None:
    version = doc.get("format")
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported format version {version!r}", path=path)


# ---------------------------------------------------------------------------
# topology file


def export_topology(topo: Topology) -> str:
    doc = {
        "format": FORMAT_VERSION,
        "name": topo.name,
        "nodes": [{"name": n.name, "type": n.node_type.value, "template": n.template_id}
                  for n in topo.nodes],
        "edges": [{"a": e.a, "b": e.b, "distance_m": e.distance_m,
                   "attenuation_db_km": e.attenuation_db_km}
                  for e in topo.edges],
        "cc_latency_ps": topo.cc_latency,
        "qc_tdm": topo.qc_tdm,
    }
    return _dumps(doc)


def _validate_matrix(raw: list, key: str, n: int, integral: bool) -> list[list]:
    if len(raw) != n:
        raise SchemaError(f"matrix must be {n}x{n}", path=key)
    out = []
    for i, row in enumerate(raw):
        row = _require_list(row, f"{key}[{i}]")
        if len(row) != n:
            raise SchemaError(f"matrix must be {n}x{n}", path=key)
        vals = []
        for j, v in enumerate(row):
            if integral:
                v = _require_int(v, f"{key}[{i}][{j}]")
            else:
                v = float(_require_number(v, f"{key}[{i}][{j}]"))
            if v < 0:
                raise InvariantViolation("matrix entries must be non-negative",
                                         path=f"{key}[{i}][{j}]")
            vals.append(v)
        out.append(vals)
    for i in range(n):
        for j in range(i):
            if out[i][j] != out[j][i]:
                raise InvariantViolation("matrix must be symmetric",
                                         path=f"{key}[{i}][{j}]")
    return out


def import_topology(text: str) -> Topology:
    """Parse and validate a topology document; the result satisfies every
    graph invariant or the import fails with the offending document path."""
    raw = _parse(text)
    doc = _require_object(raw, "$", ["format", "name", "nodes", "edges",
                                     "cc_latency_ps", "qc_tdm"])
    _check_format(doc)
    topo = Topology(name=_require_str(doc["name"], "name"))

    seen = set()
    for i, rn in enumerate(_require_list(doc["nodes"], "nodes")):
        node = _require_object(rn, f"nodes[{i}]", ["name", "type", "template"])
        name = _require_str(node["name"], f"nodes[{i}].name")
        if not _NAME_RE.match(name):
            raise InvariantViolation(f"invalid node name {name!r}",
                                     path=f"nodes[{i}].name")
        if name in seen:
            raise InvariantViolation(f"duplicate node name {name!r}",
                                     path=f"nodes[{i}].name")
        seen.add(name)
        type_str = _require_str(node["type"], f"nodes[{i}].type")
        try:
            node_type = NodeType(type_str)
        except ValueError:
            raise SchemaError(f"unknown node type {type_str!r}",
                              path=f"nodes[{i}].type") from None
        template = _require_str(node["template"], f"nodes[{i}].template")
        topo.nodes.append(NodeSpec(name=name, node_type=node_type, template_id=template))

    pairs = set()
    for i, re_ in enumerate(_require_list(doc["edges"], "edges")):
        edge = _require_object(re_, f"edges[{i}]",
                               ["a", "b", "distance_m", "attenuation_db_km"])
        a = _require_str(edge["a"], f"edges[{i}].a")
        b = _require_str(edge["b"], f"edges[{i}].b")
        for key, end in (("a", a), ("b", b)):
            if end not in seen:
                raise InvariantViolation(f"edge endpoint {end!r} is not a node",
                                         path=f"edges[{i}].{key}")
        if a == b:
            raise InvariantViolation(f"self loop on {a!r}", path=f"edges[{i}]")
        pair = frozenset((a, b))
        if pair in pairs:
            raise InvariantViolation(f"duplicate edge between {a!r} and {b!r}",
                                     path=f"edges[{i}]")
        pairs.add(pair)
        distance = _require_number(edge["distance_m"], f"edges[{i}].distance_m")
        attenuation = _require_number(edge["attenuation_db_km"],
                                      f"edges[{i}].attenuation_db_km")
        if distance < 0 or attenuation < 0:
            raise InvariantViolation("distance and attenuation must be non-negative",
                                     path=f"edges[{i}]")
        topo.edges.append(EdgeSpec(a=a, b=b, distance_m=float(distance),
                                   attenuation_db_km=float(attenuation)))

    n = len(topo.nodes)
    topo.cc_latency = _validate_matrix(
        _require_list(doc["cc_latency_ps"], "cc_latency_ps"), "cc_latency_ps", n,
        integral=False)
    topo.qc_tdm = _validate_matrix(
        _require_list(doc["qc_tdm"], "qc_tdm"), "qc_tdm", n, integral=True)
    for i in range(n):
        if topo.cc_latency[i][i] != 0:
            raise InvariantViolation("classical latency diagonal must be zero",
                                     path=f"cc_latency_ps[{i}][{i}]")

    for i, node in enumerate(topo.nodes):
        if node.node_type is NodeType.BSM_NODE:
            pair = topo.implicit_pair(node.name)
            if pair is None or any(
                    topo.node(p).node_type is not NodeType.QUANTUM_ROUTER for p in pair):
                raise InvariantViolation(
                    f"BSM node {node.name!r} lacks its two implicit router arms",
                    path=f"nodes[{i}]")
    return topo


# ---------------------------------------------------------------------------
# template file

_PARAM_SCHEMAS: dict[TemplateType, list[str]] = {
    TemplateType.QUANTUM_ROUTER: ["memory_array_size", "memory_template"],
    TemplateType.QUANTUM_MEMORY: ["coherence_time_s", "frequency_hz", "efficiency",
                                  "fidelity"],
    TemplateType.DETECTOR: ["efficiency", "count_rate_hz", "dark_count_rate_hz",
                            "time_resolution_ps"],
    TemplateType.BSM: ["detector_template", "coincidence_window_ps"],
}


def _params_doc(template: Template) -> dict:
    p = template.params
    if template.template_type is TemplateType.QUANTUM_ROUTER:
        return {"memory_array_size": p.memory_array_size,
                "memory_template": p.memory_template}
    if template.template_type is TemplateType.QUANTUM_MEMORY:
        return {"coherence_time_s": p.coherence_time_s, "frequency_hz": p.frequency_hz,
                "efficiency": p.efficiency, "fidelity": p.fidelity}
    if template.template_type is TemplateType.DETECTOR:
        return {"efficiency": p.efficiency, "count_rate_hz": p.count_rate_hz,
                "dark_count_rate_hz": p.dark_count_rate_hz,
                "time_resolution_ps": p.time_resolution_ps}
    return {"detector_template": p.detector_template,
            "coincidence_window_ps": p.coincidence_window_ps}


def export_templates(store: TemplateStore) -> str:
    doc = {
        "format": FORMAT_VERSION,
        "templates": [{"id": t.id, "type": t.template_type.value,
                       "params": _params_doc(t)} for t in store.all()],
    }
    return _dumps(doc)


def _parse_template(raw: Any, path: str) -> Template:
    entry = _require_object(raw, path, ["id", "type", "params"])
    tid = _require_str(entry["id"], f"{path}.id")
    type_str = _require_str(entry["type"], f"{path}.type")
    try:
        ttype = TemplateType(type_str)
    except ValueError:
        raise SchemaError(f"unknown template type {type_str!r}",
                          path=f"{path}.type") from None
    fields = _PARAM_SCHEMAS[ttype]
    params_doc = _require_object(entry["params"], f"{path}.params", fields)
    ppath = f"{path}.params"
    try:
        if ttype is TemplateType.QUANTUM_ROUTER:
            params = RouterTemplateParams(
                memory_array_size=_require_int(params_doc["memory_array_size"],
                                               f"{ppath}.memory_array_size"),
                memory_template=_require_str(params_doc["memory_template"],
                                             f"{ppath}.memory_template"))
        elif ttype is TemplateType.QUANTUM_MEMORY:
            params = MemoryParams(
                coherence_time_s=_require_number(params_doc["coherence_time_s"],
                                                 f"{ppath}.coherence_time_s"),
                frequency_hz=_require_number(params_doc["frequency_hz"],
                                             f"{ppath}.frequency_hz"),
                efficiency=_require_number(params_doc["efficiency"],
                                           f"{ppath}.efficiency"),
                fidelity=_require_number(params_doc["fidelity"], f"{ppath}.fidelity"))
        elif ttype is TemplateType.DETECTOR:
            params = DetectorParams(
                efficiency=_require_number(params_doc["efficiency"],
                                           f"{ppath}.efficiency"),
                count_rate_hz=_require_number(params_doc["count_rate_hz"],
                                              f"{ppath}.count_rate_hz"),
                dark_count_rate_hz=_require_number(params_doc["dark_count_rate_hz"],
                                                   f"{ppath}.dark_count_rate_hz"),
                time_resolution_ps=_require_int(params_doc["time_resolution_ps"],
                                                f"{ppath}.time_resolution_ps"))
        else:
            params = BsmTemplateParams(
                detector_template=_require_str(params_doc["detector_template"],
                                               f"{ppath}.detector_template"),
                coincidence_window_ps=_require_int(params_doc["coincidence_window_ps"],
                                                   f"{ppath}.coincidence_window_ps"))
    except ValueError as exc:
        raise SchemaError(str(exc), path=ppath) from exc
    return Template(id=tid, template_type=ttype, params=params)


def parse_template_entry(raw: Any, path: str = "$") -> Template:
    """Validate one {id, type, params} object (the template-file entry shape)."""
    return _parse_template(raw, path)


def import_templates(text: str) -> TemplateStore:
    raw = _parse(text)
    doc = _require_object(raw, "$", ["format", "templates"])
    _check_format(doc)
    entries = _require_list(doc["templates"], "templates")
    templates = []
    index_of = {}
    for i, raw_entry in enumerate(entries):
        t = _parse_template(raw_entry, f"templates[{i}]")
        if t.id in index_of:
            raise SchemaError(f"duplicate template id {t.id!r}",
                              path=f"templates[{i}].id")
        index_of[t.id] = i
        templates.append(t)
    try:
        return TemplateStore(templates)
    except QnetError as exc:
        # re-point store-level errors (dangling/cyclic/shape) at their entry
        if exc.path in index_of:
            exc.path = f"templates[{index_of[exc.path]}]"
        raise


# ---------------------------------------------------------------------------
# simulation file

_SIMULATION_FIELDS = ["format", "name", "duration_s", "seed", "request_rate_hz",
                      "memories_per_request", "target_fidelity", "swap_success_prob"]


def export_simulation(cfg: SimulationConfig) -> str:
    doc = {
        "format": FORMAT_VERSION,
        "name": cfg.name,
        "duration_s": cfg.duration_s,
        "seed": cfg.seed,
        "request_rate_hz": cfg.request_rate_hz,
        "memories_per_request": cfg.memories_per_request,
        "target_fidelity": cfg.target_fidelity,
        "swap_success_prob": cfg.swap_success_prob,
    }
    for key, value in cfg.extras.items():
        doc[key] = value
    return _dumps(doc)


def import_simulation(text: str) -> SimulationConfig:
    """Validate the known fields; unknown fields ride along for re-export."""
    raw = _parse(text)
    if not isinstance(raw, dict):
        raise SchemaError("expected an object at $", path="$")
    missing = [k for k in _SIMULATION_FIELDS if k not in raw]
    if missing:
        raise SchemaError(f"missing field {missing[0]!r}", path=missing[0])
    _check_format(raw)
    name = _require_str(raw["name"], "name")
    duration = _require_number(raw["duration_s"], "duration_s")
    if duration <= 0:
        raise SchemaError("duration_s must be > 0", path="duration_s")
    seed = _require_int(raw["seed"], "seed")
    rate = _require_number(raw["request_rate_hz"], "request_rate_hz")
    memories = _require_int(raw["memories_per_request"], "memories_per_request")
    fidelity = _require_number(raw["target_fidelity"], "target_fidelity")
    swap = _require_number(raw["swap_success_prob"], "swap_success_prob")
    extras = {k: v for k, v in raw.items() if k not in _SIMULATION_FIELDS}
    try:
        return SimulationConfig(name=name, duration_s=duration, seed=seed,
                                request_rate_hz=rate, memories_per_request=memories,
                                target_fidelity=fidelity, swap_success_prob=swap,
                                extras=extras)
    except ValueError as exc:
        raise SchemaError(str(exc), path="$") from exc


# ---------------------------------------------------------------------------
# results file


def export_results(report: SimulationReport) -> str:
    doc = {
        "format": FORMAT_VERSION,
        "name": report.name,
        "duration_s": report.duration_s,
        "nodes": [{"name": n.name, "avg_wait_time_ps": n.avg_wait_time_ps,
                   "reservations": n.reservations,
                   "throughput_pairs_per_s": n.throughput_pairs_per_s}
                  for n in report.nodes],
        "totals": report.totals,
    }
    return _dumps(doc)


# ---------------------------------------------------------------------------
# workspace files and the run directory


@dataclass
class WorkspaceFiles:
    """The document texts a run is reproducible from."""

    topology_doc: str
    template_doc: str
    simulation_doc: Optional[str] = None


def check_workspace(topo: Topology, store: TemplateStore) -> None:
    """Cross-file referential integrity: every node's template must exist and
    match the node type."""
    for i, node in enumerate(topo.nodes):
        if node.template_id not in store:
            raise DanglingReference(
                f"node {node.name!r} references missing template "
                f"{node.template_id!r}", path=f"nodes[{i}].template")
        store.check_node_compatible(node.node_type, node.template_id)


def write_results(report: SimulationReport, output_root: Union[str, Path],
                  files: WorkspaceFiles, force: bool = False) -> Path:
    """Write `<output_root>/<run name>/` with results.json plus copies of the
    input documents. Refuses to overwrite an existing run unless forced."""
    root = Path(output_root)
    run_dir = root / report.name
    if run_dir.exists():
        if not force:
            raise RunExists(f"run directory {run_dir} already exists",
                            path=str(run_dir))
        shutil.rmtree(run_dir)
    try:
        run_dir.mkdir(parents=True)
        (run_dir / "results.json").write_text(export_results(report), encoding="utf-8")
        (run_dir / "topology.json").write_text(files.topology_doc, encoding="utf-8")
        (run_dir / "templates.json").write_text(files.template_doc, encoding="utf-8")
        if files.simulation_doc is not None:
            (run_dir / "simulation.json").write_text(files.simulation_doc,
                                                     encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write run directory {run_dir}: {exc}") from exc
    return run_dir
