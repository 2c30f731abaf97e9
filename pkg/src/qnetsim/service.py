"""HTTP backend: one workspace (topology + templates) behind a JSON API, with
background simulation runs, polled progress, and static serving of the web UI.

Domain errors map to 400 with {"error": code, "path": ...}; unknown resources
to 404; run-name and version conflicts to 409. Every mutating endpoint is
atomic, serialized through the workspace lock, and bumps the version counter
used for optimistic concurrency (X-Workspace-Version header).
"""

from __future__ import annotations

import copy
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import QnetError, RunExists, SchemaError, UnknownElement
from .layout import LayoutParams, compute_layout
from .randreq import RandomRequestSim, SimulationConfig
from .serialization import (
    WorkspaceFiles,
    check_workspace,
    export_results,
    export_simulation,
    export_templates,
    export_topology,
    import_simulation,
    import_templates,
    import_topology,
    parse_template_entry,
    write_results,
)
from .templates import default_store
from .topology import MatrixKind, NodeType, Topology

_STATUS = {
    "UnknownElement": 404,
    "UnknownTemplate": 404,
    "RunExists": 409,
    "VersionConflict": 409,
}


class VersionConflict(QnetError):
    code = "VersionConflict"


class RunRecord:
    def __init__(self, name: str, sim: RandomRequestSim):
        self.name = name
        self.sim = sim
        self.status = "Running"
        self.report = None
        self.error: Optional[str] = None

    @property
    def progress(self) -> float:
        if self.status == "Done":
            return 1.0
        return self.sim.timeline.progress


class Workspace:
    """Single mutable workspace plus the registry of simulation runs."""

    def __init__(self, output_root: str, max_runs: int):
        self.topology = Topology("workspace")
        self.store = default_store()
        self.simulation_cfg: Optional[SimulationConfig] = None
        self.version = 0
        self.lock = threading.RLock()
        self.runs: dict[str, RunRecord] = {}
        self.output_root = Path(output_root)
        self.executor = ThreadPoolExecutor(max_workers=max_runs)

    def check_version(self, request: Request) -> None:
        header = request.headers.get("x-workspace-version")
        if header is None:
            return
        try:
            seen = int(header)
        except ValueError:
            raise SchemaError("X-Workspace-Version must be an integer",
                              path="X-Workspace-Version") from None
        if seen != self.version:
            raise VersionConflict(
                f"workspace is at version {self.version}, request saw {seen}")

    def launch(self, cfg: SimulationConfig) -> RunRecord:
        if cfg.name in self.runs:
            raise RunExists(f"run {cfg.name!r} already exists", path=cfg.name)
        if (self.output_root / cfg.name).exists():
            raise RunExists(f"run directory for {cfg.name!r} already exists",
                            path=cfg.name)
        topo = copy.deepcopy(self.topology)
        store = self.store.copy()
        check_workspace(topo, store)
        sim = RandomRequestSim(topo, store, cfg)  # raises InsufficientRouters early
        record = RunRecord(cfg.name, sim)
        self.runs[cfg.name] = record
        files = WorkspaceFiles(topology_doc=export_topology(topo),
                               template_doc=export_templates(store),
                               simulation_doc=export_simulation(cfg))

        def work():
            try:
                report = sim.run()
                write_results(report, self.output_root, files)
                record.report = report
                record.status = "Done"
            except Exception as exc:  # surfaced through the progress endpoint
                record.error = f"{type(exc).__name__}: {exc}"
                record.status = "Failed"

        self.executor.submit(work)
        return record


def _require(payload: dict, key: str, kind=str):
    if key not in payload:
        raise SchemaError(f"missing field {key!r}", path=key)
    value = payload[key]
    if kind is str and not isinstance(value, str):
        raise SchemaError("expected a string", path=key)
    if kind is float and (isinstance(value, bool) or
                          not isinstance(value, (int, float))):
        raise SchemaError("expected a number", path=key)
    return value


def create_app(output_root: str = "runs", max_runs: int = 2,
               ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="qnetsim", version="0.1.0")
    ws = Workspace(output_root=output_root, max_runs=max_runs)
    app.state.workspace = ws

    @app.exception_handler(QnetError)
    async def domain_error(request: Request, exc: QnetError):
        status = _STATUS.get(exc.code, 400)
        return JSONResponse(status_code=status,
                            content={"error": exc.code, "message": str(exc),
                                     "path": exc.path})

    def doc_response(text: str) -> Response:
        return Response(content=text, media_type="application/json",
                        headers={"X-Workspace-Version": str(ws.version)})

    # -- topology ------------------------------------------------------------

    @app.get("/api/topology")
    def get_topology():
        with ws.lock:
            return doc_response(export_topology(ws.topology))

    @app.put("/api/topology")
    def put_topology(request: Request, payload: dict = Body(...)):
        with ws.lock:
            ws.check_version(request)
            topo = import_topology(json.dumps(payload))
            check_workspace(topo, ws.store)
            ws.topology = topo
            ws.version += 1
            return doc_response(export_topology(ws.topology))

    @app.post("/api/nodes", status_code=201)
    def post_node(request: Request, payload: dict = Body(...)):
        with ws.lock:
            ws.check_version(request)
            name = _require(payload, "name")
            type_str = _require(payload, "type")
            template = _require(payload, "template")
            try:
                node_type = NodeType(type_str)
            except ValueError:
                raise SchemaError(f"unknown node type {type_str!r}",
                                  path="type") from None
            ws.topology.add_node(name, node_type, template, ws.store)
            ws.version += 1
            return {"name": name, "version": ws.version}

    @app.post("/api/edges", status_code=201)
    def post_edge(request: Request, payload: dict = Body(...)):
        with ws.lock:
            ws.check_version(request)
            a = _require(payload, "a")
            b = _require(payload, "b")
            distance = _require(payload, "distance_m", float)
            attenuation = _require(payload, "attenuation_db_km", float)
            ws.topology.add_edge(a, b, float(distance), float(attenuation), ws.store)
            ws.version += 1
            return {"a": a, "b": b, "version": ws.version}

    @app.patch("/api/nodes/{name}")
    def patch_node(name: str, request: Request, payload: dict = Body(...)):
        with ws.lock:
            ws.check_version(request)
            node_type = None
            if "type" in payload:
                try:
                    node_type = NodeType(payload["type"])
                except ValueError:
                    raise SchemaError(f"unknown node type {payload['type']!r}",
                                      path="type") from None
            ws.topology.edit_node(name, ws.store, node_type=node_type,
                                  template_id=payload.get("template"))
            ws.version += 1
            node = ws.topology.node(name)
            return {"name": node.name, "type": node.node_type.value,
                    "template": node.template_id, "version": ws.version}

    @app.delete("/api/elements/{element_id}")
    def delete_element(element_id: str, request: Request):
        with ws.lock:
            ws.check_version(request)
            ws.topology.remove_element(element_id)
            ws.version += 1
            return {"removed": element_id, "version": ws.version}

    @app.get("/api/legend")
    def get_legend():
        with ws.lock:
            return {"types": sorted(t.value for t in ws.topology.legend())}

    # -- matrices --------------------------------------------------------------

    @app.get("/api/matrices/{kind}")
    def get_matrix(kind: str):
        with ws.lock:
            matrix_kind = _matrix_kind(kind)
            matrix = (ws.topology.cc_latency if matrix_kind is MatrixKind.CC_LATENCY
                      else ws.topology.qc_tdm)
            return {"names": [n.name for n in ws.topology.nodes],
                    "matrix": matrix}

    @app.put("/api/matrices/{kind}")
    def put_matrix(kind: str, request: Request, payload: dict = Body(...)):
        with ws.lock:
            ws.check_version(request)
            matrix_kind = _matrix_kind(kind)
            i = _require(payload, "i")
            j = _require(payload, "j")
            value = _require(payload, "value", float)
            ws.topology.set_matrix_entry(matrix_kind, i, j, value)
            ws.version += 1
            return {"i": i, "j": j, "value": value, "version": ws.version}

    def _matrix_kind(kind: str) -> MatrixKind:
        try:
            return MatrixKind(kind)
        except ValueError:
            raise UnknownElement(f"no matrix {kind!r}", path=kind) from None

    # -- templates ----------------------------------------------------------------

    @app.get("/api/templates")
    def get_templates():
        with ws.lock:
            return doc_response(export_templates(ws.store))

    @app.put("/api/templates/{template_id}")
    def put_template(template_id: str, request: Request, payload: dict = Body(...)):
        with ws.lock:
            ws.check_version(request)
            entry = {"id": template_id, "type": payload.get("type"),
                     "params": payload.get("params")}
            template = parse_template_entry(entry)
            ws.store.upsert(template, ws.topology)
            ws.version += 1
            return {"id": template_id, "version": ws.version}

    @app.delete("/api/templates/{template_id}")
    def delete_template(template_id: str, request: Request):
        with ws.lock:
            ws.check_version(request)
            ws.store.delete(template_id, ws.topology)
            ws.version += 1
            return {"removed": template_id, "version": ws.version}

    # -- layout ----------------------------------------------------------------------

    @app.post("/api/layout")
    def post_layout(payload: dict = Body(default={})):
        with ws.lock:
            seed = payload.get("seed", 0)
            if not isinstance(seed, int) or isinstance(seed, bool):
                raise SchemaError("seed must be an integer", path="seed")
            raw_params = payload.get("params", {})
            try:
                params = LayoutParams(**raw_params)
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"bad layout params: {exc}", path="params") from None
            result = compute_layout(ws.topology, params, seed=seed)
            return {"positions": {name: [x, y]
                                  for name, (x, y) in result.positions.items()},
                    "iterations_used": result.iterations_used,
                    "converged": result.converged}

    # -- simulations -------------------------------------------------------------------

    @app.post("/api/simulations", status_code=202)
    def post_simulation(payload: dict = Body(...)):
        with ws.lock:
            doc = dict(payload)
            doc.setdefault("format", 1)
            cfg = import_simulation(json.dumps(doc))
            record = ws.launch(cfg)
            ws.simulation_cfg = cfg
            return {"name": record.name, "status": record.status}

    def _run(name: str) -> RunRecord:
        record = ws.runs.get(name)
        if record is None:
            raise UnknownElement(f"no run named {name!r}", path=name)
        return record

    @app.get("/api/simulations/{name}/progress")
    def get_progress(name: str):
        record = _run(name)
        return {"name": name, "status": record.status,
                "progress": record.progress, "error": record.error}

    @app.get("/api/simulations/{name}/results")
    def get_results(name: str):
        record = _run(name)
        if record.status != "Done":
            raise UnknownElement(
                f"run {name!r} has no results yet (status {record.status})",
                path=name)
        return Response(content=export_results(record.report),
                        media_type="application/json")

    # -- import/export ------------------------------------------------------------------

    @app.get("/api/export/{kind}")
    def export(kind: str):
        with ws.lock:
            if kind == "topology":
                return doc_response(export_topology(ws.topology))
            if kind == "templates":
                return doc_response(export_templates(ws.store))
            if kind == "simulation":
                if ws.simulation_cfg is None:
                    raise UnknownElement("no simulation config loaded", path=kind)
                return doc_response(export_simulation(ws.simulation_cfg))
            raise UnknownElement(f"no exportable document {kind!r}", path=kind)

    @app.post("/api/import/{kind}")
    async def import_(kind: str, request: Request):
        body = (await request.body()).decode("utf-8")
        with ws.lock:
            ws.check_version(request)
            if kind == "topology":
                topo = import_topology(body)
                check_workspace(topo, ws.store)
                ws.topology = topo
            elif kind == "templates":
                store = import_templates(body)
                check_workspace(ws.topology, store)
                ws.store = store
            elif kind == "simulation":
                ws.simulation_cfg = import_simulation(body)
            else:
                raise UnknownElement(f"no importable document {kind!r}", path=kind)
            ws.version += 1
            return {"imported": kind, "version": ws.version}

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
