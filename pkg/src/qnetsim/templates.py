"""Reusable parameter bundles: typed templates applied to any number of nodes.

A template store validates shape per type, keeps cross-references (router ->
memory, BSM -> detector) resolvable and acyclic, and resolves a node down to
the flattened hardware parameters the simulation instantiates.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .errors import (
    CyclicReference,
    DanglingReference,
    ShapeMismatch,
    TemplateInUse,
    TemplateTypeMismatch,
    UnknownTemplate,
)
from .hardware import BSMParams, DetectorParams, MemoryParams
from .topology import NodeSpec, NodeType, Topology


class TemplateType(str, Enum):
    QUANTUM_ROUTER = "QuantumRouter"
    QUANTUM_MEMORY = "QuantumMemory"
    DETECTOR = "Detector"
    BSM = "BSM"


#: node type -> template type it must be assigned
NODE_TEMPLATE_COMPAT = {
    NodeType.QUANTUM_ROUTER: TemplateType.QUANTUM_ROUTER,
    NodeType.BSM_NODE: TemplateType.BSM,
}


@dataclass(frozen=True)
class RouterTemplateParams:
    memory_array_size: int
    memory_template: str

    def __post_init__(self):
        if self.memory_array_size < 1:
            raise ValueError("memory_array_size must be >= 1")


@dataclass(frozen=True)
class BsmTemplateParams:
    detector_template: str
    coincidence_window_ps: int

    def __post_init__(self):
        if self.coincidence_window_ps < 1:
            raise ValueError("coincidence_window_ps must be >= 1")


TemplateParams = Union[RouterTemplateParams, MemoryParams, DetectorParams, BsmTemplateParams]

_PARAMS_CLASS = {
    TemplateType.QUANTUM_ROUTER: RouterTemplateParams,
    TemplateType.QUANTUM_MEMORY: MemoryParams,
    TemplateType.DETECTOR: DetectorParams,
    TemplateType.BSM: BsmTemplateParams,
}

#: (field, required template type of the reference target) per template type
_REFERENCES = {
    TemplateType.QUANTUM_ROUTER: [("memory_template", TemplateType.QUANTUM_MEMORY)],
    TemplateType.BSM: [("detector_template", TemplateType.DETECTOR)],
}


@dataclass(frozen=True)
class Template:
    id: str
    template_type: TemplateType
    params: TemplateParams

    def __post_init__(self):
        expected = _PARAMS_CLASS[self.template_type]
        if not isinstance(self.params, expected):
            raise ShapeMismatch(
                f"template {self.id!r} of type {self.template_type.value} requires "
                f"{expected.__name__} params, got {type(self.params).__name__}",
                path=self.id)

    def references(self) -> list[tuple[str, TemplateType]]:
        """(referenced template id, required type) pairs."""
        return [(getattr(self.params, field), required)
                for field, required in _REFERENCES.get(self.template_type, [])]


@dataclass(frozen=True)
class ResolvedRouter:
    memory_array_size: int
    memory: MemoryParams


@dataclass(frozen=True)
class ResolvedBsm:
    bsm: BSMParams


class TemplateStore:
    """Id-keyed template collection with referential integrity at every mutation."""

    def __init__(self, templates: Optional[list[Template]] = None):
        self._templates: dict[str, Template] = {}
        for t in templates or []:
            self._templates[t.id] = t
        self._validate_all()

    def __contains__(self, template_id: str) -> bool:
        return template_id in self._templates

    def __len__(self) -> int:
        return len(self._templates)

    def ids(self) -> list[str]:
        return list(self._templates)

    def all(self) -> list[Template]:
        return list(self._templates.values())

    def get(self, template_id: str) -> Template:
        t = self._templates.get(template_id)
        if t is None:
            raise UnknownTemplate(f"no template {template_id!r}", path=template_id)
        return t

    def of_type(self, template_type: TemplateType) -> list[Template]:
        return [t for t in self._templates.values() if t.template_type is template_type]

    # -- validation -----------------------------------------------------------

    def _check_cycles(self, templates: dict[str, Template]) -> None:
        # cycles are checked before reference types so a crafted store of
        # mutually referencing templates reports the cycle, not the type clash
        for start in templates:
            seen = [start]
            current = start
            while True:
                refs = [rid for rid, _ in templates[current].references()
                        if rid in templates]
                if not refs:
                    break
                current = refs[0]
                if current in seen:
                    raise CyclicReference(
                        "template reference cycle: " + " -> ".join(seen + [current]),
                        path=start)
                seen.append(current)

    def _check_references(self, templates: dict[str, Template]) -> None:
        for t in templates.values():
            for ref_id, required in t.references():
                target = templates.get(ref_id)
                if target is None:
                    raise DanglingReference(
                        f"template {t.id!r} references missing template {ref_id!r}",
                        path=t.id)
        self._check_cycles(templates)
        for t in templates.values():
            for ref_id, required in t.references():
                target = templates[ref_id]
                if target.template_type is not required:
                    raise ShapeMismatch(
                        f"template {t.id!r} requires a {required.value} reference, "
                        f"but {ref_id!r} is a {target.template_type.value}",
                        path=t.id)

    def _validate_all(self) -> None:
        self._check_references(self._templates)

    def check_node_compatible(self, node_type: NodeType, template_id: str) -> None:
        """A node may only use a template of the matching type."""
        t = self.get(template_id)
        required = NODE_TEMPLATE_COMPAT[NodeType(node_type)]
        if t.template_type is not required:
            raise TemplateTypeMismatch(
                f"{NodeType(node_type).value} nodes need a {required.value} template, "
                f"but {template_id!r} is a {t.template_type.value}",
                path=template_id)

    # -- mutations ------------------------------------------------------------

    def upsert(self, template: Template, topo: Optional[Topology] = None) -> None:
        """Insert or replace by id; a replacement re-validates every referencer."""
        candidate = dict(self._templates)
        candidate[template.id] = template
        self._check_references(candidate)
        if topo is not None:
            for node in topo.nodes:
                if node.template_id == template.id:
                    required = NODE_TEMPLATE_COMPAT[node.node_type]
                    if template.template_type is not required:
                        raise TemplateTypeMismatch(
                            f"node {node.name!r} needs a {required.value} template, "
                            f"replacement {template.id!r} is a "
                            f"{template.template_type.value}",
                            path=node.name)
        self._templates = candidate

    def delete(self, template_id: str, topo: Optional[Topology] = None) -> None:
        """Remove a template; refused while any node or template references it."""
        if template_id not in self._templates:
            raise UnknownTemplate(f"no template {template_id!r}", path=template_id)
        for t in self._templates.values():
            if t.id != template_id and \
                    template_id in [rid for rid, _ in t.references()]:
                raise TemplateInUse(
                    f"template {template_id!r} is referenced by template {t.id!r}",
                    path=t.id)
        if topo is not None:
            for node in topo.nodes:
                if node.template_id == template_id:
                    raise TemplateInUse(
                        f"template {template_id!r} is assigned to node {node.name!r}",
                        path=node.name)
        del self._templates[template_id]

    # -- resolution -----------------------------------------------------------

    def resolve(self, node: NodeSpec) -> Union[ResolvedRouter, ResolvedBsm]:
        """Flatten a node's template chain into hardware parameters.

        Returns a value copy: nodes sharing a template never alias state.
        """
        t = self.get_checked(node.template_id)
        if node.node_type is NodeType.QUANTUM_ROUTER:
            if t.template_type is not TemplateType.QUANTUM_ROUTER:
                raise TemplateTypeMismatch(
                    f"node {node.name!r} is assigned non-router template {t.id!r}",
                    path=node.name)
            memory = self.get_checked(t.params.memory_template)
            return ResolvedRouter(memory_array_size=t.params.memory_array_size,
                                  memory=copy.deepcopy(memory.params))
        if t.template_type is not TemplateType.BSM:
            raise TemplateTypeMismatch(
                f"node {node.name!r} is assigned non-BSM template {t.id!r}",
                path=node.name)
        detector = self.get_checked(t.params.detector_template)
        return ResolvedBsm(bsm=BSMParams(
            detector=copy.deepcopy(detector.params),
            coincidence_window_ps=t.params.coincidence_window_ps))

    def get_checked(self, template_id: str) -> Template:
        t = self._templates.get(template_id)
        if t is None:
            raise DanglingReference(f"no template {template_id!r}", path=template_id)
        return t

    def copy(self) -> "TemplateStore":
        return copy.deepcopy(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TemplateStore):
            return NotImplemented
        return self._templates == other._templates


def default_store() -> TemplateStore:
    """The template set every new workspace ships with, one default per type."""
    store = TemplateStore()
    store.upsert(Template("default_memory", TemplateType.QUANTUM_MEMORY, MemoryParams(
        coherence_time_s=1.3, frequency_hz=2e4, efficiency=0.75, fidelity=0.9)))
    store.upsert(Template("default_detector", TemplateType.DETECTOR, DetectorParams(
        efficiency=0.9, count_rate_hz=2.5e7, dark_count_rate_hz=100,
        time_resolution_ps=100)))
    store.upsert(Template("default_router", TemplateType.QUANTUM_ROUTER,
                          RouterTemplateParams(memory_array_size=10,
                                               memory_template="default_memory")))
    store.upsert(Template("default_bsm", TemplateType.BSM, BsmTemplateParams(
        detector_template="default_detector", coincidence_window_ps=200)))
    return store
