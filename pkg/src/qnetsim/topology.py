"""Network graph document: named nodes, dual-channel edges, implicit BSM nodes,
the legend, and the two adjacency matrices (classical latency, quantum TDM).

The topology is a value-semantics document: one writer at a time, and every
mutating operation either applies whole or leaves the document unchanged.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from . import hardware
from .errors import (
    DiagonalWrite,
    DuplicateEdge,
    DuplicateName,
    InvalidName,
    NegativeValue,
    NonIntegralValue,
    ReservedType,
    SelfLoop,
    UnknownElement,
    UnknownEndpoint,
)

_NAME_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.\-]*$")

#: template id assigned to implicitly created BSM nodes
DEFAULT_BSM_TEMPLATE = "default_bsm"

#: separator used in edge element ids ("a--b")
EDGE_ID_SEP = "--"


class NodeType(str, Enum):
    QUANTUM_ROUTER = "QuantumRouter"
    BSM_NODE = "BSMNode"


class MatrixKind(str, Enum):
    CC_LATENCY = "cc_latency"
    QC_TDM = "qc_tdm"


@dataclass
class NodeSpec:
    name: str
    node_type: NodeType
    template_id: str


@dataclass
class EdgeSpec:
    a: str
    b: str
    distance_m: float
    attenuation_db_km: float

    @property
    def pair(self) -> frozenset[str]:
        return frozenset((self.a, self.b))

    @property
    def element_id(self) -> str:
        return f"{self.a}{EDGE_ID_SEP}{self.b}"


def bsm_name(a: str, b: str) -> str:
    """Deterministic name for the BSM implicitly inserted between two routers."""
    lo, hi = sorted((a, b))
    return f"bsm.{lo}.{hi}"


class Topology:
    """Undirected simple graph of named nodes plus per-pair latency/TDM matrices.

    Matrices are indexed by node insertion order and grow/shrink with the node
    list; both stay symmetric, and the latency diagonal stays zero.
    """

    def __init__(self, name: str = ""):
        self.name = name
        self.nodes: list[NodeSpec] = []
        self.edges: list[EdgeSpec] = []
        self.cc_latency: list[list[float]] = []  # picoseconds; 0 = use L/c
        self.qc_tdm: list[list[int]] = []  # frame counts; 0 = multiplexing off

    # -- lookups --------------------------------------------------------------

    def node_index(self, name: str) -> Optional[int]:
        for i, n in enumerate(self.nodes):
            if n.name == name:
                return i
        return None

    def node(self, name: str) -> NodeSpec:
        i = self.node_index(name)
        if i is None:
            raise UnknownElement(f"no node named {name!r}", path=name)
        return self.nodes[i]

    def has_edge(self, a: str, b: str) -> bool:
        pair = frozenset((a, b))
        return any(e.pair == pair for e in self.edges)

    def edges_of(self, name: str) -> list[EdgeSpec]:
        return [e for e in self.edges if name in (e.a, e.b)]

    def neighbors(self, name: str) -> list[str]:
        out = []
        for e in self.edges:
            if e.a == name:
                out.append(e.b)
            elif e.b == name:
                out.append(e.a)
        return out

    def routers(self) -> list[str]:
        return [n.name for n in self.nodes if n.node_type is NodeType.QUANTUM_ROUTER]

    def implicit_pair(self, bsm: str) -> Optional[tuple[str, str]]:
        """The router pair a BSM node was spawned for.

        Derived from edge order: the endpoints of the BSM's first two incident
        edges. Survives serialization because edge order is round-tripped.
        """
        node = self.node(bsm)
        if node.node_type is not NodeType.BSM_NODE:
            return None
        arms = self.edges_of(bsm)
        if len(arms) < 2:
            return None
        ends = []
        for e in arms[:2]:
            ends.append(e.b if e.a == bsm else e.a)
        if ends[0] == ends[1]:
            return None
        return (ends[0], ends[1])

    def connected_router_pairs(self) -> list[tuple[str, str]]:
        """User-level router-router connections, one per implicit BSM."""
        pairs = []
        for n in self.nodes:
            if n.node_type is NodeType.BSM_NODE:
                pair = self.implicit_pair(n.name)
                if pair is not None:
                    pairs.append(pair)
        return pairs

    def legend(self) -> set[NodeType]:
        """Exactly the node types present in the current graph."""
        return {n.node_type for n in self.nodes}

    # -- mutations ------------------------------------------------------------

    def _grow_matrices(self) -> None:
        for row in self.cc_latency:
            row.append(0.0)
        for row in self.qc_tdm:
            row.append(0)
        n = len(self.nodes)
        self.cc_latency.append([0.0] * n)
        self.qc_tdm.append([0] * n)

    def _shrink_matrices(self, index: int) -> None:
        del self.cc_latency[index]
        del self.qc_tdm[index]
        for row in self.cc_latency:
            del row[index]
        for row in self.qc_tdm:
            del row[index]

    def _append_node(self, spec: NodeSpec) -> None:
        self.nodes.append(spec)
        self._grow_matrices()

    def add_node(self, name: str, node_type: NodeType, template_id: str,
                 store) -> None:
        """Add a user-facing node. BSM nodes only ever appear via add_edge."""
        node_type = NodeType(node_type)
        if node_type is NodeType.BSM_NODE:
            raise ReservedType("BSM nodes are created implicitly by connecting two routers")
        if not _NAME_RE.match(name or ""):
            raise InvalidName(f"invalid node name {name!r}", path="name")
        if self.node_index(name) is not None:
            raise DuplicateName(f"node {name!r} already exists", path="name")
        store.check_node_compatible(node_type, template_id)
        self._append_node(NodeSpec(name=name, node_type=node_type, template_id=template_id))

    def add_edge(self, a: str, b: str, distance_m: float, attenuation_db_km: float,
                 store, bsm_template: str = DEFAULT_BSM_TEMPLATE) -> None:
        """Connect two nodes with a dual-channel edge.

        A router-router connection inserts a BSM node at the midpoint: two
        half-edges of distance/2 each carry the parent edge's attenuation.
        """
        for name in (a, b):
            if self.node_index(name) is None:
                raise UnknownEndpoint(f"no node named {name!r}", path=name)
        if a == b:
            raise SelfLoop(f"self loop on {a!r}")
        if self.has_edge(a, b):
            raise DuplicateEdge(f"edge between {a!r} and {b!r} already exists")
        if distance_m < 0 or attenuation_db_km < 0:
            raise NegativeValue("distance and attenuation must be non-negative")
        both_routers = (self.node(a).node_type is NodeType.QUANTUM_ROUTER
                        and self.node(b).node_type is NodeType.QUANTUM_ROUTER)
        if not both_routers:
            self.edges.append(EdgeSpec(a, b, distance_m, attenuation_db_km))
            return
        pair = tuple(sorted((a, b)))
        if pair in [tuple(sorted(p)) for p in self.connected_router_pairs()]:
            raise DuplicateEdge(f"routers {a!r} and {b!r} are already connected")
        mid = bsm_name(a, b)
        if self.node_index(mid) is not None:
            raise DuplicateName(f"implicit BSM name {mid!r} collides with an existing node",
                                path=mid)
        store.check_node_compatible(NodeType.BSM_NODE, bsm_template)
        self._append_node(NodeSpec(name=mid, node_type=NodeType.BSM_NODE,
                                   template_id=bsm_template))
        half = distance_m / 2
        self.edges.append(EdgeSpec(a, mid, half, attenuation_db_km))
        self.edges.append(EdgeSpec(mid, b, half, attenuation_db_km))

    def _remove_edge_obj(self, edge: EdgeSpec) -> None:
        self.edges.remove(edge)

    def _remove_node_cascade(self, name: str) -> None:
        node = self.node(name)
        # routers drag down the BSMs their connections spawned
        if node.node_type is NodeType.QUANTUM_ROUTER:
            doomed_bsms = [n.name for n in self.nodes
                           if n.node_type is NodeType.BSM_NODE
                           and name in (self.implicit_pair(n.name) or ())]
            for bsm in doomed_bsms:
                self._remove_node_cascade(bsm)
        self.edges = [e for e in self.edges if name not in (e.a, e.b)]
        index = self.node_index(name)
        del self.nodes[index]
        self._shrink_matrices(index)

    def _parse_edge_id(self, element_id: str) -> Optional[tuple[str, str]]:
        parts = element_id.split(EDGE_ID_SEP)
        for cut in range(1, len(parts)):
            a = EDGE_ID_SEP.join(parts[:cut])
            b = EDGE_ID_SEP.join(parts[cut:])
            if self.node_index(a) is not None and self.node_index(b) is not None:
                return (a, b)
        return None

    def remove_element(self, element_id: Union[str, tuple[str, str]]) -> None:
        """Remove a node or an edge, cascading over implicit BSM structure.

        Edges are addressed as "a--b" (either endpoint order). Removing a BSM
        half-edge, or naming the router-router connection itself, removes the
        BSM node and both half-edges.
        """
        if isinstance(element_id, tuple):
            pair: Optional[tuple[str, str]] = element_id
            if self.node_index(pair[0]) is None or self.node_index(pair[1]) is None:
                raise UnknownElement(f"no element {element_id!r}", path=str(element_id))
        elif self.node_index(element_id) is not None:
            self._remove_node_cascade(element_id)
            return
        else:
            pair = self._parse_edge_id(element_id)
            if pair is None:
                raise UnknownElement(f"no element {element_id!r}", path=element_id)
        a, b = pair
        edge = next((e for e in self.edges if e.pair == frozenset((a, b))), None)
        if edge is not None:
            for end in (edge.a, edge.b):
                node = self.node(end)
                if node.node_type is NodeType.BSM_NODE and \
                        edge in self.edges_of(end)[:2]:
                    self._remove_node_cascade(end)
                    return
            self._remove_edge_obj(edge)
            return
        # no stored edge: maybe the user-level router-router connection
        for n in self.nodes:
            if n.node_type is NodeType.BSM_NODE and \
                    self.implicit_pair(n.name) is not None and \
                    frozenset(self.implicit_pair(n.name)) == frozenset((a, b)):
                self._remove_node_cascade(n.name)
                return
        raise UnknownElement(f"no element {a!r}--{b!r}",
                             path=f"{a}{EDGE_ID_SEP}{b}")

    def edit_node(self, name: str, store, node_type: Optional[NodeType] = None,
                  template_id: Optional[str] = None) -> None:
        """Patch a node's type and/or template; the patch applies whole or not at all."""
        node = self.node(name)
        new_type = NodeType(node_type) if node_type is not None else node.node_type
        new_template = template_id if template_id is not None else node.template_id
        store.check_node_compatible(new_type, new_template)
        if new_type is NodeType.BSM_NODE and node.node_type is not NodeType.BSM_NODE:
            raise ReservedType("a node cannot be turned into a BSM node")
        node.node_type = new_type
        node.template_id = new_template

    def set_matrix_entry(self, matrix: MatrixKind, i: str, j: str, value) -> None:
        """Symmetric write of one matrix entry (and its mirror)."""
        matrix = MatrixKind(matrix)
        ii = self.node_index(i)
        jj = self.node_index(j)
        if ii is None or jj is None:
            missing = i if ii is None else j
            raise UnknownElement(f"no node named {missing!r}", path=missing)
        if value < 0:
            raise NegativeValue(f"matrix entries must be non-negative, got {value}")
        if matrix is MatrixKind.CC_LATENCY:
            if ii == jj:
                raise DiagonalWrite("classical latency diagonal is fixed at zero")
            self.cc_latency[ii][jj] = float(value)
            self.cc_latency[jj][ii] = float(value)
        else:
            if value != int(value):
                raise NonIntegralValue(f"TDM frame counts must be integers, got {value}")
            self.qc_tdm[ii][jj] = int(value)
            self.qc_tdm[jj][ii] = int(value)

    # -- derived quantities ----------------------------------------------------

    def classical_delay_ps(self, a: str, b: str,
                           light_speed_m_s: float = hardware.FIBER_LIGHT_SPEED) -> int:
        """Classical-channel delay between adjacent nodes.

        A nonzero latency-matrix entry overrides the L/c propagation delay.
        """
        edge = next((e for e in self.edges if e.pair == frozenset((a, b))), None)
        if edge is None:
            raise UnknownElement(f"no edge between {a!r} and {b!r}")
        override = self.cc_latency[self.node_index(a)][self.node_index(b)]
        if override > 0:
            return int(override)
        return hardware.propagation_delay(hardware.ChannelParams(
            distance_m=edge.distance_m, attenuation_db_km=edge.attenuation_db_km,
            light_speed_m_s=light_speed_m_s))

    def copy(self) -> "Topology":
        return copy.deepcopy(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Topology):
            return NotImplemented
        return (self.name == other.name and self.nodes == other.nodes
                and self.edges == other.edges and self.cc_latency == other.cc_latency
                and self.qc_tdm == other.qc_tdm)


# functional wrappers: each returns a new document, leaving the input untouched


def add_node(topo: Topology, name: str, node_type: NodeType, template_id: str,
             store) -> Topology:
    out = topo.copy()
    out.add_node(name, node_type, template_id, store)
    return out


def add_edge(topo: Topology, a: str, b: str, distance_m: float,
             attenuation_db_km: float, store,
             bsm_template: str = DEFAULT_BSM_TEMPLATE) -> Topology:
    out = topo.copy()
    out.add_edge(a, b, distance_m, attenuation_db_km, store, bsm_template)
    return out


def remove_element(topo: Topology, element_id) -> Topology:
    out = topo.copy()
    out.remove_element(element_id)
    return out
