"""qnetsim: a discrete-event quantum network simulation workbench.

Build dual-channel topologies from templated hardware, persist them as
portable JSON, and run random-request traffic simulations reporting per-node
wait times, reservations, and throughput.
"""

from .errors import QnetError
from .hardware import (
    BSMOutcome,
    BSMParams,
    BSMState,
    ChannelParams,
    DetectorParams,
    DetectorState,
    MemoryArray,
    MemoryParams,
    Photon,
    dark_count_events,
    propagation_delay,
    transmission_probability,
)
from .layout import LayoutParams, LayoutResult, compute_layout, layout_step
from .randreq import (
    RandomRequestSim,
    Request,
    SimulationConfig,
    SimulationReport,
    generate_requests,
    run_simulation,
)
from .simkernel import Event, RunStats, Timeline
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
    write_results,
)
from .templates import Template, TemplateStore, TemplateType, default_store
from .topology import EdgeSpec, MatrixKind, NodeSpec, NodeType, Topology

__version__ = "0.1.0"
