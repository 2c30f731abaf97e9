"""Random-request traffic application: Poisson entanglement requests between
random router pairs, path-wide memory reservations, heralded link generation
through midpoint BSMs, entanglement swapping, and per-node metrics.

Protocol sketch per granted request (one pipeline per demanded pair):
every path hop repeatedly attempts heralded generation (both end memories
emit, surviving photons meet at the hop's BSM); entangled hops are fused by
swaps at intermediate routers, innermost-leftmost first; a span covering the
whole path at or above the target fidelity counts as one delivered pair.
"""

from __future__ import annotations

import random
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import (
    CoincidenceWindowViolation,
    InsufficientRouters,
    TemplateResolutionError,
)
from .hardware import (
    BSMOutcome,
    BSMState,
    ChannelParams,
    MemoryArray,
    MemoryParams,
    Photon,
    PS_PER_SECOND,
    propagation_delay,
    transmission_probability,
)
from .simkernel import Event, Timeline
from .templates import ResolvedBsm, ResolvedRouter, TemplateStore
from .topology import NodeType, Topology

_RUN_NAME_RE = re.compile(r"^[A-Za-z0-9._\-]+$")


@dataclass
class SimulationConfig:
    name: str
    duration_s: float
    seed: int
    request_rate_hz: float
    memories_per_request: int
    target_fidelity: float
    swap_success_prob: float
    #: unrecognized document fields, preserved verbatim on re-export
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.name or not _RUN_NAME_RE.match(self.name) or \
                self.name in (".", ".."):
            raise ValueError(f"run name {self.name!r} is not filesystem-safe")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be > 0")
        if self.request_rate_hz < 0:
            raise ValueError("request_rate_hz must be >= 0")
        if self.memories_per_request < 1:
            raise ValueError("memories_per_request must be >= 1")
        for name in ("target_fidelity", "swap_success_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be within [0, 1]")

    @property
    def duration_ps(self) -> int:
        return int(round(self.duration_s * PS_PER_SECOND))


@dataclass
class Request:
    id: int
    arrival_time: int
    source: str
    destination: str
    granted_at: Optional[int] = None
    completed_pairs: int = 0
    completed_at: Optional[int] = None
    rejected: bool = False
    path: Optional[list[str]] = None


@dataclass(frozen=True)
class NodeReport:
    name: str
    avg_wait_time_ps: float
    reservations: int
    throughput_pairs_per_s: float


@dataclass(frozen=True)
class SimulationReport:
    name: str
    duration_s: float
    nodes: list[NodeReport]
    totals: dict


def generate_requests(cfg: SimulationConfig, routers: list[str],
                      rng: Optional[random.Random] = None) -> list[Request]:
    """Poisson arrivals over [0, duration]; endpoints uniform without replacement."""
    if len(routers) < 2:
        raise InsufficientRouters(f"need at least 2 routers, have {len(routers)}")
    if rng is None:
        rng = random.Random(cfg.seed)
    requests: list[Request] = []
    if cfg.request_rate_hz == 0:
        return requests
    t = 0.0
    while True:
        t += rng.expovariate(cfg.request_rate_hz)
        if t > cfg.duration_s:
            break
        source = routers[rng.randrange(len(routers))]
        rest = [r for r in routers if r != source]
        destination = rest[rng.randrange(len(rest))]
        requests.append(Request(id=len(requests),
                                arrival_time=int(t * PS_PER_SECOND),
                                source=source, destination=destination))
    return requests


# ---------------------------------------------------------------------------
# link-level structures


@dataclass(frozen=True)
class LinkSpec:
    """One entanglement-generation link: two router arms meeting at a BSM."""

    router_a: str
    router_b: str
    bsm: str
    channel_a: ChannelParams
    channel_b: ChannelParams


def build_links(topo: Topology) -> list[LinkSpec]:
    """All router pairs joined through a BSM node, alphabetical within each link."""
    links = []
    for node in topo.nodes:
        if node.node_type is not NodeType.BSM_NODE:
            continue
        arms = []
        for e in topo.edges_of(node.name):
            other = e.b if e.a == node.name else e.a
            if topo.node(other).node_type is NodeType.QUANTUM_ROUTER:
                arms.append((other, ChannelParams(e.distance_m, e.attenuation_db_km)))
        for i in range(len(arms)):
            for j in range(i + 1, len(arms)):
                (ra, ca), (rb, cb) = arms[i], arms[j]
                if ra == rb:
                    continue
                if rb < ra:
                    (ra, ca), (rb, cb) = (rb, cb), (ra, ca)
                links.append(LinkSpec(router_a=ra, router_b=rb, bsm=node.name,
                                      channel_a=ca, channel_b=cb))
    return links


def router_adjacency(links: list[LinkSpec]) -> dict[str, dict[str, LinkSpec]]:
    """neighbor map; parallel links collapsed to the lowest-named BSM."""
    adj: dict[str, dict[str, LinkSpec]] = {}
    for link in sorted(links, key=lambda l: l.bsm):
        for u, v in ((link.router_a, link.router_b), (link.router_b, link.router_a)):
            adj.setdefault(u, {})
            if v not in adj[u]:
                adj[u][v] = link
    return adj


def shortest_path(adj: dict[str, dict[str, LinkSpec]], source: str,
                  destination: str) -> Optional[list[str]]:
    """Fewest-hop path; ties broken by lexicographically smallest name sequence."""
    if source == destination:
        return [source]
    dist = {destination: 0}
    frontier = deque([destination])
    while frontier:
        cur = frontier.popleft()
        for nxt in adj.get(cur, {}):
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                frontier.append(nxt)
    if source not in dist:
        return None
    path = [source]
    cur = source
    while cur != destination:
        candidates = [n for n in adj.get(cur, {}) if dist.get(n) == dist[cur] - 1]
        cur = min(candidates)
        path.append(cur)
    return path


class LinkEngine:
    """Emission/herald mechanics for one link, reusable outside the event loop.

    Per attempt both memories emit (efficiency roll), surviving photons cross
    their half-channels (loss roll) and meet at the BSM, which heralds success
    with probability 1/2 after both detectors click.
    """

    def __init__(self, spec: LinkSpec, array_a: MemoryArray, slot_a: int,
                 array_b: MemoryArray, slot_b: int, bsm: BSMState):
        self.spec = spec
        self.array_a = array_a
        self.slot_a = slot_a
        self.array_b = array_b
        self.slot_b = slot_b
        self.bsm = bsm
        self.delay_a = propagation_delay(spec.channel_a)
        self.delay_b = propagation_delay(spec.channel_b)
        self.survival_a = transmission_probability(spec.channel_a)
        self.survival_b = transmission_probability(spec.channel_b)

    @property
    def arrival_offset(self) -> int:
        return max(self.delay_a, self.delay_b)

    def ready_time(self) -> int:
        return max(self.array_a.ready_time(self.slot_a),
                   self.array_b.ready_time(self.slot_b))

    def emit(self, now: int, rng: random.Random) -> tuple[Optional[Photon], Optional[Photon]]:
        photon_a = self.array_a.excite(self.slot_a, now, rng)
        if photon_a is not None and rng.random() >= self.survival_a:
            photon_a.alive = False
        photon_b = self.array_b.excite(self.slot_b, now, rng)
        if photon_b is not None and rng.random() >= self.survival_b:
            photon_b.alive = False
        return photon_a, photon_b

    def herald(self, photon_a: Optional[Photon], photon_b: Optional[Photon],
               emit_time: int, rng: random.Random) -> BSMOutcome:
        arrival = emit_time + self.arrival_offset
        try:
            return self.bsm.measure(photon_a, photon_b, arrival, rng,
                                    arrival_a=emit_time + self.delay_a,
                                    arrival_b=emit_time + self.delay_b)
        except CoincidenceWindowViolation:
            return BSMOutcome.FAILURE

    def single_attempt(self, now: int, rng: random.Random) -> BSMOutcome:
        """One full attempt with the herald evaluated at photon arrival."""
        photon_a, photon_b = self.emit(now, rng)
        return self.herald(photon_a, photon_b, now, rng)

    def link_fidelity(self) -> float:
        return min(self.array_a.params.fidelity, self.array_b.params.fidelity)


# ---------------------------------------------------------------------------
# reservations


@dataclass
class Span:
    """A contiguous entangled (or regenerating) stretch of the path."""

    lo: int
    hi: int
    entangled: bool = False
    fidelity: float = 0.0
    left_slot: Optional[tuple[str, int]] = None
    right_slot: Optional[tuple[str, int]] = None


@dataclass
class Pipeline:
    index: int
    spans: list[Span]
    gen_token: list[int]
    done: bool = False


@dataclass
class Reservation:
    request: Request
    path: list[str]
    slots: dict[str, list[int]]
    engines: list[list[LinkEngine]]  # [pipeline][hop]
    pipelines: list[Pipeline]
    active: bool = True


# event payloads

@dataclass(frozen=True)
class ReqArrival:
    request_index: int


@dataclass(frozen=True)
class LinkAttempt:
    request_id: int
    pipeline: int
    hop: int
    token: int


@dataclass(frozen=True)
class LinkOutcome:
    request_id: int
    pipeline: int
    hop: int
    token: int
    photon_a: Optional[Photon]
    photon_b: Optional[Photon]
    emit_time: int


@dataclass(frozen=True)
class PairExpiry:
    request_id: int
    pipeline: int
    node: str
    slot: int
    epoch: int


_TARGET = "randreq"


class RandomRequestSim:
    """One random-request simulation run over a frozen topology + template store."""

    def __init__(self, topo: Topology, store: TemplateStore, cfg: SimulationConfig):
        routers = topo.routers()
        if len(routers) < 2:
            raise InsufficientRouters(
                f"simulation needs at least 2 routers, topology has {len(routers)}")
        self.topo = topo
        self.cfg = cfg
        self.routers = routers

        self.arrays: dict[str, MemoryArray] = {}
        self.memory_params: dict[str, MemoryParams] = {}
        self.bsms: dict[str, BSMState] = {}
        try:
            for node in topo.nodes:
                resolved = store.resolve(node)
                if isinstance(resolved, ResolvedRouter):
                    self.arrays[node.name] = MemoryArray(
                        node.name, resolved.memory_array_size, resolved.memory)
                    self.memory_params[node.name] = resolved.memory
                elif isinstance(resolved, ResolvedBsm):
                    self.bsms[node.name] = BSMState(resolved.bsm)
        except Exception as exc:
            raise TemplateResolutionError(str(exc)) from exc

        self.links = build_links(topo)
        self.adjacency = router_adjacency(self.links)

        self.timeline = Timeline(stop_time=cfg.duration_ps, seed=cfg.seed)
        self.timeline.register(_TARGET, self._handle)
        self.requests = generate_requests(cfg, routers, self.timeline.rng)
        for i, req in enumerate(self.requests):
            self.timeline.schedule(req.arrival_time, _TARGET, ReqArrival(i))

        self.reservations: dict[int, Reservation] = {}
        self.queue: deque[Request] = deque()
        self.reservation_count: dict[str, int] = {r: 0 for r in routers}
        self.pairs_at_endpoint: dict[str, int] = {r: 0 for r in routers}
        self.pairs_completed = 0
        self.delivered_fidelities: list[float] = []
        self.rejected = 0
        self.inspector: Optional[Callable[["RandomRequestSim", Event], None]] = None

    # -- reservation ----------------------------------------------------------

    def _demand(self, path: list[str], position: int) -> int:
        per_side = self.cfg.memories_per_request
        return per_side if position in (0, len(path) - 1) else 2 * per_side

    def _side_slot(self, res: Reservation, position: int, pipeline: int,
                   side: str) -> tuple[str, int]:
        """Slot backing one side of a path position: endpoints own one slot per
        pipeline, intermediates one per side per pipeline."""
        name = res.path[position]
        indices = res.slots[name]
        if position == 0 or position == len(res.path) - 1:
            return name, indices[pipeline]
        offset = 0 if side == "left" else 1
        return name, indices[2 * pipeline + offset]

    def reserve_path(self, request: Request, now: int) -> Optional[Reservation]:
        """Reserve memories along the request's path; None means not grantable now."""
        path = request.path
        assert path is not None
        for pos, name in enumerate(path):
            if len(self.arrays[name].free_slots()) < self._demand(path, pos):
                return None
        slots: dict[str, list[int]] = {}
        for pos, name in enumerate(path):
            take = self.arrays[name].free_slots()[: self._demand(path, pos)]
            for idx in take:
                self.arrays[name].reserve(idx)
            slots[name] = take
            self.reservation_count[name] += 1

        engines: list[list[LinkEngine]] = []
        pipelines: list[Pipeline] = []
        hops = len(path) - 1
        res = Reservation(request=request, path=path, slots=slots,
                          engines=engines, pipelines=pipelines)
        for p in range(self.cfg.memories_per_request):
            per_hop = []
            spans = []
            for h in range(hops):
                node_a, slot_a = self._side_slot(res, h, p, "right")
                node_b, slot_b = self._side_slot(res, h + 1, p, "left")
                link = self.adjacency[path[h]][path[h + 1]]
                if link.router_a != node_a:  # engine arms follow path order
                    link = LinkSpec(router_a=node_a, router_b=node_b, bsm=link.bsm,
                                    channel_a=link.channel_b, channel_b=link.channel_a)
                per_hop.append(LinkEngine(link, self.arrays[node_a], slot_a,
                                          self.arrays[node_b], slot_b,
                                          self.bsms[link.bsm]))
                spans.append(Span(lo=h, hi=h + 1))
            engines.append(per_hop)
            pipelines.append(Pipeline(index=p, spans=spans, gen_token=[0] * hops))
        self.reservations[request.id] = res
        return res

    def _grant(self, request: Request, now: int) -> None:
        request.granted_at = now
        res = self.reservations[request.id]
        for p, pipeline in enumerate(res.pipelines):
            for h in range(len(res.path) - 1):
                self._schedule_attempt(res, p, h, pipeline.gen_token[h], now)

    def _schedule_attempt(self, res: Reservation, pipeline: int, hop: int,
                          token: int, not_before: int) -> None:
        engine = res.engines[pipeline][hop]
        at = max(not_before, engine.ready_time(), self.timeline.now)
        self.timeline.schedule(at, _TARGET,
                               LinkAttempt(res.request.id, pipeline, hop, token))

    def _grantable(self, request: Request) -> bool:
        """False when some path router can never satisfy the demand."""
        assert request.path is not None
        return all(self.arrays[name].size >= self._demand(request.path, pos)
                   for pos, name in enumerate(request.path))

    def _admit(self, request: Request, now: int) -> None:
        request.path = shortest_path(self.adjacency, request.source,
                                     request.destination)
        if request.path is None or not self._grantable(request):
            request.rejected = True
            self.rejected += 1
            return
        if self.reserve_path(request, now) is not None:
            self._grant(request, now)
        else:
            self.queue.append(request)

    def _wake_queue(self, now: int) -> None:
        while self.queue:
            head = self.queue[0]
            if self.reserve_path(head, now) is None:
                break
            self.queue.popleft()
            self._grant(head, now)

    def _complete_request(self, res: Reservation, now: int) -> None:
        res.active = False
        for name, indices in res.slots.items():
            for idx in indices:
                self.arrays[name].release(idx)
        res.request.completed_at = now
        self._wake_queue(now)

    # -- link generation and swapping ------------------------------------------

    def _span_with_hop(self, pipeline: Pipeline, hop: int) -> Span:
        for span in pipeline.spans:
            if span.lo <= hop < span.hi:
                return span
        raise AssertionError(f"no span covers hop {hop}")

    def _reset_slot(self, ref: tuple[str, int]) -> None:
        self.arrays[ref[0]].reset_to_idle(ref[1])

    def _dissolve_span(self, res: Reservation, pipeline: Pipeline, span: Span,
                       now: int) -> None:
        """Tear a span back down to per-hop generation."""
        if span.entangled:
            self._reset_slot(span.left_slot)
            self._reset_slot(span.right_slot)
        replacement = [Span(lo=h, hi=h + 1) for h in range(span.lo, span.hi)]
        i = pipeline.spans.index(span)
        pipeline.spans[i:i + 1] = replacement
        for h in range(span.lo, span.hi):
            pipeline.gen_token[h] += 1
            self._schedule_attempt(res, pipeline.index, h, pipeline.gen_token[h], now)

    def _on_attempt(self, tl: Timeline, ev: LinkAttempt) -> None:
        res = self.reservations.get(ev.request_id)
        if res is None or not res.active:
            return
        pipeline = res.pipelines[ev.pipeline]
        if pipeline.done or pipeline.gen_token[ev.hop] != ev.token:
            return
        engine = res.engines[ev.pipeline][ev.hop]
        ready = engine.ready_time()
        if tl.now < ready:
            self._schedule_attempt(res, ev.pipeline, ev.hop, ev.token, ready)
            return
        photon_a, photon_b = engine.emit(tl.now, tl.rng)
        tl.schedule(tl.now + engine.arrival_offset, _TARGET,
                    LinkOutcome(ev.request_id, ev.pipeline, ev.hop, ev.token,
                                photon_a, photon_b, tl.now))

    def _on_outcome(self, tl: Timeline, ev: LinkOutcome) -> None:
        res = self.reservations.get(ev.request_id)
        if res is None or not res.active:
            return
        pipeline = res.pipelines[ev.pipeline]
        if pipeline.done or pipeline.gen_token[ev.hop] != ev.token:
            return
        engine = res.engines[ev.pipeline][ev.hop]
        outcome = engine.herald(ev.photon_a, ev.photon_b, ev.emit_time, tl.rng)
        if not outcome.success:
            retry = max(ev.emit_time + engine.array_a.params.period_ps,
                        ev.emit_time + engine.array_b.params.period_ps,
                        tl.now)
            self._schedule_attempt(res, ev.pipeline, ev.hop, ev.token, retry)
            return
        fidelity = engine.link_fidelity()
        span = self._span_with_hop(pipeline, ev.hop)
        span.entangled = True
        span.fidelity = fidelity
        span.left_slot = (engine.array_a.node_name, engine.slot_a)
        span.right_slot = (engine.array_b.node_name, engine.slot_b)
        for array, slot, partner in (
                (engine.array_a, engine.slot_a, (engine.array_b.node_name, engine.slot_b)),
                (engine.array_b, engine.slot_b, (engine.array_a.node_name, engine.slot_a))):
            epoch = array.set_entangled(slot, partner, tl.now, fidelity)
            tl.schedule(array.expiry_time(slot), _TARGET,
                        PairExpiry(ev.request_id, ev.pipeline, array.node_name,
                                   slot, epoch))
        self._resolve_pipeline(res, pipeline, tl.now)

    def _on_expiry(self, tl: Timeline, ev: PairExpiry) -> None:
        res = self.reservations.get(ev.request_id)
        if res is None or not res.active:
            return
        pipeline = res.pipelines[ev.pipeline]
        if pipeline.done:
            return
        slot = self.arrays[ev.node].slots[ev.slot]
        if slot.epoch != ev.epoch:
            return  # stale: the pair was consumed or already torn down
        ref = (ev.node, ev.slot)
        for span in list(pipeline.spans):
            if span.entangled and (span.left_slot == ref or span.right_slot == ref):
                self._dissolve_span(res, pipeline, span, tl.now)
                return

    def _resolve_pipeline(self, res: Reservation, pipeline: Pipeline,
                          now: int) -> None:
        """Run eligible swaps (leftmost first), then check for delivery."""
        while True:
            swapped = False
            for i in range(len(pipeline.spans) - 1):
                left, right = pipeline.spans[i], pipeline.spans[i + 1]
                if not (left.entangled and right.entangled):
                    continue
                swapped = True
                if self.timeline.rng.random() < self.cfg.swap_success_prob:
                    self._reset_slot(left.right_slot)
                    self._reset_slot(right.left_slot)
                    merged = Span(lo=left.lo, hi=right.hi, entangled=True,
                                  fidelity=left.fidelity * right.fidelity,
                                  left_slot=left.left_slot,
                                  right_slot=right.right_slot)
                    # ends keep their entanglement records; only partners change
                    self.arrays[merged.left_slot[0]].slots[
                        merged.left_slot[1]].entangled_with = merged.right_slot
                    self.arrays[merged.right_slot[0]].slots[
                        merged.right_slot[1]].entangled_with = merged.left_slot
                    pipeline.spans[i:i + 2] = [merged]
                else:
                    for span in (left, right):
                        self._reset_slot(span.left_slot)
                        self._reset_slot(span.right_slot)
                    lo, hi = left.lo, right.hi
                    replacement = [Span(lo=h, hi=h + 1) for h in range(lo, hi)]
                    pipeline.spans[i:i + 2] = replacement
                    for h in range(lo, hi):
                        pipeline.gen_token[h] += 1
                        self._schedule_attempt(res, pipeline.index, h,
                                               pipeline.gen_token[h], now)
                break
            if not swapped:
                break

        if len(pipeline.spans) == 1:
            span = pipeline.spans[0]
            if span.entangled and span.lo == 0 and span.hi == len(res.path) - 1:
                if span.fidelity >= self.cfg.target_fidelity:
                    self._deliver(res, pipeline, span, now)
                else:
                    # below-target pairs are discarded and regenerated
                    self._dissolve_span(res, pipeline, span, now)

    def _deliver(self, res: Reservation, pipeline: Pipeline, span: Span,
                 now: int) -> None:
        self._reset_slot(span.left_slot)
        self._reset_slot(span.right_slot)
        span.entangled = False
        pipeline.done = True
        self.delivered_fidelities.append(span.fidelity)
        req = res.request
        req.completed_pairs += 1
        self.pairs_at_endpoint[req.source] += 1
        self.pairs_at_endpoint[req.destination] += 1
        self.pairs_completed += 1
        if req.completed_pairs >= self.cfg.memories_per_request:
            self._complete_request(res, now)

    # -- event dispatch ---------------------------------------------------------

    def _handle(self, tl: Timeline, event: Event) -> None:
        payload = event.payload
        if isinstance(payload, ReqArrival):
            self._admit(self.requests[payload.request_index], tl.now)
        elif isinstance(payload, LinkAttempt):
            self._on_attempt(tl, payload)
        elif isinstance(payload, LinkOutcome):
            self._on_outcome(tl, payload)
        elif isinstance(payload, PairExpiry):
            self._on_expiry(tl, payload)
        else:
            raise AssertionError(f"unknown payload {payload!r}")
        if self.inspector is not None:
            self.inspector(self, event)

    # -- run and report ----------------------------------------------------------

    def run(self, inspector=None) -> SimulationReport:
        self.inspector = inspector
        self.timeline.run()
        return self.report()

    def report(self) -> SimulationReport:
        waits: dict[str, list[int]] = {r: [] for r in self.routers}
        all_waits: list[int] = []
        for req in self.requests:
            if req.granted_at is None:
                continue
            wait = req.granted_at - req.arrival_time
            waits[req.source].append(wait)
            waits[req.destination].append(wait)
            all_waits.append(wait)
        nodes = []
        for name in self.routers:
            node_waits = waits[name]
            nodes.append(NodeReport(
                name=name,
                avg_wait_time_ps=(sum(node_waits) / len(node_waits)) if node_waits else 0.0,
                reservations=self.reservation_count[name],
                throughput_pairs_per_s=self.pairs_at_endpoint[name] / self.cfg.duration_s))
        granted = sum(1 for r in self.requests if r.granted_at is not None)
        completed = sum(1 for r in self.requests if r.completed_at is not None)
        totals = {
            "requests_generated": len(self.requests),
            "requests_granted": granted,
            "requests_completed": completed,
            "requests_rejected": self.rejected,
            "pairs_completed": self.pairs_completed,
            "avg_wait_time_ps": (sum(all_waits) / len(all_waits)) if all_waits else 0.0,
            "seed": self.cfg.seed,
        }
        return SimulationReport(name=self.cfg.name, duration_s=self.cfg.duration_s,
                                nodes=nodes, totals=totals)


def run_simulation(topo: Topology, store: TemplateStore,
                   cfg: SimulationConfig) -> SimulationReport:
    """Wire hardware from templates, run to cfg.duration, aggregate per-node metrics."""
    return RandomRequestSim(topo, store, cfg).run()
