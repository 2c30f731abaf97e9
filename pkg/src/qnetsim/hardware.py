"""Stochastic hardware models: quantum memories, photon detectors, BSM nodes,
and the two fiber-channel formulas (propagation delay and transmission loss).

All kernel-facing times are 64-bit integer picoseconds. Parameter objects keep
the units their fields are named in (seconds, Hz, dB/km, meters); conversion
happens once, at construction of the stateful device objects.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import CoincidenceWindowViolation, SlotBusy, SlotOutOfRange

#: Speed of light in silica fiber, m/s (2/3 of vacuum c).
FIBER_LIGHT_SPEED = 2.0e8

PS_PER_SECOND = 10**12


# ---------------------------------------------------------------------------
# parameter bundles


@dataclass(frozen=True)
class MemoryParams:
    """Single-atom memory parameters; one bundle serves a whole (homogeneous) array."""

    coherence_time_s: float
    frequency_hz: float
    efficiency: float
    fidelity: float

    def __post_init__(self):
        if self.coherence_time_s <= 0:
            raise ValueError("coherence_time_s must be > 0")
        if self.frequency_hz <= 0:
            raise ValueError("frequency_hz must be > 0")
        for name in ("efficiency", "fidelity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be within [0, 1]")

    @property
    def period_ps(self) -> int:
        """Time for a slot to return to ground after excitation."""
        return int(round(PS_PER_SECOND / self.frequency_hz))

    @property
    def coherence_time_ps(self) -> int:
        return int(round(self.coherence_time_s * PS_PER_SECOND))


@dataclass(frozen=True)
class DetectorParams:
    efficiency: float
    count_rate_hz: float
    dark_count_rate_hz: float
    time_resolution_ps: int

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must be within [0, 1]")
        if self.count_rate_hz < 0 or self.dark_count_rate_hz < 0:
            raise ValueError("rates must be non-negative")
        if self.time_resolution_ps < 1:
            raise ValueError("time_resolution_ps must be >= 1")

    @property
    def dead_time_ps(self) -> float:
        """Inverse count rate; a count rate of 0 disables the dead-time model."""
        if self.count_rate_hz == 0:
            return 0.0
        return PS_PER_SECOND / self.count_rate_hz


@dataclass(frozen=True)
class BSMParams:
    detector: DetectorParams
    coincidence_window_ps: int

    def __post_init__(self):
        if self.coincidence_window_ps < self.detector.time_resolution_ps:
            raise ValueError("coincidence_window_ps must be >= time_resolution_ps")


@dataclass(frozen=True)
class ChannelParams:
    distance_m: float
    attenuation_db_km: float
    light_speed_m_s: float = FIBER_LIGHT_SPEED

    def __post_init__(self):
        if self.distance_m < 0:
            raise ValueError("distance_m must be >= 0")
        if self.attenuation_db_km < 0:
            raise ValueError("attenuation_db_km must be >= 0")
        if self.light_speed_m_s <= 0:
            raise ValueError("light_speed_m_s must be > 0")


@dataclass
class Photon:
    """A heralding photon in flight: emission time, source memory, survival flag."""

    emitted_at: int
    source: tuple[str, int]
    alive: bool = True

    def __post_init__(self):
        if self.emitted_at < 0:
            raise ValueError("emitted_at must be >= 0")


# ---------------------------------------------------------------------------
# channel formulas


def propagation_delay(ch: ChannelParams) -> int:
    """Photon flight time L/c, rounded to integer picoseconds."""
    return round(ch.distance_m / ch.light_speed_m_s * PS_PER_SECOND)


def transmission_probability(ch: ChannelParams) -> float:
    """Survival probability of a photon over the channel.

    Standard fiber-loss law 10^(-(L_km * a0) / 10) for attenuation a0 in dB/km.
    """
    loss_db = (ch.distance_m / 1000.0) * ch.attenuation_db_km
    return 10.0 ** (-loss_db / 10.0)


# ---------------------------------------------------------------------------
# quantum memory array


class SlotState(Enum):
    GROUND = "Ground"
    EXCITED = "Excited"
    ENTANGLED = "Entangled"
    RESERVED = "Reserved"


@dataclass
class MemorySlot:
    phase: SlotState = SlotState.GROUND  # GROUND / EXCITED / ENTANGLED only
    reserved: bool = False
    last_excited_at: Optional[int] = None
    entangled_since: Optional[int] = None
    entangled_with: Optional[tuple[str, int]] = None
    fidelity: Optional[float] = None
    #: bumped on every state change; lets schedulers detect stale expiry events
    epoch: int = 0


class MemoryArray:
    """Homogeneous array of single-atom memory slots owned by one router."""

    def __init__(self, node_name: str, size: int, params: MemoryParams):
        if size < 1:
            raise ValueError("memory array size must be >= 1")
        self.node_name = node_name
        self.size = size
        self.params = params
        self.slots = [MemorySlot() for _ in range(size)]

    def _slot(self, index: int) -> MemorySlot:
        if not 0 <= index < self.size:
            raise SlotOutOfRange(f"slot {index} out of range for array of size {self.size}")
        return self.slots[index]

    def slot_state(self, index: int) -> SlotState:
        """Spec-level state: a reserved-but-idle slot reads as Reserved."""
        s = self._slot(index)
        if s.phase is SlotState.GROUND and s.reserved:
            return SlotState.RESERVED
        return s.phase

    def _relax_if_due(self, s: MemorySlot, now: int) -> None:
        if s.phase is SlotState.EXCITED and s.last_excited_at is not None \
                and now - s.last_excited_at >= self.params.period_ps:
            s.phase = SlotState.GROUND
            s.epoch += 1

    def ready_time(self, index: int) -> int:
        """Earliest time the slot may be excited again."""
        s = self._slot(index)
        if s.last_excited_at is None:
            return 0
        return s.last_excited_at + self.params.period_ps

    def excite(self, index: int, now: int, rng: random.Random) -> Optional[Photon]:
        """Attempt photon emission from a ground (or reserved-idle) slot.

        Emits with probability ``efficiency``. The slot enters Excited and may
        not be re-excited until one memory period (1/frequency) has elapsed.
        """
        s = self._slot(index)
        self._relax_if_due(s, now)
        if s.phase is not SlotState.GROUND:
            raise SlotBusy(f"slot {index} of {self.node_name} is {s.phase.value} at {now} ps")
        if s.last_excited_at is not None and now - s.last_excited_at < self.params.period_ps:
            raise SlotBusy(
                f"slot {index} of {self.node_name} re-excited before ground return "
                f"({now - s.last_excited_at} < {self.params.period_ps} ps)")
        s.phase = SlotState.EXCITED
        s.last_excited_at = now
        s.epoch += 1
        if rng.random() < self.params.efficiency:
            return Photon(emitted_at=now, source=(self.node_name, index))
        return None

    def reserve(self, index: int) -> None:
        s = self._slot(index)
        if s.reserved:
            raise SlotBusy(f"slot {index} of {self.node_name} already reserved")
        s.reserved = True
        s.epoch += 1

    def release(self, index: int) -> None:
        s = self._slot(index)
        s.reserved = False
        s.phase = SlotState.GROUND
        s.entangled_since = None
        s.entangled_with = None
        s.fidelity = None
        s.epoch += 1

    def set_entangled(self, index: int, partner: tuple[str, int], since: int,
                      fidelity: float) -> int:
        """Mark a slot entangled; returns the new epoch (for expiry bookkeeping)."""
        s = self._slot(index)
        s.phase = SlotState.ENTANGLED
        s.entangled_since = since
        s.entangled_with = partner
        s.fidelity = fidelity
        s.epoch += 1
        return s.epoch

    def reset_to_idle(self, index: int) -> None:
        """Drop any excitation/entanglement; keeps the reservation flag."""
        s = self._slot(index)
        s.phase = SlotState.GROUND
        s.entangled_since = None
        s.entangled_with = None
        s.fidelity = None
        s.epoch += 1

    def free_slots(self) -> list[int]:
        return [i for i, s in enumerate(self.slots)
                if not s.reserved and s.phase is SlotState.GROUND]

    def expiry_time(self, index: int) -> Optional[int]:
        s = self._slot(index)
        if s.entangled_since is None:
            return None
        return s.entangled_since + self.params.coherence_time_ps


# ---------------------------------------------------------------------------
# photon detector


@dataclass(frozen=True)
class DetectionEvent:
    timestamp: int


def quantize_timestamp(t: int, resolution_ps: int) -> int:
    """Round to the nearest multiple of the resolution, ties toward -inf."""
    return ((2 * t + resolution_ps - 1) // (2 * resolution_ps)) * resolution_ps


class DetectorState:
    """Single photon detector with efficiency, dead time, and readout quantization.

    The dead-time gate compares quantized timestamps, so the emitted event
    stream never contains two events closer than the dead time.
    """

    def __init__(self, params: DetectorParams):
        self.params = params
        self.last_detection: Optional[int] = None  # quantized

    def observe(self, arrival: int, is_real_photon: bool,
                rng: random.Random) -> Optional[DetectionEvent]:
        if arrival < 0:
            raise ValueError("arrival must be >= 0")
        stamp = quantize_timestamp(arrival, self.params.time_resolution_ps)
        if self.last_detection is not None and \
                stamp - self.last_detection < self.params.dead_time_ps:
            return None
        if is_real_photon and rng.random() >= self.params.efficiency:
            return None
        self.last_detection = stamp
        return DetectionEvent(timestamp=stamp)


def dark_count_events(det: DetectorParams, window: tuple[int, int],
                      rng: random.Random) -> list[DetectionEvent]:
    """False-positive detections over ``window`` as a homogeneous Poisson process.

    Events are quantized to the detector resolution and filtered by dead time;
    a quantized stamp falling outside the window is dropped.
    """
    t0, t1 = window
    if t1 <= t0:
        raise ValueError("window must satisfy t1 > t0")
    if det.dark_count_rate_hz == 0:
        return []
    state = DetectorState(det)
    events: list[DetectionEvent] = []
    t = float(t0)
    while True:
        t += rng.expovariate(det.dark_count_rate_hz) * PS_PER_SECOND
        if t > t1:
            break
        ev = state.observe(int(round(t)), is_real_photon=False, rng=rng)
        if ev is not None and t0 <= ev.timestamp <= t1:
            events.append(ev)
    return events


# ---------------------------------------------------------------------------
# Bell state measurement


@dataclass(frozen=True)
class BSMOutcome:
    success: bool
    #: one of the two linear-optics-distinguishable Bell states, 1 or 2
    bell_index: Optional[int] = None

    FAILURE = None  # set after class creation


BSMOutcome.FAILURE = BSMOutcome(success=False)


class BSMState:
    """Bell state measurement station: two detectors behind a coincidence window.

    A linear-optics BSM resolves only two of the four Bell states, so even with
    both photons detected the measurement heralds success with probability 1/2.
    """

    def __init__(self, params: BSMParams, include_dark_counts: bool = False):
        self.params = params
        self.detectors = (DetectorState(params.detector), DetectorState(params.detector))
        self.include_dark_counts = include_dark_counts

    def _arm_click(self, det: DetectorState, photon: Optional[Photon], arrival: int,
                   rng: random.Random) -> bool:
        clicked = False
        if photon is not None and photon.alive:
            clicked = det.observe(arrival, is_real_photon=True, rng=rng) is not None
        if not clicked and self.include_dark_counts:
            window_s = 2 * self.params.coincidence_window_ps / PS_PER_SECOND
            p_dark = 1.0 - math.exp(-self.params.detector.dark_count_rate_hz * window_s)
            clicked = rng.random() < p_dark
        return clicked

    def measure(self, photon_a: Optional[Photon], photon_b: Optional[Photon], now: int,
                rng: random.Random, arrival_a: Optional[int] = None,
                arrival_b: Optional[int] = None) -> BSMOutcome:
        """Joint measurement of two photon arrivals at time ``now``.

        Arrival times default to ``now``; presenting two photons whose arrivals
        differ by more than the coincidence window is a caller error.
        """
        arrival_a = now if arrival_a is None else arrival_a
        arrival_b = now if arrival_b is None else arrival_b
        if photon_a is not None and photon_b is not None and \
                abs(arrival_a - arrival_b) > self.params.coincidence_window_ps:
            raise CoincidenceWindowViolation(
                f"arrivals {arrival_a} and {arrival_b} ps exceed the "
                f"{self.params.coincidence_window_ps} ps coincidence window")
        if photon_a is None or not photon_a.alive or photon_b is None or not photon_b.alive:
            return BSMOutcome.FAILURE
        click_a = self._arm_click(self.detectors[0], photon_a, arrival_a, rng)
        click_b = self._arm_click(self.detectors[1], photon_b, arrival_b, rng)
        if not (click_a and click_b):
            return BSMOutcome.FAILURE
        if rng.random() < 0.5:
            return BSMOutcome(success=True, bell_index=1 if rng.random() < 0.5 else 2)
        return BSMOutcome.FAILURE
