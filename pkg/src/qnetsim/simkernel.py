"""Deterministic discrete-event engine: integer-picosecond time base, a
(time, seq)-ordered queue, and a progress counter safe to poll mid-run.

One seeded generator is owned by the timeline and consumed strictly in event
execution order; that single fact makes whole-simulation determinism testable.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .errors import HandlerFailure, PastEvent


@dataclass(frozen=True)
class Event:
    time: int
    seq: int
    target: str
    payload: Any


@dataclass(frozen=True)
class RunStats:
    events_processed: int
    final_time: int


Handler = Callable[["Timeline", Event], None]


class Timeline:
    """Event queue plus clock. Events dequeue in strict (time, seq) order."""

    def __init__(self, stop_time: int, seed: int = 0,
                 rng: Optional[random.Random] = None):
        if stop_time <= 0:
            raise ValueError("stop_time must be > 0")
        self.now: int = 0
        self.stop_time = stop_time
        self.rng = rng if rng is not None else random.Random(seed)
        self._heap: list[tuple[int, int, Event]] = []
        self._seq = 0
        self._handlers: dict[str, Handler] = {}
        self.events_processed = 0

    def register(self, target: str, handler: Handler) -> None:
        self._handlers[target] = handler

    def schedule(self, time: int, target: str, payload: Any) -> Event:
        """Enqueue an event; same-time events run in schedule order."""
        if time < self.now:
            raise PastEvent(f"event at {time} ps is before now ({self.now} ps)")
        event = Event(time=int(time), seq=self._seq, target=target, payload=payload)
        self._seq += 1
        heapq.heappush(self._heap, (event.time, event.seq, event))
        return event

    def peek_time(self) -> Optional[int]:
        return self._heap[0][0] if self._heap else None

    def run(self) -> RunStats:
        """Process events up to and including stop_time.

        Ends with now == stop_time so the published progress reaches 1.0 even
        when the queue drains early or events remain beyond the horizon.
        """
        while self._heap and self._heap[0][0] <= self.stop_time:
            _, _, event = heapq.heappop(self._heap)
            self.now = event.time
            handler = self._handlers.get(event.target)
            if handler is None:
                raise HandlerFailure(f"no handler registered for target {event.target!r}",
                                     target=event.target, event=event)
            try:
                handler(self, event)
            except HandlerFailure:
                raise
            except Exception as exc:
                raise HandlerFailure(f"handler for {event.target!r} failed: {exc}",
                                     target=event.target, event=event) from exc
            self.events_processed += 1
        self.now = self.stop_time
        return RunStats(events_processed=self.events_processed, final_time=self.now)

    @property
    def progress(self) -> float:
        """Fraction of simulated time elapsed; readable while a run is in flight."""
        return min(self.now / self.stop_time, 1.0)
