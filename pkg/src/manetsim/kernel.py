"""Event scheduler, simulation clock and seeded random streams."""

from __future__ import annotations

import enum
import hashlib
import heapq
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

DEFAULT_HORIZON = 1200.0


class SimulationError(RuntimeError):
    """A dispatcher failed while handling an event."""

    def __init__(self, message, event=None):
        super().__init__(message)
        self.event = event


class EventKind(enum.Enum):
    WAYPOINT = "waypoint-reached"
    HELLO = "emit-hello"
    TC = "emit-tc"
    TRAFFIC = "traffic-emit"
    ARRIVAL = "packet-arrival"
    SNAPSHOT = "metrics-snapshot"


@dataclass(eq=False)
class Event:
    fire_at: float
    seq: int
    kind: EventKind
    payload: Any = None
    cancelled: bool = field(default=False, repr=False)
    fired: bool = field(default=False, repr=False)

    @property
    def pending(self):
        return not (self.cancelled or self.fired)


class EventQueue:
    """Binary-heap scheduler ordered by ``(fire_at, seq)``.

    Cancellation is lazy: cancelled events stay in the heap and are skipped
    when they surface.
    """

    def __init__(self, start=0.0):
        self.now = float(start)
        self._heap = []
        self._seq = 0
        self.processed = 0

    def __len__(self):
        return sum(1 for _, _, ev in self._heap if ev.pending)

    def schedule(self, at, kind, payload=None) -> Event:
        at = float(at)
        if at < self.now:
            raise ValueError(f"cannot schedule {kind.value} at t={at!r} before now={self.now!r}")
        ev = Event(at, self._seq, kind, payload)
        self._seq += 1
        heapq.heappush(self._heap, (at, ev.seq, ev))
        return ev

    def cancel(self, handle: Event) -> bool:
        if not handle.pending:
            return False
        handle.cancelled = True
        return True

    def peek_time(self):
        while self._heap and not self._heap[0][2].pending:
            heapq.heappop(self._heap)
        return self._heap[0][0] if self._heap else None

    def run_until(self, limit, dispatcher: Callable[[Event], None]) -> float:
        limit = float(limit)
        if limit < self.now:
            raise ValueError(f"limit {limit!r} is before current clock {self.now!r}")
        heap = self._heap
        pop = heapq.heappop
        while heap and heap[0][0] <= limit:
            _, _, ev = pop(heap)
            if ev.cancelled:
                continue
            self.now = ev.fire_at
            ev.fired = True
            self.processed += 1
            try:
                dispatcher(ev)
            except SimulationError:
                raise
            except Exception as exc:
                raise SimulationError(f"dispatcher failed on {ev!r}: {exc}", ev) from exc
        self.now = limit
        return self.now


def _label_key(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "little")


class RngStream:
    """Labeled PCG64 stream; children are a pure function of (seed, label path)."""

    def __init__(self, seed: int, label: str = "root"):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.label = label
        keys = [_label_key(part) for part in label.split("/")]
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, *keys])))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, label={self.label!r})"

    def fork(self, label: str) -> "RngStream":
        if not label:
            raise ValueError("stream label must be non-empty")
        return RngStream(self.seed, f"{self.label}/{label}")

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def random(self) -> float:
        return float(self._gen.random())

    def uniform(self, low=0.0, high=1.0) -> float:
        return float(self._gen.uniform(low, high))

    def integers(self, low, high=None) -> int:
        return int(self._gen.integers(low, high))

    def lognormal(self, mean, sigma) -> float:
        return float(self._gen.lognormal(mean, sigma))

    def permutation(self, n):
        return self._gen.permutation(n)


def fork_stream(root: RngStream, label: str) -> RngStream:
    return root.fork(label)
