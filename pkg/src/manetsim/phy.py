"""Abstract radio: unit-disk connectivity, air time and packet success f(gamma)."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import accel

BROADCAST = -1


@dataclass(frozen=True)
class LinkModel:
    tx_range: float = 250.0
    bitrate: float = 2e6
    header_bytes: int = 58
    snr_reference_distance: float | None = None
    success_curve: str = "step"
    success_threshold: float = 1.0
    success_k: float = 1.0
    queue_len: int = 50

    def __post_init__(self):
        if self.tx_range <= 0:
            raise ValueError(f"tx_range must be > 0, got {self.tx_range}")
        if self.bitrate <= 0:
            raise ValueError(f"bitrate must be > 0, got {self.bitrate}")
        if self.header_bytes < 0:
            raise ValueError(f"header_bytes must be >= 0, got {self.header_bytes}")
        if self.success_curve not in ("step", "exponential"):
            raise ValueError(f"success_curve must be 'step' or 'exponential', got {self.success_curve!r}")
        if self.queue_len < 1:
            raise ValueError(f"queue_len must be >= 1, got {self.queue_len}")

    @property
    def reference_distance(self):
        return self.tx_range if self.snr_reference_distance is None else self.snr_reference_distance

    def air_time(self, payload_bytes):
        return (payload_bytes + self.header_bytes) * 8.0 / self.bitrate


def connectivity(positions, model: LinkModel):
    """Boolean adjacency matrix: edge iff distance <= tx_range, no self loops."""
    xy = np.ascontiguousarray(positions, dtype=float).reshape(-1, 2)
    return accel.adjacency(xy, float(model.tx_range))


def snr(distance, model: LinkModel):
    if distance <= 0.0:
        return math.inf
    return (model.reference_distance / distance) ** 2


def packet_success(gamma, model: LinkModel):
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if model.success_curve == "step":
        return 1.0 if gamma >= model.success_threshold else 0.0
    return -math.expm1(-model.success_k * gamma)


def effective_throughput(L, C, R, gamma, model: LinkModel):
    """Payload rate ((L - C) / L) * R * f(gamma), in bits/s."""
    if L <= C:
        raise ValueError(f"packet size L={L} must exceed overhead C={C}")
    return (L - C) / L * R * packet_success(gamma, model)


@dataclass
class Transmission:
    sender: int
    receiver: int
    packet: Any
    start: float
    air_time: float

    @classmethod
    def of(cls, sender, receiver, packet, payload_bytes, start, model: LinkModel):
        return cls(sender, receiver, packet, start, model.air_time(payload_bytes))

    @property
    def is_broadcast(self):
        return self.receiver == BROADCAST


def transmit(tx: Transmission, rng, neighbors, model: LinkModel):
    """Resolve one transmission against the sender's current neighbourhood.

    ``neighbors`` maps each node adjacent to the sender to its distance.
    Returns ``(deliveries, drops)``: ``[(receiver, at)]`` and
    ``[(receiver, reason)]``, exactly one entry per intended receiver.
    """
    at = tx.start + tx.air_time
    deliveries, drops = [], []
    targets = sorted(neighbors) if tx.is_broadcast else [tx.receiver]
    for rx in targets:
        dist = neighbors.get(rx)
        if dist is None:
            drops.append((rx, "out-of-range"))
            continue
        f = packet_success(snr(dist, model), model)
        if f >= 1.0 or (f > 0.0 and rng.random() < f):
            deliveries.append((rx, at))
        else:
            drops.append((rx, "channel-loss"))
    return deliveries, drops


class TxQueue:
    """Per-node FIFO with tail drop; the head is on air while ``busy``."""

    __slots__ = ("capacity", "items", "busy")

    def __init__(self, capacity):
        self.capacity = capacity
        self.items = deque()
        self.busy = False

    def __len__(self):
        return len(self.items)

    def offer(self, item):
        if len(self.items) >= self.capacity:
            return False
        self.items.append(item)
        return True

    def pop(self):
        return self.items.popleft()
