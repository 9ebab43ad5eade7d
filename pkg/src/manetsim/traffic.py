"""CBR and MPEG-4-like VBR application sources."""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field
from itertools import count

from .kernel import RngStream


class TrafficKind(str, enum.Enum):
    CBR = "cbr"
    VBR = "vbr"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValueError(f"unknown traffic kind {text!r} (expected cbr or vbr)") from None


@dataclass(frozen=True)
class Flow:
    flow_id: int
    source: int
    destination: int
    start: float
    stop: float
    kind: TrafficKind = TrafficKind.CBR

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError(f"flow {self.flow_id}: source equals destination ({self.source})")
        if not self.start < self.stop:
            raise ValueError(f"flow {self.flow_id}: start {self.start} must precede stop {self.stop}")


@dataclass
class Packet:
    packet_id: int
    flow_id: int
    source: int
    destination: int
    size: int
    created_at: float
    hops: int = 0


_packet_ids = count()


def new_packet_id():
    return next(_packet_ids)


@dataclass(frozen=True)
class CbrConfig:
    packet_size: int = 512
    rate: float = 4.0

    def __post_init__(self):
        if self.packet_size <= 0 or self.rate <= 0:
            raise ValueError("CBR packet_size and rate must be positive")

    @property
    def interval(self):
        return 1.0 / self.rate


def next_cbr(cfg: CbrConfig, flow: Flow, now, packet_id=None):
    """Packet emitted at ``now`` and the next emission time (None past stop)."""
    if not flow.start <= now < flow.stop:
        raise ValueError(f"flow {flow.flow_id} is not active at t={now}")
    pid = new_packet_id() if packet_id is None else packet_id
    pkt = Packet(pid, flow.flow_id, flow.source, flow.destination, cfg.packet_size, now)
    nxt = now + cfg.interval
    return pkt, (nxt if nxt < flow.stop else None)


def cbr_emission_times(cfg: CbrConfig, flow: Flow):
    """All CBR emission instants ``start + k / rate`` below ``stop``."""
    times = []
    k = 0
    while True:
        t = flow.start + k * cfg.interval
        if t >= flow.stop:
            return times
        times.append(t)
        k += 1


# default frame-size law: lognormal per frame type, (mu, sigma) of ln(bytes)
DEFAULT_FRAME_PARAMS = {
    "I": (math.log(5000.0), 0.4),
    "P": (math.log(1800.0), 0.5),
    "B": (math.log(800.0), 0.6),
}


@dataclass(frozen=True)
class VbrConfig:
    initial_seed: float = 0.4
    rate_factor: float = 0.25
    fps: float = 25.0
    gop_pattern: str = "IBBPBBPBBPBB"
    frame_size_params: dict = field(default_factory=lambda: dict(DEFAULT_FRAME_PARAMS))
    mtu: int = 512

    def __post_init__(self):
        if self.rate_factor <= 0:
            raise ValueError(f"rate_factor must be > 0, got {self.rate_factor}")
        if not self.gop_pattern or self.gop_pattern[0] != "I" or set(self.gop_pattern) - set("IPB"):
            raise ValueError(f"gop_pattern must be non-empty over I/P/B and start with I, got {self.gop_pattern!r}")
        if self.fps <= 0 or self.mtu <= 0:
            raise ValueError("fps and mtu must be positive")


def _seed_from_real(x):
    return int.from_bytes(struct.pack("<d", float(x)), "little")


class VbrState:
    """Frame generator whose sample path depends only on ``initial_seed``.

    The rate factor scales the draws after they are made, so every rate
    factor sees the same underlying path.
    """

    def __init__(self, cfg: VbrConfig, start=0.0):
        self.cfg = cfg
        self.gop_index = 0
        self.frame_count = 0
        self.start = start
        self.now = start
        self.rng = RngStream(_seed_from_real(cfg.initial_seed), "vbr")

    def raw_draw(self):
        ftype = self.cfg.gop_pattern[self.gop_index]
        mu, sigma = self.cfg.frame_size_params[ftype]
        return ftype, self.rng.lognormal(mu, sigma)


def next_vbr_frame(state: VbrState, cfg: VbrConfig | None = None):
    """(frame size in bytes, frame type, next frame time); advances ``state``."""
    cfg = cfg or state.cfg
    ftype, raw = state.raw_draw()
    size = max(1, int(round(cfg.rate_factor * raw)))
    state.gop_index = (state.gop_index + 1) % len(cfg.gop_pattern)
    state.frame_count += 1
    state.now = state.start + state.frame_count / cfg.fps
    return size, ftype, state.now


def fragment(size, mtu, now, flow: Flow, first_id=None):
    if mtu <= 0:
        raise ValueError(f"mtu must be positive, got {mtu}")
    n = max(1, -(-size // mtu))
    packets = []
    for k in range(n):
        part = mtu if k < n - 1 else size - mtu * (n - 1)
        pid = new_packet_id() if first_id is None else first_id + k
        packets.append(Packet(pid, flow.flow_id, flow.source, flow.destination, part, now))
    return packets


def build_flows(n_nodes, n_sources, rng: RngStream, kind=TrafficKind.CBR, start_window=(10.0, 20.0), stop=1200.0):
    """``n_sources`` flows over disjoint (source, destination) node pairs."""
    if n_sources < 0:
        raise ValueError("n_sources must be >= 0")
    if 2 * n_sources > n_nodes:
        raise ValueError(f"{n_sources} sources need {2 * n_sources} distinct nodes, only {n_nodes} available")
    order = [int(i) for i in rng.permutation(n_nodes)]
    flows = []
    for k in range(n_sources):
        start = rng.uniform(*start_window) if start_window[1] > start_window[0] else float(start_window[0])
        flows.append(Flow(k, order[2 * k], order[2 * k + 1], start, stop, kind))
    return flows
