"""Per-packet ledger and the three QoS metrics: mean delay, throughput, PDR."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field


@dataclass
class PacketRecord:
    packet_id: int
    flow_id: int
    size: int
    h_t: float
    h_r: float | None = None
    drop_reason: str | None = None

    @property
    def delay(self):
        return None if self.h_r is None else self.h_r - self.h_t


@dataclass
class MetricsReport:
    avg_delay: float | None
    throughput: float
    pdr: float | None
    sent: int
    received: int
    dropped: int
    in_flight: int
    drops_by_reason: dict = field(default_factory=dict)
    per_flow: dict = field(default_factory=dict)


class MetricsLedger:
    def __init__(self, t0=0.0, t1=1200.0):
        self.window = (float(t0), float(t1))
        self.records = {}
        self.n_sent = 0
        self.n_received = 0
        self.n_dropped = 0
        self._bytes_received = 0

    def record_send(self, packet_id, flow_id, size, h_t):
        if packet_id in self.records:
            raise ValueError(f"packet {packet_id} already recorded as sent")
        self.records[packet_id] = PacketRecord(packet_id, flow_id, size, h_t)
        self.n_sent += 1

    def _get(self, packet_id):
        try:
            return self.records[packet_id]
        except KeyError:
            raise KeyError(f"unknown packet id {packet_id}") from None

    def record_received(self, packet_id, h_r):
        rec = self._get(packet_id)
        if rec.h_r is not None:
            return False  # later copies are ignored
        if rec.drop_reason is not None:
            raise ValueError(f"packet {packet_id} already dropped ({rec.drop_reason})")
        if h_r < rec.h_t:
            raise ValueError(f"packet {packet_id} received at {h_r} before emission at {rec.h_t}")
        rec.h_r = h_r
        self.n_received += 1
        self._bytes_received += rec.size
        return True

    def record_dropped(self, packet_id, reason):
        rec = self._get(packet_id)
        if rec.h_r is not None or rec.drop_reason is not None:
            raise ValueError(f"packet {packet_id} already has an outcome")
        rec.drop_reason = reason
        self.n_dropped += 1

    def record_outcome(self, packet_id, outcome, value):
        """``outcome`` is ``"received"`` (value = H_r) or ``"dropped"`` (value = reason)."""
        if outcome == "received":
            return self.record_received(packet_id, value)
        if outcome == "dropped":
            return self.record_dropped(packet_id, value)
        raise ValueError(f"unknown outcome {outcome!r}")

    @property
    def in_flight(self):
        return self.n_sent - self.n_received - self.n_dropped

    def avg_delay(self):
        if self.n_received == 0:
            return None
        # fsum keeps the result independent of reception order
        return math.fsum(r.h_r - r.h_t for r in self.records.values() if r.h_r is not None) / self.n_received

    def measured_throughput(self):
        t0, t1 = self.window
        if not t1 > t0:
            raise ValueError(f"empty measurement window {self.window}")
        return self._bytes_received * 8.0 / (t1 - t0)

    def pdr(self):
        if self.n_sent == 0:
            raise ValueError("PDR undefined: no data packets sent")
        return self.n_received / self.n_sent

    def drops_by_reason(self):
        return dict(sorted(Counter(r.drop_reason for r in self.records.values() if r.drop_reason).items()))

    def per_flow(self):
        out = {}
        for rec in self.records.values():
            f = out.setdefault(rec.flow_id, {"sent": 0, "received": 0, "delay_sum": 0.0, "bytes": 0})
            f["sent"] += 1
            if rec.h_r is not None:
                f["received"] += 1
                f["delay_sum"] += rec.h_r - rec.h_t
                f["bytes"] += rec.size
        for f in out.values():
            f["avg_delay"] = f["delay_sum"] / f["received"] if f["received"] else None
            f["pdr"] = f["received"] / f["sent"]
        return dict(sorted(out.items()))

    def report(self):
        return MetricsReport(
            avg_delay=self.avg_delay(),
            throughput=self.measured_throughput(),
            pdr=self.pdr() if self.n_sent else None,
            sent=self.n_sent,
            received=self.n_received,
            dropped=self.n_dropped,
            in_flight=self.in_flight,
            drops_by_reason=self.drops_by_reason(),
            per_flow=self.per_flow(),
        )

    def dump_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["packet_id", "flow_id", "bytes", "h_t", "h_r", "drop_reason"])
        for rec in sorted(self.records.values(), key=lambda r: r.packet_id):
            w.writerow([rec.packet_id, rec.flow_id, rec.size, repr(rec.h_t),
                        "" if rec.h_r is None else repr(rec.h_r), rec.drop_reason or ""])
        return buf.getvalue()


def metrics_from_dump(text, window):
    """Recompute (avg_delay, throughput, pdr) from a raw record dump."""
    rows = list(csv.DictReader(io.StringIO(text)))
    delays = [float(r["h_r"]) - float(r["h_t"]) for r in rows if r["h_r"]]
    received_bytes = sum(int(r["bytes"]) for r in rows if r["h_r"])
    avg = math.fsum(delays) / len(delays) if delays else None
    thr = received_bytes * 8.0 / (window[1] - window[0])
    pdr = len(delays) / len(rows) if rows else None
    return avg, thr, pdr


def avg_delay(ledger):
    return ledger.avg_delay()


def measured_throughput(ledger):
    return ledger.measured_throughput()


def pdr(ledger):
    return ledger.pdr()
