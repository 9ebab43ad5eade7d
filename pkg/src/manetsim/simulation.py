"""Single-run orchestration: mobility -> radio -> OLSR -> traffic -> metrics."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import accel, olsr
from .kernel import EventKind, EventQueue, RngStream
from .metrics import MetricsLedger, MetricsReport
from .mobility import Model, advance, init_track
from .phy import BROADCAST, Transmission, TxQueue, transmit
from .traffic import Packet, TrafficKind, VbrState, build_flows, fragment, next_vbr_frame

HELLO, TC, DATA = "hello", "tc", "data"


@dataclass
class RunResult:
    fingerprint: str
    seed: int
    model: str
    traffic: str
    n_nodes: int
    n_sources: int
    report: MetricsReport
    wall_clock: float = field(default=0.0, compare=False)


class Simulation:
    """One deterministic run of a scenario under a root seed.

    ``event_log`` (when enabled) collects ``(time, seq, kind)`` for every
    processed event, which makes replays comparable line by line.
    """

    def __init__(self, scenario, seed=None, log_events=False):
        self.scenario = sc = scenario
        self.seed = sc.seed if seed is None else int(seed)
        self.horizon = sc.horizon
        self.queue = EventQueue()
        self.event_log = [] if log_events else None
        root = RngStream(self.seed)
        n = sc.n_nodes

        mob = root.fork("mobility")
        self.mobility_rngs = [mob.fork(str(i)) for i in range(n)]
        positions = sc.positions or None
        self.tracks = [init_track(self.mobility_rngs[i], sc.area, sc.mobility, i,
                                  positions[i] if positions else None) for i in range(n)]
        self._ox = np.empty(n)
        self._oy = np.empty(n)
        self._dx = np.empty(n)
        self._dy = np.empty(n)
        self._dep = np.empty(n)
        self._arr = np.empty(n)
        for tr in self.tracks:
            self._load_leg(tr)
            if sc.mobility.model is not Model.STATIC and tr.leg.arrive_at <= self.horizon:
                self.queue.schedule(tr.leg.arrive_at, EventKind.WAYPOINT, tr.node_id)
        self._pos_t = None
        self._pos = None

        self.link = sc.link
        self.link_rng = root.fork("link")
        self.tx_queues = [TxQueue(sc.link.queue_len) for _ in range(n)]

        timers = sc.olsr
        self.olsr = [olsr.OlsrState(i, timers) for i in range(n)]
        self.olsr_rngs = [root.fork(f"olsr-{i}") for i in range(n)]
        for i in range(n):
            r = self.olsr_rngs[i]
            self.queue.schedule(r.uniform(0.0, timers.hello_interval), EventKind.HELLO, i)
            self.queue.schedule(r.uniform(0.0, timers.tc_interval), EventKind.TC, i)

        self.ledger = MetricsLedger(0.0, self.horizon)
        self._next_pid = 0
        self.flows = build_flows(n, sc.effective_sources, root.fork("traffic"), sc.traffic,
                                 sc.start_window, sc.traffic_stop)
        for fl in self.flows:
            if sc.traffic is TrafficKind.CBR:
                payload = (fl, 0)
            else:
                payload = (fl, VbrState(sc.vbr, fl.start))
            self.queue.schedule(fl.start, EventKind.TRAFFIC, payload)
        self.queue.schedule(self.horizon, EventKind.SNAPSHOT, None)
        self.snapshot = None
        self.control_sent = 0
        self.control_dropped = 0

        self._handlers = {
            EventKind.WAYPOINT: self._on_waypoint,
            EventKind.HELLO: self._on_hello,
            EventKind.TC: self._on_tc,
            EventKind.TRAFFIC: self._on_traffic,
            EventKind.ARRIVAL: self._on_arrival,
            EventKind.SNAPSHOT: self._on_snapshot,
        }

    # ---- mobility ------------------------------------------------------------

    def _load_leg(self, tr):
        i, leg = tr.node_id, tr.leg
        self._ox[i], self._oy[i] = leg.origin
        self._dx[i], self._dy[i] = leg.destination
        self._dep[i], self._arr[i] = leg.depart_at, leg.arrive_at

    def positions(self, t):
        if t != self._pos_t:
            self._pos = accel.positions_at(self._ox, self._oy, self._dx, self._dy, self._dep, self._arr, t)
            self._pos_t = t
        return self._pos

    def neighbors(self, node, t):
        idx, dist = accel.neighbors_within(self.positions(t), node, self.link.tx_range)
        return dict(zip(idx.tolist(), dist.tolist()))

    def _on_waypoint(self, ev):
        tr = self.tracks[ev.payload]
        nxt = advance(tr, self.mobility_rngs[tr.node_id], ev.fire_at)
        self._load_leg(tr)
        self._pos_t = None
        if nxt <= self.horizon:
            self.queue.schedule(nxt, EventKind.WAYPOINT, tr.node_id)

    # ---- link layer ----------------------------------------------------------

    def _enqueue(self, node, item):
        q = self.tx_queues[node]
        if not q.offer(item):
            if item[0] == DATA:
                self.ledger.record_dropped(item[1].packet_id, "queue-overflow")
            else:
                self.control_dropped += 1
            return
        if not q.busy:
            self._start_tx(node)

    def _start_tx(self, node):
        q = self.tx_queues[node]
        kind, obj, receiver, size = q.pop()
        q.busy = True
        now = self.queue.now
        tx = Transmission.of(node, receiver, obj, size, now, self.link)
        deliveries, drops = transmit(tx, self.link_rng, self.neighbors(node, now), self.link)
        if kind == DATA and drops:
            self.ledger.record_dropped(obj.packet_id, drops[0][1])
        self.queue.schedule(now + tx.air_time, EventKind.ARRIVAL, (node, kind, obj, deliveries))

    def _on_arrival(self, ev):
        sender, kind, obj, deliveries = ev.payload
        now = ev.fire_at
        for rx, _ in deliveries:
            if kind == HELLO:
                olsr.process_hello(self.olsr[rx], obj, now)
            elif kind == TC:
                fwd = olsr.receive_tc(self.olsr[rx], obj, sender, now)
                if fwd is not None:
                    self.control_sent += 1
                    self._enqueue(rx, (TC, fwd, BROADCAST, fwd.size_bytes))
            else:
                obj.hops += 1
                if rx == obj.destination:
                    self.ledger.record_received(obj.packet_id, now)
                else:
                    self._route(rx, obj)
        q = self.tx_queues[sender]
        q.busy = False
        if q.items:
            self._start_tx(sender)

    # ---- OLSR ----------------------------------------------------------------

    def _jittered(self, node, interval):
        j = self.scenario.olsr.jitter
        return interval + (self.olsr_rngs[node].uniform(-j, j) if j > 0 else 0.0)

    def _on_hello(self, ev):
        node, now = ev.payload, ev.fire_at
        msg = olsr.emit_hello(self.olsr[node], now)
        self.control_sent += 1
        self._enqueue(node, (HELLO, msg, BROADCAST, msg.size_bytes))
        nxt = now + self._jittered(node, self.scenario.olsr.hello_interval)
        if nxt <= self.horizon:
            self.queue.schedule(nxt, EventKind.HELLO, node)

    def _on_tc(self, ev):
        node, now = ev.payload, ev.fire_at
        msg = olsr.emit_tc(self.olsr[node], now)
        if msg is not None:
            self.control_sent += 1
            self._enqueue(node, (TC, msg, BROADCAST, msg.size_bytes))
        nxt = now + self._jittered(node, self.scenario.olsr.tc_interval)
        if nxt <= self.horizon:
            self.queue.schedule(nxt, EventKind.TC, node)

    # ---- data plane ----------------------------------------------------------

    def _route(self, node, pkt):
        if pkt.hops >= self.scenario.data_ttl:
            self.ledger.record_dropped(pkt.packet_id, "ttl-expired")
            return
        nh = olsr.route_data(self.olsr[node], pkt.destination, self.queue.now)
        if nh is None:
            self.ledger.record_dropped(pkt.packet_id, "no-route")
            return
        self._enqueue(node, (DATA, pkt, nh, pkt.size))

    def _emit(self, pkt):
        self.ledger.record_send(pkt.packet_id, pkt.flow_id, pkt.size, pkt.created_at)
        self._route(pkt.source, pkt)

    def _on_traffic(self, ev):
        fl, state = ev.payload
        now = ev.fire_at
        if fl.kind is TrafficKind.CBR:
            k = state
            cfg = self.scenario.cbr
            self._emit(Packet(self._next_pid, fl.flow_id, fl.source, fl.destination, cfg.packet_size, now))
            self._next_pid += 1
            nxt = fl.start + (k + 1) / cfg.rate
            if nxt < fl.stop:
                self.queue.schedule(nxt, EventKind.TRAFFIC, (fl, k + 1))
            return
        size, _, nxt = next_vbr_frame(state)
        frags = fragment(size, self.scenario.vbr.mtu, now, fl, first_id=self._next_pid)
        self._next_pid += len(frags)
        for pkt in frags:
            self._emit(pkt)
        if nxt < fl.stop:
            self.queue.schedule(nxt, EventKind.TRAFFIC, (fl, state))

    def _on_snapshot(self, ev):
        self.snapshot = (ev.fire_at, self.ledger.n_sent, self.ledger.n_received, self.ledger.n_dropped)

    # ---- driver --------------------------------------------------------------

    def _dispatch(self, ev):
        if self.event_log is not None:
            self.event_log.append((ev.fire_at, ev.seq, ev.kind.value))
        self._handlers[ev.kind](ev)

    def run(self):
        self.queue.run_until(self.horizon, self._dispatch)
        return self.ledger.report()


def run(scenario, seed=None) -> RunResult:
    t0 = time.perf_counter()
    if seed is not None and int(seed) != scenario.seed:
        scenario = replace(scenario, seed=int(seed))
    sim = Simulation(scenario)
    report = sim.run()
    return RunResult(
        fingerprint=scenario.fingerprint(),
        seed=sim.seed,
        model=scenario.mobility.model.value,
        traffic=scenario.traffic.value,
        n_nodes=scenario.n_nodes,
        n_sources=scenario.effective_sources,
        report=report,
        wall_clock=time.perf_counter() - t0,
    )
