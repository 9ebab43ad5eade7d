"""OLSR node engine: HELLO link sensing, MPR selection, TC flooding and routes.

Only the single-interface core of the protocol is modelled; willingness is
the same for every node and there is no link hysteresis.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

SYM = "sym"
ASYM = "asym"
MPR = "mpr"

HEADER_BYTES = 16
BYTES_PER_ID = 4


class TableCorruption(RuntimeError):
    pass


@dataclass(frozen=True)
class OlsrTimers:
    hello_interval: float = 2.0
    tc_interval: float = 5.0
    neighbor_hold: float = 6.0
    topology_hold: float = 15.0
    jitter: float = 0.1
    duplicate_hold: float = 30.0

    def __post_init__(self):
        if self.hello_interval <= 0 or self.tc_interval <= 0:
            raise ValueError("emission intervals must be positive")
        if self.neighbor_hold <= self.hello_interval:
            raise ValueError(f"neighbor_hold ({self.neighbor_hold}) must exceed hello_interval ({self.hello_interval})")
        if self.topology_hold <= self.tc_interval:
            raise ValueError(f"topology_hold ({self.topology_hold}) must exceed tc_interval ({self.tc_interval})")
        if not 0 <= self.jitter < min(self.hello_interval, self.tc_interval):
            raise ValueError(f"jitter must be in [0, min interval), got {self.jitter}")


@dataclass(frozen=True)
class HelloMsg:
    originator: int
    time: float
    entries: tuple  # ((neighbor id, status), ...)

    @property
    def size_bytes(self):
        return HEADER_BYTES + BYTES_PER_ID * len(self.entries)


@dataclass(frozen=True)
class TcMsg:
    originator: int
    ansn: int
    advertised: tuple
    seq: int
    ttl: int = 255
    hops: int = 0

    @property
    def size_bytes(self):
        return HEADER_BYTES + BYTES_PER_ID * len(self.advertised)

    @property
    def key(self):
        return (self.originator, self.seq)

    def relayed(self):
        return TcMsg(self.originator, self.ansn, self.advertised, self.seq, self.ttl - 1, self.hops + 1)


def select_mprs(sym_neighbors, two_hop):
    """Greedy MPR set covering every strict two-hop node.

    ``two_hop`` maps each strict 2-hop node to the symmetric neighbours that
    reach it. Sole reachers are taken first; then the neighbour covering the
    most uncovered nodes wins, ties broken by higher degree, then lower id.
    """
    reach_of = {}
    for target, via in two_hop.items():
        if not via:
            raise TableCorruption(f"two-hop node {target} has no reaching neighbour")
        for y in via:
            if y not in sym_neighbors:
                raise TableCorruption(f"two-hop node {target} reached via non-neighbour {y}")
            reach_of.setdefault(y, set()).add(target)

    mprs = set()
    for via in two_hop.values():
        if len(via) == 1:
            mprs |= via
    uncovered = set(two_hop)
    for y in mprs:
        uncovered -= reach_of[y]
    while uncovered:
        best = max(
            (y for y in reach_of if y not in mprs),
            key=lambda y: (len(reach_of[y] & uncovered), len(reach_of[y]), -y),
        )
        mprs.add(best)
        uncovered -= reach_of[best]
    return mprs


_LINK, _SYM, _TWO, _SEL, _TOPO, _DUP = range(6)


class OlsrState:
    def __init__(self, node_id, timers=None):
        self.node_id = node_id
        self.timers = timers or OlsrTimers()
        self.links = {}  # neighbour -> [heard_until, sym_until]
        self.two_hop_via = {}  # neighbour -> (frozenset of its sym neighbours, expiry)
        self.mpr = set()
        self.selectors = {}  # selector -> expiry
        self.topology = {}  # last hop -> {dest: expiry}
        self.topology_ansn = {}  # last hop -> ansn of the entries held
        self.routes = {}  # dest -> (next hop, hop count)
        self.duplicates = {}  # (originator, seq) -> expiry
        self.ansn = 0
        self.msg_seq = 0
        self._advertised = None
        self._timers = []  # heap of (expiry, table, key); stale entries skipped
        self._mpr_dirty = False
        self._routes_dirty = False

    # ---- table maintenance --------------------------------------------------

    def _arm(self, expiry, table, key):
        heapq.heappush(self._timers, (expiry, table, key))

    def expire(self, now):
        heap = self._timers
        if not heap or heap[0][0] > now:
            return
        changed = False
        while heap and heap[0][0] <= now:
            exp, table, key = heapq.heappop(heap)
            if table == _LINK:
                entry = self.links.get(key)
                if entry is not None and entry[0] == exp:
                    del self.links[key]
                    self.two_hop_via.pop(key, None)
                    changed = True
            elif table == _SYM:
                entry = self.links.get(key)
                if entry is not None and entry[1] == exp:
                    entry[1] = -math.inf
                    self.two_hop_via.pop(key, None)
                    changed = True
            elif table == _TWO:
                entry = self.two_hop_via.get(key)
                if entry is not None and entry[1] == exp:
                    del self.two_hop_via[key]
                    changed = True
            elif table == _SEL:
                if self.selectors.get(key) == exp:
                    del self.selectors[key]
            elif table == _TOPO:
                last, dest = key
                dests = self.topology.get(last)
                if dests is not None and dests.get(dest) == exp:
                    del dests[dest]
                    if not dests:
                        del self.topology[last]
                    self._routes_dirty = True
            elif self.duplicates.get(key) == exp:
                del self.duplicates[key]
        if changed:
            self._mpr_dirty = self._routes_dirty = True

    def is_sym(self, nb, now):
        entry = self.links.get(nb)
        return entry is not None and entry[1] > now

    def sym_neighbors(self, now):
        self.expire(now)
        return {nb for nb, (_, s) in self.links.items() if s > now}

    def two_hop_table(self, now):
        """Strict two-hop node -> set of symmetric neighbours reaching it."""
        sym = self.sym_neighbors(now)
        table = {}
        for nb in sym:
            entry = self.two_hop_via.get(nb)
            if entry is None:
                continue
            for c in entry[0]:
                if c != self.node_id and c not in sym:
                    table.setdefault(c, set()).add(nb)
        return table

    def mpr_set(self, now):
        self.expire(now)
        if self._mpr_dirty:
            self.mpr = select_mprs(self.sym_neighbors(now), self.two_hop_table(now))
            self._mpr_dirty = False
        return self.mpr

    def selector_set(self, now):
        self.expire(now)
        return set(self.selectors)

    def routing_table(self, now):
        self.expire(now)
        if self._routes_dirty:
            self.routes = compute_routes(self, now)
            self._routes_dirty = False
        return self.routes


def emit_hello(state: OlsrState, now) -> HelloMsg:
    mprs = state.mpr_set(now)
    entries = []
    for nb in sorted(state.links):
        if nb in mprs:
            status = MPR
        elif state.is_sym(nb, now):
            status = SYM
        else:
            status = ASYM
        entries.append((nb, status))
    return HelloMsg(state.node_id, now, tuple(entries))


def process_hello(state: OlsrState, msg: HelloMsg, now):
    me = state.node_id
    b = msg.originator
    if b == me:
        return state
    state.expire(now)
    hold = now + state.timers.neighbor_hold
    statuses = dict(msg.entries)
    entry = state.links.get(b)
    was_sym = entry is not None and entry[1] > now
    if entry is None:
        entry = state.links[b] = [hold, -math.inf]
    entry[0] = hold
    state._arm(hold, _LINK, b)
    if me in statuses:
        entry[1] = hold
        state._arm(hold, _SYM, b)
    is_sym = entry[1] > now

    if is_sym:
        reach = frozenset(n for n, s in msg.entries if s in (SYM, MPR) and n != me)
        old = state.two_hop_via.get(b)
        if old is None or old[0] != reach:
            state._mpr_dirty = state._routes_dirty = True
        state.two_hop_via[b] = (reach, hold)
        state._arm(hold, _TWO, b)
    elif b in state.two_hop_via:
        del state.two_hop_via[b]
        state._mpr_dirty = state._routes_dirty = True
    if was_sym != is_sym:
        state._mpr_dirty = state._routes_dirty = True

    if statuses.get(me) == MPR:
        state.selectors[b] = hold
        state._arm(hold, _SEL, b)
    else:
        state.selectors.pop(b, None)
    return state


def emit_tc(state: OlsrState, now):
    selectors = state.selector_set(now)
    if not selectors:
        return None
    advertised = tuple(sorted(selectors))
    if advertised != state._advertised:
        state.ansn += 1
        state._advertised = advertised
    state.msg_seq += 1
    key = (state.node_id, state.msg_seq)
    state.duplicates[key] = now + state.timers.duplicate_hold
    state._arm(state.duplicates[key], _DUP, key)
    return TcMsg(state.node_id, state.ansn, advertised, state.msg_seq)


def forward_flooded(state: OlsrState, msg: TcMsg, sender, now) -> bool:
    """Relay iff ``sender`` elected us as MPR and this copy is the first seen."""
    if msg.ttl <= 0:
        return False
    state.expire(now)
    fresh = msg.key not in state.duplicates
    exp = now + state.timers.duplicate_hold
    state.duplicates[msg.key] = exp
    state._arm(exp, _DUP, msg.key)
    return fresh and sender in state.selectors


def process_tc(state: OlsrState, msg: TcMsg, now):
    """Merge a TC into the topology table (stale ANSNs are ignored)."""
    last = msg.originator
    if last == state.node_id:
        return
    held = state.topology_ansn.get(last)
    if held is not None and last in state.topology and msg.ansn < held:
        return
    exp = now + state.timers.topology_hold
    dests = state.topology.get(last)
    if dests is None or held is None or msg.ansn > held:
        new = {d: exp for d in msg.advertised}
        if dests is None or set(dests) != set(new):
            state._routes_dirty = True
        state.topology[last] = new
    else:
        for d in msg.advertised:
            if d not in dests:
                state._routes_dirty = True
            dests[d] = exp
    for d in msg.advertised:
        state._arm(exp, _TOPO, (last, d))
    state.topology_ansn[last] = msg.ansn


def receive_tc(state: OlsrState, msg: TcMsg, sender, now):
    """Handle a TC copy heard from ``sender``; returns the copy to relay or None."""
    state.expire(now)
    if msg.originator == state.node_id or not state.is_sym(sender, now):
        return None
    if msg.key not in state.duplicates:
        process_tc(state, msg, now)
    if forward_flooded(state, msg, sender, now) and msg.ttl > 1:
        return msg.relayed()
    return None


def compute_routes(state: OlsrState, now):
    """Minimum-hop routes over symmetric links, 2-hop links and TC edges.

    Breadth-first from this node. Each layer is scanned in id order and the
    first parent to reach a node fixes its next hop, so ties resolve to the
    lowest-id parent.
    """
    me = state.node_id
    sym = sorted(state.sym_neighbors(now))
    routes = {nb: (nb, 1) for nb in sym}
    topology, two_hop_via = state.topology, state.two_hop_via
    frontier = sym
    hops = 1
    while frontier:
        hops += 1
        nxt = []
        for u in frontier:
            first = routes[u][0]
            via = two_hop_via.get(u)
            for succ in (topology.get(u, ()), via[0] if via is not None else ()):
                for v in succ:
                    if v != me and v not in routes:
                        routes[v] = (first, hops)
                        nxt.append(v)
        nxt.sort()
        frontier = nxt
    return routes


def route_data(state: OlsrState, destination, now):
    """Next hop toward ``destination``, or None when there is no route."""
    hit = state.routing_table(now).get(destination)
    return None if hit is None else hit[0]
