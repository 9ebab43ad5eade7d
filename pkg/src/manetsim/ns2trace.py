"""NS-2 movement trace (setdest dialect) writer and reader."""

import math
import re

from .mobility import AreaBounds, MobilityConfig, Model, MovementLeg, NodeTrack

_SET_RE = re.compile(r'^\$node_\((\d+)\)\s+set\s+([XYZ])_\s+(\S+)\s*$')
_AT_RE = re.compile(r'^\$ns_\s+at\s+(\S+)\s+"\$node_\((\d+)\)\s+setdest\s+(\S+)\s+(\S+)\s+(\S+)"\s*$')

# printed times are rounded to 1e-6 s; a setdest this close to the computed
# arrival of the previous leg continues from that exact arrival instant
_TIME_SNAP = 1.5e-6


def export_ns2_trace(tracks, horizon):
    lines = []
    for tr in sorted(tracks, key=lambda t: t.node_id):
        x, y = tr.legs[0].origin
        lines.append(f"$node_({tr.node_id}) set X_ {x:.6f}")
        lines.append(f"$node_({tr.node_id}) set Y_ {y:.6f}")
        lines.append(f"$node_({tr.node_id}) set Z_ 0.000000")
    moves = []
    for tr in tracks:
        for leg in tr.legs:
            if leg.speed == 0.0 or leg.depart_at > horizon or leg.distance == 0.0:
                continue
            moves.append((leg.depart_at, tr.node_id, leg))
    moves.sort(key=lambda m: (m[0], m[1]))
    for t, i, leg in moves:
        dx, dy = leg.destination
        lines.append(f'$ns_ at {t:.6f} "$node_({i}) setdest {dx:.6f} {dy:.6f} {leg.speed:.6f}"')
    return "\n".join(lines) + "\n"


def parse_ns2_trace(text, area=None):
    """Rebuild per-node leg histories from trace text.

    Returns a list of :class:`NodeTrack` ordered by node id; query them with
    :func:`manetsim.mobility.history_position`.
    """
    area = area or AreaBounds()
    start = {}
    moves = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _SET_RE.match(line)
        if m:
            node, axis, val = int(m.group(1)), m.group(2), float(m.group(3))
            start.setdefault(node, [0.0, 0.0, 0.0])["XYZ".index(axis)] = val
            continue
        m = _AT_RE.match(line)
        if m:
            t, node = float(m.group(1)), int(m.group(2))
            moves.setdefault(node, []).append((t, float(m.group(3)), float(m.group(4)), float(m.group(5))))
            continue
        raise ValueError(f"line {lineno}: unrecognised trace statement: {raw!r}")

    cfg = MobilityConfig(Model.STATIC)
    tracks = []
    for node in sorted(set(start) | set(moves)):
        x, y, _ = start.get(node, (0.0, 0.0, 0.0))
        pos = (x, y)
        legs = []
        free_at = 0.0
        for t, dx, dy, speed in sorted(moves.get(node, []), key=lambda m: m[0]):
            if legs:
                prev = legs[-1]
                if abs(t - prev.arrive_at) <= _TIME_SNAP:
                    t = prev.arrive_at
                elif t < prev.arrive_at:
                    # setdest interrupting a leg: continue from where the node is
                    pos = prev.position(t)
                    prev.destination, prev.arrive_at = pos, t
                    free_at = t
            t = max(t, free_at)
            leg = MovementLeg.between(pos, (dx, dy), speed, t)
            legs.append(leg)
            pos, free_at = leg.destination, leg.arrive_at
        if not legs:
            legs = [MovementLeg(pos, pos, 0.0, 0.0, math.inf)]
        tr = NodeTrack(node, legs[-1], cfg, area, legs=legs)
        tracks.append(tr)
    return tracks
