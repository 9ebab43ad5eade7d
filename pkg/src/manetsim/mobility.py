"""Random Waypoint, Random Direction and steady-state RWP node trajectories.

Every generated coordinate, speed and pause-end time is snapped to a 1e-6
grid. That is the resolution of the NS-2 trace dialect, so exported traces
re-import without drift (see :mod:`manetsim.ns2trace`).
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import accel

GRID_DECIMALS = 6
_EDGE_TOL = 1e-9


class Model(str, enum.Enum):
    RWP = "rwp"
    RD = "rd"
    MBG_SS = "mbgss"
    STATIC = "static"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        for m in cls:
            if m.value == key or m.name.replace("_", "").lower() == key:
                return m
        raise ValueError(f"unknown mobility model {text!r}")


@dataclass(frozen=True)
class AreaBounds:
    width: float = 1000.0
    height: float = 1000.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"area must be strictly positive, got {self.width}x{self.height}")

    def contains(self, p, tol=0.0):
        return -tol <= p[0] <= self.width + tol and -tol <= p[1] <= self.height + tol


@dataclass(frozen=True)
class MobilityConfig:
    model: Model = Model.RWP
    v_min: float = 1.0
    v_max: float = 10.0
    pause: float = 0.0

    def __post_init__(self):
        if self.model is not Model.STATIC and not (0 < self.v_min <= self.v_max):
            raise ValueError(f"need 0 < v_min <= v_max, got v_min={self.v_min}, v_max={self.v_max}")
        if self.pause < 0:
            raise ValueError(f"pause must be >= 0, got {self.pause}")


@dataclass
class MovementLeg:
    origin: tuple
    destination: tuple
    speed: float
    depart_at: float
    arrive_at: float

    @classmethod
    def between(cls, origin, destination, speed, depart_at):
        dist = math.hypot(destination[0] - origin[0], destination[1] - origin[1])
        if dist == 0.0:
            return cls(origin, destination, speed, depart_at, depart_at)
        return cls(origin, destination, speed, depart_at, depart_at + dist / speed)

    @property
    def distance(self):
        return math.hypot(self.destination[0] - self.origin[0], self.destination[1] - self.origin[1])

    def position(self, t):
        if t <= self.depart_at:
            return self.origin
        if t >= self.arrive_at:
            return self.destination
        ox, oy = self.origin
        dist = self.distance
        if dist == 0.0:
            return self.origin
        step = (t - self.depart_at) * self.speed
        return (ox + step * (self.destination[0] - ox) / dist, oy + step * (self.destination[1] - oy) / dist)


@dataclass
class NodeTrack:
    """Trajectory state of one node.

    ``held_since`` is when the node reached the current leg's origin. The
    node sits still on ``[held_since, leg.depart_at)`` and moves on
    ``[leg.depart_at, leg.arrive_at]``. ``legs`` keeps the full history.
    """

    node_id: int
    leg: MovementLeg
    cfg: MobilityConfig
    area: AreaBounds
    held_since: float = 0.0
    heading: float | None = None
    legs: list = field(default_factory=list, repr=False)

    def phase_at(self, t):
        return "paused" if t < self.leg.depart_at or self.leg.speed == 0.0 else "moving"

    @property
    def next_event_time(self):
        return self.leg.arrive_at


def _q(x):
    return round(float(x), GRID_DECIMALS)


def _uniform_point(rng, area):
    return (_q(rng.uniform(0.0, area.width)), _q(rng.uniform(0.0, area.height)))


def _uniform_speed(rng, cfg):
    if cfg.v_min == cfg.v_max:
        return float(cfg.v_min)
    return _q(rng.uniform(cfg.v_min, cfg.v_max))


def _new_track(node_id, leg, cfg, area, held_since=0.0, heading=None):
    return NodeTrack(node_id, leg, cfg, area, held_since, heading, [leg])


def init_static(node_id, position, cfg, area):
    pos = (_q(position[0]), _q(position[1]))
    if not area.contains(pos):
        raise ValueError(f"node {node_id} placed outside area at {pos}")
    leg = MovementLeg(pos, pos, 0.0, 0.0, math.inf)
    return _new_track(node_id, leg, cfg, area)


def init_rwp(rng, area, cfg, node_id=0):
    origin = _uniform_point(rng, area)
    dest = _uniform_point(rng, area)
    leg = MovementLeg.between(origin, dest, _uniform_speed(rng, cfg), 0.0)
    return _new_track(node_id, leg, cfg, area)


def ray_to_boundary(origin, heading, area):
    """Point where the ray from ``origin`` along ``heading`` leaves the area."""
    x, y = origin
    c, s = math.cos(heading), math.sin(heading)
    best, axis, wall = math.inf, None, None
    if c > 0:
        best, axis, wall = (area.width - x) / c, 0, area.width
    elif c < 0:
        best, axis, wall = -x / c, 0, 0.0
    if s > 0:
        t = (area.height - y) / s
        if t < best:
            best, axis, wall = t, 1, area.height
    elif s < 0:
        t = -y / s
        if t < best:
            best, axis, wall = t, 1, 0.0
    if axis == 0:
        return (wall, min(max(_q(y + best * s), 0.0), area.height))
    return (min(max(_q(x + best * c), 0.0), area.width), wall)


def inward_normals(position, area, tol=_EDGE_TOL):
    """Headings of the inward normals of every wall the position touches."""
    x, y = position
    normals = []
    if x <= tol:
        normals.append(0.0)
    if x >= area.width - tol:
        normals.append(math.pi)
    if y <= tol:
        normals.append(0.5 * math.pi)
    if y >= area.height - tol:
        normals.append(1.5 * math.pi)
    return normals


def next_direction_rd(rng, position, area):
    """Fresh heading for a node sitting on the boundary.

    Uniform over the half-plane of directions pointing back into the area,
    i.e. 0..180 degrees measured from the wall. At a corner the two
    half-planes intersect in a quarter-plane.
    """
    normals = inward_normals(position, area)
    if not normals:
        raise ValueError(f"position {position} is not on the area boundary")
    if len(normals) == 1:
        return (normals[0] + rng.uniform(-0.5 * math.pi, 0.5 * math.pi)) % (2 * math.pi)
    a, b = normals[:2]
    # bisector of two perpendicular normals, handling the 0/2pi wrap
    mid = math.atan2(math.sin(a) + math.sin(b), math.cos(a) + math.cos(b))
    return (mid + rng.uniform(-0.25 * math.pi, 0.25 * math.pi)) % (2 * math.pi)


def _rd_leg(rng, origin, heading_fn, cfg, area, depart_at):
    for _ in range(1000):
        heading = heading_fn()
        dest = ray_to_boundary(origin, heading, area)
        if math.hypot(dest[0] - origin[0], dest[1] - origin[1]) > 1e-6:
            return MovementLeg.between(origin, dest, _uniform_speed(rng, cfg), depart_at), heading
    raise RuntimeError(f"could not find a travel direction from {origin}")


def init_rd(rng, area, cfg, node_id=0):
    origin = _uniform_point(rng, area)
    leg, heading = _rd_leg(rng, origin, lambda: rng.uniform(0.0, 2 * math.pi), cfg, area, 0.0)
    return _new_track(node_id, leg, cfg, area, heading=heading)


def mean_leg_length(area):
    """Mean distance between two uniform points of a ``width x height`` rectangle."""
    a, b = area.width, area.height
    d = math.hypot(a, b)
    return (a**3 / b**2 + b**3 / a**2 + d * (3 - a**2 / b**2 - b**2 / a**2)
            + 2.5 * (b**2 / a * math.log((a + d) / b) + a**2 / b * math.log((b + d) / a))) / 15.0


def mean_inverse_speed(cfg):
    if cfg.v_min == cfg.v_max:
        return 1.0 / cfg.v_min
    return math.log(cfg.v_max / cfg.v_min) / (cfg.v_max - cfg.v_min)


def stationary_mean_speed(cfg):
    """Long-run time-average speed of a moving RWP node (speed law uniform)."""
    return 1.0 / mean_inverse_speed(cfg)


def _stationary_speed(rng, cfg):
    # time-biased uniform speed: density proportional to 1/v
    if cfg.v_min == cfg.v_max:
        return float(cfg.v_min)
    return _q(cfg.v_min * (cfg.v_max / cfg.v_min) ** rng.random())


def init_steady_state(rng, area, cfg, node_id=0):
    if cfg.v_min <= 0:
        raise ValueError("steady-state initialization needs v_min > 0")
    travel = mean_leg_length(area) * mean_inverse_speed(cfg)
    p_pause = cfg.pause / (cfg.pause + travel)
    if cfg.pause > 0 and rng.random() < p_pause:
        origin = _uniform_point(rng, area)
        remaining = _q(rng.uniform(0.0, cfg.pause))
        leg = MovementLeg.between(origin, _uniform_point(rng, area), _uniform_speed(rng, cfg), remaining)
        return _new_track(node_id, leg, cfg, area)
    # length-biased waypoint pair by rejection, then a uniform point on it
    diag = math.hypot(area.width, area.height)
    while True:
        a = (rng.uniform(0.0, area.width), rng.uniform(0.0, area.height))
        b = _uniform_point(rng, area)
        if rng.random() * diag <= math.hypot(b[0] - a[0], b[1] - a[1]):
            break
    u = rng.random()
    origin = (_q(a[0] + u * (b[0] - a[0])), _q(a[1] + u * (b[1] - a[1])))
    leg = MovementLeg.between(origin, b, _stationary_speed(rng, cfg), 0.0)
    return _new_track(node_id, leg, cfg, area)


def init_track(rng, area, cfg, node_id=0, position=None):
    if cfg.model is Model.STATIC:
        if position is None:
            position = _uniform_point(rng, area)
        return init_static(node_id, position, cfg, area)
    if cfg.model is Model.RWP:
        return init_rwp(rng, area, cfg, node_id)
    if cfg.model is Model.RD:
        return init_rd(rng, area, cfg, node_id)
    return init_steady_state(rng, area, cfg, node_id)


def position_at(track, t):
    leg = track.leg
    if not (track.held_since <= t <= leg.arrive_at):
        raise ValueError(f"t={t} outside current leg interval [{track.held_since}, {leg.arrive_at}] of node {track.node_id}")
    return leg.position(t)


def history_position(track, t):
    """Position from the recorded leg history (any t >= 0 it covers)."""
    legs = track.legs
    k = bisect.bisect_right([lg.depart_at for lg in legs], t) - 1
    if k < 0:
        return legs[0].origin
    return legs[k].position(t)


def advance(track, rng, now):
    """Install the next leg once the current one has been completed."""
    leg = track.leg
    if now != leg.arrive_at:
        raise ValueError(f"advance at t={now} but node {track.node_id} arrives at {leg.arrive_at}")
    cfg, area = track.cfg, track.area
    origin = leg.destination
    depart = now if cfg.pause == 0 else _q(now + cfg.pause)
    if cfg.model is Model.RD:
        new, heading = _rd_leg(rng, origin, lambda: next_direction_rd(rng, origin, area), cfg, area, depart)
        track.heading = heading
    elif cfg.model is Model.STATIC:
        raise ValueError("static nodes never advance")
    else:
        new = MovementLeg.between(origin, _uniform_point(rng, area), _uniform_speed(rng, cfg), depart)
    track.leg = new
    track.held_since = now
    track.legs.append(new)
    return new.arrive_at


def extend_to(track, rng, horizon):
    """Advance ``track`` until its current leg reaches past ``horizon``."""
    while track.leg.arrive_at <= horizon:
        advance(track, rng, track.leg.arrive_at)
    return track


def plan_tracks(n_nodes, cfg, area, rng, horizon, positions=None):
    """Initialise ``n_nodes`` tracks and extend them to ``horizon``.

    Node ``i`` draws from the sub-stream ``rng.fork(str(i))``, matching what
    the simulator uses, so planned and simulated trajectories coincide.
    """
    tracks = []
    for i in range(n_nodes):
        sub = rng.fork(str(i))
        pos = positions[i] if positions is not None else None
        tr = init_track(sub, area, cfg, i, pos)
        if cfg.model is not Model.STATIC:
            extend_to(tr, sub, horizon)
        tracks.append(tr)
    return tracks


def leg_arrays(track):
    """(depart, arrive, speed) arrays over the recorded history."""
    legs = track.legs
    return (np.array([lg.depart_at for lg in legs]),
            np.array([lg.arrive_at for lg in legs]),
            np.array([lg.speed for lg in legs]))


def window_mean_speed(track, t0, t1):
    dep, arr, spd = leg_arrays(track)
    return accel.window_mean_speed(dep, arr, spd, float(t0), float(t1))
