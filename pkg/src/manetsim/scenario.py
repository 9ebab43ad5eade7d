"""Scenario files: ``key = value`` lines, ``#`` comments, unknown keys rejected."""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

from .kernel import DEFAULT_HORIZON
from .mobility import AreaBounds, MobilityConfig, Model
from .olsr import OlsrTimers
from .phy import LinkModel
from .traffic import CbrConfig, TrafficKind, VbrConfig

RESOLVED_NAME = "scenario.resolved.conf"


class ScenarioError(ValueError):
    pass


def _positions(text):
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        x, y = chunk.split(",")
        pts.append((float(x), float(y)))
    return tuple(pts)


def _rate_factor(text):
    return None if text.strip().lower() == "auto" else float(text)


# key -> (parser, default); None default marks a mandatory key
KEYS = {
    "n_nodes": (int, None),
    "horizon": (float, DEFAULT_HORIZON),
    "seed": (int, 1),
    "area_width": (float, 1000.0),
    "area_height": (float, 1000.0),
    "model": (Model.parse, Model.RWP),
    "v_min": (float, 1.0),
    "v_max": (float, 10.0),
    "pause_time": (float, 0.0),
    "positions": (_positions, ()),
    "tx_range_m": (float, 250.0),
    "bitrate_bps": (float, 2e6),
    "header_bytes": (int, 58),
    "success_curve": (str, "step"),
    "success_threshold": (float, 1.0),
    "success_k": (float, 1.0),
    "queue_len": (int, 50),
    "hello_interval_s": (float, 2.0),
    "tc_interval_s": (float, 5.0),
    "neighbor_hold_s": (float, 6.0),
    "topology_hold_s": (float, 15.0),
    "jitter_s": (float, 0.1),
    "traffic": (TrafficKind.parse, TrafficKind.CBR),
    "n_sources": (int, 40),
    "cbr_rate_pps": (float, 4.0),
    "cbr_size_bytes": (int, 512),
    "vbr_seed": (float, 0.4),
    "vbr_rate_factor": (_rate_factor, None),
    "vbr_fps": (float, 25.0),
    "vbr_gop": (str, "IBBPBBPBBPBB"),
    "mtu_bytes": (int, 512),
    "traffic_start_min_s": (float, 10.0),
    "traffic_start_max_s": (float, 20.0),
    "traffic_stop_margin_s": (float, 0.0),
    "data_ttl": (int, 64),
}


@dataclass(frozen=True)
class Scenario:
    n_nodes: int
    horizon: float = DEFAULT_HORIZON
    seed: int = 1
    area: AreaBounds = AreaBounds()
    mobility: MobilityConfig = MobilityConfig()
    positions: tuple = ()
    link: LinkModel = LinkModel()
    olsr: OlsrTimers = OlsrTimers()
    traffic: TrafficKind = TrafficKind.CBR
    n_sources: int = 40
    cbr: CbrConfig = CbrConfig()
    vbr: VbrConfig = VbrConfig()
    start_window: tuple = (10.0, 20.0)
    stop_margin: float = 0.0
    data_ttl: int = 64

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ScenarioError(f"n_nodes: need at least 2 nodes, got {self.n_nodes}")
        if self.horizon <= 0:
            raise ScenarioError(f"horizon: must be positive, got {self.horizon}")
        if self.positions and len(self.positions) != self.n_nodes:
            raise ScenarioError(f"positions: {len(self.positions)} given for {self.n_nodes} nodes")
        for i, p in enumerate(self.positions):
            if not self.area.contains(p):
                raise ScenarioError(f"positions: node {i} at {p} is outside the area")
        lo, hi = self.start_window
        if not 0 <= lo <= hi < self.horizon - self.stop_margin:
            raise ScenarioError(f"traffic_start_min_s/max_s: window {self.start_window} must lie inside the horizon")
        if self.n_sources < 0:
            raise ScenarioError("n_sources: must be >= 0")

    @property
    def effective_sources(self):
        """Requested sources, capped so every flow uses two distinct nodes."""
        return min(self.n_sources, self.n_nodes // 2)

    @property
    def traffic_stop(self):
        return self.horizon - self.stop_margin

    def with_overrides(self, **kw):
        return build_scenario({**self.to_mapping(), **kw})

    def to_mapping(self):
        return {
            "n_nodes": self.n_nodes,
            "horizon": self.horizon,
            "seed": self.seed,
            "area_width": self.area.width,
            "area_height": self.area.height,
            "model": self.mobility.model,
            "v_min": self.mobility.v_min,
            "v_max": self.mobility.v_max,
            "pause_time": self.mobility.pause,
            "positions": self.positions,
            "tx_range_m": self.link.tx_range,
            "bitrate_bps": self.link.bitrate,
            "header_bytes": self.link.header_bytes,
            "success_curve": self.link.success_curve,
            "success_threshold": self.link.success_threshold,
            "success_k": self.link.success_k,
            "queue_len": self.link.queue_len,
            "hello_interval_s": self.olsr.hello_interval,
            "tc_interval_s": self.olsr.tc_interval,
            "neighbor_hold_s": self.olsr.neighbor_hold,
            "topology_hold_s": self.olsr.topology_hold,
            "jitter_s": self.olsr.jitter,
            "traffic": self.traffic,
            "n_sources": self.n_sources,
            "cbr_rate_pps": self.cbr.rate,
            "cbr_size_bytes": self.cbr.packet_size,
            "vbr_seed": self.vbr.initial_seed,
            "vbr_rate_factor": self.vbr.rate_factor,
            "vbr_fps": self.vbr.fps,
            "vbr_gop": self.vbr.gop_pattern,
            "mtu_bytes": self.vbr.mtu,
            "traffic_start_min_s": self.start_window[0],
            "traffic_start_max_s": self.start_window[1],
            "traffic_stop_margin_s": self.stop_margin,
            "data_ttl": self.data_ttl,
        }

    def to_text(self):
        lines = []
        for key, val in self.to_mapping().items():
            if key == "positions":
                val = ";".join(f"{x!r},{y!r}" for x, y in val)
            elif hasattr(val, "value"):
                val = val.value
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"

    def fingerprint(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def build_scenario(values: dict) -> Scenario:
    """Build a scenario from already-typed values, filling defaults."""
    unknown = sorted(set(values) - set(KEYS))
    if unknown:
        raise ScenarioError(f"unknown key(s): {', '.join(unknown)}")
    v = {k: values.get(k, default) for k, (_, default) in KEYS.items()}
    if v["n_nodes"] is None:
        raise ScenarioError("n_nodes: mandatory key missing")

    def part(key, fn):
        try:
            return fn()
        except ScenarioError:
            raise
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"{key}: {exc}") from None

    n_nodes = int(v["n_nodes"])
    n_src = min(int(v["n_sources"]), n_nodes // 2)
    rate = v["vbr_rate_factor"]
    if rate is None:
        rate = 0.33 if n_src >= 40 else 0.25
    return part("scenario", lambda: Scenario(
        n_nodes=n_nodes,
        horizon=float(v["horizon"]),
        seed=int(v["seed"]),
        area=part("area_width/area_height", lambda: AreaBounds(float(v["area_width"]), float(v["area_height"]))),
        mobility=part("v_min/v_max/pause_time", lambda: MobilityConfig(Model.parse(v["model"]), float(v["v_min"]),
                                                                       float(v["v_max"]), float(v["pause_time"]))),
        positions=tuple((float(x), float(y)) for x, y in v["positions"]),
        link=part("link", lambda: LinkModel(
            tx_range=float(v["tx_range_m"]), bitrate=float(v["bitrate_bps"]), header_bytes=int(v["header_bytes"]),
            success_curve=str(v["success_curve"]), success_threshold=float(v["success_threshold"]),
            success_k=float(v["success_k"]), queue_len=int(v["queue_len"]))),
        olsr=part("olsr timers", lambda: OlsrTimers(
            float(v["hello_interval_s"]), float(v["tc_interval_s"]), float(v["neighbor_hold_s"]),
            float(v["topology_hold_s"]), float(v["jitter_s"]))),
        traffic=TrafficKind.parse(v["traffic"]),
        n_sources=int(v["n_sources"]),
        cbr=part("cbr_rate_pps/cbr_size_bytes", lambda: CbrConfig(int(v["cbr_size_bytes"]), float(v["cbr_rate_pps"]))),
        vbr=part("vbr", lambda: VbrConfig(float(v["vbr_seed"]), float(rate), float(v["vbr_fps"]), str(v["vbr_gop"]),
                                          mtu=int(v["mtu_bytes"]))),
        start_window=(float(v["traffic_start_min_s"]), float(v["traffic_start_max_s"])),
        stop_margin=float(v["traffic_stop_margin_s"]),
        data_ttl=int(v["data_ttl"]),
    ))


def parse_scenario_text(text, overrides=None) -> dict:
    """Parse scenario text into a typed key -> value mapping (no defaults)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in KEYS:
            raise ScenarioError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = KEYS[key][0](val)
        except ValueError as exc:
            raise ScenarioError(f"line {lineno}: bad value for {key}: {exc}") from None
    values.update(overrides or {})
    return values


def load_scenario(path, out_dir=None, overrides=None) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        scenario = build_scenario(parse_scenario_text(fh.read(), overrides))
    if out_dir is not None:
        echo_scenario(scenario, out_dir)
    return scenario


def echo_scenario(scenario, out_dir, name=RESOLVED_NAME):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scenario.to_text())
    return path
