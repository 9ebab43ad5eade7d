import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from manetsim.kernel import RngStream
from manetsim.mobility import (
    AreaBounds, MobilityConfig, Model, MovementLeg, NodeTrack, advance, extend_to, history_position,
    init_rd, init_rwp, init_static, init_steady_state, init_track, mean_inverse_speed, mean_leg_length,
    next_direction_rd, plan_tracks, position_at, ray_to_boundary, stationary_mean_speed,
)

AREA = AreaBounds()
CFG = MobilityConfig(Model.RWP)


def test_model_parse_aliases():
    assert Model.parse("RWP") is Model.RWP
    assert Model.parse("mbg_ss") is Model.MBG_SS
    assert Model.parse(Model.RD) is Model.RD
    with pytest.raises(ValueError):
        Model.parse("levy")


@pytest.mark.parametrize("kw", [dict(v_min=0.0), dict(v_min=5.0, v_max=2.0), dict(pause=-1.0)])
def test_bad_config_rejected(kw):
    with pytest.raises(ValueError):
        MobilityConfig(Model.RWP, **kw)


def test_position_at_interpolates():
    leg = MovementLeg.between((0.0, 0.0), (30.0, 40.0), 5.0, 0.0)
    assert leg.arrive_at == 10.0
    tr = NodeTrack(0, leg, CFG, AREA, legs=[leg])
    assert position_at(tr, 5.0) == pytest.approx((15.0, 20.0))
    assert position_at(tr, 0.0) == (0.0, 0.0)
    assert position_at(tr, 10.0) == (30.0, 40.0)
    with pytest.raises(ValueError):
        position_at(tr, 10.5)


def test_paused_node_sits_at_origin():
    leg = MovementLeg.between((100.0, 100.0), (200.0, 100.0), 10.0, 30.0)
    tr = NodeTrack(0, leg, CFG, AREA, held_since=0.0, legs=[leg])
    assert position_at(tr, 12.0) == (100.0, 100.0)
    assert tr.phase_at(12.0) == "paused"
    assert position_at(tr, 35.0) == pytest.approx((150.0, 100.0))
    assert tr.phase_at(35.0) == "moving"


@pytest.mark.parametrize("pause", [0.0, 30.0])
def test_advance_departs_after_pause(pause):
    cfg = MobilityConfig(Model.RWP, pause=pause)
    rng = RngStream(3)
    tr = init_rwp(rng, AREA, cfg)
    t = tr.leg.arrive_at
    arrive = advance(tr, rng, t)
    assert tr.held_since == t
    assert tr.leg.depart_at == pytest.approx(t + pause, abs=1e-6)
    assert tr.leg.origin == tr.legs[-2].destination
    assert arrive == tr.leg.arrive_at
    assert position_at(tr, t) == tr.leg.origin


def test_advance_must_happen_at_arrival():
    rng = RngStream(3)
    tr = init_rwp(rng, AREA, CFG)
    with pytest.raises(ValueError):
        advance(tr, rng, tr.leg.arrive_at + 1.0)


def test_static_node():
    tr = init_static(4, (10.0, 20.0), MobilityConfig(Model.STATIC), AREA)
    assert position_at(tr, 1e6) == (10.0, 20.0)
    with pytest.raises(ValueError):
        init_static(4, (-1.0, 20.0), MobilityConfig(Model.STATIC), AREA)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32), model=st.sampled_from([Model.RWP, Model.RD, Model.MBG_SS]),
       pause=st.sampled_from([0.0, 5.0]))
def test_nodes_stay_in_area(seed, model, pause):
    cfg = MobilityConfig(model, pause=pause)
    area = AreaBounds(800.0, 300.0)
    tracks = plan_tracks(3, cfg, area, RngStream(seed), 600.0)
    for tr in tracks:
        for lg in tr.legs:
            assert area.contains(lg.origin) and area.contains(lg.destination)
            assert cfg.v_min <= lg.speed <= cfg.v_max
        for t in np.linspace(0, 600, 50):
            assert area.contains(history_position(tr, t), tol=1e-9)


def test_rwp_waypoints_uniform():
    rng = RngStream(11)
    pts = np.array([init_rwp(rng, AREA, CFG).leg.origin for _ in range(10_000)])
    counts, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=10, range=[[0, 1000], [0, 1000]])
    assert stats.chisquare(counts.ravel()).pvalue > 1e-3


def test_rd_legs_end_on_boundary():
    cfg = MobilityConfig(Model.RD)
    rng = RngStream(5)
    tr = init_rd(rng, AREA, cfg)
    while len(tr.legs) < 10_000:
        advance(tr, rng, tr.leg.arrive_at)
    for lg in tr.legs:
        x, y = lg.destination
        assert min(x, AREA.width - x, y, AREA.height - y) <= 1e-9
        assert AREA.contains(lg.destination)


def test_rd_heading_uniform_from_south_wall():
    rng = RngStream(8)
    hs = np.array([next_direction_rd(rng, (400.0, 0.0), AREA) for _ in range(10_000)])
    assert hs.min() >= 0.0 and hs.max() <= math.pi
    assert stats.kstest(hs, stats.uniform(0, math.pi).cdf).pvalue > 1e-3


def test_rd_heading_corner_quarter_plane():
    rng = RngStream(9)
    hs = np.array([next_direction_rd(rng, (0.0, 0.0), AREA) for _ in range(5000)])
    assert hs.min() >= 0.0 and hs.max() <= 0.5 * math.pi
    # top-right corner points into the third quadrant
    hs = np.array([next_direction_rd(rng, (1000.0, 1000.0), AREA) for _ in range(5000)])
    assert hs.min() >= math.pi and hs.max() <= 1.5 * math.pi


def test_rd_heading_needs_boundary():
    with pytest.raises(ValueError):
        next_direction_rd(RngStream(1), (500.0, 500.0), AREA)


@pytest.mark.parametrize("heading,expected", [
    (0.0, (1000.0, 500.0)), (math.pi / 2, (500.0, 1000.0)), (math.pi, (0.0, 500.0)), (math.pi / 4, (1000.0, 1000.0)),
])
def test_ray_to_boundary(heading, expected):
    assert ray_to_boundary((500.0, 500.0), heading, AREA) == pytest.approx(expected, abs=1e-6)


def test_mean_leg_length_square():
    # closed form for the unit square is 0.5214054...
    assert mean_leg_length(AREA) == pytest.approx(521.4054, abs=1e-3)
    rng = np.random.default_rng(0)
    a, b = rng.uniform(0, [400, 900], (200_000, 2)), rng.uniform(0, [400, 900], (200_000, 2))
    mc = np.hypot(*(a - b).T).mean()
    assert mean_leg_length(AreaBounds(400, 900)) == pytest.approx(mc, rel=5e-3)


def rwp_time_average(cfg, duration, seed):
    """Long-run oracle: one plain RWP node followed for ``duration`` seconds."""
    rng = np.random.default_rng(seed)
    t = dist = 0.0
    while t < duration:
        p, q = rng.uniform(0, 1000, 2), rng.uniform(0, 1000, 2)
        v = rng.uniform(cfg.v_min, cfg.v_max)
        d = math.hypot(*(p - q))
        dist += d
        t += d / v + cfg.pause
    return dist / t


def test_stationary_speed_matches_long_run_average():
    oracle = rwp_time_average(CFG, 1e6, 1)
    assert stationary_mean_speed(CFG) == pytest.approx(oracle, rel=0.02)
    # (10 - 1) / ln 10
    assert stationary_mean_speed(CFG) == pytest.approx(3.9087, abs=1e-4)
    assert mean_inverse_speed(CFG) == pytest.approx(math.log(10) / 9)


def test_steady_state_initial_speed_is_stationary():
    cfg = MobilityConfig(Model.MBG_SS)
    rng = RngStream(21)
    speeds = np.array([init_steady_state(rng, AREA, cfg).leg.speed for _ in range(20_000)])
    # at a random instant the speed density is proportional to 1/v
    assert stats.kstest(speeds, lambda v: np.log(v) / np.log(10.0)).pvalue > 1e-3
    assert speeds.mean() == pytest.approx(stationary_mean_speed(cfg), rel=0.02)


def long_run_positions(n_nodes, seed, t_probe=3000.0):
    """Oracle: independent plain RWP nodes observed long after start-up."""
    rng = RngStream(seed)
    out = []
    for i in range(n_nodes):
        sub = rng.fork(str(i))
        tr = extend_to(init_rwp(sub, AREA, CFG), sub, t_probe)
        out.append(position_at(tr, t_probe))
    return np.array(out)


def test_steady_state_positions_match_long_run_occupancy():
    ref = long_run_positions(5000, 31)
    rng = RngStream(32)
    cfg = MobilityConfig(Model.MBG_SS)
    init = np.array([init_steady_state(rng, AREA, cfg).leg.origin for _ in range(5000)])
    edges = np.linspace(0, 1000, 6)
    h_ref = np.histogram2d(ref[:, 0], ref[:, 1], bins=[edges, edges])[0].ravel()
    h_ss = np.histogram2d(init[:, 0], init[:, 1], bins=[edges, edges])[0].ravel()
    assert stats.chi2_contingency(np.vstack([h_ref, h_ss])).pvalue > 1e-3
    # and both differ clearly from uniform: the centre is over-represented
    h_uniform = np.histogram2d(*np.random.default_rng(0).uniform(0, 1000, (2, 5000)), bins=[edges, edges])[0].ravel()
    assert stats.chi2_contingency(np.vstack([h_uniform, h_ss])).pvalue < 1e-6


def test_steady_state_with_pause_sometimes_starts_paused():
    cfg = MobilityConfig(Model.MBG_SS, pause=50.0)
    rng = RngStream(4)
    tracks = [init_steady_state(rng, AREA, cfg) for _ in range(4000)]
    paused = np.mean([tr.phase_at(0.0) == "paused" for tr in tracks])
    expected = 50.0 / (50.0 + mean_leg_length(AREA) * mean_inverse_speed(cfg))
    assert paused == pytest.approx(expected, abs=0.03)
    assert all(tr.leg.depart_at <= 50.0 for tr in tracks)


def test_plan_tracks_is_reproducible():
    a = plan_tracks(5, CFG, AREA, RngStream(7).fork("mobility"), 300.0)
    b = plan_tracks(5, CFG, AREA, RngStream(7).fork("mobility"), 300.0)
    assert [tr.legs for tr in a] == [tr.legs for tr in b]
    assert all(tr.leg.arrive_at > 300.0 for tr in a)


def test_init_track_dispatch():
    rng = RngStream(1)
    assert init_track(rng, AREA, MobilityConfig(Model.RD)).heading is not None
    st_tr = init_track(rng, AREA, MobilityConfig(Model.STATIC), position=(1.0, 2.0))
    assert st_tr.leg.speed == 0.0
