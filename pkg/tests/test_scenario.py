import pytest

from manetsim.mobility import Model
from manetsim.scenario import ScenarioError, build_scenario, load_scenario, parse_scenario_text
from manetsim.traffic import TrafficKind


def write(tmp_path, text):
    p = tmp_path / "s.conf"
    p.write_text(text)
    return p


def test_empty_file_needs_n_nodes(tmp_path):
    with pytest.raises(ScenarioError, match="n_nodes"):
        load_scenario(write(tmp_path, ""))


def test_defaults_and_file_values(tmp_path):
    sc = load_scenario(write(tmp_path, """
        # baseline
        n_nodes = 40
        area_width = 1000
        area_height = 1000
        horizon = 1200
        v_max = 10
        pause_time = 0
        model = mbgss
    """))
    assert (sc.area.width, sc.area.height, sc.horizon) == (1000.0, 1000.0, 1200.0)
    assert (sc.mobility.v_max, sc.mobility.pause, sc.mobility.model) == (10.0, 0.0, Model.MBG_SS)
    assert sc.link.tx_range == 250.0 and sc.traffic is TrafficKind.CBR
    assert sc.vbr.initial_seed == 0.4


def test_typo_rejected_with_line_number(tmp_path):
    with pytest.raises(ScenarioError, match="line 2.*pase_time"):
        load_scenario(write(tmp_path, "n_nodes = 10\npase_time = 0\n"))


@pytest.mark.parametrize("text,key", [
    ("n_nodes = 10\nn_nodes = 20", "duplicate"),
    ("n_nodes = ten", "line 1"),
    ("n_nodes 10", "line 1"),
    ("n_nodes = 10\nv_min = 5\nv_max = 2", "v_min"),
    ("n_nodes = 1", "n_nodes"),
])
def test_errors_name_the_problem(text, key):
    with pytest.raises(ScenarioError, match=key):
        build_scenario(parse_scenario_text(text))


@pytest.mark.parametrize("n,expected", [(20, 0.25), (80, 0.33), (100, 0.33)])
def test_vbr_rate_factor_follows_source_count(n, expected):
    sc = build_scenario({"n_nodes": n})
    assert sc.effective_sources == min(40, n // 2)
    assert sc.vbr.rate_factor == expected


def test_resolved_echo_round_trips(tmp_path):
    sc = load_scenario(write(tmp_path, "n_nodes = 4\npositions = 1,2;3,4;5,6;7,8\nmodel = static\n"), out_dir=tmp_path / "o")
    echoed = (tmp_path / "o" / "scenario.resolved.conf").read_text()
    again = build_scenario(parse_scenario_text(echoed))
    assert again == sc
    assert again.fingerprint() == sc.fingerprint()


def test_overrides():
    sc = build_scenario(parse_scenario_text("n_nodes = 10", overrides={"seed": 9}))
    assert sc.seed == 9
    assert sc.with_overrides(n_nodes=20).n_nodes == 20
