import json
import math
import shutil
from pathlib import Path

import numpy as np
import pytest

from mobigrid import io as mio
from mobigrid.dispatch import DispatchOptions, FleetSpec, run_schedule, solve_dispatch
from mobigrid.grid import solve_baseline_opf
from mobigrid.io import ParseError, ScenarioError

DATA = Path(__file__).parent / "data"
PKG_DATA = mio.bundled_path("ieee14-demo").parent


# ------------------------------------------------------------ parsing


def test_grid_round_trip():
    case = mio.load_grid(PKG_DATA / "ieee14.grid")
    again = mio.parse_grid(mio.format_grid(case))
    assert again == case


def test_grid_piecewise_round_trip():
    text = ("mobigrid grid 1\n[bus]\n1 0\n2 30\n[line]\n1 2 0.1 -inf inf\n"
            "[gen]\n1 0 60 20:10;60:25\n")
    case = mio.parse_grid(text)
    assert case.generators[0].segments == ((20.0, 10.0), (60.0, 25.0))
    assert case.lines[0].susceptance == pytest.approx(10.0)
    assert mio.parse_grid(mio.format_grid(case)) == case


def test_transport_and_fleet_round_trip():
    net = mio.load_transport(PKG_DATA / "ieee14.transport")
    assert mio.parse_transport(mio.format_transport(net)) == net
    closed = net.with_closures([(1, net.edges[0].head)])
    assert mio.parse_transport(mio.format_transport(closed)) == closed
    specs = mio.load_fleets(PKG_DATA / "ieee30.fleet")
    assert mio.parse_fleets(mio.format_fleets(specs)) == specs
    assert specs[3].radius == 12


@pytest.mark.parametrize("text, line, match", [
    ("mobigrid grid 2\n", 1, "version 2"),
    ("grid 1\n", 1, "header"),
    ("mobigrid grid 1\n[bus]\n1 0\n2 x\n", 4, "number"),
    ("mobigrid grid 1\n[bus]\n1 0\n[shunt]\n1 2\n", 4, "section"),
    ("mobigrid grid 1\ncolour = red\n", 2, "key"),
])
def test_grid_parse_errors_carry_line_numbers(text, line, match):
    with pytest.raises(ParseError, match=match) as info:
        mio.parse_grid(text, "case.grid")
    assert info.value.line == line
    assert str(info.value).startswith(f"case.grid:{line}:")


def test_duplicate_directed_edge_rejected():
    text = "mobigrid transport 1\nnodes = 3\n1 2 4\n2 1 4\n# again\n1 2 5\n"
    with pytest.raises(ParseError, match="duplicate directed edge 1->2") as info:
        mio.parse_transport(text, "roads")
    assert info.value.line == 6


def test_transport_parse_errors():
    with pytest.raises(ParseError, match="nodes"):
        mio.parse_transport("mobigrid transport 1\n1 2 3\n")
    with pytest.raises(ParseError, match="restricted flag"):
        mio.parse_transport("mobigrid transport 1\nnodes = 2\n1 2 3 7\n")
    with pytest.raises(ParseError):
        mio.parse_transport("mobigrid transport 1\nnodes = 2\n1 3 3\n")


def test_fleet_parse_errors():
    with pytest.raises(ParseError, match="duplicate fleet"):
        mio.parse_fleets("mobigrid fleet 1\na 1 0 5 3\na 2 0 5 3\n")
    with pytest.raises(ParseError):
        mio.parse_fleets("mobigrid fleet 1\na 1 0 5\n")
    with pytest.raises(ParseError):
        mio.parse_fleets("mobigrid fleet 1\na 1 0 5 3 colour=red\n")


def test_fleet_options():
    specs = mio.parse_fleets("mobigrid fleet 1\na 3 0 5 3 exclude=1,2 radius=7.5\n")
    assert specs == [FleetSpec("a", 3, 0.0, 5.0, 3.0, frozenset({1, 2}), 7.5)]


# ------------------------------------------------------------ scenarios


def test_bundled_ieee14():
    sc = mio.load_scenario("ieee14-demo")
    assert sc.grid.n_buses == 14
    assert len(sc.grid.lines) == 20 and len(sc.grid.generators) == 5
    assert [(f.id, f.origin, f.pmax) for f in sc.fleets] == [("a", 2, 20), ("b", 7, 20), ("c", 12, 40)]
    assert sc.transport.n_nodes == 14
    assert sc.options.travel_cost_scale == 10


@pytest.mark.parametrize("name", mio.BUNDLED)
def test_bundled_scenarios_solve(name):
    sc = mio.load_scenario(name)
    plan = run_schedule(sc.grid, sc.transport, sc.fleets, sc.closures, sc.options)
    assert plan.solution.status == "optimal"
    assert plan.objective < plan.baseline_objective


def test_loader_is_deterministic():
    a, b = mio.load_scenario("ieee30-demo"), mio.load_scenario("ieee30-demo")
    assert a == b


def test_shipped_network_matches_its_seed():
    net = mio.load_transport(PKG_DATA / "ieee14.transport")
    assert net == mio.generate_transport_network(14, 9, extra_edges=9)
    assert all(1 <= e.weight <= 12 for e in net.edges)
    net30 = mio.load_transport(PKG_DATA / "ieee30.transport")
    assert net30 == mio.generate_transport_network(30, 3, extra_edges=20)


def copy_ieee14(tmp_path, fleet_file):
    for name in ("ieee14.grid", "ieee14.transport"):
        shutil.copy(PKG_DATA / name, tmp_path / name)
    shutil.copy(fleet_file, tmp_path / "f.fleet")
    path = tmp_path / "s.scenario"
    path.write_text("mobigrid scenario 1\ngrid = ieee14.grid\ntransport = ieee14.transport\n"
                    "fleets = f.fleet\n")
    return path


def test_fleet_on_missing_bus_is_a_cross_reference_error(tmp_path):
    path = copy_ieee14(tmp_path, DATA / "bad-origin.fleet")
    with pytest.raises(ScenarioError, match="fleet z origin 99 is not a bus"):
        mio.load_scenario(str(path))


def test_layer_mismatch_named(tmp_path):
    path = copy_ieee14(tmp_path, DATA / "one.fleet")
    shutil.copy(DATA / "diamond.transport", tmp_path / "ieee14.transport")
    with pytest.raises(ScenarioError, match="4 nodes but the grid has 14 buses"):
        mio.load_scenario(str(path))


def test_scenario_keys_and_closures(tmp_path):
    path = copy_ieee14(tmp_path, PKG_DATA / "ieee14.fleet")
    net = mio.load_transport(PKG_DATA / "ieee14.transport")
    a, b = net.edges[0].pair
    path.write_text(path.read_text() + f"closures = {a}-{b}\ntravel_cost_scale = 2.5\n"
                    "pivot_tol = 1e-10\naggregate_rows = no\n")
    sc = mio.load_scenario(str(path))
    assert sc.closures == ((a, b),)
    assert sc.options.travel_cost_scale == 2.5
    assert sc.options.solver.pivot_tol == 1e-10
    assert sc.options.aggregate_rows is False
    path.write_text(path.read_text() + "closures = 1-1\n")
    with pytest.raises(ParseError, match="closure"):
        mio.load_scenario(str(path))
    path.write_text("mobigrid scenario 1\ngrid = ieee14.grid\nwhatever = 1\n")
    with pytest.raises(ParseError, match="unknown scenario key"):
        mio.load_scenario(str(path))


def test_missing_scenario_names_bundled():
    with pytest.raises(ParseError, match="ieee14-demo"):
        mio.load_scenario("no-such-thing")


def test_config_file():
    opts = mio.load_config(DATA / "loose.config")
    assert opts.travel_cost_scale == 0.5 and opts.solver.mip_gap == 1e-9
    with pytest.raises(ParseError):
        mio.parse_config("mobigrid config 1\nbogus = 3\n")
    with pytest.raises(ParseError):
        mio.parse_config("mobigrid config 1\nmip_gap = abc\n")


# ------------------------------------------------------------ MATPOWER

CASE3 = """
function mpc = case3
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	10	3	0	0	0	0	1	1	0	135	1	1.1	0.9;
	20	1	90	0	0	0	1	1	0	135	1	1.1	0.9;
	30	1	60	0	0	0	1	1	0	135	1	1.1	0.9;
];
mpc.gen = [
	10	0	0	300	-300	1	100	1	250	10;
	30	0	0	300	-300	1	100	1	100	10;
	20	0	0	300	-300	1	100	0	100	0;
];
mpc.branch = [
	10	20	0	0.1	0	0	0	0	0	0	1	-360	360;
	20	30	0	0.2	0	80	0	0	0.5	0	1	-360	360;
	10	30	0	0.1	0	50	0	0	0	0	0	-360	360;
];
mpc.gencost = [
	2	0	0	3	0.11	5	150;
	1	0	0	3	0	0	40	800	100	3000;
	2	0	0	2	7	0;
];
"""


def test_matpower_loader():
    case = mio.parse_matpower(CASE3, "case3")
    assert [b.load for b in case.buses] == [0, 90, 60]
    assert case.ref_bus == 1
    assert len(case.lines) == 2
    assert case.lines[0].susceptance == pytest.approx(1000)
    assert math.isinf(case.lines[0].flow_max)
    assert case.lines[1].susceptance == pytest.approx(100 / (0.2 * 0.5))
    assert case.lines[1].flow_max == 80
    assert len(case.generators) == 2
    g1, g2 = case.generators
    assert (g1.bus, g1.pmin, g1.pmax, g1.cost) == (1, 10, 250, 5)
    assert np.allclose(g2.segments, ((40.0, 20.0), (100.0, 2200 / 60)))
    res = solve_baseline_opf(case)
    assert res.state.generation.sum() == pytest.approx(150)


# ------------------------------------------------------------ reports


@pytest.fixture(scope="module")
def demo_plan():
    sc = mio.load_scenario("ieee14-demo")
    return run_schedule(sc.grid, sc.transport, sc.fleets, sc.closures, sc.options)


def test_report_round_trip(demo_plan):
    text = mio.write_report(demo_plan)
    back = mio.read_report(text)
    assert back.objective == demo_plan.objective
    assert back.baseline_objective == demo_plan.baseline_objective
    assert back.breakdown == demo_plan.breakdown
    assert back.vehicles == demo_plan.vehicles
    for name in ("angles", "generation", "flows"):
        assert np.array_equal(getattr(back.grid, name), getattr(demo_plan.grid, name))
    assert mio.write_report(back) == text


def test_report_routes_are_chains(demo_plan):
    doc = json.loads(mio.write_report(demo_plan))
    assert doc["format"] == "mobigrid-report" and doc["format_version"] == 1
    assert len(doc["vehicles"]) == 3
    for v in doc["vehicles"]:
        edges = v["route"]["edges"]
        assert edges[0][0] == v["origin"] and edges[-1][1] == v["destination"]
        assert all(a[1] == b[0] for a, b in zip(edges, edges[1:]))
    for key in ("nodes_explored", "lp_iterations", "wall_time"):
        assert key in doc["stats"]


def test_empty_fleet_report():
    sc = mio.load_scenario("ieee14-demo")
    plan = solve_dispatch(sc.grid, [])
    doc = json.loads(mio.write_report(plan))
    assert doc["kind"] == "baseline" and doc["vehicles"] == []
    assert doc["baseline_objective"] is None
    human = mio.write_report(plan, "human")
    assert "fleet" not in human and "objective" in human


def test_report_rejects_foreign_documents():
    with pytest.raises(ParseError):
        mio.read_report(json.dumps({"format": "other"}))
    with pytest.raises(ParseError):
        mio.read_report(json.dumps({"format": "mobigrid-report", "format_version": 99}))
