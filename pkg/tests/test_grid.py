import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mobigrid.grid import (Bus, Generator, GridCase, GridError, GridState, Line, balance_residuals,
                           build_baseline_opf, dc_line_flow, solve_baseline_opf, validate_state)
from mobigrid.io import load_scenario
from mobigrid.milp import INFEASIBLE, OPTIMAL


def two_bus(limit=100.0):
    return GridCase([Bus(1, 0), Bus(2, 50)], [Line(1, 2, 10.0, -limit, limit)],
                    [Generator(1, 0, 100, 10)], name="twobus")


def test_line_flow_formula():
    assert dc_line_flow(10, 0.1, 0.0) == pytest.approx(1.0)


@settings(max_examples=50)
@given(st.floats(0.01, 100), st.floats(-3, 3), st.floats(-3, 3))
def test_line_flow_antisymmetric(b, ti, tj):
    assert dc_line_flow(b, ti, ti) == 0
    assert dc_line_flow(b, ti, tj) == -dc_line_flow(b, tj, ti)


def test_two_bus_optimum():
    res = solve_baseline_opf(two_bus())
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(500)
    assert res.state.generation[0] == pytest.approx(50)
    assert res.state.angles[0] == 0
    assert validate_state(two_bus(), res.state) == []


def test_two_bus_overload_infeasible():
    assert solve_baseline_opf(two_bus(40)).status == INFEASIBLE


def test_baseline_model_shape():
    m = build_baseline_opf(two_bus())
    assert [v.name for v in m.variables] == ["pg[0]", "theta[1]", "theta[2]"]
    assert m.variable("theta[1]").lower == m.variable("theta[1]").upper == 0
    assert not m.binaries()


def test_shipped_case_balances():
    case = load_scenario("ieee14-demo").grid
    assert case.n_buses == 14 and len(case.lines) == 20 and len(case.generators) == 5
    res = solve_baseline_opf(case)
    assert res.status == OPTIMAL
    assert res.state.generation.sum() == pytest.approx(case.total_load, abs=1e-6)
    assert case.total_load == pytest.approx(259.0)
    assert validate_state(case, res.state) == []
    assert np.abs(balance_residuals(case, res.state)).max() <= 1e-6


def test_validate_state_flags():
    case = two_bus()
    st_ = solve_baseline_opf(case).state
    bad_ref = GridState(st_.angles + 0.1, st_.generation, st_.flows)
    kinds = {v.kind for v in validate_state(case, bad_ref)}
    assert "reference_angle" in kinds
    bumped = GridState(st_.angles, st_.generation, st_.flows + 1.0)
    flow = [v for v in validate_state(case, bumped) if v.kind == "flow_equation"]
    assert len(flow) == 1 and flow[0].magnitude == pytest.approx(1.0)
    over = GridState(st_.angles, st_.generation + 60, st_.flows)
    kinds = {v.kind for v in validate_state(case, over)}
    assert {"gen_max", "balance"} <= kinds


def test_vehicle_injection_in_balance():
    case = two_bus()
    state = GridState(np.array([0.0, -3.0]), np.array([30.0]), np.array([30.0]))
    assert validate_state(case, state, injections=[0, 20]) == []
    assert validate_state(case, state)


def test_piecewise_cost():
    g = Generator(1, 0, 100, segments=((40, 10), (100, 30)))
    assert g.cost_at(30) == 300
    assert g.cost_at(70) == 400 + 900
    case = GridCase([Bus(1, 0), Bus(2, 70)], [Line(1, 2, 10.0)], [g])
    res = solve_baseline_opf(case)
    assert res.objective == pytest.approx(1300)


@pytest.mark.parametrize("kwargs, match", [
    (dict(buses=[Bus(1), Bus(3)]), "1..N"),
    (dict(lines=[Line(1, 3, 1.0)]), "missing bus"),
    (dict(lines=[Line(1, 2, -1.0)]), "susceptance"),
    (dict(lines=[Line(1, 2, 1.0, 5, -5)]), "flow_min"),
    (dict(generators=[Generator(1, 10, 5)]), "limits"),
    (dict(generators=[Generator(4, 0, 5)]), "missing bus"),
    (dict(ref_bus=5), "reference bus"),
    (dict(buses=[Bus(1), Bus(2), Bus(3)]), "disconnected"),
    (dict(generators=[Generator(1, 0, 50, segments=((20, 5), (40, 9)))]), "stops before"),
    (dict(generators=[Generator(1, 0, 50, segments=((20, 9), (50, 5)))]), "convex"),
])
def test_case_validation(kwargs, match):
    base = dict(buses=[Bus(1), Bus(2, 10)], lines=[Line(1, 2, 1.0)], generators=[Generator(1, 0, 50, 1)])
    base.update(kwargs)
    with pytest.raises(GridError, match=match):
        GridCase(**base)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_case_invariants(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    lines = [Line(k + 1, int(rng.integers(1, k + 1)), float(rng.uniform(2, 20)),
                  -float(rng.uniform(10, 60)), float(rng.uniform(10, 60))) for k in range(1, n)]
    gens = [Generator(int(rng.integers(1, n + 1)), 0, float(rng.uniform(20, 80)), float(rng.uniform(5, 50)))
            for _ in range(3)]
    case = GridCase([Bus(i + 1, float(rng.uniform(0, 20))) for i in range(n)], lines, gens)
    res = solve_baseline_opf(case)
    if res.status != OPTIMAL:
        return
    assert res.state.generation.sum() == pytest.approx(case.total_load, abs=1e-6)
    assert validate_state(case, res.state) == []
