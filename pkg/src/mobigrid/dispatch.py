"""Routing and dispatch of vehicle fleets as mobile grid batteries.

A fleet parked at bus i injects p into that bus only. The bilinear injection
p * z_i is replaced by an auxiliary y_i bounded by the four McCormick
inequalities, which are exact because z_i is binary.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import grid as gridmod
from .grid import GridCase, GridState
from .milp import (DEFAULT_OPTIONS, INFEASIBLE, OPTIMAL, UNBOUNDED, Constraint,
                   MilpError, MilpModel, ModelError, ResourceLimitError,
                   SolverOptions, solve_lp, solve_milp)
from .transport import CostTable, RouteSolution, TransportNetwork, all_pairs_costs, solve_route


class FleetError(ValueError):
    pass


class DispatchInfeasibleError(MilpError):
    """No dispatch satisfies the grid and fleet limits.

    ``subsystem`` is ``"grid"`` when the network cannot serve its load even
    with every fleet free to inject anywhere between 0 and its maximum, and
    ``"fleet"`` when the fleets' minimum output is what breaks feasibility.
    """

    def __init__(self, message, subsystem):
        super().__init__(message)
        self.subsystem = subsystem


class EnumerationCapError(ResourceLimitError):
    pass


@dataclass(frozen=True)
class VehicleFleet:
    """A dispatchable group of vehicles.

    ``travel_costs`` is indexed by node - 1; ``inf`` marks unreachable nodes,
    which must also be listed in ``excluded``.
    """

    id: str
    origin: int
    pmin: float
    pmax: float
    energy_cost: float
    travel_costs: tuple
    excluded: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "travel_costs", tuple(float(c) for c in self.travel_costs))
        object.__setattr__(self, "excluded", frozenset(self.excluded))
        n = len(self.travel_costs)
        if not 0.0 <= self.pmin <= self.pmax or not math.isfinite(self.pmax):
            raise FleetError(f"fleet {self.id}: need 0 <= pmin <= pmax, got [{self.pmin}, {self.pmax}]")
        if not math.isfinite(self.energy_cost):
            raise FleetError(f"fleet {self.id}: energy cost is not finite")
        if not 1 <= self.origin <= n:
            raise FleetError(f"fleet {self.id}: origin {self.origin} outside 1..{n}")
        if self.travel_costs[self.origin - 1] != 0.0:
            raise FleetError(f"fleet {self.id}: travel cost to its own origin must be 0")
        if self.origin in self.excluded and len(self.excluded) < n:
            # excluding every node (origin included) parks the fleet; anything
            # less must leave the origin available
            raise FleetError(f"fleet {self.id}: origin cannot be excluded")
        bad = [i for i in self.excluded if not 1 <= i <= n]
        if bad:
            raise FleetError(f"fleet {self.id}: excluded nodes {sorted(bad)} do not exist")

    @property
    def candidates(self):
        return [i for i in range(1, len(self.travel_costs) + 1) if i not in self.excluded]


@dataclass(frozen=True)
class FleetSpec:
    """Fleet record before travel costs are known.

    Exclusions come from ``exclude`` (explicit nodes) and ``radius`` (nodes
    whose travel cost exceeds it); unreachable nodes are always excluded.
    The origin stays a candidate unless ``exclude`` lists every node.
    """

    id: str
    origin: int
    pmin: float
    pmax: float
    energy_cost: float
    exclude: frozenset = frozenset()
    radius: float | None = None

    def compile(self, costs) -> VehicleFleet:
        costs = np.asarray(costs, dtype=float)
        excluded = set(self.exclude)
        for node, c in enumerate(costs, start=1):
            if not math.isfinite(c) or (self.radius is not None and c > self.radius):
                excluded.add(node)
        if not set(range(1, len(costs) + 1)) <= set(self.exclude):
            excluded.discard(self.origin)
        return VehicleFleet(self.id, self.origin, self.pmin, self.pmax, self.energy_cost,
                            tuple(costs), frozenset(excluded))


@dataclass(frozen=True)
class CostBreakdown:
    generation: float
    vehicle_energy: float
    travel: float

    @property
    def total(self):
        return self.generation + self.vehicle_energy + self.travel


@dataclass(frozen=True)
class VehicleDispatch:
    fleet_id: str
    origin: int
    destination: int | None  # None: stays undispatched
    power: float
    route: RouteSolution | None = None
    travel_cost: float = 0.0

    @property
    def dispatched(self):
        return self.destination is not None

    @property
    def injection(self):
        return self.power if self.dispatched else 0.0


@dataclass
class DispatchPlan:
    kind: str
    vehicles: list
    grid: GridState
    objective: float
    breakdown: CostBreakdown
    baseline_objective: float | None = None
    stats: dict = field(default_factory=dict)
    solution: object = field(default=None, repr=False, compare=False)

    def bus_injections(self, n_buses):
        inj = np.zeros(n_buses)
        for v in self.vehicles:
            if v.dispatched:
                inj[v.destination - 1] += v.power
        return inj

    @property
    def reduction(self):
        """Fractional cost reduction against the baseline, if known."""
        if self.baseline_objective is None or self.baseline_objective == 0:
            return None
        return (self.baseline_objective - self.objective) / self.baseline_objective


@dataclass(frozen=True)
class DispatchOptions:
    travel_cost_scale: float = 1.0
    enumeration_cap: int = 100_000
    solver: SolverOptions = DEFAULT_OPTIONS
    routing_method: str = "milp"
    aggregate_rows: bool = True


DEFAULT_DISPATCH = DispatchOptions()


def pv_var(v):
    return f"pv[{v}]"


def z_var(v, i):
    return f"z[{v},{i}]"


def y_var(v, i):
    return f"y[{v},{i}]"


def mccormick_envelope(p_var, z_var, y_var, p_lo, p_hi):
    """The four linear rows that pin ``y = p * z`` for binary z and p in [p_lo, p_hi]."""
    if not (math.isfinite(p_lo) and math.isfinite(p_hi)) or p_lo > p_hi:
        raise ModelError(f"McCormick bounds must be finite with lower <= upper, got [{p_lo}, {p_hi}]")
    return [
        Constraint({y_var: 1.0, z_var: -p_lo}, ">=", 0.0, f"mc_a[{y_var}]"),
        Constraint({y_var: 1.0, p_var: -1.0, z_var: -p_hi}, ">=", -p_hi, f"mc_b[{y_var}]"),
        Constraint({y_var: 1.0, z_var: -p_hi}, "<=", 0.0, f"mc_c[{y_var}]"),
        Constraint({y_var: 1.0, p_var: -1.0, z_var: -p_lo}, "<=", -p_lo, f"mc_d[{y_var}]"),
    ]


def _check_fleets(case, fleets):
    n = case.n_buses
    seen = set()
    for f in fleets:
        if f.id in seen:
            raise FleetError(f"duplicate fleet id {f.id!r}")
        seen.add(f.id)
        if len(f.travel_costs) != n:
            raise FleetError(f"fleet {f.id}: travel costs cover {len(f.travel_costs)} nodes, grid has {n}")
        for i in f.candidates:
            if not math.isfinite(f.travel_costs[i - 1]):
                raise ModelError(f"fleet {f.id}: node {i} has no travel cost and is not excluded")


def build_dispatch_model(case: GridCase, fleets, travel_cost_scale=1.0, aggregate=True) -> MilpModel:
    """The linearized vehicle-integration MIP.

    With ``aggregate`` each fleet also gets two rows tying its total
    injection to p^v, which every integer-feasible point already satisfies.
    They leave the optimum unchanged and shrink the search tree by orders of
    magnitude. With no fleets this is exactly the baseline OPF model.
    """
    fleets = list(fleets)
    _check_fleets(case, fleets)
    model = MilpModel(f"dispatch_{case.name}" if fleets else f"opf_{case.name}")
    balance = gridmod.add_opf_core(model, case)
    for f in fleets:
        model.add_variable(pv_var(f.id), f.pmin, f.pmax, cost=f.energy_cost)
        y_lo = min(f.pmin, 0.0)
        for b in case.buses:
            i = b.id
            if i in f.excluded:
                model.add_binary(z_var(f.id, i), cost=0.0, upper=0.0)
            else:
                model.add_binary(z_var(f.id, i), cost=travel_cost_scale * f.travel_costs[i - 1])
            model.add_variable(y_var(f.id, i), y_lo, f.pmax)
            balance[i][y_var(f.id, i)] = -1.0
        model.add_constraint({z_var(f.id, b.id): 1.0 for b in case.buses}, "<=", 1.0,
                             f"one_destination[{f.id}]")
        for b in case.buses:
            for con in mccormick_envelope(pv_var(f.id), z_var(f.id, b.id), y_var(f.id, b.id),
                                          f.pmin, f.pmax):
                model.constraints.append(con)
        if aggregate:
            # valid because at most one z is 1; the per-bus envelope alone lets a
            # fractional fleet inject p at every bus it partially visits
            total = {y_var(f.id, b.id): 1.0 for b in case.buses}
            model.add_constraint({**total, pv_var(f.id): -1.0}, "<=", 0.0, f"fleet_total_max[{f.id}]")
            lower = {**total, pv_var(f.id): -1.0}
            for b in case.buses:
                lower[z_var(f.id, b.id)] = -f.pmax
            model.add_constraint(lower, ">=", -f.pmax, f"fleet_total_min[{f.id}]")
    gridmod.add_balance_rows(model, case, balance)
    return model


def _breakdown(case, fleets, state, powers, destinations, scale):
    gen = case.generation_cost(state.generation)
    energy = float(sum(f.energy_cost * p for f, p in zip(fleets, powers)))
    travel = float(sum(scale * f.travel_costs[d - 1]
                       for f, d in zip(fleets, destinations) if d is not None))
    return CostBreakdown(gen, energy, travel)


def _attach_routes(net, fleets, destinations, options):
    routes = []
    for f, d in zip(fleets, destinations):
        if d is None or net is None:
            routes.append(None)
        else:
            routes.append(solve_route(net, f.origin, d, options.solver))
    return routes


def _diagnose(case, fleets, options):
    relaxed = [VehicleFleet(f.id, f.origin, 0.0, f.pmax, f.energy_cost, f.travel_costs, f.excluded)
               for f in fleets]
    model = build_dispatch_model(case, relaxed, options.travel_cost_scale, options.aggregate_rows)
    if solve_milp(model, options.solver).status == INFEASIBLE:
        return "grid"
    return "fleet"


def solve_dispatch(case: GridCase, fleets, net: TransportNetwork | None = None,
                   options: DispatchOptions = DEFAULT_DISPATCH) -> DispatchPlan:
    """Solve the MIP and read destinations off the binary assignment.

    A fleet whose binaries are all zero stays undispatched. If ``net`` is
    given each dispatched fleet gets its route from the routing model.
    """
    fleets = list(fleets)
    model = build_dispatch_model(case, fleets, options.travel_cost_scale, options.aggregate_rows)
    sol = solve_milp(model, options.solver)
    if sol.status == INFEASIBLE:
        sub = _diagnose(case, fleets, options)
        raise DispatchInfeasibleError(f"dispatch problem is infeasible ({sub} limits)", sub)
    if sol.status == UNBOUNDED:
        raise MilpError("dispatch problem is unbounded")
    state = gridmod.state_from_values(case, sol.values)
    destinations, powers = [], []
    for f in fleets:
        z = np.array([sol.values[z_var(f.id, b.id)] for b in case.buses])
        if z.sum() > 0.5:
            destinations.append(int(np.argmax(z)) + 1)
        else:
            destinations.append(None)
        powers.append(sol.values[pv_var(f.id)])
    routes = _attach_routes(net, fleets, destinations, options)
    vehicles = [VehicleDispatch(f.id, f.origin, d, p, r,
                                f.travel_costs[d - 1] if d is not None else 0.0)
                for f, d, p, r in zip(fleets, destinations, powers, routes)]
    breakdown = _breakdown(case, fleets, state, powers, destinations, options.travel_cost_scale)
    stats = {"nodes_explored": sol.stats.nodes_explored,
             "lp_iterations": sol.stats.lp_iterations,
             "wall_time": sol.stats.wall_time,
             "binaries": len(model.binaries()),
             "free_binaries": sum(1 for v in model.binaries() if model.variable(v).upper > 0),
             "variables": len(model.variables),
             "constraints": len(model.constraints)}
    return DispatchPlan("dispatch" if fleets else "baseline", vehicles, state, sol.objective,
                        breakdown, stats=stats, solution=sol)


def build_assignment_lp(case: GridCase, fleets, destinations, travel_cost_scale=1.0) -> MilpModel:
    """The original bilinear model with every z fixed: a plain LP.

    Fleet v injects its own p^v at ``destinations[v]`` (None: nowhere).
    """
    model = MilpModel("assignment")
    balance = gridmod.add_opf_core(model, case)
    travel = 0.0
    for f, d in zip(fleets, destinations):
        model.add_variable(pv_var(f.id), f.pmin, f.pmax, cost=f.energy_cost)
        if d is not None:
            balance[d][pv_var(f.id)] = balance[d].get(pv_var(f.id), 0.0) - 1.0
            travel += travel_cost_scale * f.travel_costs[d - 1]
    model.objective_offset = travel
    gridmod.add_balance_rows(model, case, balance)
    return model


def brute_force_dispatch(case: GridCase, fleets, net: TransportNetwork | None = None,
                         options: DispatchOptions = DEFAULT_DISPATCH) -> DispatchPlan:
    """Enumerate every destination assignment and solve one LP for each.

    Independent of the McCormick model: it never introduces y or z.
    """
    fleets = list(fleets)
    _check_fleets(case, fleets)
    choices = [[None] + f.candidates for f in fleets]
    count = math.prod(len(c) for c in choices)
    if count > options.enumeration_cap:
        raise EnumerationCapError(
            f"{count} assignments exceed the enumeration cap of {options.enumeration_cap}; "
            "exclude far nodes or raise the cap")
    best = None
    lp_iterations = 0
    for assignment in itertools.product(*choices):
        model = build_assignment_lp(case, fleets, assignment, options.travel_cost_scale)
        sol = solve_lp(model, options.solver)
        lp_iterations += sol.stats.lp_iterations
        if sol.status != OPTIMAL:
            continue
        if best is None or sol.objective < best[0]:
            best = (sol.objective, assignment, sol)
    if best is None:
        sub = _diagnose(case, fleets, options)
        raise DispatchInfeasibleError(f"no assignment is feasible ({sub} limits)", sub)
    objective, destinations, sol = best
    state = gridmod.state_from_values(case, sol.values)
    powers = [sol.values[pv_var(f.id)] for f in fleets]
    routes = _attach_routes(net, fleets, destinations, options)
    vehicles = [VehicleDispatch(f.id, f.origin, d, p, r,
                                f.travel_costs[d - 1] if d is not None else 0.0)
                for f, d, p, r in zip(fleets, destinations, powers, routes)]
    breakdown = _breakdown(case, fleets, state, powers, destinations, options.travel_cost_scale)
    return DispatchPlan("brute-force", vehicles, state, objective, breakdown,
                        stats={"lp_solves": count, "lp_iterations": lp_iterations})


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name
        raise


def compile_fleets(specs, table: CostTable):
    return [spec.compile(table.row(spec.origin)) for spec in specs]


def run_schedule(case: GridCase, net: TransportNetwork, fleet_specs, road_closures=(),
                 options: DispatchOptions = DEFAULT_DISPATCH) -> DispatchPlan:
    """Closures, offline travel costs, fleet assembly, MIP, destinations and routes.

    Exceptions carry a ``stage`` attribute naming the step that failed.
    """
    specs = list(fleet_specs)

    def check_layers():
        if net.n_nodes != case.n_buses:
            raise FleetError(f"transport network has {net.n_nodes} nodes, grid has {case.n_buses} buses")
        for s in specs:
            if not 1 <= s.origin <= case.n_buses:
                raise FleetError(f"fleet {s.id}: origin {s.origin} is not a bus of the grid")
        return net.with_closures(road_closures)

    roads = _stage("closures", check_layers)
    origins = sorted({s.origin for s in specs})
    table = _stage("travel_costs", all_pairs_costs, roads, origins, options.routing_method,
                   options.solver)
    fleets = _stage("fleets", compile_fleets, specs, table)
    baseline = _stage("baseline", gridmod.solve_baseline_opf, case, options.solver)
    plan = _stage("dispatch", solve_dispatch, case, fleets, roads, options)
    plan.baseline_objective = baseline.objective if baseline.status == OPTIMAL else None
    plan.stats["closures"] = [list(p) for p in road_closures]
    return plan
