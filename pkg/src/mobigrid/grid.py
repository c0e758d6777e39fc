"""DC power network data, line flows and the vehicle-free optimal power flow."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .milp import DEFAULT_OPTIONS, OPTIMAL, MilpModel, solve_lp


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Bus:
    id: int
    load: float = 0.0


@dataclass(frozen=True)
class Line:
    """A branch. ``susceptance`` is in MW per radian (already scaled by base MVA)."""

    from_bus: int
    to_bus: int
    susceptance: float
    flow_min: float = -math.inf
    flow_max: float = math.inf


@dataclass(frozen=True)
class Generator:
    """Generator with a linear cost, or a convex piecewise-linear one.

    ``segments`` is a tuple of ``(upper_mw, marginal_cost)`` breakpoints
    measured from 0 MW; when present it replaces ``cost``.
    """

    bus: int
    pmin: float
    pmax: float
    cost: float = 0.0
    segments: tuple = ()

    def cost_at(self, p):
        if not self.segments:
            return self.cost * p
        total, prev = 0.0, 0.0
        for upper, marginal in self.segments:
            if p <= prev:
                break
            total += marginal * (min(p, upper) - prev)
            prev = upper
        return total


@dataclass(frozen=True)
class GridCase:
    buses: tuple
    lines: tuple
    generators: tuple
    ref_bus: int = 1
    base_mva: float = 100.0
    name: str = "grid"

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "generators", tuple(self.generators))
        self.validate()

    @property
    def n_buses(self):
        return len(self.buses)

    @property
    def loads(self):
        return np.array([b.load for b in self.buses])

    @property
    def total_load(self):
        return float(sum(b.load for b in self.buses))

    @property
    def total_capacity(self):
        return float(sum(g.pmax for g in self.generators))

    def validate(self):
        ids = [b.id for b in self.buses]
        if ids != list(range(1, len(ids) + 1)):
            raise GridError("bus ids must be 1..N in order")
        n = len(ids)
        if not 1 <= self.ref_bus <= n:
            raise GridError(f"reference bus {self.ref_bus} does not exist")
        for b in self.buses:
            if not math.isfinite(b.load):
                raise GridError(f"bus {b.id} load is not finite")
        for k, ln in enumerate(self.lines):
            if not (1 <= ln.from_bus <= n and 1 <= ln.to_bus <= n):
                raise GridError(f"line {k} ({ln.from_bus}-{ln.to_bus}) references a missing bus")
            if ln.from_bus == ln.to_bus:
                raise GridError(f"line {k} connects bus {ln.from_bus} to itself")
            if not (math.isfinite(ln.susceptance) and ln.susceptance > 0):
                raise GridError(f"line {k} susceptance must be positive")
            if ln.flow_min > ln.flow_max:
                raise GridError(f"line {k} has flow_min > flow_max")
        for k, g in enumerate(self.generators):
            if not 1 <= g.bus <= n:
                raise GridError(f"generator {k} sits on missing bus {g.bus}")
            if not (math.isfinite(g.pmin) and math.isfinite(g.pmax)) or g.pmin > g.pmax:
                raise GridError(f"generator {k} has invalid limits [{g.pmin}, {g.pmax}]")
            if g.segments:
                uppers = [u for u, _ in g.segments]
                costs = [c for _, c in g.segments]
                if any(b <= a for a, b in zip([0.0] + uppers, uppers)):
                    raise GridError(f"generator {k} cost breakpoints must increase from 0")
                if uppers[-1] < g.pmax:
                    raise GridError(f"generator {k} cost curve stops before pmax")
                if any(b < a for a, b in zip(costs, costs[1:])):
                    raise GridError(f"generator {k} piecewise cost is not convex")
        self._check_connected()

    def _check_connected(self):
        adj = {b.id: [] for b in self.buses}
        for ln in self.lines:
            adj[ln.from_bus].append(ln.to_bus)
            adj[ln.to_bus].append(ln.from_bus)
        seen = {self.ref_bus}
        queue = deque([self.ref_bus])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        if len(seen) != len(self.buses):
            missing = sorted(set(adj) - seen)
            raise GridError(f"network is disconnected; unreachable buses {missing}")

    def generation_cost(self, setpoints):
        return float(sum(g.cost_at(p) for g, p in zip(self.generators, setpoints)))


@dataclass(frozen=True)
class GridState:
    angles: np.ndarray
    generation: np.ndarray
    flows: np.ndarray


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    magnitude: float


def dc_line_flow(b, theta_i, theta_j):
    return b * (theta_i - theta_j)


def theta_var(i):
    return f"theta[{i}]"


def pg_var(k):
    return f"pg[{k}]"


def add_opf_core(model: MilpModel, case: GridCase):
    """Generator and angle variables plus line limits.

    Returns, per bus, the coefficient map of net outflow minus generation;
    callers add their own injections and then close the balance rows with
    :func:`add_balance_rows`.
    """
    for k, g in enumerate(case.generators):
        if g.segments:
            model.add_variable(pg_var(k), g.pmin, g.pmax)
            link = {pg_var(k): 1.0}
            prev = 0.0
            for s, (upper, marginal) in enumerate(g.segments):
                name = model.add_variable(f"pg[{k}].seg{s}", 0.0, upper - prev, cost=marginal)
                link[name] = -1.0
                prev = upper
            model.add_constraint(link, "==", 0.0, f"pg_curve[{k}]")
        else:
            model.add_variable(pg_var(k), g.pmin, g.pmax, cost=g.cost)
    for b in case.buses:
        if b.id == case.ref_bus:
            model.add_variable(theta_var(b.id), 0.0, 0.0)
        else:
            model.add_variable(theta_var(b.id), -math.inf, math.inf)
    for k, ln in enumerate(case.lines):
        flow = {theta_var(ln.from_bus): ln.susceptance, theta_var(ln.to_bus): -ln.susceptance}
        if math.isfinite(ln.flow_max):
            model.add_constraint(flow, "<=", ln.flow_max, f"flow_max[{k}]")
        if math.isfinite(ln.flow_min):
            model.add_constraint(flow, ">=", ln.flow_min, f"flow_min[{k}]")

    balance = {b.id: {} for b in case.buses}
    for ln in case.lines:
        i, j, bij = ln.from_bus, ln.to_bus, ln.susceptance
        for bus, sign in ((i, 1.0), (j, -1.0)):
            row = balance[bus]
            row[theta_var(i)] = row.get(theta_var(i), 0.0) + sign * bij
            row[theta_var(j)] = row.get(theta_var(j), 0.0) - sign * bij
    for k, g in enumerate(case.generators):
        row = balance[g.bus]
        row[pg_var(k)] = row.get(pg_var(k), 0.0) - 1.0
    return balance


def add_balance_rows(model, case, balance):
    for b in case.buses:
        model.add_constraint(balance[b.id], "==", -b.load, f"balance[{b.id}]")


def build_baseline_opf(case: GridCase) -> MilpModel:
    """DC OPF with conventional generators only."""
    model = MilpModel(f"opf_{case.name}")
    balance = add_opf_core(model, case)
    add_balance_rows(model, case, balance)
    return model


def state_from_values(case: GridCase, values) -> GridState:
    angles = np.array([values[theta_var(b.id)] for b in case.buses])
    gen = np.array([values[pg_var(k)] for k in range(len(case.generators))])
    flows = np.array([dc_line_flow(ln.susceptance, angles[ln.from_bus - 1], angles[ln.to_bus - 1])
                      for ln in case.lines])
    return GridState(angles, gen, flows)


@dataclass(frozen=True)
class OpfResult:
    status: str
    objective: float
    state: GridState | None
    solution: object


def solve_baseline_opf(case: GridCase, options=DEFAULT_OPTIONS) -> OpfResult:
    sol = solve_lp(build_baseline_opf(case), options)
    if sol.status != OPTIMAL:
        return OpfResult(sol.status, math.nan, None, sol)
    return OpfResult(OPTIMAL, sol.objective, state_from_values(case, sol.values), sol)


def validate_state(case: GridCase, state: GridState, injections=None, tol=1e-6):
    """List every violated invariant of ``state``.

    ``injections`` is an optional per-bus array of extra injected MW (vehicles).
    """
    out = []
    n = case.n_buses
    if len(state.angles) != n or len(state.generation) != len(case.generators) \
            or len(state.flows) != len(case.lines):
        raise GridError("state dimensions do not match the case")
    theta_ref = state.angles[case.ref_bus - 1]
    if abs(theta_ref) > tol:
        out.append(Violation("reference_angle", f"bus {case.ref_bus}", abs(theta_ref)))
    for k, ln in enumerate(case.lines):
        expected = dc_line_flow(ln.susceptance, state.angles[ln.from_bus - 1],
                                state.angles[ln.to_bus - 1])
        err = abs(state.flows[k] - expected)
        if err > tol:
            out.append(Violation("flow_equation", f"line {k}", err))
        f = state.flows[k]
        if f > ln.flow_max + tol:
            out.append(Violation("flow_max", f"line {k}", f - ln.flow_max))
        if f < ln.flow_min - tol:
            out.append(Violation("flow_min", f"line {k}", ln.flow_min - f))
    for k, g in enumerate(case.generators):
        p = state.generation[k]
        if p > g.pmax + tol:
            out.append(Violation("gen_max", f"generator {k}", p - g.pmax))
        if p < g.pmin - tol:
            out.append(Violation("gen_min", f"generator {k}", g.pmin - p))
    for idx, r in enumerate(balance_residuals(case, state, injections)):
        if abs(r) > tol:
            out.append(Violation("balance", f"bus {idx + 1}", abs(r)))
    return out


def balance_residuals(case: GridCase, state: GridState, injections=None):
    """Per-bus net outflow minus (generation - load + injections), in MW."""
    resid = np.zeros(case.n_buses)
    for k, ln in enumerate(case.lines):
        resid[ln.from_bus - 1] += state.flows[k]
        resid[ln.to_bus - 1] -= state.flows[k]
    for k, g in enumerate(case.generators):
        resid[g.bus - 1] -= state.generation[k]
    resid += case.loads
    if injections is not None:
        resid -= np.asarray(injections, dtype=float)
    return resid
