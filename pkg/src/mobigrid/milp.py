"""Small mixed-binary linear programming core.

LPs are solved with a bounded-variable revised simplex (two phases, explicit
basis inverse with rank-one updates and periodic refactorization). Binary
variables are handled by a best-bound branch-and-bound on top of it.

Everything is single threaded and deterministic: the same model always gives
the same pivots, the same tree and the same incumbent.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_SENSES = {"<=": "<=", "=<": "<=", ">=": ">=", "=>": ">=", "=": "==", "==": "=="}


class MilpError(Exception):
    """Base class for solver errors."""


class ModelError(MilpError, ValueError):
    """The model is malformed and was not solved."""


class ResourceLimitError(MilpError):
    """A solve hit an iteration, node or enumeration limit."""

    def __init__(self, message, incumbent=None):
        super().__init__(message)
        self.incumbent = incumbent


class IterationLimitError(ResourceLimitError):
    pass


class NodeLimitError(ResourceLimitError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    pivot_tol: float = 1e-9
    feasibility_tol: float = 1e-6
    optimality_tol: float = 1e-9
    integrality_tol: float = 1e-6
    mip_gap: float = 1e-8
    bland_threshold: int = 50
    refactor_every: int = 50
    max_iterations: int = 100_000
    max_nodes: int = 200_000


DEFAULT_OPTIONS = SolverOptions()


@dataclass
class Variable:
    name: str
    lower: float = 0.0
    upper: float = math.inf
    kind: str = CONTINUOUS
    objective_coeff: float = 0.0


@dataclass
class Constraint:
    coeffs: dict
    sense: str
    rhs: float
    name: str = ""


@dataclass
class SolveStats:
    nodes_explored: int = 0
    lp_iterations: int = 0
    wall_time: float = 0.0


@dataclass
class MilpSolution:
    status: str
    objective: float = math.nan
    values: dict = field(default_factory=dict)
    stats: SolveStats = field(default_factory=SolveStats)
    duals: np.ndarray | None = None

    @property
    def is_optimal(self):
        return self.status == OPTIMAL

    def __getitem__(self, name):
        return self.values[name]


class MilpModel:
    """A minimization model over continuous and binary variables.

    Variables are referred to by name. Constraints are sparse maps from
    variable name to coefficient.
    """

    def __init__(self, name="model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective_offset = 0.0
        self._index: dict[str, int] = {}

    def __repr__(self):
        return (f"MilpModel({self.name!r}, {len(self.variables)} vars, "
                f"{len(self.binaries())} binary, {len(self.constraints)} rows)")

    def add_variable(self, name, lower=0.0, upper=math.inf, kind=CONTINUOUS,
                     cost=0.0):
        if name in self._index:
            raise ModelError(f"duplicate variable {name!r}")
        if kind not in (CONTINUOUS, BINARY):
            raise ModelError(f"unknown variable kind {kind!r}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, float(lower), float(upper), kind, float(cost)))
        return name

    def add_binary(self, name, cost=0.0, lower=0.0, upper=1.0):
        return self.add_variable(name, lower, upper, BINARY, cost)

    def add_constraint(self, coeffs, sense, rhs, name=""):
        if sense not in _SENSES:
            raise ModelError(f"unknown constraint sense {sense!r}")
        con = Constraint({k: float(v) for k, v in coeffs.items()}, _SENSES[sense],
                         float(rhs), name or f"c{len(self.constraints)}")
        self.constraints.append(con)
        return con

    def index(self, name):
        return self._index[name]

    def variable(self, name):
        return self.variables[self._index[name]]

    def binaries(self):
        return [v.name for v in self.variables if v.kind == BINARY]

    def validate(self):
        for v in self.variables:
            if math.isnan(v.lower) or math.isnan(v.upper) or not math.isfinite(v.objective_coeff):
                raise ModelError(f"variable {v.name!r} has a non-finite bound or cost")
            if v.lower == math.inf or v.upper == -math.inf:
                raise ModelError(f"variable {v.name!r} has an unusable bound")
            if v.kind == BINARY and (v.lower < 0.0 or v.upper > 1.0):
                raise ModelError(f"binary {v.name!r} has bounds outside [0, 1]")
        if not math.isfinite(self.objective_offset):
            raise ModelError("objective offset is not finite")
        for con in self.constraints:
            if not math.isfinite(con.rhs):
                raise ModelError(f"constraint {con.name!r} has a non-finite rhs")
            for name, a in con.coeffs.items():
                if name not in self._index:
                    raise ModelError(f"constraint {con.name!r} references unknown variable {name!r}")
                if not math.isfinite(a):
                    raise ModelError(f"constraint {con.name!r} has a non-finite coefficient")

    def copy(self):
        other = MilpModel(self.name)
        for v in self.variables:
            other.add_variable(v.name, v.lower, v.upper, v.kind, v.objective_coeff)
        for c in self.constraints:
            other.add_constraint(dict(c.coeffs), c.sense, c.rhs, c.name)
        other.objective_offset = self.objective_offset
        return other

    def evaluate(self, values):
        """Objective value of an assignment given as name -> value."""
        return self.objective_offset + sum(
            v.objective_coeff * values[v.name] for v in self.variables)

    def violations(self, values, tol=1e-6):
        """Rows and bounds violated by more than ``tol``, as (name, amount)."""
        out = []
        for v in self.variables:
            x = values[v.name]
            if x < v.lower - tol:
                out.append((v.name, v.lower - x))
            elif x > v.upper + tol:
                out.append((v.name, x - v.upper))
        for con in self.constraints:
            lhs = sum(a * values[k] for k, a in con.coeffs.items())
            gap = lhs - con.rhs
            if con.sense == "<=":
                gap = max(gap, 0.0)
            elif con.sense == ">=":
                gap = max(-gap, 0.0)
            if abs(gap) > tol:
                out.append((con.name, abs(gap)))
        return out


def _fmt_terms(items):
    parts = []
    for name, a in items:
        if a == 0.0:
            continue
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        term = name if mag == 1.0 else f"{mag:.17g} {name}"
        parts.append(f"{sign} {term}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _fmt_num(x):
    if x == math.inf:
        return "+inf"
    if x == -math.inf:
        return "-inf"
    return f"{x:.17g}"


def to_lp_string(model: MilpModel) -> str:
    """Render the model in CPLEX LP text format for cross-checking elsewhere.

    Sections appear in the order objective, constraints (declaration order),
    bounds, binaries.
    """
    lines = [f"\\ {model.name}", "Minimize"]
    obj = _fmt_terms((v.name, v.objective_coeff) for v in model.variables)
    if model.objective_offset:
        obj += f" + {_fmt_num(model.objective_offset)} __const"
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    for con in model.constraints:
        sense = "=" if con.sense == "==" else con.sense
        lines.append(f" {con.name}: {_fmt_terms(con.coeffs.items())} {sense} {_fmt_num(con.rhs)}")
    if model.objective_offset:
        lines.append(" __const_fix: __const = 1")
    lines.append("Bounds")
    for v in model.variables:
        if v.lower == -math.inf and v.upper == math.inf:
            lines.append(f" {v.name} free")
        else:
            lines.append(f" {_fmt_num(v.lower)} <= {v.name} <= {_fmt_num(v.upper)}")
    binaries = model.binaries()
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# dense standard form


class _StandardForm:
    """Ax + s = b with bounded structurals and sense-bounded slacks."""

    def __init__(self, model: MilpModel):
        n = len(model.variables)
        m = len(model.constraints)
        self.n, self.m = n, m
        self.A = np.zeros((m, n))
        self.b = np.zeros(m)
        self.slack_lb = np.zeros(m)
        self.slack_ub = np.zeros(m)
        for r, con in enumerate(model.constraints):
            for name, a in con.coeffs.items():
                self.A[r, model.index(name)] += a
            self.b[r] = con.rhs
            if con.sense == "<=":
                self.slack_ub[r] = math.inf
            elif con.sense == ">=":
                self.slack_lb[r] = -math.inf
        self.c = np.array([v.objective_coeff for v in model.variables])
        self.lb = np.array([v.lower for v in model.variables])
        self.ub = np.array([v.upper for v in model.variables])
        self.binary = np.array([v.kind == BINARY for v in model.variables], dtype=bool)
        # [structurals | slacks | artificials]
        self.full = np.hstack([self.A, np.eye(m), np.zeros((m, m))])


_BASIC, _AT_LB, _AT_UB, _FREE = 0, 1, 2, 3


class _LPResult:
    __slots__ = ("status", "x", "objective", "duals", "iterations")

    def __init__(self, status, x=None, objective=math.nan, duals=None, iterations=0):
        self.status = status
        self.x = x
        self.objective = objective
        self.duals = duals
        self.iterations = iterations


def _initial_value(lo, hi):
    if math.isfinite(lo):
        return lo, _AT_LB
    if math.isfinite(hi):
        return hi, _AT_UB
    return 0.0, _FREE


class _Simplex:
    """One LP solve over a _StandardForm with overridden structural bounds."""

    def __init__(self, sf: _StandardForm, lb, ub, opts: SolverOptions):
        self.sf = sf
        self.opts = opts
        n, m = sf.n, sf.m
        self.n, self.m = n, m
        self.N = n + 2 * m
        self.A = sf.full.copy()
        self.b = sf.b
        self.lb = np.concatenate([lb, sf.slack_lb, np.zeros(m)])
        self.ub = np.concatenate([ub, sf.slack_ub, np.zeros(m)])
        self.iterations = 0

    def _setup(self):
        n, m = self.n, self.m
        x = np.zeros(self.N)
        state = np.full(self.N, _AT_LB, dtype=np.int8)
        for j in range(n):
            x[j], state[j] = _initial_value(self.lb[j], self.ub[j])
        resid = self.b - self.A[:, :n] @ x[:n]
        basis = np.zeros(m, dtype=np.int64)
        binv_diag = np.ones(m)
        self.phase1_cost = np.zeros(self.N)
        tol = self.opts.feasibility_tol
        for r in range(m):
            s = n + r
            a = n + m + r
            lo, hi = self.lb[s], self.ub[s]
            if lo - tol <= resid[r] <= hi + tol:
                basis[r] = s
                x[s] = resid[r]
                state[s] = _BASIC
            else:
                bound = lo if resid[r] < lo else hi
                x[s] = bound
                state[s] = _AT_LB if bound == lo else _AT_UB
                q = resid[r] - bound
                sign = 1.0 if q > 0 else -1.0
                self.A[r, a] = sign
                binv_diag[r] = sign
                self.ub[a] = math.inf
                self.phase1_cost[a] = 1.0
                basis[r] = a
                x[a] = abs(q)
                state[a] = _BASIC
        self.x = x
        self.state = state
        self.basis = basis
        self.Binv = np.diag(binv_diag)
        self.since_refactor = 0

    def _refactor(self):
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise MilpError("basis became singular") from exc
        nonbasic = self.state != _BASIC
        rhs = self.b - self.A[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.Binv @ rhs
        self.since_refactor = 0

    def _run(self, cost, price_cols):
        """Iterate to optimality for ``cost``. Returns OPTIMAL or UNBOUNDED."""
        opts = self.opts
        A, lb, ub = self.A, self.lb, self.ub
        m, n = self.m, self.n
        A_struct = A[:, :n]
        degenerate = 0
        bland = False
        opt_tol = opts.optimality_tol * max(1.0, float(np.max(np.abs(cost))) if cost.size else 1.0)
        cols = np.arange(price_cols)
        while True:
            if self.iterations >= opts.max_iterations:
                raise IterationLimitError(
                    f"simplex iteration limit ({opts.max_iterations}) exceeded")
            if self.since_refactor >= opts.refactor_every:
                self._refactor()
            y = cost[self.basis] @ self.Binv
            # slack columns are unit vectors
            d = np.concatenate([cost[:n] - y @ A_struct, cost[n:price_cols] - y])
            st = self.state[:price_cols]
            fixed = lb[:price_cols] == ub[:price_cols]
            can_up = ((st == _AT_LB) | (st == _FREE)) & (d < -opt_tol)
            can_down = ((st == _AT_UB) | (st == _FREE)) & (d > opt_tol)
            eligible = (can_up | can_down) & ~fixed
            if not eligible.any():
                self.duals = y
                return OPTIMAL
            if bland:
                j = int(cols[eligible][0])
            else:
                j = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
            direction = 1.0 if d[j] < 0 else -1.0

            alpha = self.Binv @ A[:, j] if j < n else self.Binv[:, j - n].copy()
            rate = -direction * alpha
            xb = self.x[self.basis]
            lbb = lb[self.basis]
            ubb = ub[self.basis]
            t = np.full(m, math.inf)
            dec = rate < -opts.pivot_tol
            inc = rate > opts.pivot_tol
            t[dec] = np.maximum(xb[dec] - lbb[dec], 0.0) / -rate[dec]
            t[inc] = np.maximum(ubb[inc] - xb[inc], 0.0) / rate[inc]
            t = np.where(np.isnan(t), math.inf, t)
            own = ub[j] - lb[j]
            t_min = float(t.min()) if m else math.inf
            if own <= t_min:
                step, leave = own, -1
            else:
                step = t_min
                ties = np.flatnonzero(t <= t_min + 1e-12)
                if bland:
                    leave = int(ties[np.argmin(self.basis[ties])])
                else:
                    leave = int(ties[np.argmax(np.abs(alpha[ties]))])
            if not math.isfinite(step):
                return UNBOUNDED

            self.iterations += 1
            self.since_refactor += 1
            if step <= opts.feasibility_tol * 1e-3:
                degenerate += 1
                if degenerate >= opts.bland_threshold:
                    bland = True
            else:
                degenerate = 0
                bland = False

            self.x[self.basis] = xb + rate * step
            self.x[j] += direction * step
            if leave < 0:
                # bound flip, basis unchanged
                self.x[j] = ub[j] if direction > 0 else lb[j]
                self.state[j] = _AT_UB if direction > 0 else _AT_LB
                continue

            out = self.basis[leave]
            if rate[leave] < 0:
                self.x[out] = lb[out]
                self.state[out] = _AT_LB
            else:
                self.x[out] = ub[out]
                self.state[out] = _AT_UB
            self.basis[leave] = j
            self.state[j] = _BASIC
            self._pivot(leave, alpha)

    def _pivot(self, r, alpha):
        piv = alpha[r]
        row = self.Binv[r] / piv
        e = alpha.copy()
        e[r] = 0.0
        self.Binv -= np.outer(e, row)
        self.Binv[r] = row

    def _drive_out_artificials(self):
        n, m = self.n, self.m
        first_art = n + m
        for r in range(m):
            if self.basis[r] < first_art:
                continue
            row = self.Binv[r] @ self.A[:, :first_art]
            cand = np.flatnonzero((np.abs(row) > 1e-7) & (self.state[:first_art] != _BASIC))
            if cand.size == 0:
                continue  # redundant row, artificial stays basic at zero
            j = int(cand[np.argmax(np.abs(row[cand]))])
            alpha = self.Binv @ self.A[:, j]
            out = self.basis[r]
            self.state[out] = _AT_LB
            self.x[out] = 0.0
            self.basis[r] = j
            self.state[j] = _BASIC
            self._pivot(r, alpha)
            self.since_refactor += 1
        if self.since_refactor:
            self._refactor()

    def solve(self) -> _LPResult:
        n, m = self.n, self.m
        if np.any(self.lb[:n] > self.ub[:n]):
            return _LPResult(INFEASIBLE)
        self._setup()
        price = n + m  # artificials never (re-)enter
        if self.phase1_cost.any():
            self._run(self.phase1_cost, price)
            if self.since_refactor:
                self._refactor()
            infeas = float(self.x[n + m:].sum())
            if infeas > self.opts.feasibility_tol:
                return _LPResult(INFEASIBLE, iterations=self.iterations)
            self.ub[n + m:] = 0.0
            self._drive_out_artificials()
        cost = np.zeros(self.N)
        cost[:n] = self.sf.c
        status = self._run(cost, price)
        if status == UNBOUNDED:
            return _LPResult(UNBOUNDED, iterations=self.iterations)
        if self.since_refactor:
            self._refactor()
        x = self.x[:n].copy()
        # snap to bounds that are hit within tolerance
        x = np.where(np.abs(x - self.lb[:n]) <= 1e-11, self.lb[:n], x)
        x = np.where(np.abs(x - self.ub[:n]) <= 1e-11, self.ub[:n], x)
        obj = float(self.sf.c @ x)
        duals = cost[self.basis] @ self.Binv
        return _LPResult(OPTIMAL, x, obj, duals, self.iterations)


# --------------------------------------------------------------------------
# public entry points


def _solution(model, sf, res, stats):
    if res.status != OPTIMAL:
        return MilpSolution(res.status, stats=stats)
    values = {v.name: float(res.x[i]) for i, v in enumerate(model.variables)}
    return MilpSolution(OPTIMAL, res.objective + model.objective_offset, values,
                        stats, res.duals)


def solve_lp(model: MilpModel, options: SolverOptions = DEFAULT_OPTIONS) -> MilpSolution:
    """Solve the continuous relaxation (binaries treated as [lower, upper])."""
    model.validate()
    start = time.perf_counter()
    sf = _StandardForm(model)
    res = _Simplex(sf, sf.lb.copy(), sf.ub.copy(), options).solve()
    stats = SolveStats(0, res.iterations, time.perf_counter() - start)
    return _solution(model, sf, res, stats)


def solve_milp(model: MilpModel, options: SolverOptions = DEFAULT_OPTIONS) -> MilpSolution:
    """Best-bound branch-and-bound over the binary variables."""
    model.validate()
    start = time.perf_counter()
    sf = _StandardForm(model)
    stats = SolveStats()
    root_lb = sf.lb.copy()
    root_ub = sf.ub.copy()
    # integral hull of each binary's box
    root_lb[sf.binary] = np.ceil(root_lb[sf.binary] - options.integrality_tol)
    root_ub[sf.binary] = np.floor(root_ub[sf.binary] + options.integrality_tol)
    binaries = np.flatnonzero(sf.binary)

    incumbent = None
    best = math.inf
    counter = 0
    heap = [(-math.inf, counter, root_lb, root_ub)]
    unbounded = False

    def finish(status):
        stats.wall_time = time.perf_counter() - start
        if status == OPTIMAL:
            return _solution(model, sf, incumbent, stats)
        return MilpSolution(status, stats=stats)

    while heap:
        bound, _, lb, ub = heapq.heappop(heap)
        if bound >= best - options.mip_gap * max(1.0, abs(best)):
            continue
        if stats.nodes_explored >= options.max_nodes:
            stats.wall_time = time.perf_counter() - start
            partial = _solution(model, sf, incumbent, stats) if incumbent else None
            raise NodeLimitError(
                f"branch-and-bound node limit ({options.max_nodes}) exceeded", partial)
        stats.nodes_explored += 1
        try:
            res = _Simplex(sf, lb, ub, options).solve()
        except IterationLimitError as exc:
            exc.incumbent = _solution(model, sf, incumbent, stats) if incumbent else None
            raise
        stats.lp_iterations += res.iterations
        if res.status == INFEASIBLE:
            continue
        if res.status == UNBOUNDED:
            unbounded = True
            break
        if res.objective >= best - options.mip_gap * max(1.0, abs(best)):
            continue
        xb = res.x[binaries]
        frac = np.minimum(xb - np.floor(xb), np.ceil(xb) - xb)
        if binaries.size == 0 or frac.max() <= options.integrality_tol:
            res.x[binaries] = np.round(xb) + 0.0
            incumbent = res
            best = res.objective
            continue
        # most fractional, lowest index on ties
        k = int(binaries[np.argmax(frac)])
        for val in (0.0, 1.0):
            clb, cub = lb.copy(), ub.copy()
            clb[k] = cub[k] = val
            counter += 1
            heapq.heappush(heap, (res.objective, counter, clb, cub))

    if unbounded:
        return finish(UNBOUNDED)
    if incumbent is None:
        return finish(INFEASIBLE)
    # re-evaluate with the rounded binaries
    incumbent.objective = float(sf.c @ incumbent.x)
    return finish(OPTIMAL)
