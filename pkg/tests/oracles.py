"""Independent reference computations shared by the test modules."""

import itertools
import math

import numpy as np

from mobigrid.dispatch import VehicleFleet
from mobigrid.grid import Bus, Generator, GridCase, Line
from mobigrid.milp import OPTIMAL, MilpModel, solve_lp
from mobigrid.transport import Edge, TransportNetwork


def random_model(rng, n_cont=3, n_bin=3, n_rows=4, equality=False):
    """Small bounded MILP whose rows are satisfied by a hidden random point."""
    m = MilpModel("random")
    names = []
    point = {}
    for k in range(n_cont):
        lo = float(rng.integers(-3, 1))
        hi = lo + float(rng.integers(1, 6))
        names.append(m.add_variable(f"x{k}", lo, hi, cost=float(rng.integers(-6, 7))))
        point[names[-1]] = rng.uniform(lo, hi)
    for k in range(n_bin):
        names.append(m.add_binary(f"b{k}", cost=float(rng.integers(-6, 7))))
        point[names[-1]] = float(rng.integers(0, 2))
    for r in range(n_rows):
        chosen = rng.choice(len(names), size=min(len(names), int(rng.integers(1, 4))), replace=False)
        coeffs = {names[j]: float(rng.integers(-4, 5)) or 1.0 for j in chosen}
        lhs = sum(a * point[v] for v, a in coeffs.items())
        sense = "==" if equality and r == 0 else ("<=", ">=")[int(rng.integers(2))]
        slack = float(rng.integers(0, 3))
        if sense == "<=":
            rhs = math.ceil(lhs) + slack
        elif sense == ">=":
            rhs = math.floor(lhs) - slack
        else:
            rhs = lhs
        m.add_constraint(coeffs, sense, rhs, f"r{r}")
    return m


def fix_binaries(model, assignment):
    fixed = model.copy()
    for name, val in assignment.items():
        v = fixed.variable(name)
        fixed.variables[fixed.index(name)] = type(v)(v.name, val, val, v.kind, v.objective_coeff)
    return fixed


def enumerate_milp(model):
    """Best objective over all 0/1 assignments, one LP each (math.inf if none)."""
    bins = model.binaries()
    best = math.inf
    for bits in itertools.product((0.0, 1.0), repeat=len(bins)):
        sol = solve_lp(fix_binaries(model, dict(zip(bins, bits))))
        if sol.status == OPTIMAL:
            best = min(best, sol.objective)
    return best


def dense(model):
    n, m = len(model.variables), len(model.constraints)
    A = np.zeros((m, n))
    for r, con in enumerate(model.constraints):
        for name, a in con.coeffs.items():
            A[r, model.index(name)] += a
    c = np.array([v.objective_coeff for v in model.variables])
    return A, c


def dual_audit(model, sol, tol=1e-6):
    """Dual feasibility and complementary slackness of an optimal LP basis.

    Rows are Ax + s = b with s >= 0 for <=, s <= 0 for >=, s = 0 for ==.
    With row prices y the reduced cost of x_j is c_j - y.A_j and that of the
    slack s_i is -y_i. Every reduced cost must have the sign its variable's
    position (at lower, at upper, strictly inside) demands, and strong
    duality c.x = y.b + sum d_j x_j must hold. Returns a list of problems.
    """
    A, c = dense(model)
    x = np.array([sol.values[v.name] for v in model.variables])
    y = np.asarray(sol.duals)
    b = np.array([con.rhs for con in model.constraints])
    s = b - A @ x
    problems = []
    d = c - y @ A
    scale = 1.0 + np.abs(c).max(initial=0.0) + np.abs(y).max(initial=0.0) * (1 + np.abs(A).max(initial=0.0))
    for j, v in enumerate(model.variables):
        at_lo = abs(x[j] - v.lower) <= tol
        at_hi = abs(x[j] - v.upper) <= tol
        if at_lo and at_hi:
            continue
        if at_lo and d[j] < -tol * scale:
            problems.append(f"{v.name} at lower with reduced cost {d[j]}")
        elif at_hi and d[j] > tol * scale:
            problems.append(f"{v.name} at upper with reduced cost {d[j]}")
        elif not at_lo and not at_hi and abs(d[j]) > tol * scale:
            problems.append(f"{v.name} interior with reduced cost {d[j]}")
    for i, con in enumerate(model.constraints):
        ds = -y[i]
        if con.sense == "==":
            continue
        active = abs(s[i]) <= tol
        if con.sense == "<=" and not active and abs(ds) > tol * scale:
            problems.append(f"row {con.name} slack {s[i]} with price {y[i]}")
        if con.sense == "<=" and active and ds < -tol * scale:
            problems.append(f"row {con.name} wrong-sign price {y[i]}")
        if con.sense == ">=" and not active and abs(ds) > tol * scale:
            problems.append(f"row {con.name} slack {s[i]} with price {y[i]}")
        if con.sense == ">=" and active and ds > tol * scale:
            problems.append(f"row {con.name} wrong-sign price {y[i]}")
    primal = float(c @ x)
    dual = float(y @ b + d @ x)
    if abs(primal - dual) > tol * (1 + abs(primal)) * 10:
        problems.append(f"duality gap {primal} vs {dual}")
    return problems


def random_strong_digraph(rng, n, extra=None, lo=1, hi=12):
    """Strongly connected digraph: a random Hamiltonian cycle plus random arcs."""
    order = [int(v) + 1 for v in rng.permutation(n)]
    pairs = {(order[k], order[(k + 1) % n]) for k in range(n)} if n > 1 else set()
    extra = n if extra is None else extra
    while len(pairs) < min(n * (n - 1), n + extra):
        a, b = (int(v) + 1 for v in rng.choice(n, 2, replace=False))
        pairs.add((a, b))
    edges = [Edge(a, b, float(rng.integers(lo, hi + 1))) for a, b in sorted(pairs)]
    return TransportNetwork(n, edges)


def is_simple_path(route, s, e):
    if not route.edges:
        return s == e
    nodes = route.nodes
    if nodes[0] != s or nodes[-1] != e or len(set(nodes)) != len(nodes):
        return False
    return all(a[1] == b[0] for a, b in zip(route.edges, route.edges[1:]))


def random_scenario(rng, n_max=5, fleets_max=3, with_pmin=False):
    """Small radial-ish grid with 1-3 fleets; returns (case, fleets, travel scale)."""
    n = int(rng.integers(2, n_max + 1))
    lines = [Line(k + 1, int(rng.integers(1, k + 1)), float(rng.uniform(5, 20)),
                  -float(rng.uniform(15, 60)), float(rng.uniform(15, 60))) for k in range(1, n)]
    if n > 2 and rng.random() < 0.5:
        a, b = (int(v) + 1 for v in rng.choice(n, 2, replace=False))
        lines.append(Line(a, b, float(rng.uniform(5, 20)), -30.0, 30.0))
    gens = [Generator(1, 0, 150, float(rng.integers(10, 40)))]
    if rng.random() < 0.6:
        gens.append(Generator(int(rng.integers(1, n + 1)), 0, float(rng.uniform(10, 60)),
                              float(rng.integers(20, 60))))
    case = GridCase([Bus(1, 0)] + [Bus(i, float(rng.integers(0, 30))) for i in range(2, n + 1)],
                    lines, gens, name="rand")
    fleets = []
    for k in range(int(rng.integers(1, fleets_max + 1))):
        origin = int(rng.integers(1, n + 1))
        travel = rng.integers(1, 10, n).astype(float)
        travel[origin - 1] = 0.0
        excluded = {i for i in range(1, n + 1) if i != origin and rng.random() < 0.25}
        pmax = float(rng.integers(5, 30))
        pmin = float(rng.integers(0, 5)) if with_pmin else 0.0
        fleets.append(VehicleFleet(f"f{k}", origin, pmin, pmax, float(rng.integers(5, 50)),
                                   tuple(travel), frozenset(excluded)))
    return case, fleets, float(rng.choice([0.5, 1.0, 3.0]))


__all__ = ["random_model", "fix_binaries", "enumerate_milp", "dense", "dual_audit",
           "random_strong_digraph", "is_simple_path", "random_scenario"]
