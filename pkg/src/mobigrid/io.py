"""Readers and writers for grid, road network, fleet and scenario files.

All inputs are line-oriented text. The first non-comment line is a header
``mobigrid <kind> <version>``; ``#`` starts a comment. See docs/formats.md
for the field-by-field reference.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .dispatch import (CostBreakdown, DispatchOptions, DispatchPlan, FleetSpec,
                       VehicleDispatch)
from .grid import Bus, Generator, GridCase, GridState, Line
from .milp import SolverOptions
from .transport import Edge, RouteSolution, TransportNetwork

FORMAT_VERSION = 1
REPORT_FORMAT = "mobigrid-report"
BUNDLED = ("ieee14-demo", "ieee30-demo")


class ParseError(ValueError):
    def __init__(self, message, source="<string>", line=None):
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")
        self.source = source
        self.line = line


class ScenarioError(ValueError):
    pass


# --------------------------------------------------------------------------
# low-level line handling


def _lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _read_header(lines, kind, source):
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise ParseError("empty document", source) from None
    parts = line.split()
    if len(parts) != 3 or parts[0] != "mobigrid" or parts[1] != kind:
        raise ParseError(f"expected header 'mobigrid {kind} {FORMAT_VERSION}', got {line!r}", source, lineno)
    if parts[2] != str(FORMAT_VERSION):
        raise ParseError(f"unsupported {kind} format version {parts[2]}", source, lineno)


def _num(token, source, lineno, what="number"):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"bad {what} {token!r}", source, lineno) from None
    if math.isnan(value):
        raise ParseError(f"{what} is NaN", source, lineno)
    return value


def _int(token, source, lineno, what="integer"):
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"bad {what} {token!r}", source, lineno) from None


def _fmt(x):
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return repr(float(x))


def _read_text(path):
    path = Path(path)
    try:
        return path.read_text(), str(path)
    except OSError as exc:
        raise ParseError(f"cannot read file ({exc.strerror})", str(path)) from None


# --------------------------------------------------------------------------
# grid case


_GRID_KEYS = {"name", "base_mva", "ref_bus"}
_GRID_SECTIONS = ("bus", "line", "gen")


def _parse_cost(token, source, lineno):
    if ":" not in token:
        return _num(token, source, lineno, "cost"), ()
    segments = []
    for piece in token.split(";"):
        mw, _, cost = piece.partition(":")
        segments.append((_num(mw, source, lineno, "breakpoint"), _num(cost, source, lineno, "cost")))
    return 0.0, tuple(segments)


def parse_grid(text, source="<string>") -> GridCase:
    lines = _lines(text)
    _read_header(lines, "grid", source)
    meta = {"name": "grid", "base_mva": "100", "ref_bus": "1"}
    section = None
    buses, lines_, gens = [], [], []
    for lineno, line in lines:
        if line.startswith("["):
            m = re.fullmatch(r"\[(\w+)\]", line)
            if not m or m.group(1) not in _GRID_SECTIONS:
                raise ParseError(f"unknown section {line}", source, lineno)
            section = m.group(1)
            continue
        if section is None:
            key, eq, value = (p.strip() for p in line.partition("="))
            if not eq or key not in _GRID_KEYS:
                raise ParseError(f"unknown key in {line!r}", source, lineno)
            meta[key] = value
            continue
        tok = line.split()
        if section == "bus":
            if len(tok) != 2:
                raise ParseError("bus rows are: id load_mw", source, lineno)
            buses.append((lineno, _int(tok[0], source, lineno, "bus id"), _num(tok[1], source, lineno)))
        elif section == "line":
            if len(tok) != 5:
                raise ParseError("line rows are: from to susceptance_pu flow_min_mw flow_max_mw", source, lineno)
            lines_.append((lineno, _int(tok[0], source, lineno), _int(tok[1], source, lineno),
                           *(_num(t, source, lineno) for t in tok[2:])))
        else:
            if len(tok) != 4:
                raise ParseError("gen rows are: bus pmin_mw pmax_mw cost", source, lineno)
            cost, segments = _parse_cost(tok[3], source, lineno)
            gens.append(Generator(_int(tok[0], source, lineno), _num(tok[1], source, lineno),
                                  _num(tok[2], source, lineno), cost, segments))
    base = _num(meta["base_mva"], source, None, "base_mva")
    if base <= 0:
        raise ParseError("base_mva must be positive", source)
    try:
        return GridCase(
            buses=[Bus(i, load) for _, i, load in buses],
            lines=[Line(f, t, b * base, lo, hi) for _, f, t, b, lo, hi in lines_],
            generators=gens,
            ref_bus=_int(meta["ref_bus"], source, None, "ref_bus"),
            base_mva=base,
            name=meta["name"],
        )
    except ValueError as exc:
        raise ParseError(str(exc), source) from None


def load_grid(path) -> GridCase:
    text, source = _read_text(path)
    return parse_grid(text, source)


def format_grid(case: GridCase) -> str:
    out = [f"mobigrid grid {FORMAT_VERSION}", f"name = {case.name}",
           f"base_mva = {_fmt(case.base_mva)}", f"ref_bus = {case.ref_bus}", "", "[bus]",
           "# id load_mw"]
    out += [f"{b.id} {_fmt(b.load)}" for b in case.buses]
    out += ["", "[line]", "# from to susceptance_pu flow_min_mw flow_max_mw"]
    out += [f"{ln.from_bus} {ln.to_bus} {_fmt(ln.susceptance / case.base_mva)} "
            f"{_fmt(ln.flow_min)} {_fmt(ln.flow_max)}" for ln in case.lines]
    out += ["", "[gen]", "# bus pmin_mw pmax_mw cost"]
    for g in case.generators:
        cost = ";".join(f"{_fmt(u)}:{_fmt(c)}" for u, c in g.segments) if g.segments else _fmt(g.cost)
        out.append(f"{g.bus} {_fmt(g.pmin)} {_fmt(g.pmax)} {cost}")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# transport network


def parse_transport(text, source="<string>") -> TransportNetwork:
    lines = _lines(text)
    _read_header(lines, "transport", source)
    n_nodes = None
    edges, restricted, seen = [], [], {}
    for lineno, line in lines:
        if n_nodes is None:
            key, eq, value = (p.strip() for p in line.partition("="))
            if key != "nodes" or not eq:
                raise ParseError("expected 'nodes = N' before the edge list", source, lineno)
            n_nodes = _int(value, source, lineno, "node count")
            continue
        tok = line.split()
        if len(tok) not in (3, 4):
            raise ParseError("edge rows are: from to weight [restricted-flag]", source, lineno)
        tail, head = _int(tok[0], source, lineno), _int(tok[1], source, lineno)
        if (tail, head) in seen:
            raise ParseError(f"duplicate directed edge {tail}->{head} (first on line {seen[tail, head]})",
                             source, lineno)
        seen[tail, head] = lineno
        flag = tok[3] if len(tok) == 4 else "0"
        if flag not in ("0", "1"):
            raise ParseError(f"restricted flag must be 0 or 1, got {flag!r}", source, lineno)
        if flag == "1":
            restricted.append(len(edges))
        edges.append(Edge(tail, head, _num(tok[2], source, lineno, "weight")))
    if n_nodes is None:
        raise ParseError("missing 'nodes = N'", source)
    try:
        return TransportNetwork(n_nodes, edges, frozenset(restricted))
    except ValueError as exc:
        raise ParseError(str(exc), source) from None


def load_transport(path) -> TransportNetwork:
    text, source = _read_text(path)
    return parse_transport(text, source)


def format_transport(net: TransportNetwork, comment=None) -> str:
    out = [f"mobigrid transport {FORMAT_VERSION}"]
    if comment:
        out += [f"# {c}" for c in comment.splitlines()]
    out += [f"nodes = {net.n_nodes}", "# from to weight restricted"]
    for k, e in enumerate(net.edges):
        w = int(e.weight) if float(e.weight).is_integer() else _fmt(e.weight)
        out.append(f"{e.tail} {e.head} {w} {1 if k in net.restricted else 0}")
    return "\n".join(out) + "\n"


def generate_transport_network(n_nodes, seed, extra_edges=None, weight_range=(1, 12)) -> TransportNetwork:
    """Random meshed road network: a spanning tree plus chords, two-way roads.

    Each direction of a road gets its own integer weight drawn uniformly from
    ``weight_range``. Deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    if extra_edges is None:
        extra_edges = n_nodes
    max_pairs = n_nodes * (n_nodes - 1) // 2
    target = min(n_nodes - 1 + extra_edges, max_pairs)
    order = rng.permutation(n_nodes) + 1
    pairs = set()
    for k in range(1, n_nodes):
        other = int(order[rng.integers(k)])
        a, b = int(order[k]), other
        pairs.add((min(a, b), max(a, b)))
    while len(pairs) < target:
        a, b = (int(v) + 1 for v in rng.choice(n_nodes, 2, replace=False))
        pairs.add((min(a, b), max(a, b)))
    lo, hi = weight_range
    edges = []
    for a, b in sorted(pairs):
        edges.append(Edge(a, b, float(rng.integers(lo, hi + 1))))
        edges.append(Edge(b, a, float(rng.integers(lo, hi + 1))))
    return TransportNetwork(n_nodes, edges)


# --------------------------------------------------------------------------
# fleets


def parse_fleets(text, source="<string>"):
    lines = _lines(text)
    _read_header(lines, "fleet", source)
    specs, ids = [], set()
    for lineno, line in lines:
        tok = line.split()
        if len(tok) < 5:
            raise ParseError("fleet rows are: id origin pmin pmax energy_cost [exclude=..] [radius=..]",
                             source, lineno)
        fid = tok[0]
        if fid in ids:
            raise ParseError(f"duplicate fleet id {fid!r}", source, lineno)
        ids.add(fid)
        exclude, radius = frozenset(), None
        for opt in tok[5:]:
            key, eq, value = opt.partition("=")
            if key == "exclude" and eq:
                exclude = frozenset(_int(v, source, lineno, "node") for v in value.split(",") if v)
            elif key == "radius" and eq:
                radius = _num(value, source, lineno, "radius")
            else:
                raise ParseError(f"unknown fleet option {opt!r}", source, lineno)
        pmin = _num(tok[2], source, lineno)
        pmax = _num(tok[3], source, lineno)
        if not 0 <= pmin <= pmax:
            raise ParseError(f"fleet {fid}: need 0 <= pmin <= pmax", source, lineno)
        specs.append(FleetSpec(fid, _int(tok[1], source, lineno, "origin"), pmin, pmax,
                               _num(tok[4], source, lineno), exclude, radius))
    return specs


def load_fleets(path):
    text, source = _read_text(path)
    return parse_fleets(text, source)


def format_fleets(specs) -> str:
    out = [f"mobigrid fleet {FORMAT_VERSION}", "# id origin pmin pmax energy_cost [exclude=..] [radius=..]"]
    for s in specs:
        row = f"{s.id} {s.origin} {_fmt(s.pmin)} {_fmt(s.pmax)} {_fmt(s.energy_cost)}"
        if s.exclude:
            row += " exclude=" + ",".join(str(i) for i in sorted(s.exclude))
        if s.radius is not None:
            row += f" radius={_fmt(s.radius)}"
        out.append(row)
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# options, scenarios

_SOLVER_KEYS = {f: type(getattr(SolverOptions(), f)) for f in SolverOptions.__dataclass_fields__}
def _bool(value):
    if value.lower() in ("1", "true", "yes", "on"):
        return True
    if value.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


_DISPATCH_KEYS = {"travel_cost_scale": float, "enumeration_cap": int, "routing_method": str,
                  "aggregate_rows": _bool}


def _parse_closures(value, source, lineno):
    pairs = []
    for item in value.replace(",", " ").split():
        a, dash, b = item.partition("-")
        if not dash:
            raise ParseError(f"closure {item!r} should look like 3-4", source, lineno)
        pairs.append((_int(a, source, lineno), _int(b, source, lineno)))
    return tuple(pairs)


def apply_options(options: DispatchOptions, settings: dict, source="<options>") -> DispatchOptions:
    """Overlay ``key -> string`` settings onto dispatch and solver options."""
    solver_kw, dispatch_kw = {}, {}
    for key, value in settings.items():
        if key in _SOLVER_KEYS:
            conv = _SOLVER_KEYS[key]
            solver_kw[key] = int(value) if conv is int else float(value)
        elif key in _DISPATCH_KEYS:
            dispatch_kw[key] = _DISPATCH_KEYS[key](value)
        else:
            raise ParseError(f"unknown option {key!r}", source)
    if dispatch_kw.get("routing_method", "milp") not in ("milp", "dijkstra"):
        raise ParseError("routing_method must be milp or dijkstra", source)
    return replace(options, solver=replace(options.solver, **solver_kw), **dispatch_kw)


def parse_config(text, source="<string>", base: DispatchOptions | None = None) -> DispatchOptions:
    lines = _lines(text)
    _read_header(lines, "config", source)
    settings = {}
    for lineno, line in lines:
        key, eq, value = (p.strip() for p in line.partition("="))
        if not eq:
            raise ParseError(f"expected key = value, got {line!r}", source, lineno)
        settings[key] = value
    try:
        return apply_options(base or DispatchOptions(), settings, source)
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc), source) from None


def load_config(path, base=None) -> DispatchOptions:
    text, source = _read_text(path)
    return parse_config(text, source, base)


@dataclass
class Scenario:
    name: str
    grid: GridCase
    transport: TransportNetwork
    fleets: list
    options: DispatchOptions = field(default_factory=DispatchOptions)
    closures: tuple = ()

    def validate(self):
        if self.transport.n_nodes != self.grid.n_buses:
            raise ScenarioError(
                f"scenario {self.name}: transport network has {self.transport.n_nodes} nodes "
                f"but the grid has {self.grid.n_buses} buses; the layers must share one node set")
        for s in self.fleets:
            if not 1 <= s.origin <= self.grid.n_buses:
                raise ScenarioError(f"scenario {self.name}: fleet {s.id} origin {s.origin} "
                                    f"is not a bus of grid {self.grid.name} (1..{self.grid.n_buses})")
            bad = sorted(i for i in s.exclude if not 1 <= i <= self.grid.n_buses)
            if bad:
                raise ScenarioError(f"scenario {self.name}: fleet {s.id} excludes unknown nodes {bad}")
        for a, b in self.closures:
            if not self.transport.has_edge(a, b):
                raise ScenarioError(f"scenario {self.name}: closure {a}-{b} is not a road")
        return self


_SCENARIO_KEYS = {"name", "grid", "transport", "fleets", "closures"}


def parse_scenario(text, source="<string>", base_dir=None) -> Scenario:
    lines = _lines(text)
    _read_header(lines, "scenario", source)
    meta, settings = {}, {}
    closures = ()
    closure_line = None
    for lineno, line in lines:
        key, eq, value = (p.strip() for p in line.partition("="))
        if not eq:
            raise ParseError(f"expected key = value, got {line!r}", source, lineno)
        if key == "closures":
            closures = _parse_closures(value, source, lineno)
            closure_line = lineno
        elif key in _SCENARIO_KEYS:
            meta[key] = value
        elif key in _SOLVER_KEYS or key in _DISPATCH_KEYS:
            settings[key] = value
        else:
            raise ParseError(f"unknown scenario key {key!r}", source, lineno)
    for key in ("grid", "transport", "fleets"):
        if key not in meta:
            raise ParseError(f"scenario is missing '{key} = <file>'", source)
    base = Path(base_dir) if base_dir is not None else Path(".")
    options = apply_options(DispatchOptions(), settings, source)
    scenario = Scenario(
        name=meta.get("name", Path(source).stem),
        grid=load_grid(base / meta["grid"]),
        transport=load_transport(base / meta["transport"]),
        fleets=load_fleets(base / meta["fleets"]),
        options=options,
        closures=closures,
    )
    try:
        return scenario.validate()
    except ScenarioError as exc:
        if closure_line is not None and "closure" in str(exc):
            raise ParseError(str(exc), source, closure_line) from None
        raise


def bundled_path(name) -> Path:
    return Path(str(resources.files("mobigrid") / "data" / f"{name}.scenario"))


def load_scenario(source, *, options: DispatchOptions | None = None) -> Scenario:
    """Load a bundled scenario by name (e.g. ``ieee14-demo``) or a scenario file."""
    if source in BUNDLED:
        path = bundled_path(source)
    else:
        path = Path(source)
        if not path.exists():
            raise ParseError(f"no such scenario file (bundled names: {', '.join(BUNDLED)})", str(source))
    scenario = parse_scenario(path.read_text(), str(path), path.parent)
    if options is not None:
        scenario.options = options
    return scenario


def make_scenario(grid, transport, fleets, name="scenario", options=None, closures=()) -> Scenario:
    return Scenario(name, grid, transport, list(fleets), options or DispatchOptions(),
                    tuple(closures)).validate()


# --------------------------------------------------------------------------
# MATPOWER cases


def _matpower_matrix(text, name):
    m = re.search(rf"mpc\.{name}\s*=\s*\[(.*?)\];", text, re.S)
    if not m:
        return None
    rows = []
    for raw in m.group(1).splitlines():
        raw = raw.split("%", 1)[0].strip().rstrip(";").strip()
        if raw:
            rows.append([float(v) for v in raw.replace(",", " ").split()])
    return rows


def parse_matpower(text, name="matpower") -> GridCase:
    """Build a DC case from a MATPOWER ``.m`` file.

    Buses are renumbered 1..N in file order. Out-of-service branches and
    generators are dropped; RATE_A = 0 means no flow limit. Polynomial costs
    keep only the linear coefficient; piecewise costs become segments.
    """
    base_m = re.search(r"mpc\.baseMVA\s*=\s*([\d.eE+-]+)", text)
    base = float(base_m.group(1)) if base_m else 100.0
    bus_rows = _matpower_matrix(text, "bus")
    branch_rows = _matpower_matrix(text, "branch")
    gen_rows = _matpower_matrix(text, "gen")
    if not bus_rows or not branch_rows or gen_rows is None:
        raise ParseError("missing mpc.bus, mpc.branch or mpc.gen", name)
    cost_rows = _matpower_matrix(text, "gencost") or []
    renum = {int(r[0]): k + 1 for k, r in enumerate(bus_rows)}
    ref = next((renum[int(r[0])] for r in bus_rows if int(r[1]) == 3), 1)
    buses = [Bus(renum[int(r[0])], r[2]) for r in bus_rows]
    lines = []
    for r in branch_rows:
        if len(r) > 10 and r[10] == 0:
            continue
        x = r[3] * (r[8] if len(r) > 8 and r[8] else 1.0)
        if x == 0:
            raise ParseError(f"branch {int(r[0])}-{int(r[1])} has zero reactance", name)
        rate = r[5] if len(r) > 5 else 0.0
        lim = rate if rate > 0 else math.inf
        lines.append(Line(renum[int(r[0])], renum[int(r[1])], base / abs(x), -lim, lim))
    gens = []
    for k, r in enumerate(gen_rows):
        if len(r) > 7 and r[7] <= 0:
            continue
        cost, segments = 0.0, ()
        if k < len(cost_rows):
            c = cost_rows[k]
            ncost = int(c[3])
            coeffs = c[4:4 + (2 * ncost if int(c[0]) == 1 else ncost)]
            if int(c[0]) == 2:
                cost = coeffs[-2] if ncost >= 2 else 0.0
            else:
                pts = list(zip(coeffs[0::2], coeffs[1::2]))
                segments = tuple((p1, (f1 - f0) / (p1 - p0))
                                 for (p0, f0), (p1, f1) in zip(pts, pts[1:]))
        gens.append(Generator(renum[int(r[0])], r[9], r[8], cost, segments))
    try:
        return GridCase(buses, lines, gens, ref, base, name)
    except ValueError as exc:
        raise ParseError(str(exc), name) from None


def load_matpower(path) -> GridCase:
    path = Path(path)
    return parse_matpower(path.read_text(), path.stem)


# --------------------------------------------------------------------------
# reports


def _route_dict(route):
    if route is None:
        return None
    return {"origin": route.origin, "destination": route.destination,
            "cost": route.total_cost if route.found else None,
            "edges": [list(e) for e in route.edges]}


def _route_from(d):
    if d is None:
        return None
    cost = math.inf if d["cost"] is None else d["cost"]
    return RouteSolution(d["origin"], d["destination"], tuple(tuple(e) for e in d["edges"]), cost)


def route_to_dict(route: RouteSolution) -> dict:
    return {"format": REPORT_FORMAT, "format_version": FORMAT_VERSION, "kind": "route",
            "found": route.found, "route": _route_dict(route)}


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def plan_to_dict(plan: DispatchPlan) -> dict:
    reduction = plan.reduction
    return {
        "format": REPORT_FORMAT,
        "format_version": FORMAT_VERSION,
        "kind": plan.kind,
        "objective": float(plan.objective),
        "baseline_objective": None if plan.baseline_objective is None else float(plan.baseline_objective),
        "reduction_percent": None if reduction is None else 100.0 * reduction,
        "breakdown": {"generation": float(plan.breakdown.generation),
                      "vehicle_energy": float(plan.breakdown.vehicle_energy),
                      "travel": float(plan.breakdown.travel)},
        "vehicles": [{"id": v.fleet_id, "origin": v.origin, "destination": v.destination,
                      "power": float(v.power), "injection": float(v.injection),
                      "travel_cost": float(v.travel_cost), "route": _route_dict(v.route)}
                     for v in plan.vehicles],
        "grid": {"angles": [float(x) for x in plan.grid.angles],
                 "generation": [float(x) for x in plan.grid.generation],
                 "flows": [float(x) for x in plan.grid.flows]},
        "stats": _plain(plan.stats),
    }


def plan_from_dict(doc: dict) -> DispatchPlan:
    if doc.get("format") != REPORT_FORMAT:
        raise ParseError("not a mobigrid report", "<report>")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"unsupported report version {doc.get('format_version')}", "<report>")
    vehicles = [VehicleDispatch(v["id"], v["origin"], v["destination"], v["power"],
                                _route_from(v["route"]), v["travel_cost"]) for v in doc["vehicles"]]
    g = doc["grid"]
    state = GridState(np.array(g["angles"], dtype=float), np.array(g["generation"], dtype=float),
                      np.array(g["flows"], dtype=float))
    b = doc["breakdown"]
    return DispatchPlan(doc["kind"], vehicles, state, doc["objective"],
                        CostBreakdown(b["generation"], b["vehicle_energy"], b["travel"]),
                        doc["baseline_objective"], dict(doc["stats"]))


def _human_plan(plan: DispatchPlan) -> str:
    out = [f"{plan.kind} plan", ""]
    out.append(f"  objective            {plan.objective:14.4f}")
    if plan.baseline_objective is not None:
        out.append(f"  baseline objective   {plan.baseline_objective:14.4f}")
        out.append(f"  cost reduction       {100 * plan.reduction:13.4f}%")
    bd = plan.breakdown
    out.append(f"    generation         {bd.generation:14.4f}")
    out.append(f"    vehicle energy     {bd.vehicle_energy:14.4f}")
    out.append(f"    travel             {bd.travel:14.4f}")
    if plan.vehicles:
        out += ["", "  fleet  origin  destination  power_mw  travel  route"]
        for v in plan.vehicles:
            dest = str(v.destination) if v.dispatched else "-"
            if v.route is None:
                route = "-"
            elif not v.route.edges:
                route = "(stays)"
            else:
                route = " ".join(str(n) for n in v.route.nodes)
            out.append(f"  {v.fleet_id:<5}  {v.origin:>6}  {dest:>11}  {v.power:8.3f}  "
                       f"{v.travel_cost:6.1f}  {route}")
    out += ["", "  generator setpoints (MW): " + " ".join(f"{p:.3f}" for p in plan.grid.generation)]
    out.append("  line flows (MW):         " + " ".join(f"{f:.2f}" for f in plan.grid.flows))
    if plan.stats:
        keys = ("nodes_explored", "lp_iterations", "lp_solves", "wall_time")
        parts = [f"{k}={plan.stats[k]:.4g}" if isinstance(plan.stats[k], float) else f"{k}={plan.stats[k]}"
                 for k in keys if k in plan.stats]
        if parts:
            out.append("  solver: " + " ".join(parts))
    return "\n".join(out) + "\n"


def write_report(plan: DispatchPlan, format="machine") -> str:
    if format == "machine":
        return json.dumps(plan_to_dict(plan), indent=2) + "\n"
    if format == "human":
        return _human_plan(plan)
    raise ValueError(f"unknown report format {format!r}")


def read_report(text) -> DispatchPlan:
    return plan_from_dict(json.loads(text))
