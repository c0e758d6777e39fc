"""Command-line entry point: ``mobigrid route|dispatch|verify|bench``.

Exit codes: 0 success, 1 input error, 2 infeasible or no route,
3 resource limit, 4 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import statistics
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import io as mio
from .dispatch import (DispatchInfeasibleError, DispatchOptions, FleetError, brute_force_dispatch,
                       compile_fleets, run_schedule, solve_dispatch)
from .grid import GridError
from .milp import MilpError, ModelError, ResourceLimitError
from .transport import NetworkError, all_pairs_costs, shortest_path, solve_route

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_RESOURCE = 3
EXIT_MISMATCH = 4

VERIFY_TOL = 1e-6

log = logging.getLogger("mobigrid")

INPUT_ERRORS = (mio.ParseError, mio.ScenarioError, GridError, NetworkError, FleetError,
                ModelError, OSError)


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _closures(items):
    pairs = []
    for item in items or ():
        pairs.extend(mio._parse_closures(item, "--close", None))
    return pairs


def _header_kind(path):
    text = Path(path).read_text()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].split()
        if line:
            return line[1] if len(line) >= 2 and line[0] == "mobigrid" else None
    return None


def _scenario(source, args):
    sc = mio.load_scenario(source)
    if args.config:
        sc.options = mio.load_config(args.config, base=sc.options)
    if getattr(args, "close", None):
        sc.closures = tuple(sc.closures) + tuple(_closures(args.close))
        sc.validate()
    return sc


def _emit(args, doc, text):
    if args.json:
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------


def cmd_route(args):
    source = args.source
    if source not in mio.BUNDLED and _header_kind(source) == "transport":
        net = mio.load_transport(source)
        closures = _closures(args.close)
        options = mio.load_config(args.config) if args.config else DispatchOptions()
    else:
        sc = _scenario(source, args)
        net, closures, options = sc.transport, sc.closures, sc.options
    roads = net.with_closures(closures)
    if args.method == "dijkstra":
        route = shortest_path(roads, args.origin, args.to)
    else:
        route = solve_route(roads, args.origin, args.to, options.solver)
    log.debug("route %s -> %s: %s", args.origin, args.to, route)
    if route.found:
        path = " -> ".join(str(n) for n in route.nodes)
        text = f"route {args.origin} -> {args.to}\n  cost  {route.total_cost:g}\n  path  {path}\n"
    else:
        text = f"route {args.origin} -> {args.to}\n  no route\n"
    _emit(args, mio.route_to_dict(route), text)
    return EXIT_OK if route.found else EXIT_INFEASIBLE


def cmd_dispatch(args):
    sc = _scenario(args.scenario, args)
    if args.baseline:
        plan = solve_dispatch(sc.grid, [], options=sc.options)
        plan.baseline_objective = None
    else:
        plan = run_schedule(sc.grid, sc.transport, sc.fleets, sc.closures, sc.options)
    plan.stats["scenario"] = sc.name
    fmt = "machine" if args.json else "human"
    sys.stdout.write(mio.write_report(plan, fmt))
    return EXIT_OK


def cmd_verify(args):
    sc = _scenario(args.scenario, args)
    options = sc.options
    if args.cap is not None:
        options = replace(options, enumeration_cap=args.cap)
    roads = sc.transport.with_closures(sc.closures)
    table = all_pairs_costs(roads, sorted({f.origin for f in sc.fleets}), "dijkstra")
    fleets = compile_fleets(sc.fleets, table)
    t0 = time.perf_counter()
    oracle = brute_force_dispatch(sc.grid, fleets, options=options)
    t_oracle = time.perf_counter() - t0
    t0 = time.perf_counter()
    plan = solve_dispatch(sc.grid, fleets, options=options)
    t_milp = time.perf_counter() - t0
    gap = abs(plan.objective - oracle.objective) / max(1.0, abs(oracle.objective))
    ok = gap <= VERIFY_TOL
    doc = {"format": mio.REPORT_FORMAT, "format_version": mio.FORMAT_VERSION, "kind": "verify",
           "scenario": sc.name, "milp_objective": plan.objective,
           "oracle_objective": oracle.objective, "relative_gap": gap, "tolerance": VERIFY_TOL,
           "passed": ok, "enumerated_lps": oracle.stats["lp_solves"],
           "milp_nodes": plan.stats["nodes_explored"],
           "milp_seconds": t_milp, "oracle_seconds": t_oracle,
           "destinations": {"milp": {v.fleet_id: v.destination for v in plan.vehicles},
                            "oracle": {v.fleet_id: v.destination for v in oracle.vehicles}}}
    text = (f"verify {sc.name}\n"
            f"  MILP objective        {plan.objective:.6f}  ({plan.stats['nodes_explored']} nodes, "
            f"{t_milp:.2f} s)\n"
            f"  enumeration objective {oracle.objective:.6f}  ({oracle.stats['lp_solves']} LPs, "
            f"{t_oracle:.2f} s)\n"
            f"  relative gap          {gap:.3e}  {'PASS' if ok else 'FAIL'} (tol {VERIFY_TOL:g})\n")
    _emit(args, doc, text)
    return EXIT_OK if ok else EXIT_MISMATCH


def bench_case(source, repeats, config=None):
    """Time the dispatch MIP (travel costs computed once, outside the clock)."""
    sc = mio.load_scenario(source)
    if config:
        sc.options = mio.load_config(config, base=sc.options)
    roads = sc.transport.with_closures(sc.closures)
    table = all_pairs_costs(roads, sorted({f.origin for f in sc.fleets}), "dijkstra")
    fleets = compile_fleets(sc.fleets, table)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        solve_dispatch(sc.grid, fleets, options=sc.options)
        times.append(time.perf_counter() - t0)
    return {"case": sc.name, "buses": sc.grid.n_buses, "fleets": len(fleets),
            "repeats": repeats, "min": min(times), "median": statistics.median(times),
            "max": max(times), "times": times}


def format_bench(rows):
    width = max([4] + [len(r["case"]) for r in rows])
    out = ["Computation time (s)", f"{'Case':<{width}}  {'Min':>9}  {'Median':>9}  {'Max':>9}"]
    for r in rows:
        out.append(f"{r['case']:<{width}}  {r['min']:9.4f}  {r['median']:9.4f}  {r['max']:9.4f}")
    return "\n".join(out) + "\n"


def cmd_bench(args):
    if args.repeats < 1:
        raise CliError("--repeats must be at least 1", EXIT_INPUT)
    rows = [bench_case(c, args.repeats, args.config) for c in args.cases]
    doc = {"format": mio.REPORT_FORMAT, "format_version": mio.FORMAT_VERSION, "kind": "bench",
           "rows": rows}
    _emit(args, doc, format_bench(rows))
    return EXIT_OK


# --------------------------------------------------------------------------


def _global_flags(parser, default):
    parser.add_argument("--json", action="store_true", default=default(False),
                        help="machine-readable output")
    parser.add_argument("--config", metavar="FILE", default=default(None),
                        help="options file (tolerances, travel_cost_scale, ...)")


def build_parser():
    # Global flags work before or after the subcommand; the subcommand copy
    # must not overwrite a value given earlier, hence SUPPRESS there.
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, lambda value: argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="mobigrid",
                                description="Route and dispatch vehicle fleets as mobile grid batteries.")
    _global_flags(p, lambda value: value)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("route", parents=[common], help="cheapest road route between two nodes")
    r.add_argument("source", help="bundled scenario name, scenario file or transport file")
    r.add_argument("--from", dest="origin", type=int, required=True)
    r.add_argument("--to", type=int, required=True)
    r.add_argument("--close", action="append", metavar="A-B", help="close road A->B (repeatable)")
    r.add_argument("--method", choices=("milp", "dijkstra"), default="milp")
    r.set_defaults(func=cmd_route)

    d = sub.add_parser("dispatch", parents=[common], help="optimal fleet dispatch for a scenario")
    d.add_argument("scenario")
    d.add_argument("--baseline", action="store_true", help="grid only, no vehicle support")
    d.add_argument("--close", action="append", metavar="A-B", help="close road A->B (repeatable)")
    d.set_defaults(func=cmd_dispatch)

    v = sub.add_parser("verify", parents=[common], help="check the MIP against full enumeration")
    v.add_argument("scenario")
    v.add_argument("--cap", type=int, help="maximum number of enumerated assignments")
    v.add_argument("--close", action="append", metavar="A-B", help="close road A->B (repeatable)")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", parents=[common], help="timing table for one or more scenarios")
    b.add_argument("cases", nargs="+")
    b.add_argument("--repeats", type=int, default=5)
    b.set_defaults(func=cmd_bench)
    return p


def _setup_logging():
    level = os.environ.get("MOBIGRID_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DispatchInfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except INPUT_ERRORS as exc:
        stage = getattr(exc, "stage", None)
        prefix = f"input error ({stage})" if stage else "input error"
        print(f"{prefix}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MilpError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
