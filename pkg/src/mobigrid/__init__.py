"""Optimal routing and dispatch of vehicle fleets acting as mobile grid batteries."""

from .dispatch import (DispatchInfeasibleError, DispatchOptions, DispatchPlan, FleetSpec,
                       VehicleFleet, brute_force_dispatch, build_dispatch_model, mccormick_envelope,
                       run_schedule, solve_dispatch)
from .grid import (Bus, Generator, GridCase, GridState, Line, build_baseline_opf, dc_line_flow,
                   solve_baseline_opf, validate_state)
from .io import load_scenario, read_report, write_report
from .milp import MilpModel, MilpSolution, SolverOptions, solve_lp, solve_milp
from .transport import (Edge, RouteSolution, TransportNetwork, all_pairs_costs,
                        build_routing_model, shortest_path, solve_route)

__version__ = "0.1.0"
