"""Regenerate the bundled demo data files under src/mobigrid/data/.

Grid topology and loads are the standard IEEE 14- and 30-bus test systems;
line limits, generator prices and fleet data are demo choices.
"""

import math
from pathlib import Path

from mobigrid.dispatch import FleetSpec
from mobigrid.grid import Bus, Generator, GridCase, Line
from mobigrid.io import format_fleets, format_grid, format_transport, generate_transport_network

DATA = Path(__file__).resolve().parents[1] / "src" / "mobigrid" / "data"

IEEE14_LOADS = [0, 21.7, 94.2, 47.8, 7.6, 11.2, 0, 0, 29.5, 9, 3.5, 6.1, 13.5, 14.9]
IEEE14_BRANCHES = [
    (1, 2, 0.05917), (1, 5, 0.22304), (2, 3, 0.19797), (2, 4, 0.17632), (2, 5, 0.17388),
    (3, 4, 0.17103), (4, 5, 0.04211), (4, 7, 0.20912), (4, 9, 0.55618), (5, 6, 0.25202),
    (6, 11, 0.19890), (6, 12, 0.25581), (6, 13, 0.13027), (7, 8, 0.17615), (7, 9, 0.11001),
    (9, 10, 0.08450), (9, 14, 0.27038), (10, 11, 0.19207), (12, 13, 0.19988), (13, 14, 0.34802),
]
IEEE14_GENS = [(1, 332.4, 20), (2, 140, 35), (3, 100, 50), (6, 100, 55), (8, 100, 60)]
IEEE14_LIMITS = {(1, 2): 100, (1, 5): 50, (2, 3): 40, (3, 4): 40}

IEEE30_LOADS = [0, 21.7, 2.4, 7.6, 94.2, 0, 22.8, 30, 0, 5.8, 0, 11.2, 0, 6.2, 8.2,
                3.5, 9, 3.2, 9.5, 2.2, 17.5, 0, 3.2, 8.7, 0, 3.5, 0, 0, 2.4, 10.6]
IEEE30_BRANCHES = [
    (1, 2, .0575), (1, 3, .1652), (2, 4, .1737), (3, 4, .0379), (2, 5, .1983), (2, 6, .1763),
    (4, 6, .0414), (5, 7, .116), (6, 7, .082), (6, 8, .042), (6, 9, .208), (6, 10, .556),
    (9, 11, .208), (9, 10, .11), (4, 12, .256), (12, 13, .14), (12, 14, .2559), (12, 15, .1304),
    (12, 16, .1987), (14, 15, .1997), (16, 17, .1923), (15, 18, .2185), (18, 19, .1292),
    (19, 20, .068), (10, 20, .209), (10, 17, .0845), (10, 21, .0749), (10, 22, .1499),
    (21, 22, .0236), (15, 23, .202), (22, 24, .179), (23, 24, .27), (24, 25, .3292),
    (25, 26, .38), (25, 27, .2087), (28, 27, .396), (27, 29, .4153), (27, 30, .6027),
    (29, 30, .4533), (8, 28, .2), (6, 28, .0599),
]
IEEE30_GENS = [(1, 360.2, 20), (2, 140, 35), (5, 100, 50), (8, 100, 52), (11, 100, 55), (13, 100, 60)]
IEEE30_LIMITS = {(1, 2): 90, (1, 3): 50, (2, 5): 40, (6, 8): 25}


def build_case(name, loads, branches, gens, limits):
    lines = []
    for f, t, x in branches:
        lim = limits.get((f, t), math.inf)
        lines.append(Line(f, t, 100.0 / x, -lim, lim))
    return GridCase([Bus(i + 1, load) for i, load in enumerate(loads)], lines,
                    [Generator(b, 0.0, p, c) for b, p, c in gens], name=name)


def write_set(stem, case, n_nodes, seed, extra, fleets, settings):
    (DATA / f"{stem}.grid").write_text(format_grid(case))
    net = generate_transport_network(n_nodes, seed, extra_edges=extra)
    (DATA / f"{stem}.transport").write_text(format_transport(
        net, f"generate_transport_network({n_nodes}, seed={seed}, extra_edges={extra})"))
    (DATA / f"{stem}.fleet").write_text(format_fleets(fleets))
    body = [f"mobigrid scenario 1", f"name = {stem}-demo", f"grid = {stem}.grid",
            f"transport = {stem}.transport", f"fleets = {stem}.fleet"]
    body += [f"{k} = {v}" for k, v in settings.items()]
    (DATA / f"{stem}-demo.scenario").write_text("\n".join(body) + "\n")


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    write_set("ieee14", build_case("ieee14", IEEE14_LOADS, IEEE14_BRANCHES, IEEE14_GENS, IEEE14_LIMITS),
              14, 9, 9,
              [FleetSpec("a", 2, 0, 20, 28), FleetSpec("b", 7, 0, 20, 30), FleetSpec("c", 12, 0, 40, 32)],
              {"travel_cost_scale": 10})
    write_set("ieee30", build_case("ieee30", IEEE30_LOADS, IEEE30_BRANCHES, IEEE30_GENS, IEEE30_LIMITS),
              30, 3, 20,
              [FleetSpec("a", 3, 0, 20, 28), FleetSpec("b", 10, 0, 20, 30), FleetSpec("c", 19, 0, 40, 32),
               FleetSpec("d", 24, 0, 20, 34, radius=12)],
              {"travel_cost_scale": 10})


if __name__ == "__main__":
    main()
