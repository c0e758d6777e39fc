"""Walk through the bundled 14-bus scenario.

First the grid alone, then with three mobile fleets free to drive to any bus.
"""

from mobigrid import io
from mobigrid.dispatch import run_schedule
from mobigrid.grid import solve_baseline_opf

sc = io.load_scenario("ieee14-demo")
grid = sc.grid
print(f"{grid.name}: {grid.n_buses} buses, {len(grid.lines)} lines, "
      f"{len(grid.generators)} generators, {grid.total_capacity:.1f} MW capacity")

base = solve_baseline_opf(grid)
print(f"\ngrid alone costs {base.objective:.2f} $/h")
for k, ln in enumerate(grid.lines):
    flow = base.state.flows[k]
    if abs(flow) >= ln.flow_max - 1e-6:
        print(f"  line {ln.from_bus}-{ln.to_bus} sits at its {ln.flow_max:g} MW limit")

plan = run_schedule(grid, sc.transport, sc.fleets, options=sc.options)
print(f"\nwith fleets: {plan.objective:.2f} $/h, "
      f"{100 * (1 - plan.objective / base.objective):.2f}% cheaper")
for v in plan.vehicles:
    path = " -> ".join(map(str, v.route.nodes)) if v.route else "-"
    print(f"  fleet {v.fleet_id}: bus {v.origin} -> bus {v.destination}, "
          f"{v.power:.0f} MW, road distance {v.travel_cost:g}  ({path})")
b = plan.breakdown
print(f"\ncost split: generation {b.generation:.2f}, fleet energy {b.vehicle_energy:.2f}, "
      f"travel {b.travel:.2f}")
print(f"branch and bound explored {plan.stats['nodes_explored']} nodes")
