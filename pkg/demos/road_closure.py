"""Close the first road each fleet uses and re-plan.

Travel costs are recomputed on the damaged network, so a fleet either takes
a detour, picks another bus or stays home.
"""

from mobigrid import io
from mobigrid.dispatch import run_schedule

sc = io.load_scenario("ieee14-demo")
plan = run_schedule(sc.grid, sc.transport, sc.fleets, options=sc.options)


def show(p):
    for v in p.vehicles:
        path = " -> ".join(map(str, v.route.nodes)) if v.route else "stays home"
        print(f"  {v.fleet_id}: bus {v.destination}, road distance {v.travel_cost:g}, {path}")
    print(f"  total {p.objective:.2f} $/h")


print("open roads")
show(plan)
closures = [v.route.edges[0] for v in plan.vehicles if v.route and v.route.edges]
print("\nclosing " + ", ".join(f"{a}->{b}" for a, b in closures))
show(run_schedule(sc.grid, sc.transport, sc.fleets, closures, sc.options))
