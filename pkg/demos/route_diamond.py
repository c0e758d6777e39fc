"""Shortest route on a four-node road network, two ways.

The MILP route and Dijkstra agree; closing a road moves both of them.
"""

from mobigrid.transport import Edge, TransportNetwork, shortest_path, solve_route

roads = TransportNetwork(4, [Edge(1, 2, 1), Edge(1, 3, 4), Edge(2, 4, 5), Edge(3, 4, 1)])

for label, net in (("all roads open", roads), ("3->4 closed", roads.with_closures([(3, 4)]))):
    milp = solve_route(net, 1, 4)
    dijkstra = shortest_path(net, 1, 4)
    print(f"{label}:")
    print(f"  milp      cost {milp.total_cost:g}  via {' -> '.join(map(str, milp.nodes))}")
    print(f"  dijkstra  cost {dijkstra.total_cost:g}  via {' -> '.join(map(str, dijkstra.nodes))}")

# with both roads into node 4 shut there is nothing to find
cut = roads.with_closures([(2, 4), (3, 4)])
print("2->4 and 3->4 closed: found =", solve_route(cut, 1, 4).found)
