"""Road network, the binary routing model, and a Dijkstra cross-check."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .milp import DEFAULT_OPTIONS, OPTIMAL, MilpModel, solve_milp


class NetworkError(ValueError):
    pass


class RouteExtractionError(RuntimeError):
    """The solver's edge selection does not form a single s-e path."""


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    weight: float

    @property
    def pair(self):
        return (self.tail, self.head)


@dataclass(frozen=True)
class TransportNetwork:
    """Directed road graph on nodes 1..n_nodes.

    ``restricted`` holds indices into ``edges`` for roads that may not be
    used (closures, limited access).
    """

    n_nodes: int
    edges: tuple
    restricted: frozenset = frozenset()
    _by_pair: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "restricted", frozenset(self.restricted))
        if self.n_nodes < 1:
            raise NetworkError("network needs at least one node")
        by_pair = {}
        for k, e in enumerate(self.edges):
            for node in e.pair:
                if not 1 <= node <= self.n_nodes:
                    raise NetworkError(f"edge {e.tail}->{e.head} references node {node} "
                                       f"outside 1..{self.n_nodes}")
            if e.tail == e.head:
                raise NetworkError(f"self-loop at node {e.tail}")
            if not (math.isfinite(e.weight) and e.weight > 0):
                raise NetworkError(f"edge {e.tail}->{e.head} has non-positive weight {e.weight}")
            if e.pair in by_pair:
                raise NetworkError(f"duplicate edge {e.tail}->{e.head}")
            by_pair[e.pair] = k
        bad = [k for k in self.restricted if not 0 <= k < len(self.edges)]
        if bad:
            raise NetworkError(f"restricted edge ids {sorted(bad)} do not exist")
        object.__setattr__(self, "_by_pair", by_pair)

    @property
    def nodes(self):
        return range(1, self.n_nodes + 1)

    def edge_id(self, tail, head):
        try:
            return self._by_pair[(tail, head)]
        except KeyError:
            raise NetworkError(f"no edge {tail}->{head}") from None

    def has_edge(self, tail, head):
        return (tail, head) in self._by_pair

    def is_restricted(self, tail, head):
        return self._by_pair.get((tail, head)) in self.restricted

    def open_edges(self):
        return [e for k, e in enumerate(self.edges) if k not in self.restricted]

    def with_closures(self, pairs):
        """Copy of the network with the given (tail, head) roads restricted."""
        ids = set(self.restricted)
        for tail, head in pairs:
            ids.add(self.edge_id(tail, head))
        return TransportNetwork(self.n_nodes, self.edges, frozenset(ids))

    def check_node(self, node):
        if not 1 <= node <= self.n_nodes:
            raise NetworkError(f"node {node} outside 1..{self.n_nodes}")


@dataclass(frozen=True)
class RouteSolution:
    origin: int
    destination: int
    edges: tuple = ()
    total_cost: float = math.inf

    @property
    def found(self):
        return math.isfinite(self.total_cost)

    @property
    def nodes(self):
        if not self.found:
            return ()
        return (self.origin,) + tuple(head for _, head in self.edges)

    @classmethod
    def no_route(cls, origin, destination):
        return cls(origin, destination, (), math.inf)


def _var(tail, head):
    return f"x[{tail},{head}]"


def build_routing_model(net: TransportNetwork, s: int, e: int) -> MilpModel:
    """Binary shortest-path model: one x per directed edge, cost sum w*x.

    Rows: unit outflow at s, no outflow at e, conservation elsewhere, no
    antiparallel pair used twice, restricted roads forced to zero, and an
    explicit unit inflow at e.
    """
    net.check_node(s)
    net.check_node(e)
    if s == e:
        raise NetworkError("origin equals destination; use shortest_path for the identity case")
    model = MilpModel(f"route_{s}_{e}")
    out_of = {k: [] for k in net.nodes}
    into = {k: [] for k in net.nodes}
    for edge in net.edges:
        name = model.add_binary(_var(*edge.pair), cost=edge.weight)
        out_of[edge.tail].append(name)
        into[edge.head].append(name)

    model.add_constraint({v: 1.0 for v in out_of[s]}, "==", 1.0, "leave_origin")
    model.add_constraint({v: 1.0 for v in out_of[e]}, "==", 0.0, "stop_at_destination")
    for k in net.nodes:
        if k in (s, e):
            continue
        coeffs = {v: 1.0 for v in into[k]}
        for v in out_of[k]:
            coeffs[v] = coeffs.get(v, 0.0) - 1.0
        model.add_constraint(coeffs, "==", 0.0, f"conserve[{k}]")
    for edge in net.edges:
        i, j = edge.pair
        if i < j and net.has_edge(j, i):
            model.add_constraint({_var(i, j): 1.0, _var(j, i): 1.0}, "<=", 1.0,
                                 f"once[{i},{j}]")
    for k in sorted(net.restricted):
        edge = net.edges[k]
        model.add_constraint({_var(*edge.pair): 1.0}, "==", 0.0,
                             f"closed[{edge.tail},{edge.head}]")
    model.add_constraint({v: 1.0 for v in into[e]}, "==", 1.0, "reach_destination")
    return model


def _chain(s, e, chosen, weights):
    """Order a set of (tail, head) edges into a path from s to e."""
    succ = {}
    for tail, head in chosen:
        if tail in succ:
            raise RouteExtractionError(f"node {tail} has two selected outgoing edges")
        succ[tail] = head
    path = []
    node = s
    seen = {s}
    while node != e:
        if node not in succ:
            raise RouteExtractionError(f"selected edges do not continue from node {node}")
        nxt = succ.pop(node)
        if nxt in seen:
            raise RouteExtractionError(f"selected edges revisit node {nxt}")
        seen.add(nxt)
        path.append((node, nxt))
        node = nxt
    if succ:
        raise RouteExtractionError(f"selected edges off the route: {sorted(succ.items())}")
    cost = 0.0
    for pair in path:
        cost += weights[pair]
    return tuple(path), cost


def solve_route(net: TransportNetwork, s: int, e: int, options=DEFAULT_OPTIONS) -> RouteSolution:
    net.check_node(s)
    net.check_node(e)
    if s == e:
        return RouteSolution(s, e, (), 0.0)
    sol = solve_milp(build_routing_model(net, s, e), options)
    if sol.status != OPTIMAL:
        return RouteSolution.no_route(s, e)
    chosen = [edge.pair for edge in net.edges if sol.values[_var(*edge.pair)] > 0.5]
    weights = {edge.pair: edge.weight for edge in net.edges}
    path, cost = _chain(s, e, chosen, weights)
    return RouteSolution(s, e, path, cost)


def _dijkstra(net, s):
    adj = {k: [] for k in net.nodes}
    for edge in net.open_edges():
        adj[edge.tail].append((edge.head, edge.weight))
    dist = {s: 0.0}
    pred = {}
    done = set()
    heap = [(0.0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in adj[u]:
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred


def shortest_path(net: TransportNetwork, s: int, e: int) -> RouteSolution:
    """Dijkstra over the open roads."""
    net.check_node(s)
    net.check_node(e)
    if s == e:
        return RouteSolution(s, e, (), 0.0)
    dist, pred = _dijkstra(net, s)
    if e not in dist:
        return RouteSolution.no_route(s, e)
    path = []
    node = e
    while node != s:
        path.append((pred[node], node))
        node = pred[node]
    path.reverse()
    cost = 0.0
    for pair in path:
        cost += net.edges[net.edge_id(*pair)].weight
    return RouteSolution(s, e, tuple(path), cost)


@dataclass(frozen=True)
class CostTable:
    """Travel cost from each origin to every node; ``inf`` means unreachable."""

    origins: tuple
    costs: np.ndarray

    def row(self, origin):
        return self.costs[self.origins.index(origin)]

    def cost(self, origin, node):
        return float(self.row(origin)[node - 1])


def all_pairs_costs(net: TransportNetwork, origins, method="milp", options=DEFAULT_OPTIONS) -> CostTable:
    """Offline travel-cost table, one row per origin.

    ``method="milp"`` solves the routing model for every destination;
    ``method="dijkstra"`` uses one shortest-path tree per origin.
    """
    origins = tuple(origins)
    for s in origins:
        net.check_node(s)
    costs = np.full((len(origins), net.n_nodes), math.inf)
    for r, s in enumerate(origins):
        if method == "dijkstra":
            dist, _ = _dijkstra(net, s)
            for node, d in dist.items():
                costs[r, node - 1] = d
        elif method == "milp":
            for node in net.nodes:
                costs[r, node - 1] = solve_route(net, s, node, options).total_cost
        else:
            raise ValueError(f"unknown method {method!r}")
    return CostTable(origins, costs)
