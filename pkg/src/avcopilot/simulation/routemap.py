"""Waypoint route map: nodes, directed edges, stop lines, goals, routing.

Map file format (line-oriented, ``#`` comments allowed)::

    node <id> <x> <y>
    edge <id> <from> <to> <length_m> <limit_kmh> [lanes <n>]
    light <edge> <offset_m> red
    goal <name> <node>
    intersection <node>

Edges are directed; geometry is straight-line between node positions and is
used only to classify turn directions at intersections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import networkx as nx


class MapError(ValueError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class MapNode:
    id: str
    x: float
    y: float


@dataclass(frozen=True)
class MapEdge:
    id: str
    src: str
    dst: str
    length: float
    limit_kmh: float
    lanes: int = 1


@dataclass(frozen=True)
class StopLine:
    edge: str
    offset: float
    phase: str  # the default scenario only needs a fixed "red"


# Turn classification: straight within +/-30 degrees, left/right beyond.
_STRAIGHT_CONE = math.radians(30.0)


class RouteMap:
    def __init__(
        self,
        nodes: dict[str, MapNode],
        edges: dict[str, MapEdge],
        lights: list[StopLine],
        goals: dict[str, str],
        intersections: set[str],
    ):
        self.nodes = nodes
        self.edges = edges
        self.lights = lights
        self.goals = goals
        self.intersections = intersections
        self._out: dict[str, list[MapEdge]] = {}
        for edge in edges.values():
            self._out.setdefault(edge.src, []).append(edge)
        self._graph = nx.DiGraph()
        for node in nodes.values():
            self._graph.add_node(node.id)
        for edge in edges.values():
            self._graph.add_edge(edge.src, edge.dst, length=edge.length, id=edge.id)
        self._validate()

    def _validate(self) -> None:
        for edge in self.edges.values():
            if edge.src not in self.nodes or edge.dst not in self.nodes:
                raise MapError(0, f"edge {edge.id} references unknown node")
            if edge.length <= 0:
                raise MapError(0, f"edge {edge.id} has non-positive length")
            if edge.limit_kmh <= 0:
                raise MapError(0, f"edge {edge.id} has non-positive speed limit")
            if edge.lanes < 1:
                raise MapError(0, f"edge {edge.id} has no lanes")
        for light in self.lights:
            edge = self.edges.get(light.edge)
            if edge is None:
                raise MapError(0, f"light references unknown edge {light.edge}")
            if not 0 < light.offset <= edge.length:
                raise MapError(0, f"light offset outside edge {light.edge}")
        for name, node in self.goals.items():
            if node not in self.nodes:
                raise MapError(0, f"goal {name} references unknown node {node}")
        for node in self.intersections:
            if len(self._out.get(node, [])) < 2:
                raise MapError(0, f"intersection {node} has fewer than 2 outgoing edges")

    def out_edges(self, node: str) -> tuple[MapEdge, ...]:
        return tuple(self._out.get(node, ()))

    def lights_on(self, edge_id: str) -> tuple[StopLine, ...]:
        return tuple(l for l in self.lights if l.edge == edge_id)

    def edge_heading(self, edge: MapEdge) -> float:
        a, b = self.nodes[edge.src], self.nodes[edge.dst]
        return math.atan2(b.y - a.y, b.x - a.x)

    def classify_direction(self, in_edge: MapEdge, out_edge: MapEdge) -> str | None:
        """Classify the turn taken from in_edge onto out_edge.

        Returns "left", "right", "straight", or None for a U-turn-like
        geometry that none of the three tokens describes.
        """
        delta = self.edge_heading(out_edge) - self.edge_heading(in_edge)
        while delta > math.pi:
            delta -= 2 * math.pi
        while delta <= -math.pi:
            delta += 2 * math.pi
        if abs(delta) <= _STRAIGHT_CONE:
            return "straight"
        if abs(delta) >= math.pi - _STRAIGHT_CONE:
            return None
        return "left" if delta > 0 else "right"

    def turn_options(self, node: str, in_edge: MapEdge) -> dict[str, MapEdge]:
        options: dict[str, MapEdge] = {}
        for out_edge in self.out_edges(node):
            direction = self.classify_direction(in_edge, out_edge)
            if direction is not None and direction not in options:
                options[direction] = out_edge
        return options

    def shortest_route(self, start_edge: str, dest_node: str) -> tuple[str, ...] | None:
        """Edge sequence starting with start_edge and ending at dest_node.

        The vehicle is committed to its current edge, so routing begins at
        that edge's end node.  Returns None when the goal is unreachable.
        """
        edge = self.edges[start_edge]
        if edge.dst == dest_node:
            return (start_edge,)
        try:
            nodes = nx.shortest_path(self._graph, edge.dst, dest_node, weight="length")
        except nx.NetworkXNoPath:
            return None
        route = [start_edge]
        for u, v in zip(nodes, nodes[1:]):
            route.append(self._graph.edges[u, v]["id"])
        return tuple(route)

    def route_length(self, route: tuple[str, ...], from_s: float = 0.0) -> float:
        total = -from_s
        for edge_id in route:
            total += self.edges[edge_id].length
        return total


def load_map(text: str) -> RouteMap:
    nodes: dict[str, MapNode] = {}
    edges: dict[str, MapEdge] = {}
    lights: list[StopLine] = []
    goals: dict[str, str] = {}
    intersections: set[str] = set()

    for idx, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        kind = fields[0]
        try:
            if kind == "node" and len(fields) == 4:
                if fields[1] in nodes:
                    raise MapError(idx, f"duplicate node {fields[1]}")
                nodes[fields[1]] = MapNode(fields[1], float(fields[2]), float(fields[3]))
            elif kind == "edge" and len(fields) in (6, 8):
                lanes = 1
                if len(fields) == 8:
                    if fields[6] != "lanes":
                        raise MapError(idx, f"malformed edge record: {line!r}")
                    lanes = int(fields[7])
                if fields[1] in edges:
                    raise MapError(idx, f"duplicate edge {fields[1]}")
                edges[fields[1]] = MapEdge(
                    fields[1], fields[2], fields[3], float(fields[4]), float(fields[5]), lanes
                )
            elif kind == "light" and len(fields) == 4:
                if fields[3] != "red":
                    raise MapError(idx, f"unsupported light phase {fields[3]!r}")
                lights.append(StopLine(fields[1], float(fields[2]), fields[3]))
            elif kind == "goal" and len(fields) == 3:
                if fields[1] in goals:
                    raise MapError(idx, f"duplicate goal {fields[1]}")
                goals[fields[1]] = fields[2]
            elif kind == "intersection" and len(fields) == 2:
                intersections.add(fields[1])
            else:
                raise MapError(idx, f"unrecognized record: {line!r}")
        except ValueError as exc:
            if isinstance(exc, MapError):
                raise
            raise MapError(idx, f"bad numeric field in: {line!r}")

    return RouteMap(nodes, edges, lights, goals, intersections)


def default_map_text() -> str:
    from importlib.resources import files

    return files("avcopilot.data").joinpath("map.txt").read_text(encoding="utf-8")


def default_map() -> RouteMap:
    """The street topology shipped with the package.

    One signalized approach, one three-way intersection (left/straight)
    and two named goals; the planned default route turns left.
    """
    return load_map(default_map_text())
