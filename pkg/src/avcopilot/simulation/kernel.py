"""Fixed-step longitudinal vehicle kernel with runtime-adjustable behavior.

Single ego vehicle on a routed waypoint map: semi-implicit Euler at a fixed
dt = 0.02 s, anticipatory braking for speed-limit drops, stop lines and the
route end, an optional scripted constant-speed lead vehicle, discrete lane
changes with a fixed 3 s blend, and a one-shot traffic-light override.

All state mutation happens through :meth:`SimKernel.tick` and
:meth:`SimKernel.apply_capability`; reads go through immutable snapshots.
The kernel itself is not thread-safe — :class:`~.host.SimHost` serializes
access for concurrent callers.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .routemap import MapEdge, RouteMap

DT = 0.02  # s, fixed integration step

# Stop targets aim this far short of the line so discrete steps never cross.
STOP_MARGIN = 0.25  # m
ARRIVAL_EPS = 0.5  # m, distance-to-route-end below which a halt is an arrival
LOOKAHEAD = 600.0  # m, horizon for anticipatory braking
LANE_WIDTH = 3.5  # m
LANE_CHANGE_DURATION = 3.0  # s

KMH_TO_MPS = 1.0 / 3.6

CAPABILITIES = frozenset(
    {
        "set_destination",
        "start",
        "stop",
        "set_param",
        "turn_choice",
        "change_lane",
        "override_light",
        "emergency_stop",
        "query_speed_limit",
        "query_eta",
        "query_status",
    }
)

# Behavior parameters adjustable at runtime through the set_param capability.
TUNABLE_PARAMS = ("max_vel", "min_gap", "max_long_accel", "max_lat_accel")


class Mode(Enum):
    STOPPED = "STOPPED"
    DRIVING = "DRIVING"
    EMERGENCY_STOPPED = "EMERGENCY_STOPPED"


class UnknownCapability(RuntimeError):
    """An unmapped capability ident reached the kernel (registry bug)."""


class RouteExhausted(RuntimeError):
    """The vehicle ran off the end of its route without reaching a goal."""


class PreconditionFailed(RuntimeError):
    """A capability cannot apply in the current state; carries the reason."""


@dataclass
class BehaviorParams:
    """Long-term driving preferences, adjustable while driving."""

    max_vel: float = 50.0  # km/h
    min_gap: float = 10.0  # m
    max_long_accel: float = 1.5  # m/s^2
    max_lat_accel: float = 2.0  # m/s^2
    comfort_decel: float = 2.0  # m/s^2
    emergency_decel: float = 3.5  # m/s^2

    def validate(self) -> None:
        for name in (
            "max_vel",
            "min_gap",
            "max_long_accel",
            "max_lat_accel",
            "comfort_decel",
            "emergency_decel",
        ):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.emergency_decel < self.comfort_decel:
            raise ValueError("emergency_decel must be >= comfort_decel")

    @property
    def max_vel_mps(self) -> float:
        return self.max_vel * KMH_TO_MPS

    def as_dict(self) -> dict[str, float]:
        return {
            "max_vel": self.max_vel,
            "min_gap": self.min_gap,
            "max_long_accel": self.max_long_accel,
            "max_lat_accel": self.max_lat_accel,
            "comfort_decel": self.comfort_decel,
            "emergency_decel": self.emergency_decel,
        }


@dataclass(frozen=True)
class VehicleState:
    edge: str
    s: float  # m along the current edge
    v: float  # m/s
    a: float  # m/s^2 applied last tick
    mode: Mode
    route: tuple[str, ...]
    t: float  # s of simulated time

    def as_dict(self) -> dict[str, Any]:
        return {
            "edge": self.edge,
            "s": self.s,
            "v": self.v,
            "a": self.a,
            "mode": self.mode.value,
            "route": list(self.route),
            "t": self.t,
        }


@dataclass(frozen=True)
class AvStatus:
    """Immutable snapshot of everything the translator and UI may read."""

    vehicle: VehicleState
    params: dict[str, float]
    segment_limit_kmh: float
    eta_s: float
    next_intersection_decision: str | None
    override_active: bool
    lane: int
    destination: str | None

    def as_dict(self) -> dict[str, Any]:
        return {
            "vehicle": self.vehicle.as_dict(),
            "params": dict(self.params),
            "segment_limit_kmh": self.segment_limit_kmh,
            "eta_s": self.eta_s,
            "next_intersection_decision": self.next_intersection_decision,
            "override_active": self.override_active,
            "lane": self.lane,
            "destination": self.destination,
        }

    def render_text(self) -> str:
        """Fixed-order plain-text rendering used in prompt assembly."""
        v = self.vehicle
        lines = [
            f"mode: {v.mode.value}",
            f"speed_kmh: {v.v / KMH_TO_MPS:.1f}",
            f"edge: {v.edge}",
            f"position_m: {v.s:.1f}",
            f"segment_limit_kmh: {self.segment_limit_kmh:g}",
            f"eta_s: {self.eta_s:.1f}",
            f"next_intersection_decision: {self.next_intersection_decision or 'none'}",
            f"traffic_light_override_active: {'yes' if self.override_active else 'no'}",
            f"destination: {self.destination or 'none'}",
        ]
        lines += [f"{k}: {val:g}" for k, val in self.params.items()]
        return "\n".join(lines)


@dataclass(frozen=True)
class CapabilityResult:
    ok: bool
    reason: str | None = None
    failure_kind: str | None = None  # "PreconditionFailed" on rejection
    payload: dict[str, Any] | None = None


@dataclass
class _Lead:
    speed: float  # m/s
    position: float  # odometer coordinate of the lead vehicle's rear
    spawn_t: float


class SimKernel:
    """Single ego vehicle advanced in fixed steps over a route map."""

    def __init__(
        self,
        route_map: RouteMap,
        params: BehaviorParams | None = None,
        start_edge: str | None = None,
        destination: str | None = None,
    ):
        self.map = route_map
        self.params = params or BehaviorParams()
        self.params.validate()

        edge_id = start_edge or min(route_map.edges)
        if edge_id not in route_map.edges:
            raise ValueError(f"unknown start edge {edge_id!r}")
        self._edge = edge_id
        self._s = 0.0
        self._v = 0.0
        self._a = 0.0
        self._t = 0.0
        self._odo = 0.0
        self._mode = Mode.STOPPED
        self._lane = 0
        self._lane_change: tuple[int, int, float] | None = None  # (from, to, t_start)
        self._override: tuple[str, float] | None = None  # (edge, offset) treated green
        self._lead: _Lead | None = None
        self._destination_name: str | None = None
        self._route: tuple[str, ...] = (edge_id,)
        self._route_index = 0

        if destination is not None:
            self._plan_to_goal(destination)
        else:
            for name in sorted(route_map.goals):
                if route_map.shortest_route(edge_id, route_map.goals[name]) is not None:
                    self._plan_to_goal(name)
                    break

    # ------------------------------------------------------------------ setup

    def _plan_to_goal(self, goal_name: str) -> None:
        if goal_name not in self.map.goals:
            raise PreconditionFailed(f"unknown destination {goal_name!r}")
        route = self.map.shortest_route(self._edge, self.map.goals[goal_name])
        if route is None:
            raise PreconditionFailed(f"destination {goal_name!r} is unreachable from here")
        self._route = route
        self._route_index = 0
        self._destination_name = goal_name

    def add_lead_vehicle(self, gap: float, speed: float) -> None:
        """Spawn a scripted constant-speed agent `gap` meters ahead."""
        self._lead = _Lead(speed=speed, position=self._odo + gap, spawn_t=self._t)

    # ------------------------------------------------------------ observation

    @property
    def t(self) -> float:
        return self._t

    def current_edge(self) -> MapEdge:
        return self.map.edges[self._edge]

    def vehicle_state(self) -> VehicleState:
        return VehicleState(
            edge=self._edge,
            s=self._s,
            v=self._v,
            a=self._a,
            mode=self._mode,
            route=self._route[self._route_index :],
            t=self._t,
        )

    def lead_gap(self) -> float | None:
        if self._lead is None:
            return None
        return self._lead.position - self._odo

    def _remaining_route_length(self) -> float:
        remaining = self.current_edge().length - self._s
        for edge_id in self._route[self._route_index + 1 :]:
            remaining += self.map.edges[edge_id].length
        return remaining

    def eta_s(self) -> float:
        """Remaining route length integrated per edge at min(limit, max_vel)."""
        eta = 0.0
        cap = self.params.max_vel_mps
        for offset, edge_id in enumerate(self._route[self._route_index :]):
            edge = self.map.edges[edge_id]
            length = edge.length - self._s if offset == 0 else edge.length
            eta += length / min(edge.limit_kmh * KMH_TO_MPS, cap)
        return eta

    def _next_intersection(self) -> tuple[str, int] | None:
        """(node, route index of the edge arriving at it), ahead of the ego."""
        for k in range(self._route_index, len(self._route)):
            edge = self.map.edges[self._route[k]]
            if edge.dst in self.map.intersections:
                return edge.dst, k
        return None

    def _next_intersection_decision(self) -> str | None:
        hit = self._next_intersection()
        if hit is None:
            return None
        node, k = hit
        if k + 1 >= len(self._route):
            return None
        in_edge = self.map.edges[self._route[k]]
        out_edge = self.map.edges[self._route[k + 1]]
        return self.map.classify_direction(in_edge, out_edge)

    def snapshot(self) -> AvStatus:
        return AvStatus(
            vehicle=self.vehicle_state(),
            params=self.params.as_dict(),
            segment_limit_kmh=self.current_edge().limit_kmh,
            eta_s=self.eta_s(),
            next_intersection_decision=self._next_intersection_decision(),
            override_active=self._override is not None,
            lane=self._effective_lane(),
            destination=self._destination_name,
        )

    def _effective_lane(self) -> int:
        return self._lane if self._lane_change is None else self._lane_change[0]

    def state_fingerprint(self) -> str:
        """Content hash of the full dynamic state, for mutation checks."""
        blob = repr(
            (
                self._edge,
                self._s,
                self._v,
                self._a,
                self._t,
                self._odo,
                self._mode.value,
                self._lane,
                self._lane_change,
                self._override,
                None if self._lead is None else (self._lead.speed, self._lead.position),
                self._destination_name,
                self._route,
                self._route_index,
                tuple(sorted(self.params.as_dict().items())),
            )
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    # ------------------------------------------------------------------- tick

    def _ceiling(self, edge: MapEdge) -> float:
        return min(edge.limit_kmh * KMH_TO_MPS, self.params.max_vel_mps)

    def _next_red_light(self) -> tuple[str, float, float] | None:
        """Nearest unoverridden red stop line ahead: (edge, offset, distance)."""
        distance_base = -self._s
        for k in range(self._route_index, len(self._route)):
            edge_id = self._route[k]
            edge = self.map.edges[edge_id]
            for light in sorted(self.map.lights_on(edge_id), key=lambda l: l.offset):
                if k == self._route_index and light.offset <= self._s:
                    continue
                if self._override == (edge_id, light.offset):
                    continue
                return edge_id, light.offset, distance_base + light.offset
            distance_base += edge.length
            if distance_base > LOOKAHEAD:
                break
        return None

    def _stop_allowance(self, distance: float, dt: float) -> float:
        """Max speed that still stops before a target `distance` ahead."""
        decel = self.params.comfort_decel
        braking = math.sqrt(max(0.0, 2.0 * decel * (distance - STOP_MARGIN)))
        return min(braking, max(0.0, distance) / dt)

    def _driving_target(self, dt: float) -> float:
        edge = self.current_edge()
        target = self._ceiling(edge)

        # Anticipate lower ceilings on upcoming edges so the limit is already
        # met when the boundary is crossed.
        decel = self.params.comfort_decel
        distance = edge.length - self._s
        for edge_id in self._route[self._route_index + 1 :]:
            nxt = self.map.edges[edge_id]
            ceiling = self._ceiling(nxt)
            target = min(target, math.sqrt(ceiling**2 + 2.0 * decel * distance))
            distance += nxt.length
            if distance > LOOKAHEAD:
                break

        light = self._next_red_light()
        if light is not None:
            target = min(target, self._stop_allowance(light[2], dt))

        target = min(target, self._stop_allowance(self._remaining_route_length(), dt))

        if self._lead is not None:
            excess = (self._lead.position - self._odo) - self.params.min_gap
            lead_v = self._lead.speed
            if excess >= 0.0:
                follow = lead_v + min(math.sqrt(2.0 * decel * excess), excess / dt)
            else:
                follow = max(0.0, lead_v + excess / dt)
            target = min(target, follow)

        return target

    def tick(self, dt: float = DT) -> VehicleState:
        """Advance one step; returns the post-step state."""
        if dt <= 0:
            raise ValueError("dt must be positive")

        if self._lead is not None:
            self._lead.position += self._lead.speed * dt

        if self._mode is not Mode.DRIVING and self._v == 0.0:
            self._a = 0.0
            self._t += dt
            return self.vehicle_state()

        if self._mode is Mode.DRIVING:
            v_target = self._driving_target(dt)
            decel_limit = self.params.comfort_decel
        else:
            v_target = 0.0
            decel_limit = (
                self.params.emergency_decel
                if self._mode is Mode.EMERGENCY_STOPPED
                else self.params.comfort_decel
            )

        a = (v_target - self._v) / dt
        a = max(-decel_limit, min(self.params.max_long_accel, a))
        v = max(0.0, self._v + a * dt)
        if v < 1e-9:
            v = 0.0
        moved = v * dt

        self._a = a
        self._v = v
        self._s += moved
        self._odo += moved
        self._t += dt

        self._advance_edges()
        self._consume_passed_override()
        self._update_lane_change()
        self._check_arrival()
        return self.vehicle_state()

    def _advance_edges(self) -> None:
        while self._s > self.current_edge().length:
            if self._route_index + 1 >= len(self._route):
                overshoot = self._s - self.current_edge().length
                if overshoot <= ARRIVAL_EPS:
                    self._s = self.current_edge().length
                    return
                raise RouteExhausted(f"no route beyond edge {self._edge}")
            self._s -= self.current_edge().length
            self._route_index += 1
            self._edge = self._route[self._route_index]
            edge = self.current_edge()
            self._lane = min(self._lane, edge.lanes - 1)
            # Hard ceiling on entry keeps the per-edge speed bound exact.
            self._v = min(self._v, self._ceiling(edge))

    def _consume_passed_override(self) -> None:
        if self._override is None:
            return
        edge_id, offset = self._override
        if edge_id not in self._route[self._route_index :]:
            self._override = None
        elif edge_id == self._edge and self._s >= offset:
            self._override = None

    def _update_lane_change(self) -> None:
        if self._lane_change is None:
            return
        _, to_lane, t_start = self._lane_change
        if self._t - t_start >= LANE_CHANGE_DURATION:
            self._lane = min(to_lane, self.current_edge().lanes - 1)
            self._lane_change = None

    def _check_arrival(self) -> None:
        if (
            self._mode is Mode.DRIVING
            and self._v == 0.0
            and self._remaining_route_length() <= ARRIVAL_EPS
        ):
            self._mode = Mode.STOPPED

    # ----------------------------------------------------------- capabilities

    def apply_capability(self, capability: str, args: dict[str, Any] | None = None) -> CapabilityResult:
        """Apply one mapped capability; failures are returned, not raised."""
        if capability not in CAPABILITIES:
            raise UnknownCapability(capability)
        handler = getattr(self, f"_cap_{capability}")
        try:
            payload = handler(**(args or {}))
        except PreconditionFailed as exc:
            return CapabilityResult(
                ok=False, reason=str(exc), failure_kind="PreconditionFailed"
            )
        except TypeError as exc:
            return CapabilityResult(
                ok=False, reason=f"bad arguments: {exc}", failure_kind="PreconditionFailed"
            )
        return CapabilityResult(ok=True, payload=payload)

    def _cap_set_destination(self, dest: str) -> dict[str, Any]:
        self._plan_to_goal(str(dest))
        return {"destination": self._destination_name, "eta_s": round(self.eta_s(), 3)}

    def _cap_start(self) -> dict[str, Any]:
        if self._mode is Mode.DRIVING:
            raise PreconditionFailed("already driving")
        if self._destination_name is None:
            raise PreconditionFailed("no destination planned")
        if self._remaining_route_length() <= ARRIVAL_EPS:
            raise PreconditionFailed("already at the destination")
        self._mode = Mode.DRIVING
        return {"mode": self._mode.value, "destination": self._destination_name}

    def _cap_stop(self) -> dict[str, Any]:
        if self._mode is not Mode.DRIVING:
            raise PreconditionFailed("not driving")
        self._mode = Mode.STOPPED
        return {"mode": self._mode.value}

    def _cap_set_param(self, **values: float) -> dict[str, Any]:
        if not values:
            raise PreconditionFailed("no parameter given")
        for name, value in values.items():
            if name not in TUNABLE_PARAMS:
                raise PreconditionFailed(f"parameter {name!r} is not adjustable")
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise PreconditionFailed(f"parameter {name!r} must be positive")
        for name, value in values.items():
            setattr(self.params, name, float(value))
        self.params.validate()
        return {name: float(value) for name, value in values.items()}

    def _cap_turn_choice(self, direction: str) -> dict[str, Any]:
        direction = str(direction)
        hit = self._next_intersection()
        if hit is None:
            raise PreconditionFailed("no intersection ahead on the route")
        node, k = hit
        in_edge = self.map.edges[self._route[k]]
        options = self.map.turn_options(node, in_edge)
        if direction not in options:
            available = ", ".join(sorted(options)) or "none"
            raise PreconditionFailed(
                f"no {direction} branch at {node} (available: {available})"
            )
        forced = options[direction]
        prefix = self._route[: k + 1] + (forced.id,)
        continuation, dest_name = self._continue_from(forced)
        self._route = prefix + continuation
        self._destination_name = dest_name
        return {
            "intersection": node,
            "direction": direction,
            "route": list(self._route[self._route_index :]),
            "destination": dest_name,
        }

    def _continue_from(self, forced: MapEdge) -> tuple[tuple[str, ...], str | None]:
        """Extend the route beyond a forced edge toward the best goal."""
        candidates: list[tuple[float, str, tuple[str, ...]]] = []
        for name in sorted(self.map.goals):
            node = self.map.goals[name]
            if node == forced.dst:
                candidates.append((0.0, name, ()))
                continue
            route = self.map.shortest_route(forced.id, node)
            if route is None:
                continue
            tail = route[1:]
            length = sum(self.map.edges[e].length for e in tail)
            candidates.append((length, name, tail))
        if not candidates:
            return (), None
        current = self._destination_name
        for length, name, tail in candidates:
            if name == current:
                return tail, name
        candidates.sort()
        length, name, tail = candidates[0]
        return tail, name

    def _cap_change_lane(self, direction: str) -> dict[str, Any]:
        direction = str(direction)
        if direction not in ("left", "right"):
            raise PreconditionFailed(f"unknown lane-change direction {direction!r}")
        if self._mode is not Mode.DRIVING:
            raise PreconditionFailed("not driving")
        if self._lane_change is not None:
            raise PreconditionFailed("a lane change is already in progress")
        edge = self.current_edge()
        if edge.lanes < 2:
            raise PreconditionFailed(f"edge {edge.id} has no parallel lane")
        target = self._lane + (1 if direction == "left" else -1)
        if not 0 <= target < edge.lanes:
            raise PreconditionFailed(f"no {direction} lane from lane {self._lane}")
        implied = 4.0 * LANE_WIDTH / LANE_CHANGE_DURATION**2
        if implied > self.params.max_lat_accel:
            raise PreconditionFailed(
                f"lane change needs {implied:.2f} m/s^2 lateral acceleration, "
                f"limit is {self.params.max_lat_accel:g}"
            )
        self._lane_change = (self._lane, target, self._t)
        return {"from_lane": self._lane, "to_lane": target, "duration_s": LANE_CHANGE_DURATION}

    def _cap_override_light(self, state: str) -> dict[str, Any]:
        if str(state) != "green":
            raise PreconditionFailed(f"unsupported override state {state!r}")
        light = self._next_red_light()
        if light is None:
            raise PreconditionFailed("no traffic light ahead on the route")
        edge_id, offset, distance = light
        self._override = (edge_id, offset)
        return {"edge": edge_id, "offset_m": offset, "distance_m": round(distance, 3)}

    def _cap_emergency_stop(self) -> dict[str, Any]:
        self._mode = Mode.EMERGENCY_STOPPED
        return {"mode": self._mode.value}

    def _cap_query_speed_limit(self) -> dict[str, Any]:
        return {"speed_limit_kmh": self.current_edge().limit_kmh}

    def _cap_query_eta(self) -> dict[str, Any]:
        return {"eta_s": round(self.eta_s(), 3), "destination": self._destination_name}

    def _cap_query_status(self) -> dict[str, Any]:
        state = self.vehicle_state()
        return {
            "mode": state.mode.value,
            "speed_kmh": round(state.v / KMH_TO_MPS, 3),
            "speed_mps": round(state.v, 3),
            "edge": state.edge,
            "position_m": round(state.s, 3),
            "segment_limit_kmh": self.current_edge().limit_kmh,
            "eta_s": round(self.eta_s(), 3),
            "destination": self._destination_name,
            "lane": self._effective_lane(),
            "override_active": self._override is not None,
        }
