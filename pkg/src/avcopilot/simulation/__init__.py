"""Deterministic planning-simulation kernel for the co-pilot."""

from .routemap import MapError, RouteMap, load_map, default_map
from .kernel import (
    CAPABILITIES,
    DT,
    AvStatus,
    BehaviorParams,
    CapabilityResult,
    Mode,
    PreconditionFailed,
    RouteExhausted,
    SimKernel,
    UnknownCapability,
    VehicleState,
)
from .host import SimHost, SimUnavailable

__all__ = [
    "AvStatus",
    "BehaviorParams",
    "CAPABILITIES",
    "CapabilityResult",
    "DT",
    "MapError",
    "Mode",
    "PreconditionFailed",
    "RouteExhausted",
    "RouteMap",
    "SimHost",
    "SimKernel",
    "SimUnavailable",
    "UnknownCapability",
    "VehicleState",
    "default_map",
    "load_map",
]
