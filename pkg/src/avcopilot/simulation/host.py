"""Single-writer facade over the kernel.

Exactly one owner advances the simulation; capability applications and
snapshots from other threads are serialized against tick boundaries via a
lock, so every mutation lands between two ticks.  Supports two driving
styles: caller-stepped (deterministic scripted runs) and a real-time
background thread (the live service).
"""

from __future__ import annotations

import threading
import time
from typing import Any, Callable

from .kernel import DT, AvStatus, CapabilityResult, SimKernel, VehicleState


class SimUnavailable(RuntimeError):
    """The kernel is no longer accepting commands."""


class SimHost:
    def __init__(self, kernel: SimKernel, dt: float = DT):
        self.kernel = kernel
        self.dt = dt
        self._lock = threading.RLock()
        self._closed = False
        self._thread: threading.Thread | None = None
        self._stop_event = threading.Event()

    # --------------------------------------------------------------- stepped

    def advance(self, seconds: float, tick_hook: Callable[[VehicleState], None] | None = None) -> None:
        """Run whole ticks until at least `seconds` of sim time elapse."""
        self.advance_to(self.kernel.t + seconds, tick_hook)

    def advance_to(self, t_sim: float, tick_hook: Callable[[VehicleState], None] | None = None) -> None:
        while True:
            with self._lock:
                if self._closed:
                    raise SimUnavailable("simulation closed")
                if self.kernel.t >= t_sim - 1e-12:
                    return
                state = self.kernel.tick(self.dt)
            if tick_hook is not None:
                tick_hook(state)

    # -------------------------------------------------------------- realtime

    def start_realtime(self) -> None:
        if self._thread is not None:
            return
        self._stop_event.clear()
        self._thread = threading.Thread(target=self._run_realtime, daemon=True)
        self._thread.start()

    def _run_realtime(self) -> None:
        next_deadline = time.monotonic()
        while not self._stop_event.is_set():
            with self._lock:
                if self._closed:
                    return
                self.kernel.tick(self.dt)
            next_deadline += self.dt
            delay = next_deadline - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                # Fell behind wall clock; re-anchor rather than burst.
                next_deadline = time.monotonic()

    def stop_realtime(self) -> None:
        if self._thread is None:
            return
        self._stop_event.set()
        self._thread.join(timeout=5.0)
        self._thread = None

    # -------------------------------------------------------------- commands

    def submit(self, capability: str, args: dict[str, Any] | None = None) -> CapabilityResult:
        """Apply a capability at the next tick boundary and return its result."""
        with self._lock:
            if self._closed:
                raise SimUnavailable("simulation closed")
            return self.kernel.apply_capability(capability, args)

    def snapshot(self) -> AvStatus:
        with self._lock:
            return self.kernel.snapshot()

    def fingerprint(self) -> str:
        with self._lock:
            return self.kernel.state_fingerprint()

    def close(self) -> None:
        self.stop_realtime()
        with self._lock:
            self._closed = True

    @property
    def closed(self) -> bool:
        return self._closed
