#!/usr/bin/env python3
"""Drive the simulation kernel directly: red light, override, turn choice.

Run: python demos/02_drive_the_sim.py
Writes velocity_profile.png when matplotlib is available.
"""

from avcopilot.simulation import SimKernel, default_map

kernel = SimKernel(default_map())
print("route to", kernel.snapshot().destination, "via", kernel.vehicle_state().route)

kernel.apply_capability("start")

events = {
    8.0: ("override_light", {"state": "green"}),
    20.0: ("turn_choice", {"direction": "straight"}),
    30.0: ("set_param", {"max_vel": 90.0}),
    40.0: ("stop", {}),
}
pending = sorted(events)
history = []

while kernel.t < 55.0:
    if pending and kernel.t >= pending[0]:
        at = pending.pop(0)
        capability, args = events[at]
        result = kernel.apply_capability(capability, args)
        print(f"t={kernel.t:5.1f}s  {capability}{args} -> ok={result.ok}")
    state = kernel.tick()
    history.append((state.t, state.v, state.edge))
    if state.v == 0.0 and state.mode.value != "DRIVING" and kernel.t > 45.0:
        break

print(f"finished at t={kernel.t:.1f}s on {kernel.vehicle_state().edge}, "
      f"mode {kernel.vehicle_state().mode.value}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ts = [row[0] for row in history]
    vs = [row[1] for row in history]
    fig, ax = plt.subplots(figsize=(9, 3.2))
    ax.plot(ts, vs, lw=1.5)
    for at in events:
        ax.axvline(at, color="gray", ls=":", lw=0.8)
    ax.set_xlabel("t in s")
    ax.set_ylabel("v in m/s")
    ax.set_title("velocity profile with instruction events")
    fig.tight_layout()
    fig.savefig("velocity_profile.png", dpi=120)
    print("wrote velocity_profile.png")
except ImportError:
    print("matplotlib not installed; skipping the plot")
