"""Shared test helpers."""

import random

from avcopilot.dsl import Category, ExtractedCommand, command, out_of_scope


def random_registry_valid_command(rng: random.Random) -> ExtractedCommand:
    """Draw a command shaped like the shipped registry's action space."""
    choice = rng.randrange(8)
    if choice == 0:
        return out_of_scope()
    if choice == 1:
        return command(Category.INFO, rng.choice(["GET_SPEED_LIMIT", "GET_ETA", "GET_SPEED"]))
    if choice == 2:
        return command(
            Category.MISSION, "SET_DESTINATION", [("dest", rng.choice(["campus", "depot"]))]
        )
    if choice == 3:
        return command(Category.MISSION, rng.choice(["START_DRIVING", "STOP_DRIVING"]))
    if choice == 4:
        name, lo, hi = rng.choice(
            [
                ("max_vel", 5.0, 130.0),
                ("min_gap", 5.0, 80.0),
                ("max_long_accel", 0.5, 3.0),
                ("max_lat_accel", 0.5, 3.0),
            ]
        )
        value = round(rng.uniform(lo, hi), rng.randrange(0, 4))
        return command(Category.CONFIG, "SET_PARAM", [(name, value)])
    if choice == 5:
        return command(
            Category.COOP,
            "TURN_AT_NEXT_INTERSECTION",
            [("direction", rng.choice(["left", "right", "straight"]))],
        )
    if choice == 6:
        return command(Category.COOP, "CHANGE_LANE", [("direction", rng.choice(["left", "right"]))])
    if rng.random() < 0.5:
        return command(Category.INTERVENTION, "OVERRIDE_TRAFFIC_LIGHT", [("state", "green")])
    return command(Category.INTERVENTION, "EMERGENCY_STOP")
