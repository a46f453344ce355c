#!/usr/bin/env python3
"""Walk through the command DSL: parse, validate, serialize.

Run: python demos/01_dsl_and_registry.py
"""

from avcopilot import default_registry, parse_command, serialize_command
from avcopilot.interface_node import validate

# A passenger asked for a 90 km/h ceiling; stage 1 produced this document.
doc = """command_type: CONFIG
action: SET_PARAM
parameters:
  - name: max_vel
    value: 90.0
"""

cmd = parse_command(doc)
print("parsed command:", cmd.category.value, cmd.action, dict(cmd.parameters))

# Round trip: the canonical serialization is bit-identical.
assert serialize_command(cmd) == doc
print("canonical round-trip: ok")

registry = default_registry()
print(f"\nregistry: {len(registry)} allowed actions")
for spec in registry:
    params = ", ".join(p.name for p in spec.params) or "-"
    print(f"  {spec.category.value:<12} {spec.action:<26} -> {spec.capability:<18} ({params})")

# The validation layer is the safety boundary: out-of-bounds values and
# unknown actions never reach the vehicle.
print("\nvalidation outcomes:")
for text in (doc, doc.replace("90.0", "900.0"), doc.replace("SET_PARAM", "FLY")):
    result = validate(parse_command(text), registry)
    print(f"  {result.verdict.value:<8}", result.detail or "(clean)")
