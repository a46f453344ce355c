#!/usr/bin/env python3
"""The two-stage loop end to end: instruction -> command -> execution -> feedback.

Run: python demos/03_full_pipeline.py
"""

from avcopilot.pipeline import Pipeline, default_schedule
from avcopilot.registry import default_registry
from avcopilot.simulation import SimHost, SimKernel, default_map
from avcopilot.translation import RuleBackend

pipeline = Pipeline(default_registry(), SimHost(SimKernel(default_map())), RuleBackend())

result = pipeline.run_scripted_schedule(default_schedule())

for record in result.records:
    status = record.execution.status.value if record.execution else "TRANSLATION_ERROR"
    print(f"in: {record.instruction.text}")
    print(f"    -> {record.command.category.value}/{record.command.action}"
          f" [{status}] in {record.latency.execution_ms:.3f} ms")
    print(f"    <- {record.feedback_text}")

print(f"\nscenario succeeded: {result.all_succeeded}; "
      f"{len(result.trajectory)} ticks recorded, digest {result.trajectory_digest()[:12]}")

# A request the system cannot serve is rejected, never executed.
record = pipeline.handle_instruction("Please order sushi for dinner.")
print(f"\nout-of-scope: [{record.execution.status.value}] {record.feedback_text}")
pipeline.host.close()
