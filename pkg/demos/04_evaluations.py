#!/usr/bin/env python3
"""Run both evaluations at desk scale and print the report tables.

Run: python demos/04_evaluations.py
"""

from avcopilot.evalharness import (
    boxplot_summary,
    default_corpus,
    format_stats_table,
    run_scenario_eval,
    run_translation_eval,
)
from avcopilot.pipeline import Pipeline, default_schedule
from avcopilot.registry import default_registry
from avcopilot.simulation import SimHost, SimKernel, default_map
from avcopilot.translation import AblationMode, RuleBackend

registry = default_registry()
corpus = default_corpus(registry)
print(f"corpus: {len(corpus)} instruction/command pairs\n")

rows = []
for mode in AblationMode:
    stats, _ = run_translation_eval(corpus, RuleBackend(), mode)
    rows.append(stats)
print(format_stats_table(rows))

box = boxplot_summary(rows[0].latencies_s)
print("translation-latency boxplot (s):")
for key in ("lower_whisker", "q1", "median", "q3", "upper_whisker"):
    print(f"  {key:<14} {box[key]:.6f}")
print(f"  outliers       {len(box['outliers'])}")


def factory():
    return Pipeline(registry, SimHost(SimKernel(default_map())), RuleBackend())


print("\nscenario reliability (10 runs):")
report = run_scenario_eval(10, default_schedule(), factory)
print(f"  TSR {report.as_dict()['tsr_fraction']} = {report.tsr_pct:.1f}%")
print(f"  execution latency ms: mean {report.execution_ms['mean']:.3f}, "
      f"median {report.execution_ms['median']:.3f}, std {report.execution_ms['std']:.3f}")
print(f"  feedback latency s:   mean {report.feedback_s['mean']:.6f}, "
      f"median {report.feedback_s['median']:.6f}")
