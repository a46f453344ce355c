import json
import random

import numpy as np
import pytest

from avcopilot.dsl import Category, command, out_of_scope
from avcopilot.evalharness import (
    EvalError,
    boxplot_summary,
    classify_error,
    default_corpus,
    format_stats_table,
    latency_stats,
    load_corpus,
    run_scenario_eval,
    run_translation_eval,
    write_scenario_outputs,
    write_translation_outputs,
)
from avcopilot.pipeline import Pipeline, default_schedule
from avcopilot.registry import default_registry
from avcopilot.simulation import SimHost, SimKernel, default_map
from avcopilot.translation import AblationMode, BackendUnavailable, RuleBackend


@pytest.fixture(scope="module")
def registry():
    return default_registry()


@pytest.fixture(scope="module")
def corpus(registry):
    return default_corpus(registry)


def test_shipped_corpus_composition(corpus):
    assert len(corpus) >= 60
    by_category = {}
    for entry in corpus:
        by_category.setdefault(entry.category_token, []).append(entry)
    assert set(by_category) == {
        "INFO",
        "MISSION",
        "CONFIG",
        "COOP",
        "INTERVENTION",
        "OUT_OF_SCOPE",
    }
    sizes = {len(v) for v in by_category.values()}
    assert max(sizes) - min(sizes) <= 2  # roughly equal distribution


def test_corpus_rejects_non_canonical_truth():
    block = (
        "id: x\ninstruction: hello\n  command_type: CONFIG\n  action: SET_PARAM\n"
        "  parameters:\n    - name: max_vel\n      value: 90.0\n"
    )
    load_corpus(block)  # canonical form loads
    with pytest.raises(EvalError):
        load_corpus(block.replace("90.0", "90.00"))  # parses, but not canonical
    with pytest.raises(ValueError):
        load_corpus("id: x\ninstruction: hi\n  command_type: INFO\n")  # unparseable truth


def test_corpus_rejects_invalid_ground_truth(registry):
    block = (
        "id: bad\ninstruction: go too fast\n  command_type: CONFIG\n  action: SET_PARAM\n"
        "  parameters:\n    - name: max_vel\n      value: 900.0\n"
    )
    with pytest.raises(EvalError):
        load_corpus(block, registry)


def test_corpus_duplicate_ids_rejected():
    block = "id: x\ninstruction: hello\n  command_type: OUT_OF_SCOPE\n"
    with pytest.raises(EvalError):
        load_corpus(block + "\n" + block)


def test_empty_corpus_is_an_error(registry):
    with pytest.raises(EvalError):
        load_corpus("# nothing here\n", registry)
    with pytest.raises(EvalError):
        run_translation_eval((), RuleBackend())


def test_rule_backend_scores_perfect_on_shipped_corpus(corpus):
    stats, cases = run_translation_eval(corpus, RuleBackend())
    assert stats.accuracy_pct == 100.0
    assert stats.correct == stats.n == len(corpus)
    assert all(case.correct for case in cases)
    assert sum(bucket["n"] for bucket in stats.per_category.values()) == stats.n


def test_statistics_match_bruteforce_recomputation(corpus):
    stats, _ = run_translation_eval(corpus, RuleBackend())
    raw = np.array(stats.latencies_s)
    assert abs(stats.mean_s - raw.mean()) < 1e-9
    assert abs(stats.median_s - np.median(raw)) < 1e-9
    assert abs(stats.std_s - raw.std()) < 1e-9


def test_boxplot_matches_bruteforce_quartiles():
    rng = random.Random(99)
    values = [rng.gauss(1.7, 0.2) for _ in range(137)] + [5.0, 6.5]  # planted outliers
    box = boxplot_summary(values)
    q1, q2, q3 = np.percentile(values, [25, 50, 75])
    assert abs(box["q1"] - q1) < 1e-9
    assert abs(box["median"] - q2) < 1e-9
    assert abs(box["q3"] - q3) < 1e-9
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    expected_outliers = sorted(v for v in values if v < lo or v > hi)
    assert box["outliers"] == expected_outliers
    assert {5.0, 6.5} <= set(box["outliers"])
    inside = [v for v in sorted(values) if lo <= v <= hi]
    assert box["lower_whisker"] == inside[0]
    assert box["upper_whisker"] == inside[-1]


def test_latency_stats_definitions():
    values = [0.1, 0.2, 0.4, 0.9]
    stats = latency_stats(values)
    assert stats["mean"] == pytest.approx(0.4)
    assert stats["median"] == pytest.approx(0.3)
    assert stats["std"] == pytest.approx(np.std(values), abs=1e-12)


def test_error_classification_levels():
    truth = command(Category.CONFIG, "SET_PARAM", [("max_vel", 90.0)])
    assert classify_error(truth, out_of_scope()) == "category_level"
    assert classify_error(truth, command(Category.CONFIG, "SET_PARAM", [("max_vel", 80.0)])) == "parameter_level"
    assert classify_error(truth, command(Category.CONFIG, "OTHER")) == "action_level"
    assert classify_error(truth, None) == "translation_failed"


class WrongOnSpeed:
    """Backend that confuses lateral with longitudinal acceleration."""

    name = "wrong-on-speed"

    def __init__(self):
        self._inner = RuleBackend()

    def translate(self, bundle):
        cmd = self._inner.translate(bundle)
        if cmd.action == "SET_PARAM" and cmd.parameters[0][0] == "max_lat_accel":
            return command(Category.CONFIG, "SET_PARAM", [("max_long_accel", cmd.parameters[0][1])])
        return cmd

    def feedback(self, instruction_text, cmd, report):
        return self._inner.feedback(instruction_text, cmd, report)


def test_error_breakdown_counts_sum(corpus):
    stats, _ = run_translation_eval(corpus, WrongOnSpeed())
    assert stats.correct + sum(stats.error_breakdown.values()) == stats.n
    assert stats.error_breakdown["parameter_level"] >= 1
    assert stats.accuracy_pct < 100.0


def test_translation_outputs_written(tmp_path, corpus):
    stats, cases = run_translation_eval(corpus, RuleBackend())
    write_translation_outputs(tmp_path, stats, cases)
    table = (tmp_path / "translation_table.txt").read_text()
    assert "Acc. in %" in table and "median t_r in s" in table
    box = json.loads((tmp_path / "translation_boxplot.json").read_text())
    assert {"lower_whisker", "q1", "median", "q3", "upper_whisker", "outliers"} <= set(box)
    raw = (tmp_path / "translation_latencies.txt").read_text().split()
    assert len(raw) == stats.n
    body = json.loads((tmp_path / "translation_stats.json").read_text())
    reference = body["reference_cloud_baseline"]
    assert reference["accuracy_pct"] == 97.0
    assert reference["latency_s"] == {"mean": 1.723, "median": 1.669}


def test_ablation_modes_all_score_with_rule_backend(corpus):
    rows = []
    for mode in AblationMode:
        stats, _ = run_translation_eval(corpus, RuleBackend(), mode)
        rows.append(stats)
        assert stats.accuracy_pct == 100.0  # rule table ignores prompt context
    table = format_stats_table(rows)
    for mode in AblationMode:
        assert mode.value in table


def scenario_factory(backend=None):
    def factory():
        host = SimHost(SimKernel(default_map()))
        return Pipeline(default_registry(), host, backend or RuleBackend())

    return factory


def test_scenario_eval_rule_backend_full_success():
    report = run_scenario_eval(3, default_schedule(), scenario_factory())
    assert report.successful_runs == 3
    assert report.tsr_pct == 100.0
    assert report.categories_succeeded_every_run
    assert report.failures == []
    assert len(report.execution_latencies_ms) == 3 * 6
    assert report.execution_ms["median"] < 10.0


class FailsOnThird:
    name = "fails-on-third"

    def __init__(self):
        self.calls = 0
        self._inner = RuleBackend()

    def translate(self, bundle):
        self.calls += 1
        if self.calls == 3:
            raise BackendUnavailable("API server unreachable: stub")
        return self._inner.translate(bundle)

    def feedback(self, instruction_text, cmd, report):
        return self._inner.feedback(instruction_text, cmd, report)


def test_scenario_eval_records_failure_source():
    report = run_scenario_eval(1, default_schedule(), scenario_factory(FailsOnThird()))
    assert report.successful_runs == 0
    assert report.tsr_pct == 0.0
    assert len(report.failures) == 1
    failure = report.failures[0]
    assert failure["stage"] == "translation"
    assert failure["reason"] == "BackendUnavailable"


def test_scenario_outputs_written(tmp_path):
    report = run_scenario_eval(1, default_schedule(), scenario_factory())
    write_scenario_outputs(tmp_path, report)
    body = json.loads((tmp_path / "scenario_report.json").read_text())
    assert body["tsr_fraction"] == "1/1"
    assert (tmp_path / "scenario_execution_ms.txt").read_text().strip()


def test_scenario_eval_requires_runs():
    with pytest.raises(EvalError):
        run_scenario_eval(0, default_schedule(), scenario_factory())


def test_http_backend_mode_reports_without_gating(tmp_path, corpus):
    # The networked mode emits the same report format; its accuracy is
    # informative only, so nothing here asserts a particular score.
    import http.server
    import threading

    class Fixed(http.server.BaseHTTPRequestHandler):
        def do_POST(self):
            self.rfile.read(int(self.headers.get("content-length", 0)))
            blob = b"command_type: INFO\naction: GET_ETA\n"
            self.send_response(200)
            self.send_header("content-type", "text/plain")
            self.send_header("content-length", str(len(blob)))
            self.end_headers()
            self.wfile.write(blob)

        def log_message(self, *args):
            pass

    server = http.server.HTTPServer(("127.0.0.1", 0), Fixed)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        from avcopilot.translation import HttpBackend

        backend = HttpBackend(endpoint=f"http://127.0.0.1:{server.server_address[1]}/")
        stats, cases = run_translation_eval(corpus[:10], backend)
        write_translation_outputs(tmp_path, stats, cases)
        assert stats.backend == "http"
        assert 0.0 <= stats.accuracy_pct <= 100.0
        assert (tmp_path / "translation_table.txt").exists()
        assert (tmp_path / "translation_mismatches.json").exists()
    finally:
        server.shutdown()
