import json

import pytest

from avcopilot.dsl import Category, command
from avcopilot.interface_node import ExecStatus
from avcopilot.pipeline import (
    Pipeline,
    ScheduleEntry,
    default_schedule,
    load_schedule,
    record_from_dict,
)
from avcopilot.registry import default_registry
from avcopilot.simulation import Mode, SimHost, SimKernel, default_map
from avcopilot.translation import BackendUnavailable, RuleBackend


@pytest.fixture(scope="module")
def registry():
    return default_registry()


def make_pipeline(registry, tmp_path=None, backend=None, start_edge=None, **kwargs):
    host = SimHost(SimKernel(default_map(), start_edge=start_edge))
    return Pipeline(
        registry,
        host,
        backend or RuleBackend(),
        log_dir=tmp_path,
        **kwargs,
    )


class FailingBackend:
    """Stage-1 fails always (or from the nth call onward)."""

    name = "failing"

    def __init__(self, fail_from=1):
        self.calls = 0
        self.fail_from = fail_from
        self._inner = RuleBackend()

    def translate(self, bundle):
        self.calls += 1
        if self.calls >= self.fail_from:
            raise BackendUnavailable("API server unreachable: stub")
        return self._inner.translate(bundle)

    def feedback(self, instruction_text, cmd, report):
        return self._inner.feedback(instruction_text, cmd, report)


def test_start_driving_record(registry, tmp_path):
    pipeline = make_pipeline(registry, tmp_path)
    record = pipeline.handle_instruction("Start driving autonomously", session="s1")
    assert record.command == command(Category.MISSION, "START_DRIVING")
    assert record.execution.status is ExecStatus.SUCCESS
    assert "Starting the autonomous drive" in record.feedback_text
    assert record.succeeded
    pipeline.host.close()


def test_backend_down_yields_error_record_and_untouched_sim(registry, tmp_path):
    pipeline = make_pipeline(registry, tmp_path, backend=FailingBackend())
    before = pipeline.host.fingerprint()
    record = pipeline.handle_instruction("Start driving autonomously")
    assert record.translation_error is not None
    assert record.translation_error[0] == "BackendUnavailable"
    assert record.execution is None
    assert "sorry" in record.feedback_text.lower()
    assert not record.succeeded
    assert pipeline.host.fingerprint() == before
    pipeline.host.close()


def test_green_light_claim_with_no_light_ahead_fails(registry, tmp_path):
    pipeline = make_pipeline(registry, tmp_path, start_edge="e2")
    pipeline.handle_instruction("start driving autonomously")
    record = pipeline.handle_instruction("The traffic light is green")
    assert record.execution.status is ExecStatus.FAILED
    assert "PreconditionFailed" in record.execution.failure_reason
    assert "no traffic light" in record.feedback_text
    pipeline.host.close()


def test_records_persisted_before_return(registry, tmp_path):
    pipeline = make_pipeline(registry, tmp_path)
    record = pipeline.handle_instruction("what is the speed limit?", session="persist")
    log_path = pipeline.log.path_for("persist")
    assert log_path.exists()
    stored = [json.loads(l) for l in log_path.read_text().splitlines()]
    assert stored[-1]["id"] == record.record_id
    pipeline.host.close()


def test_truncated_final_log_line_skipped(registry, tmp_path):
    pipeline = make_pipeline(registry, tmp_path)
    for text in ("what is the speed limit?", "how fast are we going?"):
        pipeline.handle_instruction(text, session="crash")
    path = pipeline.log.path_for("crash")
    intact = pipeline.log.load("crash")
    assert len(intact) == 2
    # Simulate a crash mid-append: final line cut and unterminated.
    raw = path.read_text()
    path.write_text(raw + raw.splitlines()[0][: len(raw) // 3])
    recovered = pipeline.log.load("crash")
    assert [r.record_id for r in recovered] == [r.record_id for r in intact]
    pipeline.host.close()


def test_log_round_trip_preserves_records(registry, tmp_path):
    pipeline = make_pipeline(registry, tmp_path)
    sent = [
        pipeline.handle_instruction(text, session="rt")
        for text in ("start driving", "set max speed to 60 km/h", "tell me a joke")
    ]
    loaded = pipeline.log.load("rt")
    assert [r.as_dict() for r in loaded] == [r.as_dict() for r in sent]
    pipeline.host.close()


def test_two_stage_ordering_over_persisted_log(registry, tmp_path):
    pipeline = make_pipeline(registry, tmp_path)
    for text in ("start driving", "what's our eta?", "nonsense request", "stop the car"):
        pipeline.handle_instruction(text, session="order")
    for record in pipeline.log.load("order"):
        if record.execution is not None:
            assert record.feedback_at > record.executed_at > record.translated_at
        else:
            assert record.translation_error is not None
    pipeline.host.close()


def test_at_most_one_execution_per_instruction(registry, tmp_path):
    pipeline = make_pipeline(registry, tmp_path)
    submits = []
    original = pipeline.host.submit

    def counting_submit(capability, args=None):
        submits.append(capability)
        return original(capability, args)

    pipeline.host.submit = counting_submit
    pipeline.handle_instruction("start driving")
    assert len(submits) == 1
    pipeline.handle_instruction("set the max speed to 900 km/h")  # rejected
    assert len(submits) == 1
    pipeline.handle_instruction("tell me a joke")  # out of scope
    assert len(submits) == 1
    pipeline.host.close()


def test_schedule_parsing_and_validation():
    entries = load_schedule("at 1.0 go\nat 2.5 stop\n# comment\n")
    assert entries == (ScheduleEntry(1.0, "go"), ScheduleEntry(2.5, "stop"))
    with pytest.raises(ValueError):
        load_schedule("at 2.0 a\nat 1.0 b\n")
    with pytest.raises(ValueError):
        load_schedule("when 2.0 a\n")


def test_default_schedule_runs_all_categories(registry, tmp_path):
    pipeline = make_pipeline(registry, tmp_path)
    result = pipeline.run_scripted_schedule(default_schedule())
    assert len(result.records) == 6
    assert result.all_succeeded
    categories = {r.command.category.value for r in result.records}
    assert categories == {"MISSION", "INTERVENTION", "INFO", "COOP", "CONFIG"}
    # Scenario ends with the commanded stop completed.
    state = pipeline.host.kernel.vehicle_state()
    assert state.mode is Mode.STOPPED and state.v == 0.0
    pipeline.host.close()


def test_empty_schedule_idles(registry, tmp_path):
    pipeline = make_pipeline(registry, tmp_path)
    result = pipeline.run_scripted_schedule(())
    assert result.records == []
    assert pipeline.host.kernel.vehicle_state().v == 0.0
    pipeline.host.close()


def test_turn_right_variant_fails_exactly_once(registry, tmp_path):
    schedule = list(default_schedule())
    schedule[3] = ScheduleEntry(schedule[3].at_s, "Turn right when it's possible.")
    pipeline = make_pipeline(registry, tmp_path)
    result = pipeline.run_scripted_schedule(tuple(schedule))
    statuses = [r.execution.status for r in result.records]
    assert statuses.count(ExecStatus.SUCCESS) == 5
    assert statuses.count(ExecStatus.FAILED) == 1
    failed = result.records[3]
    assert "PreconditionFailed" in failed.execution.failure_reason
    pipeline.host.close()


def test_scripted_runs_are_bit_identical(registry):
    def run():
        pipeline = make_pipeline(registry)
        result = pipeline.run_scripted_schedule(default_schedule())
        pipeline.host.close()
        return result

    a, b = run(), run()
    assert a.trajectory == b.trajectory
    assert a.trajectory_digest() == b.trajectory_digest()


def test_telemetry_sampling_cadence(registry):
    pipeline = make_pipeline(registry)
    frames = pipeline.sample_telemetry(5.0, cadence_hz=10.0)
    assert abs(len(frames) - 50) <= 2
    deltas = [
        b.vehicle.t - a.vehicle.t for a, b in zip(frames, frames[1:])
    ]
    assert all(abs(d - 0.1) <= pipeline.host.dt + 1e-9 for d in deltas)
    # Vehicle was never started: a stopped vehicle streams v = 0 frames.
    assert all(f.vehicle.v == 0.0 for f in frames)
    ts = [f.vehicle.t for f in frames]
    assert ts == sorted(ts)
    pipeline.host.close()


def test_backend_substitutability(registry, tmp_path):
    # Identical extracted commands must produce identical stage sequencing.
    class CannedBackend:
        name = "canned"

        def translate(self, bundle):
            return command(Category.INFO, "GET_SPEED_LIMIT")

        def feedback(self, instruction_text, cmd, report):
            return "canned feedback"

    outcomes = []
    for backend in (RuleBackend(), CannedBackend()):
        pipeline = make_pipeline(registry, tmp_path, backend=backend)
        record = pipeline.handle_instruction("what is the current speed limit?")
        outcomes.append(
            (
                record.command,
                record.execution.status,
                record.execution.payload,
                record.execution.validation.verdict,
            )
        )
        pipeline.host.close()
    assert outcomes[0] == outcomes[1]


def test_record_json_round_trip(registry, tmp_path):
    pipeline = make_pipeline(registry, tmp_path)
    record = pipeline.handle_instruction("set the maximum speed to 90 km/h")
    rebuilt = record_from_dict(json.loads(json.dumps(record.as_dict())))
    assert rebuilt.as_dict() == record.as_dict()
    pipeline.host.close()
