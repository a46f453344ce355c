import pytest

from avcopilot.dsl import Category, command, out_of_scope
from avcopilot.interface_node import (
    ExecStatus,
    ExecutionReport,
    InterfaceNode,
    LatencyRecord,
    RejectReason,
    ValidationResult,
    Verdict,
    report_from_dict,
    validate,
)
from avcopilot.registry import default_registry
from avcopilot.simulation import SimHost, SimKernel, SimUnavailable, default_map


@pytest.fixture(scope="module")
def registry():
    return default_registry()


@pytest.fixture()
def node(registry):
    host = SimHost(SimKernel(default_map()))
    yield InterfaceNode(registry, host)
    host.close()


def cfg(value):
    return command(Category.CONFIG, "SET_PARAM", [("max_vel", value)])


def test_validate_accepts_in_bounds_set_param(registry):
    result = validate(cfg(90.0), registry)
    assert result.accepted and result.reason is None


def test_validate_rejects_out_of_bounds(registry):
    # Oracle: the violated bound comes straight from the registry entry.
    bound = registry.get("SET_PARAM").param("max_vel")
    assert not bound.min_value <= 900.0 <= bound.max_value
    result = validate(cfg(900.0), registry)
    assert result.reason is RejectReason.OUT_OF_BOUNDS
    assert "130" in result.detail


def test_validate_rejects_out_of_scope(registry):
    result = validate(out_of_scope(), registry)
    assert result.reason is RejectReason.OUT_OF_SCOPE_COMMAND


def test_validate_rejects_unknown_action(registry):
    result = validate(command(Category.CONFIG, "FLY"), registry)
    assert result.reason is RejectReason.UNKNOWN_ACTION


def test_validate_rejects_category_mismatch(registry):
    result = validate(command(Category.INFO, "SET_PARAM", [("max_vel", 90.0)]), registry)
    assert result.reason is RejectReason.CATEGORY_MISMATCH


def test_validate_rejects_unknown_param(registry):
    result = validate(
        command(Category.CONFIG, "SET_PARAM", [("warp_factor", 9.0)]), registry
    )
    assert result.reason is RejectReason.UNKNOWN_PARAM


def test_validate_rejects_missing_required_param(registry):
    result = validate(command(Category.COOP, "TURN_AT_NEXT_INTERSECTION"), registry)
    assert result.reason is RejectReason.MISSING_PARAM


def test_validate_rejects_empty_param_set_when_params_declared(registry):
    result = validate(command(Category.CONFIG, "SET_PARAM"), registry)
    assert result.reason is RejectReason.MISSING_PARAM


def test_validate_rejects_bad_enum_value(registry):
    result = validate(
        command(Category.COOP, "CHANGE_LANE", [("direction", "up")]), registry
    )
    assert result.reason is RejectReason.OUT_OF_BOUNDS


def test_validate_rejects_string_for_number(registry):
    result = validate(cfg("fast"), registry)
    assert result.reason is RejectReason.OUT_OF_BOUNDS


def test_validation_result_invariants():
    with pytest.raises(ValueError):
        ValidationResult(Verdict.REJECTED)
    with pytest.raises(ValueError):
        ValidationResult(Verdict.ACCEPTED, RejectReason.UNKNOWN_ACTION)


def test_execution_report_invariants():
    ok = ValidationResult(Verdict.ACCEPTED)
    bad = ValidationResult(Verdict.REJECTED, RejectReason.UNKNOWN_ACTION, "x")
    with pytest.raises(ValueError):
        ExecutionReport(status=ExecStatus.REJECTED, validation=ok)
    with pytest.raises(ValueError):
        ExecutionReport(status=ExecStatus.SUCCESS, validation=bad)
    with pytest.raises(ValueError):
        ExecutionReport(status=ExecStatus.SUCCESS, validation=ok, exec_latency_ms=-1)


def test_latency_record_non_negative():
    with pytest.raises(ValueError):
        LatencyRecord(-0.1, 0, 0)


def test_rejected_command_never_touches_the_sim(node):
    before = node.host.fingerprint()
    report = node.execute(cfg(900.0))
    assert report.status is ExecStatus.REJECTED
    assert report.failure_reason == report.validation.detail
    assert node.host.fingerprint() == before


def test_out_of_scope_execution_rejected_without_mutation(node):
    before = node.host.fingerprint()
    report = node.execute(out_of_scope())
    assert report.status is ExecStatus.REJECTED
    assert report.validation.reason is RejectReason.OUT_OF_SCOPE_COMMAND
    assert node.host.fingerprint() == before


def test_successful_override_with_red_light_ahead(node):
    node.host.submit("start")
    node.host.advance(2.0)
    report = node.execute(
        command(Category.INTERVENTION, "OVERRIDE_TRAFFIC_LIGHT", [("state", "green")])
    )
    assert report.status is ExecStatus.SUCCESS
    assert report.payload["edge"] == "e1"
    assert report.exec_latency_ms >= 0.0
    node.host.advance(30.0)
    assert node.host.snapshot().vehicle.edge != "e1"  # proceeded past the light


def test_turn_right_fails_at_three_way_intersection(node):
    node.host.submit("start")
    report = node.execute(
        command(Category.COOP, "TURN_AT_NEXT_INTERSECTION", [("direction", "right")])
    )
    assert report.status is ExecStatus.FAILED
    assert "PreconditionFailed" in report.failure_reason


def test_speed_limit_query_returns_segment_limit(node):
    report = node.execute(command(Category.INFO, "GET_SPEED_LIMIT"))
    assert report.status is ExecStatus.SUCCESS
    assert report.payload == {"speed_limit_kmh": 50.0}


def test_every_registry_action_dispatches(registry):
    # Closure: no registered action can raise UnknownCapability.
    host = SimHost(SimKernel(default_map()))
    node = InterfaceNode(registry, host)
    from avcopilot.simulation import CAPABILITIES

    assert registry.capabilities() <= CAPABILITIES
    host.close()


def test_sim_unavailable_after_close(registry):
    host = SimHost(SimKernel(default_map()))
    node = InterfaceNode(registry, host)
    host.close()
    with pytest.raises(SimUnavailable):
        node.execute(command(Category.INFO, "GET_ETA"))


def test_report_round_trips_through_dict(node):
    report = node.execute(command(Category.INFO, "GET_SPEED_LIMIT"))
    rebuilt = report_from_dict(report.as_dict())
    assert rebuilt == report
