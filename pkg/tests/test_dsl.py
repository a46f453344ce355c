import math
import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avcopilot.dsl import (
    Category,
    ExtractedCommand,
    ParseError,
    command,
    extract_document,
    out_of_scope,
    parse_command,
    render_scalar,
    serialize_command,
)

LISTING_DOC = (
    "command_type: CONFIG\n"
    "action: SET_PARAM\n"
    "parameters:\n"
    "  - name: max_vel\n"
    "    value: 90.0\n"
)


def test_parse_config_set_param_document():
    cmd = parse_command(LISTING_DOC)
    assert cmd.category is Category.CONFIG
    assert cmd.action == "SET_PARAM"
    assert cmd.parameters == (("max_vel", 90.0),)


def test_serialize_is_bit_exact_for_the_config_document():
    cmd = command(Category.CONFIG, "SET_PARAM", [("max_vel", 90.0)])
    assert serialize_command(cmd) == LISTING_DOC


def test_out_of_scope_minimal_document():
    assert parse_command("command_type: OUT_OF_SCOPE") == out_of_scope()
    assert serialize_command(out_of_scope()) == "command_type: OUT_OF_SCOPE\n"


# Independent scanner for the finite-decimal scalar grammar: every numeric-
# looking token must be finite once converted.
_SCALAR_TOKEN = re.compile(r"value: (\S+)")


def _scan_scalars_finite(text: str) -> bool:
    for match in _SCALAR_TOKEN.finditer(text):
        token = match.group(1)
        if re.fullmatch(r"[+-]?(nan|inf|infinity)", token, re.IGNORECASE):
            return False
        try:
            if not math.isfinite(float(token)):
                return False
        except ValueError:
            continue
    return True


@pytest.mark.parametrize("token", ["nan", "NaN", "inf", "-inf", "Infinity", "1e999"])
def test_non_finite_values_rejected(token):
    doc = (
        "command_type: CONFIG\naction: SET_PARAM\nparameters:\n"
        f"  - name: max_vel\n    value: {token}\n"
    )
    assert not _scan_scalars_finite(doc)
    with pytest.raises(ParseError) as err:
        parse_command(doc)
    assert err.value.code == "NON_FINITE_NUMBER"
    assert err.value.line == 5


@pytest.mark.parametrize(
    "doc,code,line",
    [
        ("command_type: BOGUS\n", "UNKNOWN_CATEGORY_TOKEN", 1),
        ("command_type: INFO\nfoo: bar\n", "UNKNOWN_KEY", 2),
        ("weird: INFO\n", "UNKNOWN_KEY", 1),
        (
            "command_type: CONFIG\naction: SET_PARAM\nparameters:\n  - name: a\n    value: 1.0\n  - name: a\n    value: 2.0\n",
            "DUPLICATE_KEY",
            6,
        ),
        (
            "command_type: CONFIG\naction: SET_PARAM\naction: SET_PARAM\n",
            "DUPLICATE_KEY",
            3,
        ),
        (
            "command_type: CONFIG\naction: SET_PARAM\nparameters:\n  - name: a\n",
            "MALFORMED_PARAMETER_ITEM",
            4,
        ),
        (
            "command_type: CONFIG\naction: SET_PARAM\nparameters:\n  - name: a\n  value: 1.0\n",
            "MALFORMED_PARAMETER_ITEM",
            5,
        ),
        ("command_type: CONFIG\naction: SET_PARAM\nparameters:\n", "MALFORMED_DOCUMENT", 3),
        ("command_type: OUT_OF_SCOPE\naction: FOO\n", "MALFORMED_DOCUMENT", 2),
        ("command_type: INFO\n", "MALFORMED_DOCUMENT", 1),
        ("", "MALFORMED_DOCUMENT", 1),
        ("command_type:  CONFIG\n", "MALFORMED_DOCUMENT", 1),
    ],
)
def test_parse_errors_carry_code_and_line(doc, code, line):
    with pytest.raises(ParseError) as err:
        parse_command(doc)
    assert err.value.code == code
    assert err.value.line == line


def test_exactly_one_space_after_colon_enforced():
    with pytest.raises(ParseError):
        parse_command("command_type: CONFIG\naction:SET_PARAM\n")


def test_trailing_annotations_are_not_grammar():
    with pytest.raises(ParseError):
        parse_command("command_type: CONFIG           (<CATEGORY>)\n")


def test_integral_numbers_keep_one_fractional_digit():
    assert render_scalar(90.0) == "90.0"
    assert render_scalar(90) == "90.0"
    assert render_scalar(0.5) == "0.5"
    assert render_scalar(-3.25) == "-3.25"


def test_number_like_strings_are_quoted():
    cmd = command(Category.CONFIG, "SET_PARAM", [("note", "90.0")])
    doc = serialize_command(cmd)
    assert '"90.0"' in doc
    assert parse_command(doc) == cmd


def test_reserved_word_strings_are_quoted():
    cmd = command(Category.CONFIG, "SET_PARAM", [("note", "nan")])
    doc = serialize_command(cmd)
    assert '"nan"' in doc
    assert parse_command(doc) == cmd


def test_quoted_string_escapes_round_trip():
    value = 'a "quoted" \\ thing'
    cmd = command(Category.COOP, "CHANGE_LANE", [("direction", value)])
    assert parse_command(serialize_command(cmd)) == cmd


def test_canonical_form_identity():
    docs = [
        LISTING_DOC,
        "command_type: OUT_OF_SCOPE\n",
        "command_type: INFO\naction: GET_ETA\n",
    ]
    for doc in docs:
        assert serialize_command(parse_command(doc)) == doc


def test_parse_accepts_non_canonical_numbers():
    doc = LISTING_DOC.replace("90.0", "90.000")
    assert parse_command(doc).parameters == (("max_vel", 90.0),)


def test_structural_invariants_enforced_on_construction():
    with pytest.raises(ValueError):
        ExtractedCommand(category=Category.OUT_OF_SCOPE, action="FOO")
    with pytest.raises(ValueError):
        ExtractedCommand(category=Category.INFO)
    with pytest.raises(ValueError):
        ExtractedCommand(
            category=Category.CONFIG,
            action="SET_PARAM",
            parameters=(("a", 1.0), ("a", 2.0)),
        )
    with pytest.raises(ValueError):
        ExtractedCommand(
            category=Category.CONFIG, action="SET_PARAM", parameters=(("a", float("nan")),)
        )


from helpers import random_registry_valid_command


def test_round_trip_on_generated_commands():
    rng = random.Random(20260810)
    for _ in range(2000):
        cmd = random_registry_valid_command(rng)
        assert parse_command(serialize_command(cmd)) == cmd


@settings(max_examples=400, deadline=None)
@given(st.text(max_size=300))
def test_parser_total_on_arbitrary_text(text):
    try:
        parse_command(text)
    except ParseError as err:
        assert err.line >= 1
        assert err.reason


@settings(max_examples=400, deadline=None)
@given(st.binary(max_size=300))
def test_parser_total_on_arbitrary_bytes(blob):
    try:
        parse_command(blob.decode("latin-1"))
    except ParseError:
        pass


def test_extract_document_from_model_chatter():
    text = "Sure! Here is the command:\n\ncommand_type: INFO\naction: GET_ETA\n\nHope that helps."
    assert extract_document(text) == "command_type: INFO\naction: GET_ETA\n"


def test_extract_document_with_parameters_and_indent():
    text = "  command_type: CONFIG\n  action: SET_PARAM\n  parameters:\n    - name: max_vel\n      value: 90.0\nmore prose"
    assert extract_document(text) == LISTING_DOC


def test_extract_document_absent():
    assert extract_document("no commands here") is None
