import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import TWO_ROUTE_TEXT, INSTRUMENT_TEXT, two_route, random_diagram
from pregid.errors import (
    DimensionMismatch,
    DuplicateVariable,
    MissingVarLine,
    ModelSyntaxError,
    NotSymmetric,
    OrderViolation,
    UnknownLabel,
    UnknownVariable,
)
from pregid.expr import from_json
from pregid.formats import parse_covariance, parse_model, render_report, report_json, serialize_model
from pregid.solver import identify_all


def test_parse_with_comments(instrument):
    text = "# instrument\n\nvar Z X Y   # order\nZ -> X\nX->Y\nX <-> Y\n"
    doc = parse_model(text)
    assert doc.diagram == instrument
    assert doc.line_map[("->", 1, 2)] == 5


@pytest.mark.parametrize("text, err, line", [
    ("var X W\nW -> X\n", OrderViolation, 2),
    ("var A B\nA -> B\nA -> C\n", UnknownVariable, 3),
    ("var A A\n", DuplicateVariable, 1),
    ("A -> B\nvar A B\n", MissingVarLine, 1),
    ("var A B\nvar A B\n", ModelSyntaxError, 2),
    ("var A B\nA => B\n", ModelSyntaxError, 2),
    ("var\n", ModelSyntaxError, 1),
])
def test_parse_errors_carry_lines(text, err, line):
    with pytest.raises(err) as info:
        parse_model(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_missing_var_line():
    with pytest.raises(MissingVarLine):
        parse_model("# nothing\n")


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 12))
@settings(max_examples=150, deadline=None)
def test_serialize_round_trip(seed, n):
    d = random_diagram(np.random.default_rng(seed), n)
    text = serialize_model(d)
    assert parse_model(text).diagram == d
    assert serialize_model(parse_model(text).diagram) == text


def test_covariance_reorder():
    text = "Y,X,Z\n1,0.8,0.4\n0.8,1,0.8\n0.4,0.8,1\n"
    cov = parse_covariance(text, ["Z", "X", "Y"])
    assert cov.labels == ("Z", "X", "Y")
    assert cov.values[0, 2] == 0.4 and cov.values[0, 1] == 0.8


@pytest.mark.parametrize("text, err", [
    ("A,B\n1,0.5\n0.4,1\n", NotSymmetric),
    ("A,C\n1,0\n0,1\n", UnknownLabel),
    ("A,B,C\n1,0,0\n0,1,0\n0,0,1\n", DimensionMismatch),
    ("A,B\n1,0\n", DimensionMismatch),
    ("A,B\n1,x\nx,1\n", DimensionMismatch),
    ("", DimensionMismatch),
])
def test_covariance_errors(text, err):
    with pytest.raises(err):
        parse_covariance(text, ["A", "B"])


def test_text_report_two_route():
    d = two_route()
    assert render_report(identify_all(d), d) == (
        "IDENTIFIED c_{W,X} = b(W,X)\n"
        "UNDECIDED c_{Z,X}\n"
        "IDENTIFIED c_{Y,W} = b(Y,W|X,Z) + b(Y,X|W,Z) / b(W,X)\n"
        "IDENTIFIED c_{Y,Z} = b(Y,Z|X,W)\n"
        "CONSTRAINTS\n"
        "  (none)\n"
    )
    assert render_report([], d) == ""


def test_json_report_round_trip():
    d = parse_model(INSTRUMENT_TEXT).diagram
    results = identify_all(d)
    text = render_report(results, d, "json")
    data = json.loads(text)
    assert json.dumps(data, indent=2, sort_keys=True) + "\n" == text
    (entry,) = [e for e in data if e["target"] == "Y"]
    assert entry["status"] == "Identified"
    assert from_json(entry["formula"], d.variables) == results[1].coefficients[1]
    assert report_json(results, d) == data


def test_two_route_text_parses():
    assert parse_model(TWO_ROUTE_TEXT).diagram == two_route()
