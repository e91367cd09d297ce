from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattes.core import InadmissiblePoint, MarkedPoint
from lattes.parse import ParseError, format_marked_point, parse_marked_point, parse_rational_function


def _eval(n, d, t):
    num = sum(c * t ** k for k, c in enumerate(n))
    den = sum(c * t ** k for k, c in enumerate(d))
    return num / den


@pytest.mark.parametrize("text,value_at_5", [
    ("2", 2),
    ("-1", -1),
    ("1/2", Fraction(1, 2)),
    ("t+2", 7),
    ("(t+1)/(t-3)", 3),
    ("t^2 - 3*t + 1/(t+1)", Fraction(61, 6)),
    ("-(t-1)^3", -64),
    ("+t*t/2", Fraction(25, 2)),
])
def test_values(text, value_at_5):
    n, d = parse_rational_function(text)
    assert _eval(n, d, Fraction(5)) == value_at_5


@pytest.mark.parametrize("text,reason", [
    ("", "empty expression"),
    ("1/0", "division by zero"),
    ("t/(t-t)", "division by zero"),
    ("t^2^3", "chained exponents need parentheses"),
    ("t^-1", "exponent must be a nonnegative integer literal"),
    ("t^x", "unexpected character"),
    ("(t+1", "expected ')' before end of input"),
    ("t+", "unexpected end of input"),
    ("t t", "unexpected 't'"),
    ("t^1000", "exponent larger than"),
])
def test_errors(text, reason):
    with pytest.raises(ParseError) as ei:
        parse_rational_function(text)
    assert reason in ei.value.reason
    assert str(ei.value).startswith(f"syntax error at position {ei.value.position}")


def test_error_position():
    with pytest.raises(ParseError) as ei:
        parse_rational_function("(t + 1) * $")
    assert ei.value.position == 10


@pytest.mark.parametrize("text", ["t", "2*t/2", "0", "1", "t/t"])
def test_inadmissible(text):
    with pytest.raises(InadmissiblePoint):
        parse_marked_point(text)


_coef = st.fractions(min_value=-20, max_value=20, max_denominator=7)


@settings(max_examples=60, deadline=None)
@given(st.lists(_coef, min_size=1, max_size=4), st.lists(_coef, min_size=1, max_size=3))
def test_round_trip(num, den):
    if not any(den):
        return
    try:
        c = MarkedPoint.from_rational_lists(num, den)
    except InadmissiblePoint:
        return
    again = parse_marked_point(format_marked_point(c))
    assert again == c
