from pathlib import Path

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from linfdc.config import SpecError, format_spec, load_spec, parse_expr, parse_spec
from oracles import T, same_fraction, sym_ratfunc

SPECS = Path(__file__).resolve().parent.parent / "demos" / "specs"

MINIMAL = """\
[group]
p = 2
n = 2
[generators]
[[t, 0], [0, 1]]
[norms]
t_adic
"""


def test_expression_examples():
    t = parse_expr("t", 3)
    assert parse_expr("(t + 1)^2", 3) == t * t + 2 * t + 1
    assert parse_expr("1/t", 3) == t.inverse()
    assert parse_expr("t^-2", 3) == t.inverse() ** 2
    assert parse_expr("-t", 3) == 2 * t
    assert parse_expr("5", 3) == parse_expr("2", 3)


@settings(max_examples=60, deadline=None)
@given(
    a=st.integers(0, 4), b=st.integers(1, 4), k=st.integers(0, 3), c=st.integers(0, 4),
    p=st.sampled_from([2, 3, 5]),
)
def test_expressions_against_sympy(a, b, k, c, p):
    text = f"({a}*t^{k} + {c}) / (t + {b})"
    got = sym_ratfunc(parse_expr(text, p))
    num = sympy.Poly(a * T**k + c, T, modulus=p)
    den = sympy.Poly(T + b, T, modulus=p)
    assert same_fraction(got, (num, den))


@pytest.mark.parametrize(
    "text, where",
    [
        ("t +", "column"),
        ("1/0", "division by zero"),
        ("0^-1", "negative power"),
        ("t $ 1", "unexpected character"),
    ],
)
def test_expression_errors_are_located(text, where):
    with pytest.raises(SpecError) as err:
        parse_expr(text, 2, line=4, col=10)
    assert err.value.line == 4 and where in str(err.value)


def test_minimal_spec_defaults():
    spec = parse_spec(MINIMAL)
    assert spec.p == 2 and spec.n == 2
    assert [name for name, _ in spec.generators] == ["g0"]
    assert spec.radius == 2 and spec.scales == [1, 2, 4]


@pytest.mark.parametrize("name", ["heisenberg.spec", "gl2_f3.spec"])
def test_demo_specs_round_trip(name):
    spec = load_spec(SPECS / name)
    again = parse_spec(format_spec(spec))
    assert again == spec and again.digest() == spec.digest()
    assert format_spec(again) == format_spec(spec)


@pytest.mark.parametrize(
    "edit, line, message",
    [
        (lambda s: s.replace("p = 2", "p = 4"), 2, "prime"),
        (lambda s: s.replace("[[t, 0], [0, 1]]", "[[0, 0], [0, 1]]"), 5, "singular"),
        (lambda s: s.replace("[[t, 0], [0, 1]]", "[[t, 0]]"), 5, "2x2"),
        (lambda s: s.replace("t_adic", "adic"), 7, "t_adic"),
        (lambda s: s + "[subgroup F]\n[[1, 1], [0, 1]]\n", 8, "closed"),
        (lambda s: s + "[series s]\nrelation 1 2\n", 9, "relation before any factor"),
        (lambda s: s + "[window]\nradius = -1\n", 9, "nonnegative"),
        (lambda s: s + "[bogus]\n", 8, "unknown section"),
        (lambda s: "x = 1\n" + s, 1, "before the first section"),
    ],
)
def test_spec_errors_are_located(edit, line, message):
    with pytest.raises(SpecError) as err:
        parse_spec(edit(MINIMAL))
    assert err.value.line == line, str(err.value)
    assert message in str(err.value)


def test_place_norm_and_named_generators():
    text = MINIMAL.replace("t_adic", "place t^2 + t + 1\ndegree").replace(
        "[[t, 0], [0, 1]]", "u = [[1, 1/(t+1)], [0, 1]]"
    )
    spec = parse_spec(text)
    assert [s.label() for s in spec.norms][1] == "degree"
    assert spec.generators[0][0] == "u"
    with pytest.raises(SpecError):
        parse_spec(MINIMAL.replace("t_adic", "place t^2 + 1"))
