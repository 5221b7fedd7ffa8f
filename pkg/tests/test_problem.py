import pytest

from tripleivp import TripleIntegralProblem, derivatives, validate
from tripleivp.errors import BoundsError, VariableScopeError
from tripleivp.expr import Constant, parse, simplify

LIMIT_FIELDS = ("y0p", "y1p", "y0pp", "y1pp", "z0x", "z1x", "z0y", "z1y", "z0xx", "z1xx")


def test_example_is_valid(example):
    assert validate(example) is example


def test_strings_are_parsed():
    p = TripleIntegralProblem("x*y", "0", "1", "0", "y", 0, 1)
    assert p.f == parse("x*y")
    assert p.r_closed is None


def test_self_referential_limit():
    p = TripleIntegralProblem("sin(x+y+z)", "0", "x", "0", "x+y+z", 1, 5)
    with pytest.raises(VariableScopeError) as info:
        validate(p)
    assert info.value.field == "z1"
    assert info.value.variable == "z"


@pytest.mark.parametrize("field, text, var", [("y0", "y", "y"), ("y1", "x+z", "z"), ("z0", "z", "z")])
def test_scope_errors(field, text, var):
    kw = dict(f="1", y0="0", y1="x", z0="0", z1="x+y", x0=0, x_end=1)
    kw[field] = text
    with pytest.raises(VariableScopeError) as info:
        validate(TripleIntegralProblem(**kw))
    assert (info.value.field, info.value.variable) == (field, var)


def test_closed_form_r_must_depend_on_x_only():
    with pytest.raises(VariableScopeError):
        validate(TripleIntegralProblem("1", "0", "x", "0", "x", 0, 1, r_closed="y"))


def test_reversed_bounds():
    with pytest.raises(BoundsError):
        validate(TripleIntegralProblem("1", "0", "x", "0", "x", 5, 1))


def test_empty_outer_interval_accepted():
    validate(TripleIntegralProblem("1", "0", "x", "0", "x", 2, 2))


def test_example_derivatives(example):
    b = derivatives(example)
    s = {name: simplify(getattr(b, name)) for name in LIMIT_FIELDS}
    assert s["y1p"] == Constant(1.0)
    assert s["y0p"] == Constant(0.0)
    assert s["z1x"] == Constant(1.0)
    assert s["z1y"] == Constant(1.0)
    assert simplify(b.fx) == parse("cos(x+y+z)")


def test_derivatives_idempotent(example):
    a, b = derivatives(example), derivatives(example)
    for name in a.__dataclass_fields__:
        assert simplify(getattr(a, name)) == simplify(getattr(b, name))


@pytest.mark.parametrize("f", ["sin(x*y*z)", "exp(x-y)+z^2", "1"])
def test_constant_limits_have_zero_derivatives(f):
    p = TripleIntegralProblem(f, "0.5", "2", "-1", "pi", 0, 1)
    b = derivatives(p)
    for name in LIMIT_FIELDS:
        assert simplify(getattr(b, name)) == Constant(0.0), name
