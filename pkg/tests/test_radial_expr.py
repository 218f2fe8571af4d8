import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wml.errors import DomainError, ExprSyntaxError, UnknownIdentifier
from wml.radial_expr import eval_jet, log_jet, log_value, parse_expr


def fd_derivs(fn, r, h=1e-5):
    """Central finite differences for the first two derivatives."""
    d1 = (fn(r + h) - fn(r - h)) / (2 * h)
    d2 = (fn(r + h) - 2 * fn(r) + fn(r - h)) / h ** 2
    return d1, d2


CASES = [
    ("r^2", lambda r: r ** 2),
    ("sinh(r)", math.sinh),
    ("r*exp(-r^2/2)", lambda r: r * math.exp(-r ** 2 / 2)),
    ("log(1 + r^2)", lambda r: math.log(1 + r ** 2)),
    ("sqrt(1 + r^2)", lambda r: math.sqrt(1 + r ** 2)),
    ("tanh(r)/r", lambda r: math.tanh(r) / r),
    ("(1 + r)^2.5", lambda r: (1 + r) ** 2.5),
    ("cosh(2*r) - 1", lambda r: math.cosh(2 * r) - 1),
]


@pytest.mark.parametrize("text,fn", CASES)
def test_value_matches_python(text, fn):
    f = parse_expr(text)
    for r in (0.3, 1.0, 2.7):
        assert f(r) == pytest.approx(fn(r), rel=1e-12)


@pytest.mark.parametrize("text,fn", CASES)
def test_jet_matches_finite_differences(text, fn):
    f = parse_expr(text)
    for r in (0.5, 1.3, 3.1):
        j = f.jet(r)
        d1, d2 = fd_derivs(fn, r)
        assert j.d1 == pytest.approx(d1, rel=1e-5, abs=1e-7)
        assert j.d2 == pytest.approx(d2, rel=1e-4, abs=1e-4)


def test_jet_vectorized_agrees_with_scalar():
    f = parse_expr("r*exp(-(1 + r^2)^1.5)")
    rs = np.array([0.2, 1.0, 4.0])
    jv = f.jet(rs)
    for i, r in enumerate(rs):
        js = f.jet(float(r))
        assert jv.value[i] == pytest.approx(js.value, rel=1e-14)
        assert jv.d1[i] == pytest.approx(js.d1, rel=1e-14)
        assert jv.d2[i] == pytest.approx(js.d2, rel=1e-14)


def test_canonical_roundtrip():
    for text, _fn in CASES:
        f = parse_expr(text)
        g = parse_expr(f.canonical())
        assert g.canonical() == f.canonical()
        assert g(1.7) == f(1.7)


def test_precedence_and_unary_minus():
    assert parse_expr("-r^2")(3.0) == -9.0          # power binds tighter
    assert parse_expr("2^3^2")(1.0) == 512.0        # right associative
    assert parse_expr("1 - 2 - 3")(1.0) == -4.0     # left associative
    assert parse_expr("2*r + 1")(2.0) == 5.0


def test_syntax_errors():
    for bad in ("", "1 +", "(r", "r**2", "sin()", "2r"):
        with pytest.raises((ExprSyntaxError, UnknownIdentifier)):
            parse_expr(bad)
    with pytest.raises(UnknownIdentifier):
        parse_expr("foo(r)")


def test_domain_errors():
    with pytest.raises(DomainError):
        parse_expr("log(r - 2)").jet(1.0)
    with pytest.raises(DomainError):
        parse_expr("sqrt(-r)").jet(2.0)


def test_log_value_beyond_float_range():
    # e^{r^3} overflows float64 past r ~ 9; the structural log does not
    f = parse_expr("exp(r^3)")
    assert log_value(f.ast, 100.0) == pytest.approx(1e6, rel=1e-12)
    g = parse_expr("r*exp((1 + r^2)^1.5 - 1)")
    lv = float(log_value(g.ast, 50.0))
    expect = math.log(50.0) + (1 + 50.0 ** 2) ** 1.5 - 1
    assert lv == pytest.approx(expect, rel=1e-12)


def test_log_jet_matches_direct_jet_at_moderate_radius():
    g = parse_expr("r*exp(1 - (1 + r^2)^1.5)")
    for r in (0.5, 2.0, 5.0):
        lj = log_jet(g.ast, r)
        j = g.jet(r)
        assert lj.value == pytest.approx(math.log(j.value), rel=1e-12)
        assert lj.d1 == pytest.approx(j.d1 / j.value, rel=1e-10)


def test_log_jet_survives_underflow():
    # at r = 40 both g and g' underflow to 0, but g'/g is perfectly finite
    g = parse_expr("r*exp(1 - (1 + r^2)^1.5)")
    lj = log_jet(g.ast, 40.0)
    assert np.isfinite(lj.value) and np.isfinite(lj.d1)
    # d/dr log g = 1/r - 3 r sqrt(1 + r^2)
    expect = 1 / 40.0 - 3 * 40.0 * math.sqrt(1 + 40.0 ** 2)
    assert lj.d1 == pytest.approx(expect, rel=1e-10)


@given(st.floats(min_value=0.1, max_value=5.0),
       st.floats(min_value=-2.0, max_value=2.0),
       st.floats(min_value=0.1, max_value=2.0))
@settings(max_examples=40, deadline=None)
def test_product_rule_property(r, a, b):
    """jet of u*v obeys the product rule for randomized parameters."""
    u = parse_expr(f"exp({a}*r)")
    v = parse_expr(f"(1 + r^2)^{b}")
    w = parse_expr(f"exp({a}*r)*(1 + r^2)^{b}")
    ju, jv, jw = u.jet(r), v.jet(r), w.jet(r)
    assert jw.value == pytest.approx(ju.value * jv.value, rel=1e-12)
    assert jw.d1 == pytest.approx(ju.d1 * jv.value + ju.value * jv.d1,
                                  rel=1e-11)
    assert jw.d2 == pytest.approx(
        ju.d2 * jv.value + 2 * ju.d1 * jv.d1 + ju.value * jv.d2, rel=1e-10)


@given(st.floats(min_value=0.2, max_value=4.0))
@settings(max_examples=40, deadline=None)
def test_eval_jet_helper(r):
    j = eval_jet(parse_expr("sinh(r)"), r)
    assert j.value == pytest.approx(math.sinh(r), rel=1e-13)
    assert j.d2 == pytest.approx(math.sinh(r), rel=1e-10)
