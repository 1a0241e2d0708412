from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubiceq.errors import ArgumentError, ResourceError
from cubiceq.polynomial import MAX_DEGREE, BivariatePolynomial as P

small = st.integers(-5, 5)
coeffs = st.tuples(small, small)
polys = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), coeffs, max_size=5).map(P)
points = st.tuples(st.fractions(-3, 3, max_denominator=7), st.fractions(-3, 3, max_denominator=7))


def test_zero_coefficients_are_dropped():
    assert P({(1, 0): (0, 0)}).is_zero()
    assert (P.variable("u") - P.variable("u")).is_zero()


def test_i_squared_is_minus_one():
    i = P.constant((0, 1))
    assert i * i == P.constant(-1)
    assert P.constant(1).times_i(2) == -1


def test_binomial_expansion():
    p = (P.variable("u") + P.variable("v")) ** 3
    assert p.terms == {(3, 0): (1, 0), (2, 1): (3, 0), (1, 2): (3, 0), (0, 3): (1, 0)}


def test_float_input_is_exact_binary_value():
    c = P.constant(0.3).constant_value()[0]
    assert c == Fraction(0.3) and c != Fraction(3, 10)


def test_decimal_string_is_exact():
    assert P.parse("0.25") == P.constant(Fraction(1, 4))


@pytest.mark.parametrize("text", ["1 - u^2", "-i*u*v", "(1/2+3*i)*u^2*v", "u + v", "0"])
def test_parse_str_round_trip(text):
    p = P.parse(text)
    assert P.parse(str(p)) == p


@pytest.mark.parametrize("text", ["u^", "2**u", "(u", "w", "u^-1"])
def test_parse_errors(text):
    with pytest.raises(ArgumentError):
        P.parse(text)


def test_degree_guard():
    with pytest.raises(ResourceError):
        P.variable("u") ** (MAX_DEGREE + 1)


def test_negative_power_rejected():
    with pytest.raises(ArgumentError):
        P.variable("u") ** -1


def test_substitute_composes():
    p = P.parse("u^2 + v")
    assert p.substitute(u=P.parse("u + 1")) == P.parse("u^2 + 2*u + 1 + v")
    assert p.substitute(u=2, v=3) == P.constant(7)


@settings(max_examples=60, deadline=None)
@given(a=polys, b=polys, c=polys)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@settings(max_examples=60, deadline=None)
@given(a=polys, b=polys, pt=points)
def test_evaluation_is_a_homomorphism(a, b, pt):
    u, v = pt
    prod = P.coerce(a.evaluate_exact(u, v)) * P.coerce(b.evaluate_exact(u, v))
    assert (a * b).evaluate_exact(u, v) == prod.constant_value()
    assert abs((a + b).evaluate(float(u), float(v)) - a.evaluate(float(u), float(v)) - b.evaluate(float(u), float(v))) < 1e-9


@settings(max_examples=40, deadline=None)
@given(a=polys)
def test_conjugate_is_involution(a):
    assert a.conjugate().conjugate() == a
