import os
import sys
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qmahg.engine.parser import parse_polynomial
from qmahg.engine.polynomial import PolyScalar, PolySpace, QuaternionPoly, coordinates, random_polynomial
from qmahg.engine.quaternion import QI, QJ
from qmahg.errors import ExpressionSyntaxError, ValidationError


@pytest.fixture
def space():
    return PolySpace.group(1, "rational")


def test_group_space_names():
    s = PolySpace.group(2)
    assert s.names == ("x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "t")
    assert s.n == 2 and s.t_index == 8
    with pytest.raises(ValidationError):
        PolySpace.group(0)


def test_exact_evaluation(space):
    x1, x2, x3, x4, t = coordinates(space)
    u = x1 * x1 * Fraction(1, 3) + x2 * t - 2
    value = u.evaluate((Fraction(1, 2), 3, 0, 0, Fraction(-1, 5)))
    assert value == Fraction(1, 12) - Fraction(3, 5) - 2
    assert isinstance(value, Fraction)


def test_evaluate_many_matches_pointwise(space):
    rng = np.random.default_rng(0)
    u = random_polynomial(space, 3, rng)
    points = rng.uniform(-1, 1, size=(5, space.ngens))
    many = u.evaluate_many(points)
    for point, value in zip(points, many):
        assert value == pytest.approx(float(u.evaluate(tuple(point))), rel=1e-12, abs=1e-12)


def test_complex_parts(space):
    x1 = PolyScalar.variable(space, "x1")
    u = x1 * (2 + 3j)
    assert not u.is_real()
    assert u.real_part() == x1 * 2
    assert u.imag_part() == x1 * 3
    assert u.conjugate() == x1 * (2 - 3j)


def test_degree_guard(space):
    x1 = PolyScalar.variable(space, "x1")
    with pytest.raises(ValidationError):
        x1 ** 17
    with pytest.raises(ValidationError):
        x1 ** 9 * x1 ** 8


def test_mixing_spaces_is_rejected():
    a = PolyScalar.variable(PolySpace.group(1), "x1")
    b = PolyScalar.variable(PolySpace.group(2), "x1")
    with pytest.raises(ValidationError):
        a + b


def test_compose_substitutes(space):
    x1, x2, x3, x4, t = coordinates(space)
    u = x1 * x2 + t
    v = u.compose([x2, x1, x3, x4, t * 2])
    assert v == x1 * x2 + t * 2


def test_quaternion_polynomial_product(space):
    x1 = PolyScalar.variable(space, "x1")
    f = QuaternionPoly.from_scalar(x1)
    g = QI * f * QJ
    z = PolyScalar.zero(space)
    assert g == QuaternionPoly((z, z, z, x1))


def test_parse_sum_of_squares(space):
    x1, x2, x3, x4, t = coordinates(space)
    u = parse_polynomial("x1^2+x2^2+x3^2+x4^2", space)
    assert u == x1 ** 2 + x2 ** 2 + x3 ** 2 + x4 ** 2


def test_parse_rational_and_complex_literals(space):
    u = parse_polynomial("1/3*x1 - (1+2*i)*t", space)
    assert u.coefficient((1, 0, 0, 0, 0)) == Fraction(1, 3)
    assert u.coefficient((0, 0, 0, 0, 1)) == complex(-1, -2)


def test_parse_unary_signs_and_parentheses(space):
    x1, x2, _, _, t = coordinates(space)
    assert parse_polynomial("--x1 - -(x2 + t)^2", space) == x1 + (x2 + t) ** 2


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_printed_polynomials_parse_back(space, seed):
    rng = np.random.default_rng(seed)
    u = random_polynomial(space, 3, rng, real=seed != 1)
    assert parse_polynomial(u.to_expression(), space) == u


@pytest.mark.parametrize("text", ["x1 +", "2x1", "y1 + x1", "x1/x2", "1/0", "(x1", ""])
def test_parse_errors(space, text):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_polynomial(text, space)
    assert info.value.line >= 1 and info.value.column >= 1


def test_parse_error_location(space):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_polynomial("x1 + y2", space)
    assert info.value.column == 6
    assert "y2" in info.value.message
