import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qmahg.engine.exterior import Form, beta
from qmahg.engine.fields import (
    FirstOrderOperator,
    VectorFieldId,
    apply,
    apply_word,
    bracket_table,
    commutator,
    expected_bracket,
)
from qmahg.engine.group import squared_norm
from qmahg.engine.operators import d0, d1, d_alpha, delta_AB, laplacian
from qmahg.engine.polynomial import PolyScalar, PolySpace, QuaternionPoly, coordinates, random_polynomial
from qmahg.errors import ValidationError

X = VectorFieldId.X
Z = VectorFieldId.Z


def test_frame_fields_on_coordinates():
    space = PolySpace.group(1)
    x1, x2, x3, x4, t = coordinates(space)
    assert apply(X(1), t) == x2 * -2
    assert apply(X(2), t) == x1 * 2
    assert apply(X(3), x3) == 1


def test_frame_bracket():
    space = PolySpace.group(1)
    assert commutator(X(1), X(2), space).dt_multiple() == 4
    assert commutator(X(2), X(1), space).dt_multiple() == -4
    assert commutator(X(1), X(3), space).is_zero()
    assert commutator(X(1), VectorFieldId.Dt(), space).is_zero()


@pytest.mark.parametrize("n", [1, 2])
def test_bracket_table_matches_closed_form(n):
    space = PolySpace.group(n)
    for (f, g), op in bracket_table(n).items():
        assert op == FirstOrderOperator.dt(space, expected_bracket(f, g, n)), f"[{f}, {g}]"


def test_z_bracket_value():
    n = 2
    space = PolySpace.group(n)
    assert commutator(Z(0, 0), Z(n, 1), space).dt_multiple() == -8j
    assert commutator(Z(n, 0), Z(0, 1), space).dt_multiple() == -8j
    assert commutator(Z(0, 1), Z(n, 0), space).dt_multiple() == 8j
    assert commutator(Z(0, 0), Z(1, 1), space).is_zero()


def test_out_of_range_field():
    u = PolyScalar.variable(PolySpace.group(1), "x1")
    with pytest.raises(ValidationError):
        apply(X(5), u)
    with pytest.raises(ValidationError):
        apply(Z(2, 0), u)


def test_qbar_of_coordinate():
    space = PolySpace.group(1)
    x1, x2 = coordinates(space)[:2]
    z = PolyScalar.zero(space)
    assert apply(VectorFieldId.Qbar(0), x1) == QuaternionPoly((PolyScalar.constant(space, 1), z, z, z))
    assert apply(VectorFieldId.Q(0), x2) == QuaternionPoly((z, PolyScalar.constant(space, -1), z, z))


def test_apply_word_order():
    space = PolySpace.group(1)
    x1, x2, _, _, t = coordinates(space)
    u = x1 * t
    assert apply_word([X(2), X(1)], u) == apply(X(2), apply(X(1), u))


@pytest.mark.parametrize("seed", range(3))
def test_d_operators_square_to_zero_and_anticommute(seed):
    rng = np.random.default_rng(seed)
    space = PolySpace.group(1)
    u = random_polynomial(space, 3, rng, real=False)
    assert d0(d0(u)).is_zero()
    assert d1(d1(u)).is_zero()
    assert (d0(d1(u)) + d1(d0(u))).is_zero()


def test_d_alpha_guards():
    space = PolySpace.group(1)
    top = Form(1, 2, {(0, 1): PolyScalar.variable(space, "x1")})
    with pytest.raises(ValidationError):
        d0(top)
    with pytest.raises(ValidationError):
        d_alpha(PolyScalar.variable(space, "x1"), 2)


@pytest.mark.parametrize("n", [1, 2])
def test_laplacian_of_squared_norm(n):
    x2 = squared_norm(PolySpace.group(n))
    assert laplacian(x2) == beta(n) * 8


def test_laplacian_coefficients_are_delta_ab():
    rng = np.random.default_rng(4)
    space = PolySpace.group(2)
    u = random_polynomial(space, 3, rng)
    L = laplacian(u)
    for A, B in [(0, 1), (0, 2), (1, 3)]:
        assert L.coefficient((A, B)) == delta_AB(u, A, B) * 2
