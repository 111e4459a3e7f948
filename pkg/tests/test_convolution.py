import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qmahg.engine.convolution import (
    Mollifier,
    SampledField,
    bump,
    convolve,
    field_derivative,
    poly_field,
    sampled_hessian,
)
from qmahg.engine.fields import VectorFieldId
from qmahg.engine.group import dilate_array, squared_norm
from qmahg.engine.polynomial import PolySpace, coordinates
from qmahg.errors import ValidationError
from qmahg.models import BoxDomain, GroupPoint


@pytest.fixture
def norm_field():
    return poly_field(squared_norm(PolySpace.group(1, "float")))


def test_bump_vanishes_outside_unit_ball():
    P = np.array([[0, 0, 0, 0, 0], [1, 0, 0, 0, 0], [0, 0, 0, 0, 2.0], [0.5, 0, 0, 0, 0]], dtype=float)
    values = bump(P)
    assert values[0] == 1.0
    assert values[1] == 0.0 and values[2] == 0.0
    assert 0 < values[3] < 1


def test_mollifier_weights_are_normalized():
    moll = Mollifier(1, 0.25, samples_log2=10, seed=3)
    assert moll.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(moll.weights > 0)
    assert np.all(bump(dilate_array(4.0, moll.points)) > 0)
    with pytest.raises(ValidationError):
        Mollifier(1, 0.0)
    with pytest.raises(ValidationError):
        Mollifier(1, 0.1, samples_log2=0)


def test_convolution_preserves_constants():
    field = SampledField(1, lambda P: np.full(P.shape[0], 3.5), label="3.5")
    smooth = convolve(field, 0.2, samples_log2=8)
    assert np.allclose(smooth(np.zeros((3, 5))), 3.5)


def test_field_derivatives_of_polynomials():
    x1, x2, x3, x4, t = coordinates(PolySpace.group(1, "float"))
    F = poly_field(t + x1 * x1)
    xi = GroupPoint(x=(0.3, -0.2, 0.1, 0.5), t=0.4)
    X = VectorFieldId.X
    assert field_derivative(F, [X(1)], xi)[0] == pytest.approx(2 * 0.3 + 2 * 0.2, abs=1e-6)
    assert field_derivative(F, [VectorFieldId.Dt()], xi)[0] == pytest.approx(1.0, abs=1e-6)
    assert field_derivative(F, [X(1), X(1)], xi)[0] == pytest.approx(2.0, abs=1e-4)
    with pytest.raises(ValidationError):
        field_derivative(F, [X(1)] * 3, xi)
    with pytest.raises(ValidationError):
        field_derivative(F, [VectorFieldId.Z(0, 0)], xi)


def test_sampled_hessian_of_squared_norm(norm_field):
    H = sampled_hessian(norm_field, GroupPoint(x=(0.2, 0.1, -0.3, 0.4), t=0.1))
    expected = np.zeros((1, 1, 4))
    expected[0, 0, 0] = 8.0
    assert np.allclose(H.data, expected, atol=1e-4)


def test_regularized_squared_norm_keeps_its_hessian(norm_field):
    smooth = convolve(norm_field, 0.3, samples_log2=8)
    H = sampled_hessian(smooth, GroupPoint(x=(0.1, 0.0, 0.2, -0.1), t=0.0))
    assert H.data[0, 0, 0] == pytest.approx(8.0, abs=1e-3)
    assert np.allclose(H.data[0, 0, 1:], 0.0, atol=1e-3)


def test_support_must_contain_the_enlarged_region():
    cube = BoxDomain.cube(GroupPoint.origin(1), 1.0)
    field = poly_field(squared_norm(PolySpace.group(1, "float")), cube)
    with pytest.raises(ValidationError):
        convolve(field, 0.1, region=cube)
    inner = BoxDomain.cube(GroupPoint.origin(1), 0.5)
    smooth = convolve(field, 0.1, region=inner, samples_log2=6)
    assert smooth.domain == inner
    with pytest.raises(ValidationError):
        smooth(np.zeros((1, 9)))
