import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qmahg.engine.exterior import (
    Form,
    beta,
    complement,
    delta_n_coeff,
    elementary_strongly_positive,
    epsilon,
    is_real,
    omega_top,
    positivity_certificate_2kform,
    positivity_certificate_2nform,
    pullback,
    rho_j,
    strong_positivity_test_2form,
    two_form_from_matrix,
    wedge,
    wedge_power,
)
from qmahg.engine.quaternion import QuatMatrix
from qmahg.errors import ValidationError


def test_one_forms_anticommute():
    a = Form.basis(2, [0])
    b = Form.basis(2, [3])
    assert wedge(a, b) == -wedge(b, a)
    assert wedge(a, a).is_zero()


def test_add_term_sorts_with_sign():
    F = Form(2, 2)
    F.add_term((3, 1), 5)
    assert F.coefficient((1, 3)) == -5
    assert F.coefficient((3, 1)) == 5


@pytest.mark.parametrize("n", [1, 2, 3])
def test_beta_power_is_factorial_volume(n):
    assert delta_n_coeff(wedge_power(beta(n), n)) == math.factorial(n)
    assert delta_n_coeff(omega_top(n)) == 1


@pytest.mark.parametrize("indices", [(0,), (1, 2), (0, 3), (2,), (0, 1, 3)])
def test_epsilon_completes_the_volume(indices):
    n = 2
    I = Form.basis(n, indices, epsilon(indices, n))
    Ihat = Form.basis(n, complement(indices, n))
    assert delta_n_coeff(wedge(I, Ihat)) == 1


def test_degree_overflow_is_rejected():
    with pytest.raises(ValidationError):
        wedge(beta(1), beta(1))
    with pytest.raises(ValidationError):
        Form(1, 3)


def test_real_structure():
    assert rho_j(beta(2)) == beta(2)
    assert is_real(beta(2))
    assert not is_real(beta(2) * 1j)
    F = Form(2, 2, {(0, 1): 2 + 1j, (1, 3): -1j})
    assert rho_j(rho_j(F)) == F


def test_two_form_of_non_skew_matrix():
    with pytest.raises(ValidationError):
        two_form_from_matrix(np.eye(2))


def test_strong_positivity_of_beta():
    ok, nu = strong_positivity_test_2form(beta(2))
    assert ok
    assert np.allclose(nu, 0.5)
    ok, _ = strong_positivity_test_2form(-beta(2))
    assert not ok


def test_pullback_by_identity():
    F = beta(2)
    assert pullback(F, QuatMatrix.identity(2)) == F


def test_elementary_strongly_positive_volume():
    M = QuatMatrix.identity(1)
    assert positivity_certificate_2nform(elementary_strongly_positive(M))
    with pytest.raises(ValidationError):
        elementary_strongly_positive(QuatMatrix.zeros(1, 2))


def test_randomized_certificate():
    rng = np.random.default_rng(0)
    ok, worst = positivity_certificate_2kform(beta(2), rng, samples=8)
    assert ok and worst >= 0
    ok, worst = positivity_certificate_2kform(-beta(2), rng, samples=8)
    assert not ok and worst < 0


def test_json_round_trip_and_malformed_payload():
    F = Form(2, 2, {(0, 2): 1.5, (1, 3): -2j})
    assert Form.from_json(F.to_json()) == F
    with pytest.raises(ValidationError):
        Form.from_json({"n": 2, "degree": 2})
