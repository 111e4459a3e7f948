import os
import sys
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qmahg.engine.quaternion import (
    ONE,
    QI,
    QJ,
    QK,
    HyperhermitianMatrix,
    QuatMatrix,
    Quaternion,
    eigen_hyperhermitian,
    is_nonneg,
    mixed_discriminant,
    moore_det,
    random_hyperhermitian,
    random_quat_matrix,
    random_quaternion,
    real_rep,
    tau,
)
from qmahg.errors import ValidationError


def test_hamilton_units():
    assert QI * QJ == QK
    assert QJ * QK == QI
    assert QK * QI == QJ
    assert QI * QI == -ONE
    assert QJ * QI == -QK


def test_real_representation():
    assert np.array_equal(real_rep(ONE), np.eye(4))
    J = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
    assert np.array_equal(real_rep(QI), -J)
    rng = np.random.default_rng(4)
    p, q = random_quaternion(rng), random_quaternion(rng)
    assert np.allclose(real_rep(p * q), real_rep(p) @ real_rep(q))
    assert np.allclose(real_rep(p.conj()), real_rep(p).T)
    hat = np.array(q.components(), dtype=float)
    assert np.allclose(real_rep(p) @ hat, np.array((p * q).components(), dtype=float))


def test_exact_inverse():
    rng = np.random.default_rng(1)
    q = random_quaternion(rng, exact=True)
    while q.is_zero():
        q = random_quaternion(rng, exact=True)
    assert q * q.inverse() == Quaternion(1, 0, 0, 0)
    with pytest.raises(ValidationError):
        Quaternion(0, 0, 0, 0).inverse()


def test_matrix_product_matches_tau():
    rng = np.random.default_rng(2)
    A = random_quat_matrix(2, 3, rng)
    B = random_quat_matrix(3, 2, rng)
    assert np.allclose(tau(A @ B), tau(A) @ tau(B), atol=1e-12)


def test_exact_matrix_product_stays_exact():
    rng = np.random.default_rng(3)
    A = random_quat_matrix(2, 2, rng, exact=True)
    B = random_quat_matrix(2, 2, rng, exact=True)
    product = A @ B
    assert product.exact
    assert np.allclose(tau(product), tau(A) @ tau(B), atol=1e-12)


def test_moore_det_of_two_by_two():
    q = Quaternion(Fraction(1, 2), 1, -1, Fraction(3, 4))
    M = HyperhermitianMatrix(QuatMatrix.from_entries([[Quaternion(2), q], [q.conj(), Quaternion(3)]]))
    assert moore_det(M) == 6 - q.norm2()
    assert moore_det(M.to_float()) == pytest.approx(float(6 - q.norm2()), rel=1e-12)


def test_moore_det_zero_diagonal_pivot():
    M = HyperhermitianMatrix(QuatMatrix.from_entries([[Quaternion(0), Quaternion(1)],
                                                      [Quaternion(1), Quaternion(0)]]))
    assert moore_det(M) == -1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_moore_det_of_complex_hermitian_is_classical(n):
    rng = np.random.default_rng(10 + n)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = a + a.conj().T
    M = HyperhermitianMatrix.from_complex_hermitian(h)
    classical = float(np.real(np.linalg.det(h)))
    assert moore_det(M) == pytest.approx(classical, rel=1e-9, abs=1e-9)


def test_exact_and_float_determinants_agree():
    rng = np.random.default_rng(4)
    M = random_hyperhermitian(3, rng, exact=True)
    assert float(moore_det(M)) == pytest.approx(moore_det(M.to_float()), rel=1e-9, abs=1e-9)


def test_not_hyperhermitian_is_rejected():
    with pytest.raises(ValidationError):
        HyperhermitianMatrix(QuatMatrix.from_entries([[Quaternion(1), Quaternion(0, 1)],
                                                      [Quaternion(0, 1), Quaternion(1)]]))
    with pytest.raises(ValidationError):
        HyperhermitianMatrix(np.zeros((2, 3, 4)))


def test_unitary_diagonalizes():
    rng = np.random.default_rng(5)
    M = random_hyperhermitian(3, rng)
    nu, U = eigen_hyperhermitian(M, with_unitary=True)
    D = U.adjoint() @ M @ U
    expected = np.zeros((3, 3, 4))
    for l in range(3):
        expected[l, l, 0] = nu[l]
    assert np.allclose(D.data, expected, atol=1e-9)
    assert np.all(np.diff(nu) >= -1e-12)


def test_mixed_discriminant_of_equal_arguments():
    rng = np.random.default_rng(6)
    M = random_hyperhermitian(2, rng, exact=True)
    assert mixed_discriminant(M, M) == moore_det(M)
    with pytest.raises(ValidationError):
        mixed_discriminant(M)


def test_nonnegativity():
    rng = np.random.default_rng(7)
    assert is_nonneg(random_hyperhermitian(3, rng, nonneg=True))
    assert not is_nonneg(HyperhermitianMatrix.from_complex_hermitian(-np.eye(2)))
