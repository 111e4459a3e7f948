import logging
import math
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import qmahg.engine.hessian as hessian_module
from qmahg.engine.fields import VectorFieldId, apply_word
from qmahg.engine.group import random_group_point, squared_norm
from qmahg.engine.hessian import (
    HessianField,
    assemble_hessian,
    cf1_check,
    hessian_at,
    hessian_from_laplacian,
    horizontal_hessian,
    is_pluriharmonic,
    is_psh_poly,
    mixed_identity_sides,
    monge_ampere_sides,
    psh_violation,
    qma_density,
    random_psh_quadratic,
    telescoping_identity,
    verify_thm_1_4,
)
from qmahg.engine.operators import laplacian
from qmahg.engine.polynomial import PolySpace, coordinates, random_polynomial
from qmahg.errors import ValidationError
from qmahg.models import CF1Pair


@pytest.fixture
def rng():
    return np.random.default_rng(21)


@pytest.mark.parametrize("n", [1, 2])
def test_squared_norm_has_constant_density(n):
    u = squared_norm(PolySpace.group(n))
    origin = (0,) * (4 * n + 1)
    H = hessian_at(u, origin)
    for l in range(n):
        assert list(H.data[l, l]) == [8, 0, 0, 0]
    assert qma_density(u, origin) == 8 ** n
    lhs, rhs = monge_ampere_sides(u, origin)
    assert lhs == rhs == math.factorial(n) * 8 ** n


@pytest.mark.parametrize("n,degree", [(1, 3), (2, 2)])
def test_monge_ampere_identity_is_exact(rng, n, degree):
    space = PolySpace.group(n)
    u = random_polynomial(space, degree, rng, terms=8)
    xi = random_group_point(n, rng, exact=True).coords()
    lhs, rhs = monge_ampere_sides(u, xi)
    assert lhs == rhs
    assert verify_thm_1_4(u, xi) == 0.0


def test_mixed_identity_is_exact(rng):
    space = PolySpace.group(2)
    us = [random_polynomial(space, 2, rng, terms=8) for _ in range(2)]
    xi = random_group_point(2, rng, exact=True).coords()
    lhs, rhs = mixed_identity_sides(us, xi)
    assert lhs == rhs
    with pytest.raises(ValidationError):
        mixed_identity_sides(us[:1], xi)


@pytest.mark.parametrize("n", [1, 2])
def test_hessian_routes_agree(rng, n):
    u = random_polynomial(PolySpace.group(n), 3, rng)
    H = horizontal_hessian(u)
    assert H == hessian_from_laplacian(u)
    assert H.is_hyperhermitian()


def test_hessian_rejects_complex_polynomials():
    x1 = coordinates(PolySpace.group(1))[0]
    with pytest.raises(ValidationError):
        horizontal_hessian(x1 * 1j)


def test_assembled_hessian_matches_symbolic(rng):
    space = PolySpace.group(1, "float")
    u = random_polynomial(space, 3, rng)
    xi = tuple(float(c) for c in rng.uniform(-1, 1, size=5))
    X = VectorFieldId.X
    second = np.array([[float(apply_word([X(a + 1), X(b + 1)], u).evaluate(xi)) for b in range(4)]
                       for a in range(4)])
    dt = float(u.diff(space.t_index).evaluate(xi))
    assert np.allclose(assemble_hessian(second, dt).data, hessian_at(u, xi).data, atol=1e-9)


def test_random_psh_quadratics_are_psh(rng):
    space = PolySpace.group(2, "float")
    points = rng.uniform(-2, 2, size=(20, space.ngens))
    for _ in range(3):
        u = random_psh_quadratic(space, rng)
        assert is_psh_poly(u, points)
        assert np.all(HessianField(u).densities(points) >= -1e-9)


def test_negative_squared_norm_violates_psh(rng):
    space = PolySpace.group(1, "float")
    u = squared_norm(space) * -1
    points = rng.uniform(-1, 1, size=(4, space.ngens))
    violation = psh_violation(u, points)
    assert violation is not None and len(violation) == 5
    with pytest.raises(ValidationError):
        psh_violation(u, np.zeros((0, 5)))


def test_linear_functions_are_pluriharmonic():
    x1, x2, x3, x4, _ = coordinates(PolySpace.group(1))
    assert is_pluriharmonic(x1 * 3 - x4 + Fraction(1, 2))
    assert not is_pluriharmonic(x1 * x1 + x2 * x2)


def test_telescoping_identity_vanishes(rng):
    space = PolySpace.group(2)
    u = random_polynomial(space, 2, rng)
    v = random_polynomial(space, 2, rng)
    assert telescoping_identity(u, v).is_zero()


def test_cauchy_fueter_pair():
    x1, x2, x3, x4, _ = coordinates(PolySpace.group(1, "float"))
    ok, laplacians = cf1_check(CF1Pair(f0=x1 + x2 * 1j, f1=x3 + x4 * 1j), tol=1e-12)
    assert ok
    assert len(laplacians) == 4
    assert all(L.max_abs() < 1e-12 for L in laplacians)
    broken, _ = cf1_check(CF1Pair(f0=x1, f1=x1 * 0.0), tol=1e-12)
    assert not broken


def test_cauchy_fueter_pair_logs_nonzero_laplacian(monkeypatch, caplog):
    space = PolySpace.group(1, "float")
    x1, x2, x3, x4, _ = coordinates(space)
    curved = laplacian(squared_norm(space))
    monkeypatch.setattr(hessian_module, "laplacian", lambda c: curved)
    with caplog.at_level(logging.WARNING, logger="qmahg.engine.hessian"):
        ok, _ = cf1_check(CF1Pair(f0=x1 + x2 * 1j, f1=x3 + x4 * 1j), tol=1e-12)
    assert ok
    assert "non-pluriharmonic" in caplog.text


def test_cauchy_fueter_pair_is_quiet_when_pluriharmonic(caplog):
    x1, x2, x3, x4, _ = coordinates(PolySpace.group(1, "float"))
    with caplog.at_level(logging.WARNING, logger="qmahg.engine.hessian"):
        cf1_check(CF1Pair(f0=x1 + x2 * 1j, f1=x3 + x4 * 1j), tol=1e-12)
    assert "non-pluriharmonic" not in caplog.text


def test_cached_hessian_cannot_be_mutated():
    u = squared_norm(PolySpace.group(2))
    H = horizontal_hessian(u)
    assert horizontal_hessian(u) is H
    assert isinstance(H.entries, tuple) and all(isinstance(row, tuple) for row in H.entries)
    with pytest.raises(TypeError):
        H.entries[0][0] = H.entries[1][1]
    assert list(hessian_at(u, (0,) * 9).data[0, 0]) == [8, 0, 0, 0]
