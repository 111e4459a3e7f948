"""The first-order operators d0, d1 on polynomial forms and the Laplacian Delta = d0 d1."""
from __future__ import annotations

import logging
from fractions import Fraction

import numpy as np

from qmahg.engine.exterior import Form
from qmahg.engine.fields import VectorFieldId, apply
from qmahg.engine.polynomial import PolyScalar
from qmahg.errors import ValidationError

logger = logging.getLogger(__name__)


def as_form(F) -> Form:
    if isinstance(F, Form):
        return F
    if isinstance(F, PolyScalar):
        return Form.scalar(F.space.n, F)
    raise ValidationError(f"expected a polynomial or a polynomial form, got {type(F).__name__}")


def d_alpha(F, alpha: int) -> Form:
    """d_alpha F = sum_I sum_A Z(A, alpha) f_I w^A ^ w^I."""
    if alpha not in (0, 1):
        raise ValidationError(f"alpha must be 0 or 1, got {alpha}")
    F = as_form(F)
    n = F.n
    if F.degree >= 2 * n:
        raise ValidationError(f"d{alpha} is not defined on {2 * n}-forms")
    out = Form(n, F.degree + 1)
    for I, f in F.coeffs.items():
        for A in range(2 * n):
            g = apply(VectorFieldId.Z(A, alpha), f)
            if g:
                out.add_term((A,) + I, g)
    return out


def d0(F) -> Form:
    return d_alpha(F, 0)


def d1(F) -> Form:
    return d_alpha(F, 1)


def _half(u: PolyScalar):
    return Fraction(1, 2) if u.space.exact else 0.5


def delta_AB(u: PolyScalar, A: int, B: int) -> PolyScalar:
    """Delta_AB u = (Z(A,0) Z(B,1) u - Z(B,0) Z(A,1) u) / 2."""
    Z = VectorFieldId.Z
    first = apply(Z(A, 0), apply(Z(B, 1), u))
    second = apply(Z(B, 0), apply(Z(A, 1), u))
    return (first - second) * _half(u)


def laplacian(u: PolyScalar) -> Form:
    """Delta u = d0 d1 u = sum_{A<B} 2 Delta_AB u w^A ^ w^B."""
    return d0(d1(u))


def laplacian_matrix(u: PolyScalar) -> np.ndarray:
    """The 2n x 2n object array (Delta_AB u)."""
    size = 2 * u.space.n
    M = np.empty((size, size), dtype=object)
    for A in range(size):
        M[A, A] = PolyScalar.zero(u.space)
        for B in range(A + 1, size):
            M[A, B] = delta_AB(u, A, B)
            M[B, A] = -M[A, B]
    return M
