"""
Horizontal quaternionic Hessian and Monge-Ampere densities.

Hess(u)_lm = Qbar_l Q_m u + 8 delta_lm i Dt u, a hyperhermitian matrix of
quaternion polynomials. Its Moore determinant is the Monge-Ampere density.
"""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import List, Optional, Sequence, Tuple

import numpy as np

from qmahg.engine.exterior import Form, delta_n_coeff, wedge, wedge_all, wedge_power
from qmahg.engine.fields import VectorFieldId, apply, apply_quaternionic
from qmahg.engine.operators import d0, d1, delta_AB, laplacian
from qmahg.engine.polynomial import PolyScalar, PolySpace, QuaternionPoly, coordinates, random_coefficient
from qmahg.engine.quaternion import (
    UNITS,
    HyperhermitianMatrix,
    QuatMatrix,
    Quaternion,
    mixed_discriminant,
    moore_det,
)
from qmahg.errors import ValidationError
from qmahg.models import CF1Pair

logger = logging.getLogger(__name__)


class QuatPolyMatrix:
    """n x n matrix of quaternion polynomials; entry (l, m) = a + b j.

    Rows are tuples: instances are shared through the Hessian cache.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Sequence[Sequence[QuaternionPoly]]):
        self.entries = tuple(tuple(row) for row in entries)
        if any(len(row) != len(self.entries) for row in self.entries):
            raise ValidationError("polynomial matrix must be square")

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def space(self):
        return self.entries[0][0].space

    def entry(self, l: int, m: int) -> QuaternionPoly:
        return self.entries[l][m]

    def pair(self, l: int, m: int) -> Tuple[PolyScalar, PolyScalar]:
        return self.entries[l][m].complex_pair()

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def is_hyperhermitian(self) -> bool:
        return all(
            self.entries[l][m] == self.entries[m][l].conj()
            for l in range(self.n) for m in range(l, self.n)
        )

    def __add__(self, other: "QuatPolyMatrix") -> "QuatPolyMatrix":
        return QuatPolyMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)])

    def __mul__(self, c) -> "QuatPolyMatrix":
        return QuatPolyMatrix([[e * c for e in row] for row in self.entries])

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuatPolyMatrix):
            return NotImplemented
        return self.n == other.n and all(
            a == b for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2)
        )

    __hash__ = None

    def evaluate(self, point) -> HyperhermitianMatrix:
        values = [[[c.evaluate(point) for c in e.components] for e in row] for row in self.entries]
        flat = [v for row in values for e in row for v in e]
        if all(isinstance(v, Rational) for v in flat):
            data = np.empty((self.n, self.n, 4), dtype=object)
            for l in range(self.n):
                for m in range(self.n):
                    data[l, m, :] = [Fraction(v) for v in values[l][m]]
            return HyperhermitianMatrix(data)
        return HyperhermitianMatrix(np.array(values, dtype=np.float64))

    def values(self, points: np.ndarray) -> np.ndarray:
        """Float values at many points, shape (N, n, n, 4)."""
        points = np.asarray(points, dtype=np.float64)
        out = np.zeros((points.shape[0], self.n, self.n, 4))
        for l in range(self.n):
            for m in range(self.n):
                out[:, l, m, :] = self.entries[l][m].evaluate_many(points)
        return out


def _dt_quaternion(u: PolyScalar, factor) -> QuaternionPoly:
    z = PolyScalar.zero(u.space)
    return QuaternionPoly((z, factor * u.diff(u.space.t_index), z, z))


@lru_cache(maxsize=256)
def horizontal_hessian(u: PolyScalar) -> QuatPolyMatrix:
    if not u.is_real():
        raise ValidationError("the horizontal Hessian is defined for real polynomials")
    n = u.space.n
    q_u = [apply(VectorFieldId.Q(m), u) for m in range(n)]
    entries = []
    for l in range(n):
        row = []
        for m in range(n):
            h = apply_quaternionic(VectorFieldId.Qbar(l), q_u[m])
            if l == m:
                h = h + _dt_quaternion(u, 8)
            row.append(h)
        entries.append(row)
    return QuatPolyMatrix(entries)


def hessian_from_laplacian(u: PolyScalar) -> QuatPolyMatrix:
    """The same Hessian read from the Laplacian: H_lm = 2 Delta_{l,n+m} u + 2 Delta_lm u j."""
    if not u.is_real():
        raise ValidationError("the horizontal Hessian is defined for real polynomials")
    n = u.space.n
    entries = []
    for l in range(n):
        row = []
        for m in range(n):
            a = 2 * delta_AB(u, l, n + m)
            b = 2 * delta_AB(u, l, m)
            row.append(QuaternionPoly((a.real_part(), a.imag_part(), b.real_part(), b.imag_part())))
        entries.append(row)
    return QuatPolyMatrix(entries)


def tau_j_polymatrix(H: QuatPolyMatrix) -> np.ndarray:
    """tau(H) J = [[b, a], [-conj a, conj b]] as a 2n x 2n object array."""
    n = H.n
    M = np.empty((2 * n, 2 * n), dtype=object)
    for l in range(n):
        for m in range(n):
            a, b = H.pair(l, m)
            M[l, m] = b
            M[l, n + m] = a
            M[n + l, m] = -a.conjugate()
            M[n + l, n + m] = b.conjugate()
    return M


# ================================
# Pointwise and batched densities
# ================================


def hessian_at(u: PolyScalar, xi) -> HyperhermitianMatrix:
    return horizontal_hessian(u).evaluate(xi)


def qma_density(u: PolyScalar, xi):
    return moore_det(hessian_at(u, xi))


def mixed_density(us: Sequence[PolyScalar], xi):
    return mixed_discriminant(*[hessian_at(u, xi) for u in us])


def tau_values(values: np.ndarray) -> np.ndarray:
    """Batched tau of (N, n, n, 4) quaternion values."""
    n = values.shape[1]
    a = values[..., 0] + 1j * values[..., 1]
    b = values[..., 2] + 1j * values[..., 3]
    T = np.empty((values.shape[0], 2 * n, 2 * n), dtype=np.complex128)
    T[:, :n, :n] = a
    T[:, :n, n:] = -b
    T[:, n:, :n] = np.conj(b)
    T[:, n:, n:] = np.conj(a)
    return T


def paired_eigenvalues(values: np.ndarray) -> np.ndarray:
    """Quaternionic eigenvalues (N, n), ascending, of hyperhermitian values."""
    w = np.linalg.eigvalsh(tau_values(values))
    return 0.5 * (w[:, 0::2] + w[:, 1::2])


class HessianField:
    """Batched evaluation of Hess(u) and its Monge-Ampere density."""

    def __init__(self, u: PolyScalar):
        self.u = u
        self.matrix = horizontal_hessian(u)

    def values(self, points: np.ndarray) -> np.ndarray:
        return self.matrix.values(points)

    def eigenvalues(self, points: np.ndarray) -> np.ndarray:
        return paired_eigenvalues(self.values(points))

    def densities(self, points: np.ndarray) -> np.ndarray:
        return np.prod(self.eigenvalues(points), axis=1)


# ================================
# Identities and testers
# ================================


def _value_at(c, xi):
    return c.evaluate(xi) if isinstance(c, PolyScalar) else c


def monge_ampere_sides(u: PolyScalar, xi) -> Tuple[object, object]:
    """(Omega coefficient of (Delta u)^n at xi, n! * qma_density(u, xi))."""
    n = u.space.n
    lhs = _value_at(delta_n_coeff(wedge_power(laplacian(u), n)), xi)
    rhs = math.factorial(n) * qma_density(u, xi)
    return lhs, rhs


def verify_thm_1_4(u: PolyScalar, xi, tol: float = 1e-8) -> float:
    """Relative residual of (Delta u)^n = n! det(Hess u) Omega_2n at xi."""
    lhs, rhs = monge_ampere_sides(u, xi)
    diff = lhs - rhs
    residual = abs(complex(diff)) / (1.0 + abs(float(rhs)))
    if residual > tol:
        logger.warning(f"Monge-Ampere identity residual {residual:.3e} exceeds {tol:.1e}")
    return float(residual)


def mixed_identity_sides(us: Sequence[PolyScalar], xi) -> Tuple[object, object]:
    """(Omega coefficient of Delta u_1 ^ ... ^ Delta u_n, n! * mixed_density)."""
    n = us[0].space.n
    if len(us) != n:
        raise ValidationError(f"expected {n} functions, got {len(us)}")
    lhs = _value_at(delta_n_coeff(wedge_all(laplacian(u) for u in us)), xi)
    rhs = math.factorial(n) * mixed_density(us, xi)
    return lhs, rhs


def _points_array(points, ngens: int) -> np.ndarray:
    if isinstance(points, np.ndarray):
        arr = points.astype(np.float64)
    else:
        arr = np.array([
            [float(c) for c in (p.coords() if hasattr(p, "coords") else p)] for p in points
        ])
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValidationError("at least one sample point is required")
    if arr.shape[1] != ngens:
        raise ValidationError(f"sample points need {ngens} coordinates, got {arr.shape[1]}")
    return arr


def psh_violation(u: PolyScalar, points, tol: float = 1e-9) -> Optional[Tuple[float, ...]]:
    """The first sample where Hess(u) has an eigenvalue below -tol, or None."""
    arr = _points_array(points, u.space.ngens)
    smallest = HessianField(u).eigenvalues(arr)[:, 0]
    bad = np.nonzero(smallest < -tol)[0]
    if bad.size:
        return tuple(float(c) for c in arr[bad[0]])
    return None


def is_psh_poly(u: PolyScalar, points, tol: float = 1e-9) -> bool:
    return psh_violation(u, points, tol) is None


def _positive(rng: np.random.Generator, exact: bool):
    if exact:
        return Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 4)))
    return float(rng.uniform(0.1, 1.0))


def random_psh_quadratic(space: PolySpace, rng: np.random.Generator, squares: int = 2) -> PolyScalar:
    """a|x|^2 + sum_j c_j L_j^2 + (linear in x) + b t with a, c_j > 0.

    Hess(L^2) = 2 conj(Q_l L) Q_m L is nonnegative and linear terms are
    pluriharmonic, so every such u is PSH everywhere.
    """
    exact = space.exact
    xs = coordinates(space)[:-1]
    t = coordinates(space)[-1]
    u = PolyScalar.zero(space)
    for x in xs:
        u = u + x * x
    u = u * _positive(rng, exact)
    for _ in range(squares):
        L = PolyScalar.zero(space)
        for x in xs:
            L = L + random_coefficient(rng, exact) * x
        u = u + _positive(rng, exact) * L * L
    for x in xs:
        u = u + random_coefficient(rng, exact) * x
    return u + random_coefficient(rng, exact) * t


def random_non_psh_quadratic(space: PolySpace, rng: np.random.Generator) -> PolyScalar:
    """A PSH quadratic minus a multiple of x1^2 + .. + x4^2 that makes Hess(u)_00 = -8."""
    w = random_psh_quadratic(space, rng)
    h00 = hessian_at(w, (0,) * space.ngens).data[0, 0, 0]
    xs = coordinates(space)[:4]
    block = xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2] + xs[3] * xs[3]
    shift = (h00 + 8) / 8
    return w - block * (shift if space.exact else float(shift))


def is_pluriharmonic(u: PolyScalar, tol: float = 0.0) -> bool:
    size = 2 * u.space.n
    for A in range(size):
        for B in range(A + 1, size):
            d = delta_AB(u, A, B)
            if (d.max_abs() > tol) if tol > 0 else bool(d):
                return False
    return True


def cf1_check(f: CF1Pair, tol: float = 0.0) -> Tuple[bool, List[Form]]:
    """f is 1-Cauchy-Fueter iff d1 f0 - d0 f1 = 0; returns the Laplacians of its real components."""
    residual = d1(f.f0) - d0(f.f1)
    ok = residual.is_zero() if tol <= 0 else residual.max_abs() <= tol
    components = [f.f0.real_part(), f.f0.imag_part(), f.f1.real_part(), f.f1.imag_part()]
    laplacians = [laplacian(c) for c in components]
    if ok:
        for name, L in zip(("Re f0", "Im f0", "Re f1", "Im f1"), laplacians):
            if (L.max_abs() > tol) if tol > 0 else not L.is_zero():
                logger.warning(f"1-Cauchy-Fueter pair with non-pluriharmonic {name} (max coefficient {L.max_abs():.3g})")
    return ok, laplacians


def telescoping_identity(u: PolyScalar, v: PolyScalar) -> Form:
    """(Dv)^n - (Du)^n - sum_p (Dv)^{p-1} ^ D(v-u) ^ (Du)^{n-p}; zero for all u, v."""
    n = u.space.n
    lu, lv = laplacian(u), laplacian(v)
    ldiff = laplacian(v - u)
    residual = wedge_power(lv, n) - wedge_power(lu, n)
    for p in range(1, n + 1):
        residual = residual - wedge(wedge(wedge_power(lv, p - 1), ldiff), wedge_power(lu, n - p))
    return residual


def gradient_row(u: PolyScalar, xi) -> QuatMatrix:
    """r_l = X_{4l+1}u + i X_{4l+2}u - j X_{4l+3}u + k X_{4l+4}u at xi, as a 1 x n matrix."""
    n = u.space.n
    row = []
    for l in range(n):
        vals = [apply(VectorFieldId.X(4 * l + k), u).evaluate(xi) for k in range(1, 5)]
        row.append(Quaternion(vals[0], vals[1], -vals[2], vals[3]))
    return QuatMatrix.from_entries([row])


# e_j conj(e_k) as components, indexed [j, k, component]
_UNIT_PRODUCTS = np.array(
    [[(UNITS[j] * UNITS[k].conj()).components() for k in range(4)] for j in range(4)], dtype=np.float64
)


def assemble_hessian(second: np.ndarray, dt: float) -> QuatMatrix:
    """Hessian from second[a, b] = X_{a+1} X_{b+1} u and Dt u at one point."""
    second = np.asarray(second, dtype=np.float64)
    n = second.shape[0] // 4
    blocks = second.reshape(n, 4, n, 4)
    H = np.einsum("jkc,ljmk->lmc", _UNIT_PRODUCTS, blocks)
    for l in range(n):
        H[l, l, 1] += 8.0 * dt
    return QuatMatrix(H)
