"""
Quaternion scalars and matrices, the tau embedding, Moore determinants.

Quaternion matrices are NumPy tensors of shape (rows, cols, 4) holding the
components (re, i, j, k). float64 tensors are the float mode; object tensors
of Fraction entries are the exact mode and stay exact through products,
adjoints and the Moore determinant.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import HYPERHERMITIAN_RTOL, MAX_MIXED_N
from qmahg.errors import ValidationError

logger = logging.getLogger(__name__)


def quaternion_product(p: Sequence, q: Sequence) -> Tuple:
    """Hamilton product of two component 4-tuples.

    Works for any component type with ring arithmetic (numbers, polynomials).
    """
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


@dataclass(frozen=True)
class Quaternion:
    re: object = 0
    i: object = 0
    j: object = 0
    k: object = 0

    @classmethod
    def from_components(cls, comps: Sequence) -> "Quaternion":
        return cls(*comps)

    @classmethod
    def from_complex_pair(cls, a: complex, b: complex) -> "Quaternion":
        """The quaternion a + b*j for complex a, b."""
        a, b = complex(a), complex(b)
        return cls(a.real, a.imag, b.real, b.imag)

    def components(self) -> Tuple:
        return (self.re, self.i, self.j, self.k)

    def complex_pair(self) -> Tuple[complex, complex]:
        return complex(self.re, self.i), complex(self.j, self.k)

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Rational) for c in self.components())

    def conj(self) -> "Quaternion":
        return Quaternion(self.re, -self.i, -self.j, -self.k)

    def norm2(self):
        return self.re * self.re + self.i * self.i + self.j * self.j + self.k * self.k

    def __abs__(self) -> float:
        return math.sqrt(float(self.norm2()))

    def inverse(self) -> "Quaternion":
        n2 = self.norm2()
        if not n2:
            raise ValidationError("zero quaternion has no inverse")
        if isinstance(n2, Rational):
            n2 = Fraction(n2)
        return self.conj() * (1 / n2)

    def is_zero(self) -> bool:
        return not any(self.components())

    def __add__(self, other: "Quaternion") -> "Quaternion":
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(*(a + b for a, b in zip(self.components(), other.components())))

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(*(a - b for a, b in zip(self.components(), other.components())))

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.re, -self.i, -self.j, -self.k)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(*quaternion_product(self.components(), other.components()))
        if isinstance(other, Real):
            return Quaternion(*(c * other for c in self.components()))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Real):
            return Quaternion(*(other * c for c in self.components()))
        return NotImplemented

    def __repr__(self) -> str:
        return f"Quaternion({self.re}, {self.i}, {self.j}, {self.k})"


ONE = Quaternion(1, 0, 0, 0)
QI = Quaternion(0, 1, 0, 0)
QJ = Quaternion(0, 0, 1, 0)
QK = Quaternion(0, 0, 0, 1)
UNITS = (ONE, QI, QJ, QK)

# hat(i p) = -J hat(p)
J4 = np.array(
    [[0, 1, 0, 0],
     [-1, 0, 0, 0],
     [0, 0, 0, 1],
     [0, 0, -1, 0]]
)


def real_rep(q: Quaternion) -> np.ndarray:
    """4x4 real matrix of left multiplication by q on hat(p) = (p0, p1, p2, p3)."""
    x1, x2, x3, x4 = q.components()
    rows = [
        [x1, -x2, -x3, -x4],
        [x2, x1, -x4, x3],
        [x3, x4, x1, -x2],
        [x4, -x3, x2, x1],
    ]
    if q.exact:
        return np.array([[Fraction(v) for v in row] for row in rows], dtype=object)
    return np.array(rows, dtype=np.float64)


def symplectic_matrix(n: int) -> np.ndarray:
    """The complex 2n x 2n matrix [[0, I], [-I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]]).astype(np.complex128)


# ================================
# Matrices
# ================================


class QuatMatrix:
    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.asarray(data)
        if arr.ndim != 3 or arr.shape[2] != 4:
            raise ValidationError("Wrong tensor shape")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError("matrix dimensions must be positive")
        if arr.dtype != object:
            arr = arr.astype(np.float64)
        self.data = arr

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence[Quaternion]]):
        entries = [[q.components() for q in row] for row in rows]
        if all(q.exact for row in rows for q in row):
            data = np.empty((len(entries), len(entries[0]), 4), dtype=object)
            for r, row in enumerate(entries):
                for c, comps in enumerate(row):
                    data[r, c, :] = [Fraction(v) for v in comps]
            return cls(data)
        return cls(np.array(entries, dtype=np.float64))

    @classmethod
    def from_complex_pair(cls, a: np.ndarray, b: np.ndarray):
        """The matrix a + b*j for complex matrices a, b."""
        a = np.atleast_2d(np.asarray(a, dtype=np.complex128))
        b = np.atleast_2d(np.asarray(b, dtype=np.complex128))
        return cls(np.stack([a.real, a.imag, b.real, b.imag], axis=-1))

    @classmethod
    def identity(cls, n: int, exact: bool = False):
        data = cls.zeros(n, n, exact).data
        for l in range(n):
            data[l, l, 0] = Fraction(1) if exact else 1.0
        return cls(data)

    @staticmethod
    def zeros(rows: int, cols: int, exact: bool = False) -> "QuatMatrix":
        if exact:
            data = np.empty((rows, cols, 4), dtype=object)
            data.fill(Fraction(0))
            return QuatMatrix(data)
        return QuatMatrix(np.zeros((rows, cols, 4)))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def exact(self) -> bool:
        return self.data.dtype == object

    def entry(self, r: int, c: int) -> Quaternion:
        return Quaternion(*self.data[r, c])

    def to_float(self) -> "QuatMatrix":
        return QuatMatrix(self.data.astype(np.float64))

    def complex_pair(self) -> Tuple[np.ndarray, np.ndarray]:
        d = self.data.astype(np.float64)
        return d[..., 0] + 1j * d[..., 1], d[..., 2] + 1j * d[..., 3]

    def adjoint(self) -> "QuatMatrix":
        d = np.swapaxes(self.data, 0, 1).copy()
        d[..., 1:] = -d[..., 1:]
        return QuatMatrix(d)

    def norm_inf(self) -> float:
        d = self.data.astype(np.float64)
        return float(np.sqrt((d ** 2).sum(axis=-1)).max())

    def _check_same_shape(self, other: "QuatMatrix") -> None:
        if self.data.shape != other.data.shape:
            raise ValidationError(f"shape mismatch: {self.data.shape[:2]} vs {other.data.shape[:2]}")

    def _combine(self, other: "QuatMatrix"):
        if self.exact and other.exact:
            return self.data, other.data
        return self.data.astype(np.float64), other.data.astype(np.float64)

    def __add__(self, other: "QuatMatrix") -> "QuatMatrix":
        self._check_same_shape(other)
        a, b = self._combine(other)
        return QuatMatrix(a + b)

    def __sub__(self, other: "QuatMatrix") -> "QuatMatrix":
        self._check_same_shape(other)
        a, b = self._combine(other)
        return QuatMatrix(a - b)

    def __neg__(self) -> "QuatMatrix":
        return QuatMatrix(-self.data)

    def __mul__(self, scalar) -> "QuatMatrix":
        if not isinstance(scalar, Real):
            return NotImplemented
        if self.exact and isinstance(scalar, Rational):
            return QuatMatrix(self.data * Fraction(scalar))
        return QuatMatrix(self.data.astype(np.float64) * float(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "QuatMatrix") -> "QuatMatrix":
        if self.cols != other.rows:
            raise ValidationError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        if self.exact and other.exact:
            out = QuatMatrix.zeros(self.rows, other.cols, exact=True).data
            for r in range(self.rows):
                for c in range(other.cols):
                    acc = (Fraction(0),) * 4
                    for k in range(self.cols):
                        term = quaternion_product(self.data[r, k], other.data[k, c])
                        acc = tuple(x + y for x, y in zip(acc, term))
                    out[r, c, :] = acc
            return QuatMatrix(out)
        a1, b1 = self.complex_pair()
        a2, b2 = other.complex_pair()
        # (a1 + b1 j)(a2 + b2 j) = (a1 a2 - b1 conj(b2)) + (a1 b2 + b1 conj(a2)) j
        a = a1 @ a2 - b1 @ np.conj(b2)
        b = a1 @ b2 + b1 @ np.conj(a2)
        return QuatMatrix.from_complex_pair(a, b)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.rows}x{self.cols}, exact={self.exact})"


class HyperhermitianMatrix(QuatMatrix):
    """Square quaternion matrix with M_lm = conj(M_ml).

    Exact matrices must satisfy the condition exactly; float matrices within
    ||M - M*|| <= HYPERHERMITIAN_RTOL * (1 + ||M||). Violations are rejected,
    never symmetrized.
    """

    __slots__ = ()

    def __init__(self, data):
        super().__init__(data.data if isinstance(data, QuatMatrix) else data)
        if self.rows != self.cols:
            raise ValidationError(f"hyperhermitian matrix must be square, got {self.rows}x{self.cols}")
        diff = self.data - self.adjoint().data
        if self.exact:
            if any(v != 0 for v in diff.ravel()):
                raise ValidationError("matrix is not hyperhermitian")
        else:
            err = float(np.abs(diff).max())
            if err > HYPERHERMITIAN_RTOL * (1.0 + self.norm_inf()):
                raise ValidationError(f"matrix is not hyperhermitian (asymmetry {err:.3e})")

    @property
    def n(self) -> int:
        return self.rows

    @classmethod
    def from_complex_hermitian(cls, h: np.ndarray) -> "HyperhermitianMatrix":
        h = np.asarray(h, dtype=np.complex128)
        return cls(QuatMatrix.from_complex_pair(h, np.zeros_like(h)))


def as_hyperhermitian(M) -> HyperhermitianMatrix:
    if isinstance(M, HyperhermitianMatrix):
        return M
    if isinstance(M, QuatMatrix):
        return HyperhermitianMatrix(M)
    return HyperhermitianMatrix(np.asarray(M))


def tau(M: QuatMatrix) -> np.ndarray:
    """Complex (2 rows x 2 cols) matrix [[a, -b], [conj b, conj a]] of M = a + b j."""
    a, b = M.complex_pair()
    return np.block([[a, -b], [np.conj(b), np.conj(a)]])


# ================================
# Spectra and determinants
# ================================


def eigen_hyperhermitian(M, with_unitary: bool = False) -> Tuple[np.ndarray, Optional[QuatMatrix]]:
    """Real eigenvalues (ascending) and optionally a unitary U with U* M U = diag(nu)."""
    M = as_hyperhermitian(M)
    T = tau(M)
    w, V = np.linalg.eigh(T)
    n = M.n
    if not with_unitary:
        return 0.5 * (w[0::2] + w[1::2]), None
    return _quaternion_unitary(T, V, n)


def _quaternion_unitary(T: np.ndarray, V: np.ndarray, n: int) -> Tuple[np.ndarray, QuatMatrix]:
    # A complex eigenvector (top; bot) of tau(M) is the first column of tau(u)
    # for the quaternion column u = top + conj(bot) j; its partner
    # (-conj(bot); conj(top)) spans the rest of tau(u).
    chosen: List[np.ndarray] = []
    remaining = list(range(2 * n))
    columns = []
    for _ in range(n):
        best_idx, best_vec, best_norm = None, None, -1.0
        for idx in remaining:
            v = V[:, idx].copy()
            for c in chosen:
                v -= c * np.vdot(c, v)
            norm = float(np.linalg.norm(v))
            if norm > best_norm:
                best_idx, best_vec, best_norm = idx, v, norm
        remaining.remove(best_idx)
        v = best_vec / best_norm
        top, bot = v[:n], v[n:]
        partner = np.concatenate([-np.conj(bot), np.conj(top)])
        chosen.extend([v, partner])
        rayleigh = float(np.real(np.vdot(v, T @ v)))
        columns.append((rayleigh, top, np.conj(bot)))

    columns.sort(key=lambda col: col[0])
    a = np.column_stack([col[1] for col in columns])
    b = np.column_stack([col[2] for col in columns])
    nu = np.array([col[0] for col in columns])
    return nu, QuatMatrix.from_complex_pair(a, b)


def moore_det(M):
    """Moore determinant: the product of the quaternionic eigenvalues.

    Exact matrices are reduced by hermitian congruence with real pivots, so
    the result is an exact Fraction. Float matrices use the paired spectrum of
    tau(M).
    """
    M = as_hyperhermitian(M)
    if M.exact:
        return _moore_det_exact(M)
    nu, _ = eigen_hyperhermitian(M)
    return float(np.prod(nu))


def _moore_det_exact(M: HyperhermitianMatrix) -> Fraction:
    n = M.n
    A = [[M.entry(r, c) for c in range(n)] for r in range(n)]
    det = Fraction(1)
    for k in range(n):
        if A[k][k].re == 0:
            swap = next((r for r in range(k + 1, n) if A[r][r].re != 0), None)
            if swap is not None:
                A[k], A[swap] = A[swap], A[k]
                for row in A:
                    row[k], row[swap] = row[swap], row[k]
            else:
                r = next((r for r in range(k + 1, n) if not A[r][k].is_zero()), None)
                if r is None:
                    return Fraction(0)
                # row_k += c row_r, col_k += col_r conj(c) makes A_kk = 2|A_rk|^2
                c = A[r][k].conj()
                A[k] = [A[k][m] + c * A[r][m] for m in range(n)]
                cc = c.conj()
                for row in A:
                    row[k] = row[k] + row[r] * cc
        pivot = Fraction(A[k][k].re)
        det *= pivot
        inv = 1 / pivot
        for r in range(k + 1, n):
            f = A[r][k] * inv
            if f.is_zero():
                continue
            A[r] = [A[r][m] - f * A[k][m] for m in range(n)]
            fc = f.conj()
            for row in A:
                row[r] = row[r] - row[k] * fc
    return det


def mixed_discriminant(*matrices):
    """Mixed discriminant by inclusion-exclusion polarization of moore_det."""
    if not matrices:
        raise ValidationError("mixed discriminant needs at least one matrix")
    mats = [as_hyperhermitian(M) for M in matrices]
    n = mats[0].n
    if any(M.n != n for M in mats):
        raise ValidationError("mixed discriminant arguments must share one size")
    if len(mats) != n:
        raise ValidationError(f"mixed discriminant of {n}x{n} matrices takes {n} arguments, got {len(mats)}")
    if n > MAX_MIXED_N:
        raise ValidationError(f"mixed discriminant supports n <= {MAX_MIXED_N}")

    exact = all(M.exact for M in mats)
    total = Fraction(0) if exact else 0.0
    for size in range(1, n + 1):
        sign = (-1) ** (n - size)
        for subset in itertools.combinations(mats, size):
            acc = subset[0]
            for M in subset[1:]:
                acc = acc + M
            total += sign * moore_det(acc)
    return total / math.factorial(n)


def is_nonneg(M, tol: float = 1e-9) -> bool:
    nu, _ = eigen_hyperhermitian(as_hyperhermitian(M))
    return bool(nu[0] >= -tol)


# ================================
# Random inputs
# ================================


def random_quaternion(rng: np.random.Generator, exact: bool = False) -> Quaternion:
    if exact:
        return Quaternion(*(Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))) for _ in range(4)))
    return Quaternion(*(float(v) for v in rng.normal(size=4)))


def random_quat_matrix(rows: int, cols: int, rng: np.random.Generator, exact: bool = False) -> QuatMatrix:
    return QuatMatrix.from_entries(
        [[random_quaternion(rng, exact) for _ in range(cols)] for _ in range(rows)]
    )


def random_hyperhermitian(n: int, rng: np.random.Generator, exact: bool = False,
                          nonneg: bool = False) -> HyperhermitianMatrix:
    A = random_quat_matrix(n, n, rng, exact)
    if nonneg:
        return HyperhermitianMatrix(A.adjoint() @ A)
    half = Fraction(1, 2) if exact else 0.5
    return HyperhermitianMatrix((A + A.adjoint()) * half)
