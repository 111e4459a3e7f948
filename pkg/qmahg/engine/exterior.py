"""
Exterior algebra of C^{2n} with sparse coefficients.

A Form stores {strictly increasing index tuple: coefficient}. Coefficients may
be Python numbers, Fractions or PolyScalar values; anything with +, *, unary
minus, truthiness for zero and .conjugate() works.
"""
from __future__ import annotations

import json
import logging
import math
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import SKEW_RTOL
from qmahg.engine.quaternion import (
    HyperhermitianMatrix,
    QuatMatrix,
    eigen_hyperhermitian,
    random_quat_matrix,
    symplectic_matrix,
    tau,
)
from qmahg.errors import ValidationError

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]


def permutation_sign(seq: Sequence[int]) -> int:
    inversions = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                inversions += 1
    return -1 if inversions % 2 else 1


def canonical(indices: Sequence[int]) -> Tuple[int, MultiIndex]:
    """Sort indices, returning (sign, sorted). A repeated index gives (0, ())."""
    indices = tuple(indices)
    if len(set(indices)) != len(indices):
        return 0, ()
    return permutation_sign(indices), tuple(sorted(indices))


def omega_order(n: int) -> List[int]:
    """Index order of the volume form: (0, n, 1, n+1, ..., n-1, 2n-1)."""
    order = []
    for l in range(n):
        order.extend([l, n + l])
    return order


def omega_sign(n: int) -> int:
    """Sign s with Omega_2n = s * w^0 ^ w^1 ^ ... ^ w^{2n-1}."""
    return permutation_sign(omega_order(n))


def complement(indices: Sequence[int], n: int) -> MultiIndex:
    taken = set(indices)
    return tuple(p for p in range(2 * n) if p not in taken)


def epsilon(indices: Sequence[int], n: int) -> int:
    """The sign with epsilon_I * w^I ^ w^{I-hat} = Omega_2n."""
    sign, _ = canonical(tuple(indices) + complement(indices, n))
    if sign == 0:
        raise ValidationError(f"index {tuple(indices)} has a repeated entry")
    return sign * omega_sign(n)


def _coeff_abs(c) -> float:
    if hasattr(c, "max_abs"):
        return c.max_abs()
    return abs(complex(c))


class Form:
    __slots__ = ("n", "degree", "coeffs")

    def __init__(self, n: int, degree: int, coeffs: Optional[Dict] = None):
        if n < 1:
            raise ValidationError("forms need n >= 1")
        if not 0 <= degree <= 2 * n:
            raise ValidationError(f"degree {degree} outside 0..{2 * n}")
        self.n = n
        self.degree = degree
        self.coeffs: Dict[MultiIndex, object] = {}
        for indices, c in (coeffs or {}).items():
            self.add_term(indices, c)

    @classmethod
    def zero(cls, n: int, degree: int) -> "Form":
        return cls(n, degree)

    @classmethod
    def scalar(cls, n: int, c) -> "Form":
        return cls(n, 0, {(): c})

    @classmethod
    def basis(cls, n: int, indices: Sequence[int], c=1) -> "Form":
        return cls(n, len(tuple(indices)), {tuple(indices): c})

    def add_term(self, indices: Sequence[int], c) -> None:
        """Accumulate c * w^{indices}, normalizing the index order in place."""
        indices = tuple(int(p) for p in indices)
        if len(indices) != self.degree:
            raise ValidationError(f"index {indices} does not have degree {self.degree}")
        if any(p < 0 or p >= 2 * self.n for p in indices):
            raise ValidationError(f"index {indices} out of range for n={self.n}")
        sign, key = canonical(indices)
        if sign == 0 or not c:
            return
        value = c if sign > 0 else -c
        if key in self.coeffs:
            value = self.coeffs[key] + value
        if value:
            self.coeffs[key] = value
        else:
            self.coeffs.pop(key, None)

    def coefficient(self, indices: Sequence[int]):
        sign, key = canonical(indices)
        if sign == 0 or key not in self.coeffs:
            return 0
        c = self.coeffs[key]
        return c if sign > 0 else -c

    def terms(self) -> List[Tuple[MultiIndex, object]]:
        return sorted(self.coeffs.items())

    def is_zero(self) -> bool:
        return not self.coeffs

    def map_coefficients(self, fn: Callable) -> "Form":
        return Form(self.n, self.degree, {k: fn(c) for k, c in self.coeffs.items()})

    def evaluate(self, point) -> "Form":
        """Replace polynomial coefficients by their values at `point`."""
        return self.map_coefficients(lambda c: c.evaluate(point) if hasattr(c, "evaluate") else c)

    def max_abs(self) -> float:
        return max((_coeff_abs(c) for c in self.coeffs.values()), default=0.0)

    def _check_compatible(self, other: "Form") -> None:
        if not isinstance(other, Form):
            raise ValidationError("expected a Form")
        if self.n != other.n:
            raise ValidationError(f"dimension mismatch: n={self.n} vs n={other.n}")

    def __add__(self, other: "Form") -> "Form":
        self._check_compatible(other)
        if self.degree != other.degree:
            raise ValidationError(f"cannot add forms of degree {self.degree} and {other.degree}")
        out = Form(self.n, self.degree, self.coeffs)
        for k, c in other.coeffs.items():
            out.add_term(k, c)
        return out

    def __neg__(self) -> "Form":
        return self.map_coefficients(lambda c: -c)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __mul__(self, c) -> "Form":
        if isinstance(c, Form):
            return NotImplemented
        return self.map_coefficients(lambda v: v * c)

    def __rmul__(self, c) -> "Form":
        if isinstance(c, Form):
            return NotImplemented
        return self.map_coefficients(lambda v: c * v)

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.n == other.n and self.degree == other.degree and (self - other).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        parts = [f"{c}*w{list(k)}" for k, c in self.terms()]
        return f"Form(n={self.n}, degree={self.degree}, {' + '.join(parts) or '0'})"

    # --- JSON ---

    def to_json(self) -> Dict:
        terms = []
        for indices, c in self.terms():
            z = complex(c)
            terms.append({"indices": list(indices), "re": z.real, "im": z.imag})
        return {"n": self.n, "degree": self.degree, "terms": terms}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, payload: Dict) -> "Form":
        try:
            form = cls(int(payload["n"]), int(payload["degree"]))
            for term in payload["terms"]:
                form.add_term(term["indices"], complex(term["re"], term["im"]))
        except (KeyError, TypeError) as e:
            raise ValidationError(f"malformed form payload: {e}")
        return form


# ================================
# Products and named forms
# ================================


def wedge(F: Form, G: Form) -> Form:
    F._check_compatible(G)
    if F.degree + G.degree > 2 * F.n:
        raise ValidationError(f"degree {F.degree + G.degree} exceeds {2 * F.n}")
    out = Form(F.n, F.degree + G.degree)
    for I, a in F.coeffs.items():
        for K, b in G.coeffs.items():
            if set(I) & set(K):
                continue
            out.add_term(I + K, a * b)
    return out


def wedge_all(forms: Iterable[Form]) -> Form:
    forms = list(forms)
    if not forms:
        raise ValidationError("wedge_all needs at least one form")
    acc = forms[0]
    for F in forms[1:]:
        acc = wedge(acc, F)
    return acc


def wedge_power(F: Form, k: int) -> Form:
    if k == 0:
        return Form.scalar(F.n, 1)
    return wedge_all([F] * k)


def beta(n: int) -> Form:
    """beta_n = sum_l w^l ^ w^{n+l}."""
    return Form(n, 2, {(l, n + l): 1 for l in range(n)})


def omega_top(n: int, k: Optional[int] = None) -> Form:
    """Omega_2k = w^0 ^ w^n ^ ... ^ w^{k-1} ^ w^{n+k-1}; k defaults to n."""
    k = n if k is None else k
    if not 0 <= k <= n:
        raise ValidationError(f"k={k} outside 0..{n}")
    indices = []
    for l in range(k):
        indices.extend([l, n + l])
    return Form.basis(n, indices)


def delta_n_coeff(F: Form):
    """The c with F = c * Omega_2n."""
    if F.degree != 2 * F.n:
        raise ValidationError(f"delta_n_coeff needs a {2 * F.n}-form, got degree {F.degree}")
    c = F.coeffs.get(tuple(range(2 * F.n)), 0)
    return c if omega_sign(F.n) > 0 else -c


# ================================
# Real structure and positivity
# ================================


def rho_j(F: Form) -> Form:
    """rho(j)(z w^I) = conj(z) * (J.w^{i_1}) ^ ... with J.w^p = w^{n+p}, J.w^{n+p} = -w^p."""
    n = F.n
    out = Form(n, F.degree)
    for I, c in F.coeffs.items():
        sign = 1
        image = []
        for p in I:
            if p < n:
                image.append(n + p)
            else:
                image.append(p - n)
                sign = -sign
        cc = c.conjugate()
        out.add_term(image, cc if sign > 0 else -cc)
    return out


def is_real(F: Form, tol: float = 1e-12) -> bool:
    if F.degree % 2:
        raise ValidationError("reality is defined for even-degree forms")
    return (rho_j(F) - F).max_abs() <= tol


def _check_skew(M: np.ndarray) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
        raise ValidationError(f"expected a 2n x 2n matrix, got shape {M.shape}")
    if M.dtype == object:
        if any(v != 0 for v in (M + M.T).ravel()):
            raise ValidationError("matrix is not skew-symmetric")
        return
    err = float(np.abs(M + M.T).max())
    if err > SKEW_RTOL * (1.0 + float(np.abs(M).max())):
        raise ValidationError(f"matrix is not skew-symmetric (error {err:.3e})")


def two_form_from_matrix(M) -> Form:
    """sum_{A,B} M_AB w^A ^ w^B = sum_{A<B} 2 M_AB w^A ^ w^B."""
    M = np.asarray(M)
    if M.dtype != object:
        M = M.astype(np.complex128)
    _check_skew(M)
    n = M.shape[0] // 2
    out = Form(n, 2)
    for A in range(2 * n):
        for B in range(A + 1, 2 * n):
            c = M[A, B] if M.dtype == object else complex(M[A, B])
            out.add_term((A, B), 2 * c)
    return out


def matrix_from_two_form(F: Form) -> np.ndarray:
    if F.degree != 2:
        raise ValidationError(f"expected a 2-form, got degree {F.degree}")
    size = 2 * F.n
    M = np.zeros((size, size), dtype=np.complex128)
    for (A, B), c in F.coeffs.items():
        M[A, B] = complex(c) / 2
        M[B, A] = -complex(c) / 2
    return M


def hyperhermitian_from_two_form(F: Form, tol: float = 1e-9) -> HyperhermitianMatrix:
    """The hyperhermitian matrix H with two_form_from_matrix(tau(H) J) = F."""
    n = F.n
    T = -matrix_from_two_form(F) @ symplectic_matrix(n)
    a, b = T[:n, :n], -T[:n, n:]
    scale = tol * (1.0 + float(np.abs(T).max()))
    if (np.abs(T[n:, :n] - np.conj(b)).max() > scale
            or np.abs(T[n:, n:] - np.conj(a)).max() > scale):
        raise ValidationError("2-form is not in the image of the tau-J map")
    # tau(H)-block reading is exact up to rounding; average it onto the hermitian part
    a = 0.5 * (a + a.conj().T)
    b = 0.5 * (b - b.T)
    return HyperhermitianMatrix(QuatMatrix.from_complex_pair(a, b))


def strong_positivity_test_2form(F: Form, tol: float = 1e-9) -> Tuple[bool, np.ndarray]:
    if F.degree != 2:
        raise ValidationError(f"expected a 2-form, got degree {F.degree}")
    if not is_real(F, tol):
        raise ValidationError("2-form is not real under rho(j)")
    H = hyperhermitian_from_two_form(F, tol)
    nu, _ = eigen_hyperhermitian(H)
    return bool(nu[0] >= -tol), nu


def positivity_certificate_2nform(F: Form, tol: float = 1e-9) -> bool:
    c = complex(delta_n_coeff(F))
    return abs(c.imag) <= tol and c.real >= -tol


# ================================
# Pullbacks
# ================================


def pullback(F: Form, g: QuatMatrix) -> Form:
    """Pull F back along the quaternionic map g: H^m -> H^k (a k x m matrix).

    The coframe transforms as w~^p -> sum_j tau(g)_pj w^j.
    """
    if F.n != g.rows:
        raise ValidationError(f"form lives on n={F.n}, map has {g.rows} rows")
    m = g.cols
    T = tau(g)
    images = [Form(m, 1, {(j,): complex(T[p, j]) for j in range(2 * m)}) for p in range(2 * F.n)]
    out = Form(m, F.degree)
    for I, c in F.coeffs.items():
        term = Form.scalar(m, c)
        for p in I:
            term = wedge(term, images[p])
        out = out + term
    return out


def elementary_strongly_positive(M: QuatMatrix) -> Form:
    k = M.rows
    rank = np.linalg.matrix_rank(tau(M))
    if rank != 2 * k:
        raise ValidationError(f"tau(M) has rank {rank}, expected {2 * k}")
    return pullback(omega_top(k), M)


def positivity_certificate_2kform(F: Form, rng: np.random.Generator, samples: int = 32,
                                  tol: float = 1e-9) -> Tuple[bool, float]:
    """One-sided test: pair F with random elementary strongly positive complements.

    A positive 2k-form pairs nonnegatively with every strongly positive
    (2n-2k)-form; a negative pairing disproves positivity. Returns the verdict
    and the smallest pairing seen.
    """
    if F.degree % 2:
        raise ValidationError("positivity is defined for even-degree forms")
    n, k = F.n, F.degree // 2
    if k == n:
        value = complex(delta_n_coeff(F)).real
        return positivity_certificate_2nform(F, tol), value
    worst = math.inf
    for _ in range(samples):
        if k == 0:
            value = complex(F.coefficient(())).real
        else:
            M = random_quat_matrix(n - k, n, rng)
            value = complex(delta_n_coeff(wedge(F, elementary_strongly_positive(M)))).real
        worst = min(worst, value)
    scale = max(1.0, F.max_abs())
    passed = worst >= -tol * scale
    if not passed:
        logger.warning(f"2{k}-form pairs negatively with a strongly positive complement ({worst:.3e})")
    return passed, worst
