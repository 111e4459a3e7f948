"""
Left-invariant vector fields on the group and their commutators.

Indices: X(a) with a in 1..4n; Z(A, p) with A in 0..2n-1 and p in {0, 1};
W(j), Wbar(j) with j in 1..2n; Q(l), Qbar(l) with l in 0..n-1.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from qmahg.engine.polynomial import PolyScalar, PolySpace, QuaternionPoly, coordinates
from qmahg.engine.quaternion import UNITS
from qmahg.errors import ValidationError

logger = logging.getLogger(__name__)

FIELD_KINDS = ("X", "Dt", "Z", "W", "Wbar", "Q", "Qbar")


@dataclass(frozen=True)
class VectorFieldId:
    kind: str
    index: int = 0
    prime: int = 0

    @classmethod
    def X(cls, a: int) -> "VectorFieldId":
        return cls("X", a)

    @classmethod
    def Dt(cls) -> "VectorFieldId":
        return cls("Dt")

    @classmethod
    def Z(cls, A: int, prime: int) -> "VectorFieldId":
        return cls("Z", A, prime)

    @classmethod
    def W(cls, j: int) -> "VectorFieldId":
        return cls("W", j)

    @classmethod
    def Wbar(cls, j: int) -> "VectorFieldId":
        return cls("Wbar", j)

    @classmethod
    def Q(cls, l: int) -> "VectorFieldId":
        return cls("Q", l)

    @classmethod
    def Qbar(cls, l: int) -> "VectorFieldId":
        return cls("Qbar", l)

    def validate(self, n: int) -> None:
        if self.kind not in FIELD_KINDS:
            raise ValidationError(f"unknown vector field kind '{self.kind}'")
        ranges = {
            "X": range(1, 4 * n + 1),
            "Dt": range(0, 1),
            "Z": range(0, 2 * n),
            "W": range(1, 2 * n + 1),
            "Wbar": range(1, 2 * n + 1),
            "Q": range(0, n),
            "Qbar": range(0, n),
        }
        if self.index not in ranges[self.kind]:
            raise ValidationError(f"{self} out of range for n={n}")
        if self.kind == "Z" and self.prime not in (0, 1):
            raise ValidationError(f"Z prime index must be 0 or 1, got {self.prime}")

    @property
    def quaternionic(self) -> bool:
        return self.kind in ("Q", "Qbar")

    def __str__(self) -> str:
        if self.kind == "Dt":
            return "Dt"
        if self.kind == "Z":
            return f"Z({self.index},{self.prime}')"
        return f"{self.kind}({self.index})"


def _apply_x(space: PolySpace, a: int, u: PolyScalar) -> PolyScalar:
    # X_{2l-1} = d/dx_{2l-1} - 2 x_{2l} d/dt ; X_{2l} = d/dx_{2l} + 2 x_{2l-1} d/dt
    du_dt = u.diff(space.t_index)
    if a % 2:
        partner = PolyScalar.variable(space, a)
        return u.diff(a - 1) - 2 * partner * du_dt
    partner = PolyScalar.variable(space, a - 2)
    return u.diff(a - 1) + 2 * partner * du_dt


def expansion(field: VectorFieldId, n: int) -> List[Tuple[complex, VectorFieldId]]:
    """Complex coefficients of a scalar field in the frame {X_a, Dt}."""
    field.validate(n)
    X = VectorFieldId.X
    if field.kind in ("X", "Dt"):
        return [(1, field)]
    if field.kind == "Z":
        A, p = field.index, field.prime
        l = A % n
        if A < n:
            if p == 0:
                return [(1, X(4 * l + 1)), (1j, X(4 * l + 2))]
            return [(-1, X(4 * l + 3)), (-1j, X(4 * l + 4))]
        if p == 0:
            return [(1, X(4 * l + 3)), (-1j, X(4 * l + 4))]
        return [(1, X(4 * l + 1)), (-1j, X(4 * l + 2))]
    j = field.index
    if field.kind == "W":
        return [(1, X(2 * j - 1)), (-1j, X(2 * j))]
    if field.kind == "Wbar":
        return [(1, X(2 * j - 1)), (1j, X(2 * j))]
    raise ValidationError(f"{field} is quaternion-valued; use apply_quaternionic")


def apply(field: VectorFieldId, u):
    """Apply a field to a polynomial.

    Scalar fields return a PolyScalar. Q(l) and Qbar(l) return a
    QuaternionPoly and accept real polynomials or quaternion polynomials.
    """
    space = u.space
    n = space.n
    if field.quaternionic:
        field.validate(n)
        return apply_quaternionic(field, u if isinstance(u, QuaternionPoly) else _real_quaternion(u))
    result = None
    for coeff, basis in expansion(field, n):
        if basis.kind == "Dt":
            term = u.diff(space.t_index)
        else:
            term = _apply_x(space, basis.index, u)
        term = term if coeff == 1 else coeff * term
        result = term if result is None else result + term
    return result


def _real_quaternion(u: PolyScalar) -> QuaternionPoly:
    if not u.is_real():
        raise ValidationError("Q and Qbar act on real polynomials or quaternion polynomials")
    return QuaternionPoly.from_scalar(u)


def apply_quaternionic(field: VectorFieldId, f: QuaternionPoly) -> QuaternionPoly:
    """Qbar_l f = sum_k e_k X_{4l+k+1} f and Q_l f = sum_k conj(e_k) X_{4l+k+1} f."""
    space = f.space
    l = field.index
    out = QuaternionPoly.zero(space)
    for k, unit in enumerate(UNITS):
        if field.kind == "Q":
            unit = unit.conj()
        derivative = f.map(lambda c: _apply_x(space, 4 * l + k + 1, c))
        out = out + unit * derivative
    return out


def apply_word(fields: Sequence[VectorFieldId], u: PolyScalar) -> PolyScalar:
    """Apply fields right to left: apply_word([F, G], u) = F(G(u))."""
    for field in reversed(fields):
        u = apply(field, u)
    return u


@dataclass(frozen=True)
class FirstOrderOperator:
    """sum_v c_v d/d(coordinate v) with polynomial coefficients."""

    space: PolySpace
    coeffs: Tuple[PolyScalar, ...]

    @classmethod
    def dt(cls, space: PolySpace, c=1) -> "FirstOrderOperator":
        zero = PolyScalar.zero(space)
        coeffs = [zero] * space.ngens
        coeffs[space.t_index] = PolyScalar.constant(space, c)
        return cls(space, tuple(coeffs))

    @classmethod
    def zero(cls, space: PolySpace) -> "FirstOrderOperator":
        return cls(space, (PolyScalar.zero(space),) * space.ngens)

    def __call__(self, u: PolyScalar) -> PolyScalar:
        out = PolyScalar.zero(self.space)
        for v, c in enumerate(self.coeffs):
            if c:
                out = out + c * u.diff(v)
        return out

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def dt_multiple(self):
        """The constant c when the operator is c * Dt, otherwise None."""
        t = self.space.t_index
        if any(c for v, c in enumerate(self.coeffs) if v != t):
            return None
        c = self.coeffs[t]
        if not c.is_constant():
            return None
        return c.constant_value()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FirstOrderOperator):
            return NotImplemented
        return self.space == other.space and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None


def commutator(f: VectorFieldId, g: VectorFieldId, space: PolySpace) -> FirstOrderOperator:
    """[f, g] read off from its action on the coordinate functions."""
    coeffs = []
    for x in coordinates(space):
        coeffs.append(apply(f, apply(g, x)) - apply(g, apply(f, x)))
    return FirstOrderOperator(space, tuple(coeffs))


def bracket_table(n: int, mode: str = "rational") -> Dict[Tuple[VectorFieldId, VectorFieldId], FirstOrderOperator]:
    """All commutators among {X_a, Dt} and among {Z(A, p)}."""
    space = PolySpace.group(n, mode)
    horizontal = [VectorFieldId.X(a) for a in range(1, 4 * n + 1)] + [VectorFieldId.Dt()]
    zs = [VectorFieldId.Z(A, p) for A in range(2 * n) for p in (0, 1)]
    table = {}
    for family in (horizontal, zs):
        for f, g in itertools.combinations(family, 2):
            table[(f, g)] = commutator(f, g, space)
    logger.debug(f"bracket table for n={n}: {len(table)} pairs")
    return table


def expected_bracket(f: VectorFieldId, g: VectorFieldId, n: int):
    """Closed-form Dt multiple of [f, g] for the frame and Z families."""
    if f.kind == "X" and g.kind == "X":
        a, b = f.index, g.index
        if a % 2 and b == a + 1:
            return 4
        if b % 2 and a == b + 1:
            return -4
        return 0
    if f.kind == "Z" and g.kind == "Z":
        if f.prime == g.prime or abs(f.index - g.index) != n:
            return 0
        return -8j if f.prime == 0 else 8j
    return 0
