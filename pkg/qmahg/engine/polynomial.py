"""
Polynomial scalar fields on the group and on line groups.

PolyScalar wraps a sparse sympy ring element. Rational mode works over the
Gaussian rationals QQ_I so every identity is checked without rounding; float
mode works over CC. Values come back as Fraction in rational mode whenever the
evaluation point is rational and the value real.
"""
from __future__ import annotations

import itertools
import logging
import numbers
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy.polys.domains import CC, QQ_I
from sympy.polys.rings import ring

from config import MAX_N, MAX_POLY_DEGREE, validate_mode
from qmahg.engine.quaternion import Quaternion, quaternion_product
from qmahg.errors import ValidationError

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _make_ring(names: Tuple[str, ...], mode: str):
    domain = QQ_I if mode == "rational" else CC
    logger.debug(f"building polynomial ring {','.join(names)} over {domain}")
    R, *_ = ring(",".join(names), domain)
    return R


@dataclass(frozen=True)
class PolySpace:
    """Variable names and coefficient mode shared by a family of polynomials."""

    names: Tuple[str, ...]
    mode: str = "rational"

    def __post_init__(self):
        validate_mode(self.mode)

    @classmethod
    def group(cls, n: int, mode: str = "rational") -> "PolySpace":
        if not 1 <= n <= MAX_N:
            raise ValidationError(f"n must lie in 1..{MAX_N}, got {n}")
        return cls(tuple(f"x{a}" for a in range(1, 4 * n + 1)) + ("t",), mode)

    @classmethod
    def line(cls, mode: str = "rational") -> "PolySpace":
        return cls(("l1", "l2", "l3", "l4", "t"), mode)

    @property
    def ring(self):
        return _make_ring(self.names, self.mode)

    @property
    def domain(self):
        return self.ring.domain

    @property
    def exact(self) -> bool:
        return self.mode == "rational"

    @property
    def ngens(self) -> int:
        return len(self.names)

    @property
    def t_index(self) -> int:
        return self.ngens - 1

    @property
    def n(self) -> int:
        return (self.ngens - 1) // 4

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown variable '{name}' (expected one of {', '.join(self.names)})")

    def with_mode(self, mode: str) -> "PolySpace":
        return PolySpace(self.names, mode)


def _sympy_rational(value) -> sympy.Rational:
    f = Fraction(value)
    return sympy.Rational(f.numerator, f.denominator)


def _domain_element(space: PolySpace, value):
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, sympy.Basic):
        return space.domain.from_sympy(value if space.exact else sympy.N(value))
    if space.exact:
        if isinstance(value, numbers.Integral):
            return space.domain.from_sympy(sympy.Integer(int(value)))
        if isinstance(value, numbers.Rational):
            return space.domain.from_sympy(_sympy_rational(value))
        if isinstance(value, numbers.Real):
            return space.domain.from_sympy(_sympy_rational(float(value)))
        if isinstance(value, numbers.Complex):
            z = complex(value)
            return space.domain.from_sympy(_sympy_rational(z.real) + sympy.I * _sympy_rational(z.imag))
    elif isinstance(value, numbers.Complex):
        z = complex(value)
        return space.domain.from_sympy(sympy.Float(z.real) + sympy.I * sympy.Float(z.imag))
    raise ValidationError(f"cannot use {value!r} as a polynomial coefficient")


def _py_number(x, exact: bool):
    if exact and x.is_Rational:
        return Fraction(int(x.p), int(x.q))
    return float(x)


def _fmt_real(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return repr(float(v))


class PolyScalar:
    __slots__ = ("space", "poly", "_parts_cache")
    __array_ufunc__ = None

    def __init__(self, space: PolySpace, poly):
        self.space = space
        self.poly = poly
        self._parts_cache = None

    # --- construction ---

    @classmethod
    def constant(cls, space: PolySpace, c) -> "PolyScalar":
        return cls(space, space.ring.ground_new(_domain_element(space, c)))

    @classmethod
    def zero(cls, space: PolySpace) -> "PolyScalar":
        return cls(space, space.ring.zero)

    @classmethod
    def variable(cls, space: PolySpace, which) -> "PolyScalar":
        index = space.index(which) if isinstance(which, str) else int(which)
        if not 0 <= index < space.ngens:
            raise ValidationError(f"variable index {index} out of range")
        return cls(space, space.ring.gens[index])

    @classmethod
    def from_terms(cls, space: PolySpace, terms: Dict[Tuple[int, ...], object]) -> "PolyScalar":
        poly = space.ring.zero
        for monom, c in terms.items():
            if len(monom) != space.ngens:
                raise ValidationError(f"exponent {monom} does not match {space.ngens} variables")
            poly = poly + space.ring.term_new(tuple(int(e) for e in monom), _domain_element(space, c))
        out = cls(space, poly)
        out._check_degree()
        return out

    # --- bookkeeping ---

    def _check_degree(self) -> None:
        if self.degree() > MAX_POLY_DEGREE:
            raise ValidationError(f"polynomial degree {self.degree()} exceeds {MAX_POLY_DEGREE}")

    def _parts(self) -> List[Tuple[Tuple[int, ...], Tuple]]:
        if self._parts_cache is None:
            dom, exact = self.space.domain, self.space.exact
            parts = []
            for monom, c in self.poly.iterterms():
                re, im = dom.to_sympy(c).as_real_imag()
                parts.append((tuple(monom), (_py_number(re, exact), _py_number(im, exact))))
            parts.sort()
            self._parts_cache = parts
        return self._parts_cache

    def _wrap(self, poly) -> "PolyScalar":
        out = PolyScalar(self.space, poly)
        out._check_degree()
        return out

    def _coerce(self, other):
        if isinstance(other, PolyScalar):
            if other.space != self.space:
                raise ValidationError(f"polynomials live in different spaces: {self.space} vs {other.space}")
            return other.poly
        if isinstance(other, numbers.Number) or isinstance(other, sympy.Basic):
            return self.space.ring.ground_new(_domain_element(self.space, other))
        return None

    def degree(self) -> int:
        return max((sum(m) for m in self.poly.itermonoms()), default=0)

    def terms(self) -> List[Tuple[Tuple[int, ...], object]]:
        """Sorted (exponent, coefficient) pairs; coefficients real when possible."""
        out = []
        for monom, (re, im) in self._parts():
            out.append((monom, re if im == 0 else complex(re, im)))
        return out

    def coefficient(self, monom: Sequence[int]):
        for m, c in self.terms():
            if m == tuple(monom):
                return c
        return 0

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.poly.itermonoms())

    def constant_value(self):
        return self.coefficient((0,) * self.space.ngens)

    def is_real(self) -> bool:
        return all(im == 0 for _, (_, im) in self._parts())

    def max_abs(self) -> float:
        return max((abs(complex(float(re), float(im))) for _, (re, im) in self._parts()), default=0.0)

    # --- arithmetic ---

    def __bool__(self) -> bool:
        return bool(self.poly)

    def __add__(self, other):
        p = self._coerce(other)
        return NotImplemented if p is None else self._wrap(self.poly + p)

    __radd__ = __add__

    def __sub__(self, other):
        p = self._coerce(other)
        return NotImplemented if p is None else self._wrap(self.poly - p)

    def __rsub__(self, other):
        p = self._coerce(other)
        return NotImplemented if p is None else self._wrap(p - self.poly)

    def __mul__(self, other):
        p = self._coerce(other)
        return NotImplemented if p is None else self._wrap(self.poly * p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, numbers.Number):
            return NotImplemented
        if self.space.exact and isinstance(other, numbers.Rational):
            return self * (Fraction(1) / Fraction(other))
        return self * (1 / complex(other))

    def __neg__(self) -> "PolyScalar":
        return PolyScalar(self.space, -self.poly)

    def __pow__(self, k: int) -> "PolyScalar":
        if not isinstance(k, numbers.Integral) or k < 0:
            raise ValidationError("polynomial powers must be non-negative integers")
        if k * self.degree() > MAX_POLY_DEGREE:
            raise ValidationError(f"polynomial degree {k * self.degree()} exceeds {MAX_POLY_DEGREE}")
        return PolyScalar(self.space, self.poly ** int(k))

    def __eq__(self, other) -> bool:
        p = self._coerce(other)
        if p is None:
            return NotImplemented
        return self.poly == p

    def __hash__(self):
        return hash((self.space, tuple(self._parts())))

    # --- calculus ---

    def diff(self, which) -> "PolyScalar":
        index = self.space.index(which) if isinstance(which, str) else int(which)
        return PolyScalar(self.space, self.poly.diff(self.space.ring.gens[index]))

    def conjugate(self) -> "PolyScalar":
        return self._from_parts({m: (re, -im) for m, (re, im) in self._parts()})

    def real_part(self) -> "PolyScalar":
        return self._from_parts({m: (re, 0) for m, (re, im) in self._parts()})

    def imag_part(self) -> "PolyScalar":
        return self._from_parts({m: (im, 0) for m, (re, im) in self._parts()})

    def _from_parts(self, parts: Dict[Tuple[int, ...], Tuple]) -> "PolyScalar":
        R, dom = self.space.ring, self.space.domain
        poly = R.zero
        for monom, (re, im) in parts.items():
            if self.space.exact:
                value = _sympy_rational(re) + sympy.I * _sympy_rational(im)
            else:
                value = sympy.Float(float(re)) + sympy.I * sympy.Float(float(im))
            c = dom.from_sympy(value)
            if c:
                poly = poly + R.term_new(monom, c)
        return PolyScalar(self.space, poly)

    def compose(self, images: Sequence["PolyScalar"]) -> "PolyScalar":
        """Substitute images[i] for variable i; images may live in another space."""
        if len(images) != self.space.ngens:
            raise ValidationError(f"expected {self.space.ngens} images, got {len(images)}")
        target = images[0].space
        if target.mode != self.space.mode:
            raise ValidationError("cannot compose polynomials of different modes")
        powers: Dict[Tuple[int, int], object] = {}
        acc = target.ring.zero
        for monom, c in self.poly.iterterms():
            term = target.ring.ground_new(c)
            for i, e in enumerate(monom):
                if e:
                    if (i, e) not in powers:
                        powers[(i, e)] = images[i].poly ** e
                    term = term * powers[(i, e)]
            acc = acc + term
        out = PolyScalar(target, acc)
        out._check_degree()
        return out

    # --- evaluation ---

    def evaluate(self, point):
        coords = tuple(point.coords()) if hasattr(point, "coords") else tuple(point)
        if len(coords) != self.space.ngens:
            raise ValidationError(f"point has {len(coords)} coordinates, expected {self.space.ngens}")
        exact = self.space.exact and all(isinstance(c, numbers.Rational) for c in coords)
        if exact:
            coords = tuple(Fraction(c) for c in coords)
            re_sum, im_sum = Fraction(0), Fraction(0)
        else:
            coords = tuple(float(c) for c in coords)
            re_sum, im_sum = 0.0, 0.0
        for monom, (re, im) in self._parts():
            m = Fraction(1) if exact else 1.0
            for x, e in zip(coords, monom):
                if e:
                    m *= x ** e
            if not exact:
                re, im = float(re), float(im)
            re_sum += re * m
            im_sum += im * m
        if im_sum == 0:
            return re_sum
        return complex(re_sum, im_sum)

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized float evaluation at the rows of `points`."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.space.ngens:
            raise ValidationError(f"expected points of shape (N, {self.space.ngens}), got {pts.shape}")
        out = np.zeros(pts.shape[0], dtype=np.complex128)
        for monom, (re, im) in self._parts():
            val = np.ones(pts.shape[0])
            for axis, e in enumerate(monom):
                if e:
                    val = val * pts[:, axis] ** e
            out += complex(float(re), float(im)) * val
        return out.real if self.is_real() else out

    # --- text ---

    def to_expression(self) -> str:
        """Text in the input grammar; complex coefficients are written (a+b*i)."""
        pieces = []
        for monom, (re, im) in sorted(self._parts(), key=lambda p: (-sum(p[0]), p[0])):
            factors = []
            for name, e in zip(self.space.names, monom):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            sign = ""
            if im == 0:
                if re < 0:
                    sign, re = "-", -re
                coeff = _fmt_real(re)
                if coeff in ("1", "1.0") and factors:
                    coeff = ""
            elif re == 0:
                coeff = f"({_fmt_real(im)}*i)"
            else:
                op = "-" if im < 0 else "+"
                coeff = f"({_fmt_real(re)}{op}{_fmt_real(abs(im))}*i)"
            body = "*".join(([coeff] if coeff else []) + factors)
            pieces.append((sign, body))
        if not pieces:
            return "0"
        text = pieces[0][0] + pieces[0][1]
        for sign, body in pieces[1:]:
            text += f" {sign or '+'} {body}"
        return text

    def to_sympy(self):
        return self.poly.as_expr()

    def __repr__(self) -> str:
        return f"PolyScalar({self.to_expression()})"

    __str__ = to_expression


class QuaternionPoly:
    """A quaternion-valued polynomial c0 + c1 i + c2 j + c3 k."""

    __slots__ = ("components",)
    __array_ufunc__ = None

    def __init__(self, components: Sequence[PolyScalar]):
        components = tuple(components)
        if len(components) != 4:
            raise ValidationError("quaternion polynomials have 4 components")
        self.components = components

    @classmethod
    def zero(cls, space: PolySpace) -> "QuaternionPoly":
        z = PolyScalar.zero(space)
        return cls((z, z, z, z))

    @classmethod
    def from_scalar(cls, u: PolyScalar) -> "QuaternionPoly":
        z = PolyScalar.zero(u.space)
        return cls((u, z, z, z))

    @property
    def space(self) -> PolySpace:
        return self.components[0].space

    def __add__(self, other: "QuaternionPoly") -> "QuaternionPoly":
        return QuaternionPoly(a + b for a, b in zip(self.components, other.components))

    def __sub__(self, other: "QuaternionPoly") -> "QuaternionPoly":
        return QuaternionPoly(a - b for a, b in zip(self.components, other.components))

    def __neg__(self) -> "QuaternionPoly":
        return QuaternionPoly(-a for a in self.components)

    def __mul__(self, other):
        if isinstance(other, QuaternionPoly):
            return QuaternionPoly(quaternion_product(self.components, other.components))
        if isinstance(other, Quaternion):
            return QuaternionPoly(quaternion_product(self.components, other.components()))
        return QuaternionPoly(c * other for c in self.components)

    def __rmul__(self, other):
        if isinstance(other, Quaternion):
            return QuaternionPoly(quaternion_product(other.components(), self.components))
        return QuaternionPoly(other * c for c in self.components)

    def conj(self) -> "QuaternionPoly":
        c0, c1, c2, c3 = self.components
        return QuaternionPoly((c0, -c1, -c2, -c3))

    def map(self, fn) -> "QuaternionPoly":
        return QuaternionPoly(fn(c) for c in self.components)

    def is_zero(self) -> bool:
        return not any(self.components)

    def complex_pair(self) -> Tuple[PolyScalar, PolyScalar]:
        """(a, b) with self = a + b j, for real components."""
        c0, c1, c2, c3 = self.components
        return c0 + 1j * c1, c2 + 1j * c3

    def evaluate(self, point) -> Quaternion:
        return Quaternion(*(c.evaluate(point) for c in self.components))

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        return np.stack([np.real(c.evaluate_many(points)) for c in self.components], axis=-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuaternionPoly):
            return NotImplemented
        return all(a == b for a, b in zip(self.components, other.components))

    __hash__ = None

    def __repr__(self) -> str:
        return "QuaternionPoly(" + ", ".join(c.to_expression() for c in self.components) + ")"


def coordinates(space: PolySpace) -> List[PolyScalar]:
    return [PolyScalar.variable(space, i) for i in range(space.ngens)]


def monomials(ngens: int, max_degree: int, min_degree: int = 0) -> List[Tuple[int, ...]]:
    out = []
    for d in range(min_degree, max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(ngens), d):
            exps = [0] * ngens
            for i in combo:
                exps[i] += 1
            out.append(tuple(exps))
    return out


def random_coefficient(rng: np.random.Generator, exact: bool, real: bool = True):
    if exact:
        num = int(rng.integers(1, 6)) * (1 if rng.random() < 0.5 else -1)
        re = Fraction(num, int(rng.integers(1, 4)))
        if real:
            return re
        return complex(re, int(rng.integers(-3, 4)))
    re = float(rng.normal())
    return re if real else complex(re, float(rng.normal()))


def random_polynomial(space: PolySpace, degree: int, rng: np.random.Generator, terms: int = 6,
                      real: bool = True, min_degree: int = 0) -> PolyScalar:
    """A sparse random polynomial of total degree <= `degree`."""
    pool = monomials(space.ngens, degree, min_degree)
    picks = rng.choice(len(pool), size=min(terms, len(pool)), replace=False)
    return PolyScalar.from_terms(
        space, {pool[int(i)]: random_coefficient(rng, space.exact, real) for i in sorted(picks)}
    )
