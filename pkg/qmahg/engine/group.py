"""
Group law, dilations and the Koranyi gauge, on points, arrays and polynomials.

(x, t)(y, s) = (x + y, t + s + 2 <x, y>) with
<x, y> = sum_m x_{2m-1} y_{2m} - x_{2m} y_{2m-1}.
"""
from __future__ import annotations

import logging
from fractions import Fraction
from typing import Sequence

import numpy as np

from qmahg.engine.polynomial import PolyScalar, PolySpace, coordinates
from qmahg.errors import ValidationError
from qmahg.models import GroupPoint

logger = logging.getLogger(__name__)


def symplectic(x: Sequence, y: Sequence):
    if len(x) != len(y):
        raise ValidationError(f"dimension mismatch: {len(x)} vs {len(y)}")
    total = 0
    for m in range(0, len(x), 2):
        total = total + x[m] * y[m + 1] - x[m + 1] * y[m]
    return total


def group_mul(p: GroupPoint, q: GroupPoint) -> GroupPoint:
    if p.n != q.n:
        raise ValidationError(f"points live in different groups: n={p.n} vs n={q.n}")
    x = tuple(a + b for a, b in zip(p.x, q.x))
    return GroupPoint(x=x, t=p.t + q.t + 2 * symplectic(p.x, q.x))


def group_inv(p: GroupPoint) -> GroupPoint:
    return GroupPoint(x=tuple(-a for a in p.x), t=-p.t)


def dilate(r, p: GroupPoint) -> GroupPoint:
    if not r > 0:
        raise ValidationError(f"dilation factor must be positive, got {r}")
    return GroupPoint(x=tuple(r * a for a in p.x), t=r * r * p.t)


def koranyi_norm(p: GroupPoint) -> float:
    x2 = sum(float(a) ** 2 for a in p.x)
    return (x2 * x2 + float(p.t) ** 2) ** 0.25


def homogeneous_dimension(n: int) -> int:
    return 4 * n + 2


# ================================
# Batched versions: rows are (x_1..x_4n, t)
# ================================


def symplectic_array(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return (x[..., 0::2] * y[..., 1::2] - x[..., 1::2] * y[..., 0::2]).sum(axis=-1)


def group_mul_array(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    P, Q = np.asarray(P, dtype=np.float64), np.asarray(Q, dtype=np.float64)
    P, Q = np.broadcast_arrays(P, Q)
    out = P + Q
    out[..., -1] += 2 * symplectic_array(P[..., :-1], Q[..., :-1])
    return out


def group_inv_array(P: np.ndarray) -> np.ndarray:
    return -np.asarray(P, dtype=np.float64)


def koranyi_norm_array(P: np.ndarray) -> np.ndarray:
    P = np.asarray(P, dtype=np.float64)
    x2 = (P[..., :-1] ** 2).sum(axis=-1)
    return (x2 * x2 + P[..., -1] ** 2) ** 0.25


def dilate_array(r: float, P: np.ndarray) -> np.ndarray:
    P = np.array(P, dtype=np.float64)
    P[..., :-1] *= r
    P[..., -1] *= r * r
    return P


# ================================
# Polynomials
# ================================


def left_translate_poly(u: PolyScalar, eta: GroupPoint) -> PolyScalar:
    """The polynomial xi -> u(eta . xi)."""
    space = u.space
    if eta.n != space.n:
        raise ValidationError(f"translation by an n={eta.n} point on an n={space.n} polynomial")
    xs = coordinates(space)
    x, t = xs[:-1], xs[-1]
    images = [x[a] + eta.x[a] for a in range(len(x))]
    images.append(t + eta.t + 2 * symplectic(list(eta.x), x))
    return u.compose(images)


def dilate_poly(u: PolyScalar, r) -> PolyScalar:
    """The polynomial xi -> u(delta_r xi)."""
    if not r > 0:
        raise ValidationError(f"dilation factor must be positive, got {r}")
    xs = coordinates(u.space)
    return u.compose([r * c for c in xs[:-1]] + [r * r * xs[-1]])


def squared_norm(space: PolySpace, center: GroupPoint = None) -> PolyScalar:
    """|x - x0|^2."""
    xs = coordinates(space)[:-1]
    c = center.x if center is not None else (0,) * len(xs)
    out = PolyScalar.zero(space)
    for a, xa in enumerate(xs):
        out = out + (xa - c[a]) ** 2
    return out


def gauge_quartic(space: PolySpace, center: GroupPoint, r) -> PolyScalar:
    """||center^-1 xi||^4 - r^4, vanishing on the boundary of the gauge ball."""
    xs = coordinates(space)
    x, t = xs[:-1], xs[-1]
    shifted = [x[a] - center.x[a] for a in range(len(x))]
    s = t - center.t - 2 * symplectic(list(center.x), x)
    x2 = PolyScalar.zero(space)
    for c in shifted:
        x2 = x2 + c * c
    return x2 * x2 + s * s - r ** 4


def random_group_point(n: int, rng: np.random.Generator, exact: bool = False, scale: float = 1.0) -> GroupPoint:
    if exact:
        coords = [Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4))) for _ in range(4 * n + 1)]
    else:
        coords = [float(v) for v in scale * rng.uniform(-1.0, 1.0, size=4 * n + 1)]
    return GroupPoint.from_coords(coords)

