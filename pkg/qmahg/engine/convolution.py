"""
Left regularization chi_eps * u of sampled fields and their finite-difference
derivatives along left-invariant fields.

(chi_eps * u)(xi) = integral of chi_eps(y) u(y^-1 xi) dV(y), with the bump
chi(xi) = (1 - ||xi||^4)^4 on the unit gauge ball. The integral is a scrambled
Sobol sum whose weights are normalized to total mass one. Only this left
regularization is offered; the convolution on this group is not commutative.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from config import FD_STEP, GRID_CHUNK, MOLLIFIER_SAMPLES_LOG2
from qmahg.engine.fields import VectorFieldId
from qmahg.engine.group import dilate_array, group_mul_array
from qmahg.engine.hessian import assemble_hessian
from qmahg.engine.polynomial import PolyScalar
from qmahg.engine.quaternion import HyperhermitianMatrix
from qmahg.errors import ValidationError
from qmahg.models import BoxDomain

logger = logging.getLogger(__name__)


def bump(P: np.ndarray) -> np.ndarray:
    """chi at the rows of P; zero outside the open unit gauge ball."""
    P = np.asarray(P, dtype=np.float64)
    x2 = (P[..., :-1] ** 2).sum(axis=-1)
    quartic = x2 * x2 + P[..., -1] ** 2
    return np.where(quartic < 1.0, (1.0 - quartic) ** 4, 0.0)


class SampledField:
    """A real function on the group known only through evaluation at points."""

    def __init__(self, n: int, fn: Callable[[np.ndarray], np.ndarray], domain: Optional[BoxDomain] = None,
                 label: str = ""):
        self.n = n
        self.fn = fn
        self.domain = domain
        self.label = label

    @property
    def dim(self) -> int:
        return 4 * self.n + 1

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[1] != self.dim:
            raise ValidationError(f"{self.label or 'field'} takes {self.dim} coordinates, got {pts.shape[1]}")
        return np.asarray(self.fn(pts), dtype=np.float64)

    def __repr__(self) -> str:
        return f"SampledField(n={self.n}, {self.label or 'anonymous'})"


def poly_field(u: PolyScalar, domain: Optional[BoxDomain] = None) -> SampledField:
    if not u.is_real():
        raise ValidationError("sampled fields are real")
    return SampledField(u.space.n, u.evaluate_many, domain, label=u.to_expression())


class Mollifier:
    """Quasi-random nodes and weights of chi_eps."""

    def __init__(self, n: int, eps: float, samples_log2: int = MOLLIFIER_SAMPLES_LOG2, seed: int = 0):
        if not eps > 0:
            raise ValidationError(f"eps must be positive, got {eps}")
        if not 1 <= samples_log2 <= 20:
            raise ValidationError(f"samples_log2 must lie in 1..20, got {samples_log2}")
        self.n = n
        self.eps = eps
        sampler = qmc.Sobol(d=4 * n + 1, scramble=True, seed=seed)
        unit = sampler.random_base2(m=samples_log2)
        lower = [-eps] * (4 * n) + [-eps * eps]
        upper = [eps] * (4 * n) + [eps * eps]
        points = qmc.scale(unit, lower, upper)
        weights = bump(dilate_array(1.0 / eps, points))
        keep = weights > 0
        if not keep.any():
            raise ValidationError("no mollifier sample fell inside the support; raise samples_log2")
        self.points = points[keep]
        self.weights = weights[keep] / math.fsum(weights[keep])
        logger.debug(f"mollifier eps={eps}: {int(keep.sum())} of {len(unit)} samples in the support")

    def __len__(self) -> int:
        return len(self.weights)


def _max_abs_x(region: BoxDomain) -> float:
    bounds = region.bounds()[:-1]
    return math.sqrt(sum(max(abs(lo), abs(hi)) ** 2 for lo, hi in bounds))


def _check_support(field: SampledField, region: BoxDomain, eps: float) -> None:
    if field.domain is None:
        return
    grow_x = eps
    grow_t = eps * eps + 2.0 * eps * _max_abs_x(region)
    outer = field.domain.bounds()
    inner = region.bounds()
    for axis, ((lo, hi), (olo, ohi)) in enumerate(zip(inner, outer)):
        grow = grow_t if axis == len(inner) - 1 else grow_x
        if lo - grow < olo or hi + grow > ohi:
            raise ValidationError(
                f"domain too small for eps={eps}: axis {axis} needs [{lo - grow:.4g}, {hi + grow:.4g}] "
                f"inside [{olo:.4g}, {ohi:.4g}]"
            )


def convolve(field: SampledField, eps: float, region: Optional[BoxDomain] = None,
             samples_log2: int = MOLLIFIER_SAMPLES_LOG2, seed: int = 0) -> SampledField:
    """chi_eps * field, to be evaluated on `region`.

    When the field has a domain, `region` enlarged by the support of chi_eps
    must lie inside it.
    """
    if region is not None:
        if region.n != field.n:
            raise ValidationError(f"region lives in n={region.n}, field in n={field.n}")
        _check_support(field, region, eps)
    moll = Mollifier(field.n, eps, samples_log2, seed)
    inverse = -moll.points
    chunk = max(1, GRID_CHUNK // len(moll))

    def regularized(points: np.ndarray) -> np.ndarray:
        out = np.empty(points.shape[0])
        for start in range(0, points.shape[0], chunk):
            block = points[start:start + chunk]
            shifted = group_mul_array(inverse[None, :, :], block[:, None, :])
            values = field(shifted.reshape(-1, field.dim)).reshape(block.shape[0], len(moll))
            out[start:start + chunk] = values @ moll.weights
        return out

    return SampledField(field.n, regularized, region, label=f"chi_{eps:g} * {field.label}")


# ================================
# Finite differences along left-invariant fields
# ================================


def _step(field: VectorFieldId, n: int, h: float) -> np.ndarray:
    field.validate(n)
    step = np.zeros(4 * n + 1)
    if field.kind == "Dt":
        step[-1] = h
    elif field.kind == "X":
        step[field.index - 1] = h
    else:
        raise ValidationError(f"finite differences are taken along X and Dt, not {field}")
    return step


def field_derivative(field: SampledField, word: Sequence[VectorFieldId], points, h: float = FD_STEP) -> np.ndarray:
    """Central differences of F along right translations; word [A, B] gives A(B F)."""
    if hasattr(points, "coords"):
        points = [float(c) for c in points.coords()]
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if len(word) == 1:
        s = _step(word[0], field.n, h)
        return (field(group_mul_array(pts, s)) - field(group_mul_array(pts, -s))) / (2.0 * h)
    if len(word) == 2:
        a, b = _step(word[0], field.n, h), _step(word[1], field.n, h)
        total = 0.0
        for sa in (1.0, -1.0):
            outer = group_mul_array(pts, sa * a)
            for sb in (1.0, -1.0):
                total = total + sa * sb * field(group_mul_array(outer, sb * b))
        return total / (4.0 * h * h)
    raise ValidationError("words of length 1 or 2 only")


def sampled_hessian(field: SampledField, xi, h: float = FD_STEP) -> HyperhermitianMatrix:
    """Hess(F) at xi from finite differences, projected onto its hyperhermitian part."""
    size = 4 * field.n
    X = VectorFieldId.X
    second = np.empty((size, size))
    for a in range(size):
        for b in range(size):
            second[a, b] = field_derivative(field, [X(a + 1), X(b + 1)], xi, h)[0]
    dt = field_derivative(field, [VectorFieldId.Dt()], xi, h)[0]
    H = assemble_hessian(second, dt)
    return HyperhermitianMatrix(((H + H.adjoint()) * 0.5).data)
