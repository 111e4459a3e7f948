"""1-D rules, tensor-grid chunking and closed-form sphere moments."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Sequence, Tuple

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import gamma

from config import GAUSS_ORDER, GRID_CHUNK, MAX_GRID_POINTS
from qmahg.errors import ValidationError

logger = logging.getLogger(__name__)

Rule = Tuple[np.ndarray, np.ndarray]


def gauss_panels(a: float, b: float, cells: int, order: int = GAUSS_ORDER) -> Rule:
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    if cells < 1:
        raise ValidationError("need at least one panel")
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, cells + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def midpoint_rule(a: float, b: float, points: int) -> Rule:
    h = (b - a) / points
    return a + h * (np.arange(points) + 0.5), np.full(points, h)


def trapezoid_rule(a: float, b: float, points: int) -> Rule:
    if points < 2:
        raise ValidationError("the trapezoid rule needs at least 2 points")
    nodes = np.linspace(a, b, points)
    h = (b - a) / (points - 1)
    weights = np.full(points, h)
    weights[0] = weights[-1] = 0.5 * h
    return nodes, weights


def rule_for(name: str, a: float, b: float, points: int) -> Rule:
    if name == "midpoint":
        return midpoint_rule(a, b, points)
    if name == "trapezoid":
        return trapezoid_rule(a, b, points)
    raise ValidationError(f"unknown quadrature rule '{name}'")


def tensor_size(rules: Sequence[Rule]) -> int:
    return int(np.prod([len(nodes) for nodes, _ in rules]))


def tensor_chunks(rules: Sequence[Rule], chunk: int = GRID_CHUNK) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (points, weights) blocks of the tensor grid in C order."""
    shape = tuple(len(nodes) for nodes, _ in rules)
    total = tensor_size(rules)
    if total > MAX_GRID_POINTS:
        raise ValidationError(f"grid of {total} points exceeds the limit of {MAX_GRID_POINTS}")
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        idx = np.unravel_index(flat, shape)
        points = np.stack([rules[d][0][idx[d]] for d in range(len(rules))], axis=1)
        weights = np.ones(flat.size)
        for d in range(len(rules)):
            weights = weights * rules[d][1][idx[d]]
        yield points, weights


def sphere_monomial_integral(alpha: Sequence[int]) -> float:
    """Integral of w^alpha over the unit sphere in R^d, d = len(alpha)."""
    if any(a % 2 for a in alpha):
        return 0.0
    d = len(alpha)
    num = 2.0 * math.prod(gamma((a + 1) / 2.0) for a in alpha)
    return float(num / gamma((sum(alpha) + d) / 2.0))


def gauge_ball_monomial_integral(alpha: Sequence[int], beta: int, r: float) -> float:
    """Integral of x^alpha t^beta over the gauge ball ||(x, t)|| < r centered at the origin.

    With |x| = R sqrt(cos phi), t = R^2 sin phi the ball is R < r and the
    measure is |x|^(d-1) d|x| dt dsigma = R^(d+1) cos(phi)^(d/2 - 1) dR dphi dsigma.
    """
    d = len(alpha)
    sphere = sphere_monomial_integral(alpha)
    if sphere == 0.0 or beta % 2:
        return 0.0
    a = sum(alpha)
    power = a + d + 2 + 2 * beta
    radial = r ** power / power
    angular = float(beta_fn((a + d) / 4.0, (beta + 1) / 2.0))
    return sphere * radial * angular


@dataclass
class QuadratureResult:
    """Values over successive refinements; `value` is the finest one."""

    levels: List[float] = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.levels[-1]

    @property
    def change(self) -> float:
        """Relative change between the last two levels (0 with a single level)."""
        if len(self.levels) < 2:
            return 0.0
        prev, last = self.levels[-2], self.levels[-1]
        return abs(last - prev) / max(abs(last), 1e-300)
