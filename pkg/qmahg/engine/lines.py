"""
Quaternionic Heisenberg lines.

A frame (eta, q) embeds the 5-dimensional group H_q = {(lam, t)} with
(lam, t)(lam', t') = (lam + lam', t + t' + 2 lam^T B lam') into the group by
(lam, t) -> eta . (q lam, t). Line polynomials use the variables l1..l4, t.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from config import DEGENERACY_TOL, RADIAL_CELLS, REFINEMENT_LEVELS, T_CELLS
from qmahg.engine.fields import VectorFieldId, apply
from qmahg.engine.group import random_group_point, symplectic
from qmahg.engine.hessian import horizontal_hessian
from qmahg.engine.polynomial import PolyScalar, PolySpace, QuaternionPoly, coordinates
from qmahg.engine.quadrature import QuadratureResult, gauss_panels, sphere_monomial_integral
from qmahg.engine.quaternion import J4, QI, Quaternion, quaternion_product, random_quaternion, real_rep
from qmahg.errors import ValidationError
from qmahg.models import GroupPoint, LinePoint, QuadratureSpec

logger = logging.getLogger(__name__)

LINE_NAMES = ("l1", "l2", "l3", "l4", "t")


@dataclass(frozen=True, eq=False)
class LineFrame:
    eta: GroupPoint
    q: Tuple[Quaternion, ...]
    B: np.ndarray
    S: Tuple
    Lambda2: object
    Lambda: float

    @property
    def n(self) -> int:
        return len(self.q)

    @property
    def exact(self) -> bool:
        return all(c.exact for c in self.q)

    def real_blocks(self):
        return [real_rep(c) for c in self.q]


def line_invariants(q: Sequence[Quaternion]) -> Tuple:
    """(S1, S2, S3) of q; the frame is degenerate iff all three vanish."""
    s1 = s2 = s3 = 0
    for c in q:
        x1, x2, x3, x4 = c.components()
        s1 = s1 + x1 * x1 + x2 * x2 - x3 * x3 - x4 * x4
        s2 = s2 + 2 * (-x1 * x4 + x2 * x3)
        s3 = s3 + 2 * (x1 * x3 + x2 * x4)
    return s1, s2, s3


def twist(q: Sequence[Quaternion]) -> Quaternion:
    """sum_l conj(q_l) i q_l, a purely imaginary quaternion of norm Lambda."""
    out = Quaternion(0, 0, 0, 0)
    for c in q:
        out = out + c.conj() * QI * c
    return out


def is_degenerate(q: Sequence[Quaternion], tol: float = DEGENERACY_TOL) -> bool:
    s1, s2, s3 = line_invariants(q)
    return math.sqrt(float(s1 * s1 + s2 * s2 + s3 * s3)) <= tol


def line_frame(eta: GroupPoint, q: Sequence[Quaternion]) -> LineFrame:
    q = tuple(q)
    if len(q) != eta.n:
        raise ValidationError(f"q has {len(q)} entries but eta lives in n={eta.n}")
    if all(c.is_zero() for c in q):
        raise ValidationError("q must be nonzero")
    exact = all(c.exact for c in q)
    B = np.zeros((4, 4), dtype=object if exact else np.float64)
    for c in q:
        R = real_rep(c)
        B = B + R.T.dot(J4).dot(R)
    S = line_invariants(q)
    lam2 = S[0] * S[0] + S[1] * S[1] + S[2] * S[2]
    return LineFrame(eta=eta, q=q, B=B, S=S, Lambda2=lam2, Lambda=math.sqrt(float(lam2)))


def random_line_frame(n: int, rng: np.random.Generator, exact: bool = False,
                      origin: bool = False, scale: float = 1.0) -> LineFrame:
    """A non-degenerate frame with random direction and base point."""
    while True:
        q = tuple(random_quaternion(rng, exact) for _ in range(n))
        if not all(c.is_zero() for c in q) and not is_degenerate(q, 1e-3):
            break
    eta = GroupPoint.origin(n) if origin else random_group_point(n, rng, exact, scale)
    return line_frame(eta, q)


def _require_nondegenerate(frame: LineFrame) -> None:
    if frame.Lambda <= DEGENERACY_TOL:
        raise ValidationError("the frame lies on the degenerate locus (Lambda = 0)")


# ================================
# Points
# ================================


def _apply_q(frame: LineFrame, lam: Sequence) -> Tuple:
    x = []
    for c in frame.q:
        x.extend(quaternion_product(c.components(), tuple(lam)))
    return tuple(x)


def line_embed(frame: LineFrame, p: LinePoint) -> GroupPoint:
    """eta . (q lam, t)."""
    qlam = _apply_q(frame, p.lam)
    eta = frame.eta
    x = tuple(a + b for a, b in zip(eta.x, qlam))
    return GroupPoint(x=x, t=eta.t + p.t + 2 * symplectic(eta.x, qlam))


def line_form(frame: LineFrame, lam: Sequence, mu: Sequence):
    """lam^T B mu."""
    total = 0
    for j in range(4):
        for k in range(4):
            b = frame.B[j, k]
            if b:
                total = total + lam[j] * b * mu[k]
    return total


def line_group_mul(frame: LineFrame, p: LinePoint, p2: LinePoint) -> LinePoint:
    lam = tuple(a + b for a, b in zip(p.lam, p2.lam))
    return LinePoint(lam=lam, t=p.t + p2.t + 2 * line_form(frame, p.lam, p2.lam))


def line_gauge(frame: LineFrame, p: LinePoint) -> float:
    """||(lam, t)||_q = (Lambda^2 |lam|^4 + t^2)^(1/4)."""
    lam2 = sum(float(c) ** 2 for c in p.lam)
    return (float(frame.Lambda2) * lam2 * lam2 + float(p.t) ** 2) ** 0.25


# ================================
# Vector fields on the line group
# ================================


def _check_line_space(v: PolyScalar) -> None:
    if v.space.names != LINE_NAMES:
        raise ValidationError(f"expected a polynomial in {', '.join(LINE_NAMES)}")


def line_field(frame: LineFrame, j: int, v: PolyScalar) -> PolyScalar:
    """X_j v = d v / d l_j + 2 sum_k B_kj l_k d v / dt."""
    if j not in (1, 2, 3, 4):
        raise ValidationError(f"line field index must lie in 1..4, got {j}")
    _check_line_space(v)
    space = v.space
    lam = coordinates(space)[:4]
    out = v.diff(j - 1)
    dt = v.diff(space.t_index)
    if dt:
        for k in range(4):
            b = frame.B[k, j - 1]
            if b:
                out = out + 2 * b * lam[k] * dt
    return out


def line_sublaplacian(frame: LineFrame, v: PolyScalar) -> PolyScalar:
    out = PolyScalar.zero(v.space)
    for j in range(1, 5):
        out = out + line_field(frame, j, line_field(frame, j, v))
    return out


def line_qbar(frame: LineFrame, v: PolyScalar) -> QuaternionPoly:
    """sum_j e_j X_j v."""
    return QuaternionPoly(line_field(frame, j, v) for j in range(1, 5))


# ================================
# Pullback and pushforward
# ================================


def _embedding_images(frame: LineFrame, space: PolySpace):
    lam = coordinates(space)[:4]
    t = coordinates(space)[4]
    images = []
    for block in frame.real_blocks():
        for k in range(4):
            img = PolyScalar.zero(space)
            for j in range(4):
                if block[k, j]:
                    img = img + block[k, j] * lam[j]
            images.append(img)
    eta = frame.eta
    t_image = t + eta.t + 2 * symplectic(list(eta.x), images)
    return [img + e for img, e in zip(images, eta.x)] + [t_image]


def pullback_to_line(frame: LineFrame, u: PolyScalar) -> PolyScalar:
    """The line polynomial (lam, t) -> u(eta . (q lam, t))."""
    if u.space.n != frame.n:
        raise ValidationError(f"an n={u.space.n} polynomial cannot be pulled back along an n={frame.n} line")
    space = PolySpace(LINE_NAMES, u.space.mode)
    return u.compose(_embedding_images(frame, space))


def pullback_quaternion(frame: LineFrame, F: QuaternionPoly) -> QuaternionPoly:
    return F.map(lambda c: pullback_to_line(frame, c))


def pushforward_field(frame: LineFrame, j: int, u: PolyScalar) -> PolyScalar:
    """The group field sum_{l,k} (q_l)_{kj} X_{4l+k} that X_j is carried onto, applied to u."""
    if j not in (1, 2, 3, 4):
        raise ValidationError(f"line field index must lie in 1..4, got {j}")
    out = PolyScalar.zero(u.space)
    for l, block in enumerate(frame.real_blocks()):
        for k in range(4):
            c = block[k, j - 1]
            if c:
                out = out + c * apply(VectorFieldId.X(4 * l + k + 1), u)
    return out


def pushforward_qbar(frame: LineFrame, u: PolyScalar) -> QuaternionPoly:
    """sum_l conj(q_l) Qbar_l u."""
    out = QuaternionPoly.zero(u.space)
    for l, c in enumerate(frame.q):
        out = out + c.conj() * apply(VectorFieldId.Qbar(l), u)
    return out


def line_quadratic_form(frame: LineFrame, u: PolyScalar) -> PolyScalar:
    """Re sum_{l,m} conj(q_l) Hess(u)_lm q_m; its pullback is the line sub-Laplacian of the pullback."""
    H = horizontal_hessian(u)
    total = QuaternionPoly.zero(u.space)
    for l, ql in enumerate(frame.q):
        for m, qm in enumerate(frame.q):
            total = total + ql.conj() * H.entry(l, m) * qm
    return total.components[0]


# ================================
# Fundamental solution
# ================================


def _as_quad(quad: Optional[QuadratureSpec]) -> QuadratureSpec:
    if quad is None:
        return QuadratureSpec(radial_cells=RADIAL_CELLS, t_cells=T_CELLS, refinement_levels=REFINEMENT_LEVELS)
    return quad


def gauge_quartic_line(frame: LineFrame, mode: str = "float") -> PolyScalar:
    """rho_q = Lambda^2 |lam|^4 + t^2 as a line polynomial."""
    space = PolySpace(LINE_NAMES, mode)
    lam = coordinates(space)
    r2 = lam[0] ** 2 + lam[1] ** 2 + lam[2] ** 2 + lam[3] ** 2
    lam2 = frame.Lambda2 if space.exact else float(frame.Lambda2)
    return lam2 * r2 * r2 + lam[4] ** 2


@lru_cache(maxsize=32)
def _rho_derivatives(frame: LineFrame):
    rho = gauge_quartic_line(frame)
    first = [line_field(frame, j, rho) for j in range(1, 5)]
    second = [line_field(frame, j + 1, g) for j, g in enumerate(first)]
    return rho, first, second


def fs_residual(frame: LineFrame, p: LinePoint, eps: float) -> float:
    """Line sub-Laplacian of -1/(rho + eps) at p minus 32 Lambda^2 |lam|^2 eps / (rho + eps)^3."""
    _require_nondegenerate(frame)
    if eps < 0:
        raise ValidationError(f"eps must be non-negative, got {eps}")
    rho, first, second = _rho_derivatives(frame)
    point = tuple(float(c) for c in p.coords())
    d = float(rho.evaluate(point)) + eps
    if d == 0:
        raise ValidationError("the fundamental solution is singular at the origin")
    lap = 0.0
    for g, g2 in zip(first, second):
        gv, g2v = float(g.evaluate(point)), float(g2.evaluate(point))
        lap += g2v / d ** 2 - 2.0 * gv * gv / d ** 3
    lam2 = sum(c * c for c in point[:4])
    closed = 32.0 * float(frame.Lambda2) * lam2 * eps / d ** 3
    return lap - closed


@lru_cache(maxsize=128)
def _cq_inverse(lam: float, radial_cells: int, t_cells: int) -> float:
    # r = tan(theta) / sqrt(Lambda), t = tan(phi); t >= 0 half doubled
    theta, wt = gauss_panels(0.0, math.pi / 2, radial_cells)
    phi, wp = gauss_panels(0.0, math.pi / 2, t_cells)
    r = np.tan(theta) / math.sqrt(lam)
    dr = wt / (np.cos(theta) ** 2 * math.sqrt(lam))
    t = np.tan(phi)
    dt = wp / np.cos(phi) ** 2
    R, T = np.meshgrid(r, t, indexing="ij")
    f = 32.0 * lam ** 2 * R ** 5 / (lam ** 2 * R ** 4 + T ** 2 + 1.0) ** 3
    integral = math.fsum((f * np.outer(dr, dt)).ravel())
    return 2.0 * 2.0 * math.pi ** 2 * integral


def cq_refinement(frame: LineFrame, quad: Optional[QuadratureSpec] = None) -> QuadratureResult:
    """C_q at each refinement level; the cell counts double per level."""
    _require_nondegenerate(frame)
    quad = _as_quad(quad)
    result = QuadratureResult()
    for level in range(quad.refinement_levels + 1):
        scale = 2 ** level
        inv = _cq_inverse(frame.Lambda, quad.radial_cells * scale, quad.t_cells * scale)
        result.levels.append(1.0 / inv)
    logger.info(f"C_q for Lambda={frame.Lambda:.6g}: {result.value:.12g} (relative change {result.change:.2e})")
    return result


def cq_constant(frame: LineFrame, quad: Optional[QuadratureSpec] = None) -> float:
    return cq_refinement(frame, quad).value


def fundamental_solution(frame: LineFrame, p: LinePoint, quad: Optional[QuadratureSpec] = None) -> float:
    """Gamma_q(p) = -C_q / rho_q(p)."""
    _require_nondegenerate(frame)
    rho = line_gauge(frame, p) ** 4
    if rho == 0:
        raise ValidationError("the fundamental solution is singular at the origin")
    return -cq_constant(frame, quad) / rho


# ================================
# Mean values
# ================================


class _GaugePolarRule:
    """Nodes of D_q(0, r) in gauge-polar coordinates after integrating out S^3.

    |lam| = R sqrt(cos phi / Lambda), t = R^2 sin phi. The weights carry the
    kernel Lambda cos(phi) and the Jacobian R^5 cos(phi) / Lambda^2.
    """

    def __init__(self, lam: float, r: float, radial_cells: int, phi_cells: int):
        R, wr = gauss_panels(0.0, r, radial_cells)
        phi, wp = gauss_panels(-math.pi / 2, math.pi / 2, phi_cells)
        RR, PP = np.meshgrid(R, phi, indexing="ij")
        cos = np.cos(PP)
        self.radius = (RR * np.sqrt(cos / lam)).ravel()
        self.t = (RR ** 2 * np.sin(PP)).ravel()
        self.weights = (np.outer(wr, wp) * RR ** 5 * cos ** 2 / lam).ravel()

    def moment(self, a: int, b: int) -> float:
        """Weighted integral of |lam|^a t^b."""
        return math.fsum(self.weights * self.radius ** a * self.t ** b)


@lru_cache(maxsize=128)
def _mq(lam: float, radial_cells: int, phi_cells: int) -> float:
    rule = _GaugePolarRule(lam, 1.0, radial_cells, phi_cells)
    return 1.0 / (2.0 * math.pi ** 2 * rule.moment(0, 0))


def _cells(quad: QuadratureSpec) -> Tuple[int, int]:
    scale = 2 ** quad.refinement_levels
    return quad.radial_cells * scale, quad.t_cells * scale


def mq_constant(frame: LineFrame, quad: Optional[QuadratureSpec] = None) -> float:
    """The normalization m_q with M_r(1) = 1."""
    _require_nondegenerate(frame)
    return _mq(frame.Lambda, *_cells(_as_quad(quad)))


def mean_value(frame: LineFrame, u: PolyScalar, r: float, quad: Optional[QuadratureSpec] = None) -> float:
    """M_r(u)(eta) = (m_q / r^6) * integral over D_q(0, r) of K_q * (u pulled back to the line)."""
    _require_nondegenerate(frame)
    if not r > 0:
        raise ValidationError(f"radius must be positive, got {r}")
    quad = _as_quad(quad)
    v = pullback_to_line(frame, u)
    if not v.is_real():
        raise ValidationError("mean values are taken of real polynomials")
    cells = _cells(quad)
    rule = _GaugePolarRule(frame.Lambda, r, *cells)
    pieces = []
    for monom, c in v.terms():
        alpha, beta = monom[:4], monom[4]
        sphere = sphere_monomial_integral(alpha)
        if sphere and not beta % 2:
            pieces.append(float(c) * sphere * rule.moment(sum(alpha), beta))
    return _mq(frame.Lambda, *cells) / r ** 6 * math.fsum(pieces)
