"""
Monge-Ampere measures on boxes and gauge balls, and the verifiers built on them.

Grid integrals are tensor midpoint/trapezoid sums over the bounding box of a
domain, with gauge balls cut out by an indicator. Polynomial integrands over
gauge balls can instead be integrated in closed form (ball_integral).
All reductions run over chunks in a fixed order so results are reproducible.
"""
from __future__ import annotations

import csv
import logging
import math
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from config import BOUNDARY_SAMPLES, BOUNDARY_TOL, PSH_SAMPLES
from qmahg.engine.exterior import Form, beta, delta_n_coeff, wedge, wedge_all, wedge_power
from qmahg.engine.group import gauge_quartic, group_mul_array, koranyi_norm_array, left_translate_poly, squared_norm
from qmahg.engine.hessian import HessianField, psh_violation
from qmahg.engine.operators import d_alpha, laplacian
from qmahg.engine.polynomial import PolyScalar, PolySpace, coordinates
from qmahg.engine.quadrature import QuadratureResult, Rule, gauge_ball_monomial_integral, rule_for, tensor_chunks
from qmahg.errors import HypothesisViolation, ValidationError
from qmahg.models import (
    BoxDomain,
    CLNResult,
    ComparisonResult,
    ConvergenceResult,
    GridSpec,
    MinPrincipleResult,
    StokesResult,
)

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]


def _check_poly(u: PolyScalar, n: int, name: str = "u") -> None:
    if not isinstance(u, PolyScalar):
        raise ValidationError(f"{name} must be a polynomial")
    if u.space.n != n:
        raise ValidationError(f"{name} lives in n={u.space.n}, the domain in n={n}")
    if not u.is_real():
        raise ValidationError(f"{name} must be real")


# ================================
# Grids
# ================================


def domain_rules(domain: BoxDomain, grid: GridSpec, level: int = 0) -> List[Rule]:
    points = grid.points_at(level)
    return [rule_for(grid.rule, lo, hi, points) for lo, hi in domain.bounds()]


def gauge_indicator(domain: BoxDomain, points: np.ndarray) -> np.ndarray:
    """True for rows of `points` inside the domain."""
    points = np.asarray(points, dtype=np.float64)
    inside = np.ones(points.shape[0], dtype=bool)
    for axis, (lo, hi) in enumerate(domain.bounds()):
        inside &= (points[:, axis] >= lo) & (points[:, axis] <= hi)
    if domain.gauge_radius is not None:
        center = np.array([float(c) for c in domain.center.coords()])
        local = group_mul_array(-center, points)
        inside &= koranyi_norm_array(local) < domain.gauge_radius
    return inside


def grid_nodes(domain: BoxDomain, grid: GridSpec, level: int = 0) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """(points, weights) chunks of the grid restricted to the domain."""
    for points, weights in tensor_chunks(domain_rules(domain, grid, level)):
        mask = gauge_indicator(domain, points)
        if mask.any():
            yield points[mask], weights[mask]


def all_grid_nodes(domain: BoxDomain, grid: GridSpec, level: int = 0) -> np.ndarray:
    chunks = [points for points, _ in grid_nodes(domain, grid, level)]
    if not chunks:
        raise ValidationError("the domain contains no grid points")
    return np.concatenate(chunks)


def integrate_field(fn: Integrand, domain: BoxDomain, grid: GridSpec, level: int = 0) -> float:
    partials = []
    count = 0
    for points, weights in grid_nodes(domain, grid, level):
        partials.append(math.fsum(weights * np.asarray(fn(points), dtype=np.float64)))
        count += len(weights)
    if count == 0:
        raise ValidationError("the domain contains no grid points")
    return math.fsum(partials)


def integration_table(fn: Integrand, domain: BoxDomain, grid: GridSpec) -> QuadratureResult:
    result = QuadratureResult()
    for level in range(grid.refinement_levels + 1):
        result.levels.append(integrate_field(fn, domain, grid, level))
    logger.info(f"grid integral {result.value:.12g} over {len(result.levels)} level(s), change {result.change:.2e}")
    return result


def density_function(u: PolyScalar) -> Integrand:
    """xi -> n! det Hess(u)(xi), the Omega coefficient of (Delta u)^n."""
    field = HessianField(u)
    factor = math.factorial(u.space.n)
    return lambda points: factor * field.densities(points)


def integrate_density_table(u: PolyScalar, domain: BoxDomain, grid: GridSpec) -> QuadratureResult:
    _check_poly(u, domain.n)
    return integration_table(density_function(u), domain, grid)


def integrate_density(u: PolyScalar, domain: BoxDomain, grid: GridSpec) -> float:
    return integrate_density_table(u, domain, grid).value


def sup_norm(u: PolyScalar, domain: BoxDomain, grid: GridSpec, level: int = 0) -> float:
    best = 0.0
    for points, _ in grid_nodes(domain, grid, level):
        best = max(best, float(np.max(np.abs(u.evaluate_many(points)))))
    return best


def ball_integral(f, domain: BoxDomain) -> complex:
    """Exact integral of a polynomial over the gauge ball of `domain`."""
    if domain.gauge_radius is None:
        raise ValidationError("ball_integral needs a gauge-ball domain")
    r = domain.gauge_radius
    if not isinstance(f, PolyScalar):
        return complex(f) * gauge_ball_monomial_integral((0,) * (4 * domain.n), 0, r)
    g = left_translate_poly(f, domain.center)
    re, im = [], []
    for monom, c in g.terms():
        value = gauge_ball_monomial_integral(monom[:-1], monom[-1], r)
        if value:
            z = complex(c)
            re.append(z.real * value)
            im.append(z.imag * value)
    return complex(math.fsum(re), math.fsum(im))


# ================================
# Samples and cutoffs
# ================================


def boundary_points(domain: BoxDomain, count: int, rng: np.random.Generator) -> np.ndarray:
    """Points on the boundary of the domain (the gauge sphere for gauge balls)."""
    d = 4 * domain.n + 1
    if domain.gauge_radius is not None:
        z = rng.normal(size=(count, d))
        scale = domain.gauge_radius / koranyi_norm_array(z)
        z[:, :-1] *= scale[:, None]
        z[:, -1] *= scale ** 2
        center = np.array([float(c) for c in domain.center.coords()])
        return group_mul_array(center, z)
    bounds = np.array(domain.bounds())
    points = rng.uniform(bounds[:, 0], bounds[:, 1], size=(count, d))
    axis = rng.integers(0, d, size=count)
    side = rng.integers(0, 2, size=count)
    points[np.arange(count), axis] = np.where(side == 1, bounds[axis, 1], bounds[axis, 0])
    return points


def sample_points(domain: BoxDomain, count: int, rng: np.random.Generator, max_rounds: int = 200) -> np.ndarray:
    """Uniform interior samples, by rejection from the bounding box."""
    bounds = np.array(domain.bounds())
    kept = []
    total = 0
    for _ in range(max_rounds):
        batch = rng.uniform(bounds[:, 0], bounds[:, 1], size=(2 * count, len(bounds)))
        batch = batch[gauge_indicator(domain, batch)]
        kept.append(batch)
        total += len(batch)
        if total >= count:
            return np.concatenate(kept)[:count]
    raise ValidationError("could not sample the interior of the domain")


def box_cutoff(space: PolySpace, domain: BoxDomain) -> PolyScalar:
    """prod_a (w_a^2 - (x_a - c_a)^2), vanishing on the faces of the box."""
    out = PolyScalar.constant(space, 1)
    for x, c, w in zip(coordinates(space), domain.center.coords(), domain.half_widths):
        out = out * (w * w - (x - c) ** 2)
    return out


def gauge_cutoff(space: PolySpace, domain: BoxDomain, power: int = 1) -> PolyScalar:
    """(r^4 - ||center^-1 xi||^4)^power, vanishing on the gauge sphere."""
    if domain.gauge_radius is None:
        raise ValidationError("gauge_cutoff needs a gauge-ball domain")
    return (-gauge_quartic(space, domain.center, domain.gauge_radius)) ** power


def _require_psh(us: Sequence[PolyScalar], points: np.ndarray, where: str) -> None:
    for i, u in enumerate(us, start=1):
        bad = psh_violation(u, points)
        if bad is not None:
            raise HypothesisViolation(f"u{i} is PSH on {where}", bad)


# ================================
# Verifiers
# ================================


def _contains(outer: BoxDomain, inner: BoxDomain, rng: np.random.Generator) -> bool:
    for (lo, hi), (olo, ohi) in zip(inner.bounds(), outer.bounds()):
        if not (olo < lo and hi < ohi):
            return False
    if outer.gauge_radius is not None:
        probe = np.concatenate([boundary_points(inner, BOUNDARY_SAMPLES, rng),
                                sample_points(inner, PSH_SAMPLES, rng)])
        return bool(gauge_indicator(outer, probe).all())
    return True


def wedge_density(us: Sequence[PolyScalar]):
    """The Omega coefficient of Delta u_1 ^ ... ^ Delta u_k ^ beta^(n-k)."""
    n = us[0].space.n
    form = wedge_all(laplacian(u) for u in us)
    if len(us) < n:
        form = wedge(form, wedge_power(beta(n), n - len(us)))
    return delta_n_coeff(form)


def _poly_integrand(c) -> Integrand:
    if isinstance(c, PolyScalar):
        return lambda points: np.real(c.evaluate_many(points))
    return lambda points: np.full(points.shape[0], float(np.real(complex(c))))


def cln_check(us: Sequence[PolyScalar], K: BoxDomain, L: BoxDomain, grid: GridSpec, seed: int = 0) -> CLNResult:
    """Mass of Delta u_1 ^ ... ^ Delta u_k on L against prod_i sup_K |u_i|."""
    us = list(us)
    n = K.n
    if not 1 <= len(us) <= n:
        raise ValidationError(f"expected between 1 and {n} functions, got {len(us)}")
    if L.n != n:
        raise ValidationError("K and L live in different groups")
    for i, u in enumerate(us, start=1):
        _check_poly(u, n, f"u{i}")
    rng = np.random.default_rng(seed)
    if not _contains(K, L, rng):
        raise ValidationError("L must lie strictly inside K")
    _require_psh(us, sample_points(K, PSH_SAMPLES, rng), "K")

    lhs = integration_table(_poly_integrand(wedge_density(us)), L, grid).value
    level = grid.refinement_levels
    bound = math.prod(sup_norm(u, K, grid, level) for u in us)
    if bound == 0:
        raise ValidationError("every u_i vanishes on the grid of K")
    ratio = lhs / bound
    logger.info(f"CLN: mass {lhs:.6g}, bound {bound:.6g}, ratio {ratio:.6g}")
    return CLNResult(lhs=lhs, bound=bound, ratio=ratio)


def comparison_check(u: PolyScalar, v: PolyScalar, domain: BoxDomain, grid: GridSpec,
                     tol: float = 1e-8, seed: int = 0) -> ComparisonResult:
    """With u = v on the boundary and u >= v inside, the mass of (Delta u)^n is at most that of (Delta v)^n."""
    _check_poly(u, domain.n, "u")
    _check_poly(v, domain.n, "v")
    rng = np.random.default_rng(seed)
    interior = sample_points(domain, PSH_SAMPLES, rng)
    _require_psh([u, v], interior, "the domain")

    boundary = boundary_points(domain, BOUNDARY_SAMPLES, rng)
    ub, vb = u.evaluate_many(boundary), v.evaluate_many(boundary)
    gap = np.abs(ub - vb) / (1.0 + np.abs(ub))
    if gap.max() > BOUNDARY_TOL:
        i = int(np.argmax(gap))
        raise HypothesisViolation("u = v on the boundary", boundary[i], f"|u - v| = {abs(ub[i] - vb[i]):.3e}")
    ui, vi = u.evaluate_many(interior), v.evaluate_many(interior)
    below = (vi - ui) / (1.0 + np.abs(ui))
    if below.max() > tol:
        i = int(np.argmax(below))
        raise HypothesisViolation("u >= v on the domain", interior[i], f"v - u = {vi[i] - ui[i]:.3e}")

    iu = integrate_density(u, domain, grid)
    iv = integrate_density(v, domain, grid)
    passed = iu <= iv + tol * (1.0 + abs(iv))
    if not passed:
        logger.warning(f"comparison fails: {iu:.12g} > {iv:.12g}")
    return ComparisonResult(integral_u=iu, integral_v=iv, passed=passed)


def superadditivity_check(u: PolyScalar, v: PolyScalar, domain: BoxDomain, grid: GridSpec,
                          tol: float = 1e-8) -> Tuple[float, float, bool]:
    """(mass of (Delta(u+v))^n, mass of (Delta u)^n + mass of (Delta v)^n, verdict)."""
    joint = integrate_density(u + v, domain, grid)
    apart = integrate_density(u, domain, grid) + integrate_density(v, domain, grid)
    passed = joint >= apart - tol * (1.0 + abs(apart))
    if not passed:
        logger.warning(f"superadditivity fails: {joint:.12g} < {apart:.12g}")
    return joint, apart, passed


def _polish_minimum(w: PolyScalar, start: np.ndarray, domain: BoxDomain) -> Optional[Tuple[float, np.ndarray]]:
    grads = [w.diff(i) for i in range(w.space.ngens)]

    def value(x):
        return float(w.evaluate_many(x[None, :])[0])

    def jac(x):
        return np.array([float(g.evaluate_many(x[None, :])[0]) for g in grads])

    res = minimize(value, start, jac=jac, method="L-BFGS-B", bounds=domain.bounds())
    if not gauge_indicator(domain, res.x[None, :])[0]:
        return None
    return float(res.fun), res.x


def _on_box_faces(domain: BoxDomain, point: np.ndarray) -> bool:
    for c, (lo, hi) in zip(point, domain.bounds()):
        slack = 1e-9 * max(1.0, hi - lo)
        if c <= lo + slack or c >= hi - slack:
            return True
    return False


def minimum_principle_check(u: PolyScalar, v: PolyScalar, domain: BoxDomain, grid: GridSpec,
                            tol: float = 1e-8, seed: int = 0, polish: bool = True) -> MinPrincipleResult:
    """If (Delta u)^n <= (Delta v)^n on the domain, min of u - v is attained on the boundary."""
    _check_poly(u, domain.n, "u")
    _check_poly(v, domain.n, "v")
    nodes = all_grid_nodes(domain, grid)
    du = density_function(u)(nodes)
    dv = density_function(v)(nodes)
    excess = (du - dv) / (1.0 + np.abs(dv))
    if excess.max() > tol:
        i = int(np.argmax(excess))
        raise HypothesisViolation("(Delta u)^n <= (Delta v)^n", nodes[i], f"{du[i]:.6g} > {dv[i]:.6g}")

    rng = np.random.default_rng(seed)
    w = u - v
    boundary = boundary_points(domain, BOUNDARY_SAMPLES, rng)
    min_boundary = float(np.min(w.evaluate_many(boundary)))
    inside = np.concatenate([nodes, sample_points(domain, PSH_SAMPLES, rng)])
    values = w.evaluate_many(inside)
    best = int(np.argmin(values))
    min_closure = min(float(values[best]), min_boundary)
    argmin = tuple(float(c) for c in inside[best])
    if polish:
        polished = _polish_minimum(w, inside[best], domain)
        if polished is not None and polished[0] < min_closure:
            min_closure, argmin = polished[0], tuple(float(c) for c in polished[1])
            # L-BFGS-B stops on the box faces when the minimum lies there
            if domain.gauge_radius is None and _on_box_faces(domain, polished[1]):
                min_boundary = min(min_boundary, polished[0])
    passed = min_closure >= min_boundary - tol * (1.0 + abs(min_boundary))
    if not passed:
        logger.warning(f"minimum principle fails: interior minimum {min_closure:.6g} below boundary {min_boundary:.6g}")
    return MinPrincipleResult(min_closure=min_closure, min_boundary=min_boundary, passed=passed, argmin=argmin)


def _integrate_coefficient(c, domain: BoxDomain, grid: GridSpec) -> complex:
    if domain.gauge_radius is not None:
        return ball_integral(c, domain)
    if not isinstance(c, PolyScalar):
        c = PolyScalar.constant(PolySpace.group(domain.n, "float"), c)
    level = grid.refinement_levels
    re = integrate_field(lambda p: np.real(c.evaluate_many(p)), domain, grid, level)
    im = integrate_field(lambda p: np.imag(c.evaluate_many(p)), domain, grid, level)
    return complex(re, im)


def stokes_check(h: PolyScalar, T: Form, domain: BoxDomain, grid: GridSpec, alpha: int = 0) -> StokesResult:
    """Integral of h d_alpha T plus integral of d_alpha h ^ T, for h vanishing on the boundary.

    The residual is |first + second| relative to max(1, |first|, |second|).
    """
    n = domain.n
    _check_poly(h, n, "h")
    if not isinstance(T, Form) or T.n != n or T.degree != 2 * n - 1:
        raise ValidationError(f"T must be a {2 * n - 1}-form in n={n}")
    first = _integrate_coefficient(delta_n_coeff(d_alpha(T, alpha) * h), domain, grid)
    second = _integrate_coefficient(delta_n_coeff(wedge(d_alpha(h, alpha), T)), domain, grid)
    residual = abs(first + second) / max(1.0, abs(first), abs(second))
    logger.info(f"Stokes (alpha={alpha}): {first:.6g} + {second:.6g}, residual {residual:.2e}")
    return StokesResult(first=first, second=second, residual=residual)


def ma_convergence_table(chi: PolyScalar, us: Sequence[PolyScalar], domain: BoxDomain, grid: GridSpec) -> List[float]:
    """Integrals of chi (Delta u)^n for each u in the sequence."""
    weight = chi.evaluate_many
    level = grid.refinement_levels
    table = []
    for u in us:
        dens = density_function(u)
        table.append(integrate_field(lambda p, dens=dens: weight(p) * dens(p), domain, grid, level))
    return table


def _extrapolate(steps: Sequence[float], values: Sequence[float], degree: int) -> float:
    coeffs = np.polynomial.polynomial.polyfit(np.asarray(steps), np.asarray(values), degree)
    return float(coeffs[0])


def ma_convergence_check(u: PolyScalar, chi: PolyScalar, domain: BoxDomain, grid: GridSpec,
                         terms: int = 6, tol: float = 1e-6) -> ConvergenceResult:
    """Monge-Ampere measures of u + |x|^2 / j and u + (|x|^2 + 1) / j^2 against chi.

    The density of either sequence is a degree-n polynomial in the step, so
    a degree-n fit in 1/j (resp. 1/j^2) recovers the limit.
    """
    n = domain.n
    _check_poly(u, n, "u")
    _check_poly(chi, n, "chi")
    if terms < n + 2:
        raise ValidationError(f"need at least {n + 2} terms, got {terms}")
    space = u.space
    x2 = squared_norm(space)
    one = 1 if space.exact else 1.0

    def step(j: int, k: int):
        return Fraction(1, j ** k) if space.exact else 1.0 / j ** k

    js = range(1, terms + 1)
    table = ma_convergence_table(chi, [u + x2 * step(j, 1) for j in js], domain, grid)
    table_sq = ma_convergence_table(chi, [u + (x2 + one) * step(j, 2) for j in js], domain, grid)
    target = ma_convergence_table(chi, [u], domain, grid)[0]

    limit = _extrapolate([1.0 / j for j in js], table, n)
    limit_sq = _extrapolate([1.0 / j ** 2 for j in js], table_sq, n)
    scale = max(1.0, abs(target))
    gaps = [abs(b - a) for a, b in zip(table, table[1:])]
    cauchy = all(g2 <= g1 + tol * scale for g1, g2 in zip(gaps, gaps[1:]))
    passed = (
        cauchy
        and abs(limit - target) <= tol * scale
        and abs(limit_sq - target) <= tol * scale
        and abs(limit - limit_sq) <= tol * scale
    )
    if not passed:
        logger.warning(f"convergence check fails: target {target:.12g}, limits {limit:.12g} / {limit_sq:.12g}")
    return ConvergenceResult(target=target, table=table, table_squared=table_sq, limit=limit,
                             limit_squared=limit_sq, cauchy=cauchy, passed=passed)


# ================================
# Export
# ================================


def export_density_csv(u: PolyScalar, domain: BoxDomain, grid: GridSpec, path: str, level: int = 0) -> int:
    """Write grid nodes and n! det Hess(u) as CSV; returns the number of rows."""
    _check_poly(u, domain.n)
    dens = density_function(u)
    rows = 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(u.space.names) + ["density"])
        for points, _ in grid_nodes(domain, grid, level):
            for point, value in zip(points, dens(points)):
                writer.writerow([repr(float(c)) for c in point] + [repr(float(value))])
                rows += 1
    logger.info(f"wrote {rows} density rows to {path}")
    return rows
