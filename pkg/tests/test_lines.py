import math
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qmahg.engine.group import group_mul
from qmahg.engine.hessian import is_psh_poly, random_non_psh_quadratic, random_psh_quadratic
from qmahg.engine.lines import (
    cq_constant,
    cq_refinement,
    fs_residual,
    fundamental_solution,
    is_degenerate,
    line_embed,
    line_field,
    line_frame,
    line_gauge,
    line_group_mul,
    line_qbar,
    line_quadratic_form,
    line_sublaplacian,
    mean_value,
    mq_constant,
    pullback_quaternion,
    pullback_to_line,
    pushforward_field,
    pushforward_qbar,
    random_line_frame,
    twist,
)
from qmahg.engine.polynomial import PolyScalar, PolySpace, random_polynomial
from qmahg.engine.quaternion import ONE, QJ, Quaternion
from qmahg.errors import ValidationError
from qmahg.models import GroupPoint, LinePoint, QuadratureSpec, RunSettings
from qmahg.services import suites

QUAD = QuadratureSpec(radial_cells=16, t_cells=16, refinement_levels=1)


@pytest.fixture
def rng():
    return np.random.default_rng(31)


@pytest.fixture
def unit_frame():
    return line_frame(GroupPoint.origin(1), [ONE])


def test_unit_direction_has_lambda_one(unit_frame):
    assert unit_frame.Lambda == 1.0
    assert twist([ONE]).norm2() == 1


def test_degenerate_direction_is_rejected():
    frame = line_frame(GroupPoint.origin(2), [ONE, QJ])
    assert is_degenerate(frame.q)
    assert frame.Lambda == 0.0
    with pytest.raises(ValidationError):
        cq_constant(frame, QUAD)
    with pytest.raises(ValidationError):
        line_frame(GroupPoint.origin(1), [Quaternion(0)])
    with pytest.raises(ValidationError):
        line_frame(GroupPoint.origin(2), [ONE])


def test_cq_matches_closed_form(unit_frame):
    result = cq_refinement(unit_frame, QUAD)
    assert len(result.levels) == 2
    assert result.change < 1e-4
    assert result.value == pytest.approx(1.0 / (4 * math.pi ** 3), rel=1e-3)


def test_cq_scales_linearly_with_lambda(unit_frame):
    doubled = line_frame(GroupPoint.origin(1), [Quaternion(2)])
    assert doubled.Lambda == 4.0
    assert cq_constant(doubled, QUAD) / cq_constant(unit_frame, QUAD) == pytest.approx(4.0, rel=1e-9)


def test_fundamental_solution_is_singular_at_origin(unit_frame):
    p = LinePoint(lam=(0.5, 0, 0, 0), t=0.25)
    assert fundamental_solution(unit_frame, p, QUAD) < 0
    with pytest.raises(ValidationError):
        fundamental_solution(unit_frame, LinePoint(lam=(0, 0, 0, 0), t=0), QUAD)


@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
def test_regularized_fundamental_solution(rng, eps):
    frame = random_line_frame(2, rng)
    p = LinePoint(lam=tuple(rng.uniform(-1, 1, size=4)), t=float(rng.uniform(-1, 1)))
    assert abs(fs_residual(frame, p, eps)) < 1e-8
    with pytest.raises(ValidationError):
        fs_residual(frame, p, -1.0)


def test_line_gauge_is_homogeneous(unit_frame):
    p = LinePoint(lam=(1, 0, 0, 0), t=0)
    assert line_gauge(unit_frame, p) == pytest.approx(1.0)
    assert line_gauge(unit_frame, LinePoint(lam=(0, 0, 0, 0), t=4)) == pytest.approx(2.0)


def test_line_group_embeds_as_subgroup(rng):
    frame = random_line_frame(2, rng, exact=True, origin=True)
    p = LinePoint(lam=(Fraction(1, 2), 1, 0, -2), t=Fraction(1, 3))
    p2 = LinePoint(lam=(3, Fraction(-1, 4), 1, 1), t=-1)
    assert line_embed(frame, line_group_mul(frame, p, p2)) == group_mul(line_embed(frame, p), line_embed(frame, p2))


@pytest.mark.parametrize("n", [1, 2])
def test_fields_intertwine_with_embedding(rng, n):
    frame = random_line_frame(n, rng, exact=True)
    u = random_polynomial(PolySpace.group(n), 3, rng)
    v = pullback_to_line(frame, u)
    for j in range(1, 5):
        assert line_field(frame, j, v) == pullback_to_line(frame, pushforward_field(frame, j, u))
    assert line_qbar(frame, v) == pullback_quaternion(frame, pushforward_qbar(frame, u))
    assert line_sublaplacian(frame, v) == pullback_to_line(frame, line_quadratic_form(frame, u))


def test_pullback_dimension_mismatch(rng):
    frame = random_line_frame(1, rng)
    u = random_polynomial(PolySpace.group(2, "float"), 2, rng)
    with pytest.raises(ValidationError):
        pullback_to_line(frame, u)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
def test_mean_value_of_one(rng, r):
    frame = random_line_frame(1, rng)
    one = PolyScalar.constant(PolySpace.group(1, "float"), 1.0)
    quad = QuadratureSpec(radial_cells=8, t_cells=16, refinement_levels=0)
    assert mean_value(frame, one, r, quad) == pytest.approx(1.0, rel=1e-9)
    assert mq_constant(frame, quad) == pytest.approx(6 * frame.Lambda / math.pi ** 3, rel=1e-6)
    with pytest.raises(ValidationError):
        mean_value(frame, one, 0.0, quad)


@pytest.mark.parametrize("eps", [1.0, 0.1])
def test_fundamental_solution_away_from_unit_lambda(rng, eps):
    raw = random_line_frame(2, rng)
    frame = line_frame(raw.eta, [c * 3.0 for c in raw.q])
    assert frame.Lambda == pytest.approx(9.0 * raw.Lambda)
    for _ in range(10):
        p = LinePoint(lam=tuple(rng.uniform(-1, 1, size=4)), t=float(rng.uniform(-1, 1)))
        lam2 = sum(c * c for c in p.lam)
        rho = float(frame.Lambda2) * lam2 * lam2 + p.t ** 2
        closed = 32.0 * float(frame.Lambda2) * lam2 * eps / (rho + eps) ** 3
        assert abs(fs_residual(frame, p, eps)) <= 1e-9 * (1.0 + closed)


QUICK = QuadratureSpec(radial_cells=8, t_cells=16, refinement_levels=0)


def _center_value(frame, u):
    return float(u.evaluate(tuple(float(c) for c in frame.eta.coords())))


@pytest.mark.parametrize("n", [1, 2])
def test_psh_quadratics_satisfy_sub_mean_value(rng, n):
    space = PolySpace.group(n, "float")
    for _ in range(3):
        u = random_psh_quadratic(space, rng)
        frame = random_line_frame(n, rng)
        for r in (0.1, 0.5):
            assert mean_value(frame, u, r, QUICK) >= _center_value(frame, u) - 1e-4


@pytest.mark.parametrize("n", [1, 2])
def test_non_psh_quadratic_fails_sub_mean_value(rng, n):
    space = PolySpace.group(n, "float")
    u = random_non_psh_quadratic(space, rng)
    assert not is_psh_poly(u, rng.uniform(-1, 1, size=(4, space.ngens)))
    axis = [Quaternion(1.0, 0.0, 0.0, 0.0)] + [Quaternion(0.0, 0.0, 0.0, 0.0)] * (n - 1)
    frame = line_frame(GroupPoint(x=tuple(float(v) for v in rng.uniform(-1, 1, size=4 * n)), t=0.3), axis)
    assert mean_value(frame, u, 0.5, QUICK) < _center_value(frame, u) - 1e-3


def test_mean_value_checks_cover_both_directions(monkeypatch, rng):
    drawn = []
    original = suites.random_psh_quadratic

    def counting(space, generator):
        drawn.append(1)
        return original(space, generator)

    monkeypatch.setattr(suites, "random_psh_quadratic", counting)
    settings = RunSettings(n=1, mode="float", seed=2, tol=1e-8)
    checks = {c.name: c for c in suites._mean_value_checks(settings, rng, 5)}
    assert len(drawn) == 20
    assert checks["sub-mean-value"].passed
    assert checks["sub-mean-value failure"].passed
    assert checks["sub-mean-value failure"].lhs == 5
