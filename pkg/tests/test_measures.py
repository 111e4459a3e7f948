import csv
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qmahg.engine.exterior import Form
from qmahg.engine.group import squared_norm
from qmahg.engine.polynomial import PolyScalar, PolySpace, coordinates
from qmahg.errors import HypothesisViolation, ValidationError
from qmahg.models import BoxDomain, GridSpec, GroupPoint
from qmahg.services.measures import (
    ball_integral,
    boundary_points,
    box_cutoff,
    cln_check,
    comparison_check,
    export_density_csv,
    gauge_cutoff,
    gauge_indicator,
    integrate_density,
    integrate_density_table,
    ma_convergence_check,
    minimum_principle_check,
    sample_points,
    stokes_check,
    superadditivity_check,
)

SMALL = GridSpec(points_per_axis=3, rule="midpoint", refinement_levels=0)


@pytest.fixture
def space():
    return PolySpace.group(1, "float")


@pytest.fixture
def cube():
    return BoxDomain.cube(GroupPoint.origin(1), 1.0)


@pytest.fixture
def ball():
    return BoxDomain.gauge_ball(GroupPoint.origin(1), 1.0)


def test_mass_of_squared_norm_on_cube(space, cube):
    # density n! 8^n times the volume 2^(4n+1)
    assert integrate_density(squared_norm(space), cube, SMALL) == pytest.approx(256.0, rel=1e-12)
    table = integrate_density_table(squared_norm(space), cube, GridSpec(points_per_axis=3, refinement_levels=1))
    assert len(table.levels) == 2 and table.change < 1e-12


def test_linear_functions_carry_no_mass(space, cube):
    x1, x2, _, _, t = coordinates(space)
    assert integrate_density(x1 * 2 - x2 + 3, cube, SMALL) == pytest.approx(0.0, abs=1e-12)


def test_complex_polynomials_are_rejected(space, cube):
    x1 = coordinates(space)[0]
    with pytest.raises(ValidationError):
        integrate_density(x1 * 1j, cube, SMALL)


def test_ball_integral(space, ball):
    exact = ball_integral(PolyScalar.constant(space, 1.0), ball)
    assert exact.imag == 0 and exact.real > 0
    assert abs(ball_integral(coordinates(space)[0], ball)) < 1e-12
    with pytest.raises(ValidationError):
        ball_integral(1.0, BoxDomain.cube(GroupPoint.origin(1)))


def test_samples_and_boundary_points_respect_the_domain(ball):
    rng = np.random.default_rng(0)
    inside = sample_points(ball, 50, rng)
    assert inside.shape == (50, 5)
    assert gauge_indicator(ball, inside).all()
    edge = boundary_points(ball, 20, rng)
    norms = (((edge[:, :-1] ** 2).sum(axis=1)) ** 2 + edge[:, -1] ** 2) ** 0.25
    assert np.allclose(norms, 1.0)


def test_cutoffs_vanish_on_the_boundary(space, cube, ball):
    rng = np.random.default_rng(1)
    assert np.allclose(box_cutoff(space, cube).evaluate_many(boundary_points(cube, 20, rng)), 0.0)
    assert np.allclose(gauge_cutoff(space, ball).evaluate_many(boundary_points(ball, 20, rng)), 0.0, atol=1e-12)
    with pytest.raises(ValidationError):
        gauge_cutoff(space, cube)


def test_comparison_of_equal_functions(space, cube):
    u = squared_norm(space)
    result = comparison_check(u, u, cube, SMALL)
    assert result.passed
    assert result.integral_u == pytest.approx(result.integral_v)


def test_comparison_boundary_mismatch(space, cube):
    u = squared_norm(space)
    with pytest.raises(HypothesisViolation) as info:
        comparison_check(u, u - 1.0, cube, SMALL)
    assert info.value.hypothesis == "u = v on the boundary"
    assert len(info.value.point) == 5


def test_comparison_requires_psh(space, cube):
    u = squared_norm(space)
    with pytest.raises(HypothesisViolation):
        comparison_check(u * -1, u * -1, cube, SMALL)


def test_superadditivity(space, cube):
    x1, x2 = coordinates(space)[:2]
    u = squared_norm(space)
    joint, apart, passed = superadditivity_check(u, u + x1 * x1, cube, SMALL)
    assert passed
    assert joint == pytest.approx(apart, rel=1e-9)


def test_cln_ratio(space, cube):
    inner = BoxDomain.cube(GroupPoint.origin(1), 0.5)
    result = cln_check([squared_norm(space)], cube, inner, SMALL)
    assert result.lhs == pytest.approx(8.0)
    assert result.bound > 0 and math.isfinite(result.ratio)


def test_cln_needs_nested_domains(space, cube):
    inner = BoxDomain.cube(GroupPoint.origin(1), 0.5)
    with pytest.raises(ValidationError):
        cln_check([squared_norm(space)], inner, cube, SMALL)
    with pytest.raises(ValidationError):
        cln_check([squared_norm(space)] * 2, cube, inner, SMALL)


def test_minimum_principle(space, cube):
    x1 = coordinates(space)[0]
    u = squared_norm(space) + x1
    v = squared_norm(space) * 2.0
    result = minimum_principle_check(u, v, cube, SMALL)
    assert result.passed
    assert result.min_closure >= result.min_boundary - 1e-8
    with pytest.raises(HypothesisViolation):
        minimum_principle_check(v, u, cube, SMALL)


def test_stokes_with_vanishing_h(space, ball):
    T = Form(1, 1, {(0,): PolyScalar.constant(space, 1.0), (1,): coordinates(space)[2]})
    result = stokes_check(gauge_cutoff(space, ball), T, ball, SMALL)
    assert result.residual < 1e-10
    zero = stokes_check(PolyScalar.zero(space), T, ball, SMALL, alpha=1)
    assert zero.residual == 0.0
    with pytest.raises(ValidationError):
        stokes_check(gauge_cutoff(space, ball), Form(1, 2), ball, SMALL)


def test_convergence_for_squared_norm(space, ball):
    grid = GridSpec(points_per_axis=4, refinement_levels=0)
    result = ma_convergence_check(squared_norm(space), gauge_cutoff(space, ball), ball, grid)
    assert result.passed and result.cauchy
    assert len(result.table) == 6
    assert result.limit == pytest.approx(result.target, rel=1e-6)
    with pytest.raises(ValidationError):
        ma_convergence_check(squared_norm(space), gauge_cutoff(space, ball), ball, grid, terms=2)


def test_export_density_csv(space, cube, tmp_path):
    path = tmp_path / "density.csv"
    rows = export_density_csv(squared_norm(space), cube, GridSpec(points_per_axis=2), str(path))
    assert rows == 2 ** 5
    with open(path, newline="") as handle:
        lines = list(csv.reader(handle))
    assert lines[0] == ["x1", "x2", "x3", "x4", "t", "density"]
    assert len(lines) == rows + 1
    assert all(float(row[-1]) == pytest.approx(8.0) for row in lines[1:])
