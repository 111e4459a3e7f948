"""
Acceptance suites. Each suite draws seeded random inputs, evaluates both
sides of an identity or inequality and reduces them to CheckResult rows
whose anchor is the formula being certified.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np

from config import (
    GRID_RULE,
    IDENTITY_SAMPLES,
    MATRIX_SAMPLES,
    THEOREM_SAMPLES,
)
from qmahg.engine.exterior import (
    Form,
    beta,
    delta_n_coeff,
    elementary_strongly_positive,
    rho_j,
    strong_positivity_test_2form,
    two_form_from_matrix,
    wedge,
    wedge_all,
)
from qmahg.engine.fields import FirstOrderOperator, VectorFieldId, apply, apply_word, bracket_table, expected_bracket
from qmahg.engine.group import gauge_quartic, left_translate_poly, random_group_point, squared_norm
from qmahg.engine.hessian import (
    gradient_row,
    hessian_from_laplacian,
    horizontal_hessian,
    is_psh_poly,
    mixed_identity_sides,
    qma_density,
    random_non_psh_quadratic,
    random_psh_quadratic,
    telescoping_identity,
    verify_thm_1_4,
)
from qmahg.engine.lines import (
    cq_refinement,
    fs_residual,
    line_field,
    line_frame,
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
)
from qmahg.engine.operators import d0, d1, d_alpha, delta_AB, laplacian
from qmahg.engine.polynomial import PolyScalar, PolySpace, random_coefficient, random_polynomial
from qmahg.engine.quaternion import (
    HyperhermitianMatrix,
    QuatMatrix,
    Quaternion,
    eigen_hyperhermitian,
    is_nonneg,
    mixed_discriminant,
    moore_det,
    random_hyperhermitian,
    random_quat_matrix,
    symplectic_matrix,
    tau,
)
from qmahg.errors import ValidationError
from qmahg.models import BoxDomain, CheckResult, GridSpec, GroupPoint, LinePoint, QuadratureSpec, RunSettings
from qmahg.services.measures import (
    cln_check,
    comparison_check,
    gauge_cutoff,
    integrate_density,
    ma_convergence_check,
    minimum_principle_check,
    stokes_check,
    superadditivity_check,
)
from qmahg.services.reports import make_check

logger = logging.getLogger(__name__)

SUITE_NAMES = ("identities", "brackets", "positivity", "hessian", "lines", "measures")
FS_EPSILONS = (1.0, 0.1)


# ================================
# Helpers
# ================================


def _inputs(settings: RunSettings, check: str, **extra) -> Dict:
    payload = {"check": check, "n": settings.n, "mode": settings.mode, "seed": settings.seed}
    payload.update(extra)
    return payload


def _rng(settings: RunSettings, suite: str) -> np.random.Generator:
    return np.random.default_rng([settings.seed, SUITE_NAMES.index(suite)])


def _size(default: int, samples: Optional[int]) -> int:
    return default if samples is None else max(1, samples)


def _scale(*values) -> float:
    return max([1.0] + [v.max_abs() if hasattr(v, "max_abs") else abs(complex(v)) for v in values])


def _zero_check(settings: RunSettings, name: str, anchor: str, worst: float, count: int) -> CheckResult:
    """A check whose residual is the worst relative defect over `count` samples."""
    return make_check(name, anchor, _inputs(settings, name, samples=count), worst, 0.0, settings.tol,
                      residual=worst)


def _random_form(space: PolySpace, degree: int, rng: np.random.Generator, terms: int = 2,
                 poly_degree: int = 3) -> Form:
    n = space.n
    form = Form(n, degree)
    for _ in range(terms):
        indices = sorted(int(i) for i in rng.choice(2 * n, size=degree, replace=False))
        form.add_term(indices, random_polynomial(space, poly_degree, rng, terms=4, real=False))
    return form


def _random_point(space: PolySpace, rng: np.random.Generator) -> GroupPoint:
    return random_group_point(space.n, rng, exact=space.exact)


def _matrix_gap(A: QuatMatrix, B: QuatMatrix) -> float:
    return (A - B).norm_inf() / (1.0 + max(A.norm_inf(), B.norm_inf()))


# ================================
# Identities of the first-order calculus
# ================================


def identities_suite(settings: RunSettings, samples: Optional[int] = None) -> List[CheckResult]:
    n = settings.n
    space = PolySpace.group(n, settings.mode)
    rng = _rng(settings, "identities")
    count = _size(IDENTITY_SAMPLES, samples)
    worst = {key: 0.0 for key in ("d0d0", "d1d1", "anti", "leibniz", "sublap", "invariance")}

    for _ in range(count):
        u = random_polynomial(space, 3, rng, real=False)
        worst["d0d0"] = max(worst["d0d0"], d0(d0(u)).max_abs() / _scale(u))
        worst["d1d1"] = max(worst["d1d1"], d1(d1(u)).max_abs() / _scale(u))
        worst["anti"] = max(worst["anti"], (d0(d1(u)) + d1(d0(u))).max_abs() / _scale(u))

        p = int(rng.integers(0, 2 * n - 1))
        F = _random_form(space, p, rng)
        if p + 2 <= 2 * n:
            worst["d0d0"] = max(worst["d0d0"], d0(d0(F)).max_abs() / _scale(F))
            worst["d1d1"] = max(worst["d1d1"], d1(d1(F)).max_abs() / _scale(F))
        q = int(rng.integers(0, 2 * n - p))
        G = _random_form(space, q, rng)
        alpha = int(rng.integers(0, 2))
        lhs = d_alpha(wedge(F, G), alpha)
        rhs = wedge(d_alpha(F, alpha), G) + wedge(F, d_alpha(G, alpha)) * (-1) ** p
        worst["leibniz"] = max(worst["leibniz"], (lhs - rhs).max_abs() / _scale(lhs, rhs))

        v = random_polynomial(space, 3, rng)
        l = int(rng.integers(0, n))
        sum_sq = PolyScalar.zero(space)
        for k in range(1, 5):
            sum_sq = sum_sq + apply_word([VectorFieldId.X(4 * l + k)] * 2, v)
        two_delta = delta_AB(v, l, n + l) * 2
        worst["sublap"] = max(worst["sublap"], (two_delta - sum_sq).max_abs() / _scale(sum_sq))

        eta = _random_point(space, rng)
        a = int(rng.integers(1, 4 * n + 1))
        moved = apply(VectorFieldId.X(a), left_translate_poly(v, eta))
        expected = left_translate_poly(apply(VectorFieldId.X(a), v), eta)
        worst["invariance"] = max(worst["invariance"], (moved - expected).max_abs() / _scale(expected))

    checks = [
        _zero_check(settings, "d0 squared", "d0(d0 F) = 0", worst["d0d0"], count),
        _zero_check(settings, "d1 squared", "d1(d1 F) = 0", worst["d1d1"], count),
        _zero_check(settings, "anticommutation", "d0 d1 u + d1 d0 u = 0", worst["anti"], count),
        _zero_check(settings, "Leibniz rule", "d_a(F ^ G) = d_a F ^ G + (-1)^p F ^ d_a G",
                    worst["leibniz"], count),
        _zero_check(settings, "diagonal Laplacian", "2 Delta_{l,n+l} u = sum_k X_{4l+k}^2 u",
                    worst["sublap"], count),
        _zero_check(settings, "left invariance", "X_a (u o L_eta) = (X_a u) o L_eta",
                    worst["invariance"], count),
    ]
    checks.extend(_chain_and_closedness(settings, space, rng, max(1, count // 20)))
    logger.info(f"identities suite: {len(checks)} checks over {count} samples")
    return checks


def _chain_and_closedness(settings: RunSettings, space: PolySpace, rng: np.random.Generator,
                          count: int) -> List[CheckResult]:
    n = space.n
    checks = []
    if n <= 2:
        worst = 0.0
        for _ in range(count):
            us = [random_polynomial(space, 2, rng) for _ in range(n)]
            rest = wedge_all(laplacian(u) for u in us[1:]) if n > 1 else Form.scalar(n, 1)
            u1 = us[0]
            target = wedge(laplacian(u1), rest)
            routes = [
                d0(wedge(d1(u1), rest)),
                -d1(wedge(d0(u1), rest)),
                d0(d1(rest * u1)),
            ]
            for route in routes:
                worst = max(worst, (route - target).max_abs() / _scale(target))
        checks.append(_zero_check(
            settings, "Laplacian chain",
            "Du1 ^ Du2.. = d0(d1 u1 ^ Du2..) = -d1(d0 u1 ^ Du2..) = D(u1 Du2..)", worst, count,
        ))
    if n >= 2:
        worst = 0.0
        for _ in range(count):
            k = int(rng.integers(1, n))
            closed = wedge_all(laplacian(random_polynomial(space, 3, rng)) for _ in range(k))
            worst = max(worst, d0(closed).max_abs() / _scale(closed), d1(closed).max_abs() / _scale(closed))
        checks.append(_zero_check(settings, "closedness", "d0(Du1 ^ .. ^ Duk) = d1(Du1 ^ .. ^ Duk) = 0",
                                  worst, count))
    return checks


# ================================
# Brackets
# ================================


def brackets_suite(settings: RunSettings, samples: Optional[int] = None) -> List[CheckResult]:
    n = settings.n
    space = PolySpace.group(n, settings.mode)
    table = bracket_table(n, settings.mode)
    frame_bad = z_bad = frame_total = z_total = 0
    for (f, g), op in table.items():
        expected = FirstOrderOperator.dt(space, expected_bracket(f, g, n))
        if f.kind == "Z":
            z_total += 1
            z_bad += op != expected
        else:
            frame_total += 1
            frame_bad += op != expected
    checks = [
        make_check("frame brackets", "[X_{2l-1}, X_{2l}] = 4 Dt, other brackets vanish",
                   _inputs(settings, "frame brackets", pairs=frame_total), frame_bad, 0, 0.0),
        make_check("Z brackets", "[Z_{l0'}, Z_{(n+l)1'}] = -8i Dt, other Z brackets vanish",
                   _inputs(settings, "Z brackets", pairs=z_total), z_bad, 0, 0.0),
    ]

    Z = VectorFieldId.Z
    c = table[(Z(0, 0), Z(n, 1))].dt_multiple()
    c = complex(c) if c is not None else complex("nan")
    checks.append(make_check("Z bracket value", "[Z_{00'}, Z_{n1'}] = -8i Dt",
                             _inputs(settings, "Z bracket value"), c.imag, -8.0, 0.0,
                             residual=abs(c + 8j)))

    rng = _rng(settings, "brackets")
    count = _size(max(1, IDENTITY_SAMPLES // 10), samples)
    worst = 0.0
    X = VectorFieldId.X
    for _ in range(count):
        f = random_polynomial(space, 3, rng)
        l = int(rng.integers(0, 2 * n))
        a, b = X(2 * l + 1), X(2 * l + 2)
        comm = apply_word([a, b], f) - apply_word([b, a], f)
        dt4 = f.diff(space.t_index) * 4
        worst = max(worst, (comm - dt4).max_abs() / _scale(dt4))
    checks.append(_zero_check(settings, "bracket action", "(X_{2l-1} X_{2l} - X_{2l} X_{2l-1}) f = 4 Dt f",
                              worst, count))
    return checks


# ================================
# Moore determinants and positivity
# ================================


def positivity_suite(settings: RunSettings, samples: Optional[int] = None) -> List[CheckResult]:
    n = settings.n
    rng = _rng(settings, "positivity")
    count = _size(MATRIX_SAMPLES, samples)
    checks = _moore_checks(settings, rng, count)

    float_space = PolySpace.group(n, "float")
    theorem_count = _size(THEOREM_SAMPLES, samples)
    positive = agree = tried = 0
    worst_gap = 0.0
    for _ in range(theorem_count):
        u = random_polynomial(float_space, 3, rng, min_degree=1)
        xi = random_group_point(n, rng)
        row = gradient_row(u, xi).to_float()
        if np.linalg.matrix_rank(tau(row)) < 2:
            continue
        tried += 1
        F = wedge(d0(u), d1(u)).evaluate(xi)
        ok, _ = strong_positivity_test_2form(F)
        positive += ok
        gap = (F - elementary_strongly_positive(row)).max_abs() / _scale(F)
        worst_gap = max(worst_gap, gap)
        agree += gap <= settings.tol
    checks.append(make_check("gradient form positivity", "d0 u ^ d1 u is strongly positive",
                             _inputs(settings, "gradient form positivity", samples=tried),
                             positive, tried, 0.0, residual=tried - positive))
    checks.append(_zero_check(settings, "gradient form factorization",
                              "d0 u ^ d1 u = elementary strongly positive form of the gradient row",
                              worst_gap, tried))

    failures = 0
    for _ in range(theorem_count):
        u = random_psh_quadratic(float_space, rng)
        if not is_nonneg(horizontal_hessian(u).evaluate(random_group_point(n, rng))):
            failures += 1
    checks.append(make_check("PSH quadratics", "Hess u >= 0 for u = a|x|^2 + sum c L^2 + pluriharmonic",
                             _inputs(settings, "PSH quadratics", samples=theorem_count),
                             theorem_count - failures, theorem_count, 0.0, residual=failures))

    ok, nu = strong_positivity_test_2form(beta(n) * -1)
    checks.append(make_check("negative beta", "-beta_n is not strongly positive",
                             _inputs(settings, "negative beta"), float(nu[0]), 0.0, 0.0,
                             residual=float(ok), passed=not ok))
    return checks


def _moore_checks(settings: RunSettings, rng: np.random.Generator, count: int) -> List[CheckResult]:
    n = settings.n
    worst = {key: 0.0 for key in ("classical", "square", "product", "tau", "diag", "bridge")}
    for _ in range(count):
        h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = 0.5 * (h + h.conj().T)
        classical = float(np.linalg.det(h).real)
        md = moore_det(HyperhermitianMatrix.from_complex_hermitian(h))
        worst["classical"] = max(worst["classical"], abs(md - classical) / max(1.0, abs(classical)))

        M = random_hyperhermitian(n, rng)
        d = moore_det(M)
        dt = float(np.linalg.det(tau(M)).real)
        worst["square"] = max(worst["square"], abs(d * d - dt) / (1.0 + abs(dt)))

        C = random_quat_matrix(n, n, rng)
        congruent = HyperhermitianMatrix(C.adjoint() @ M @ C)
        gram = HyperhermitianMatrix(C.adjoint() @ C)
        lhs, rhs = moore_det(congruent), moore_det(gram) * d
        worst["product"] = max(worst["product"], abs(lhs - rhs) / max(1.0, abs(rhs)))

        A, B = random_quat_matrix(n, n, rng), random_quat_matrix(n, n, rng)
        TA, TB = tau(A @ B), tau(A) @ tau(B)
        worst["tau"] = max(worst["tau"], float(np.abs(TA - TB).max()) / (1.0 + float(np.abs(TB).max())))

        nu, U = eigen_hyperhermitian(M, with_unitary=True)
        diag = QuatMatrix.from_complex_pair(np.diag(nu).astype(np.complex128), np.zeros((n, n), np.complex128))
        worst["diag"] = max(worst["diag"], _matrix_gap(U.adjoint() @ M @ U, diag))

    bridge_count = max(1, count // 10)
    J = symplectic_matrix(n)
    for _ in range(bridge_count):
        Ms = [random_hyperhermitian(n, rng) for _ in range(n)]
        lhs = 2 ** n * math.factorial(n) * mixed_discriminant(*Ms)
        rhs = complex(delta_n_coeff(wedge_all(two_form_from_matrix(tau(M) @ J) for M in Ms)))
        worst["bridge"] = max(worst["bridge"], abs(lhs - rhs) / max(1.0, abs(lhs)))

    return [
        _zero_check(settings, "Moore determinant of complex hermitian", "det_M(h) = det(h)",
                    worst["classical"], count),
        _zero_check(settings, "Moore determinant squared", "det_M(M)^2 = det(tau(M))", worst["square"], count),
        _zero_check(settings, "congruence product rule", "det_M(C* M C) = det_M(C* C) det_M(M)",
                    worst["product"], count),
        _zero_check(settings, "tau homomorphism", "tau(A B) = tau(A) tau(B)", worst["tau"], count),
        _zero_check(settings, "diagonalization", "U* M U = diag(nu)", worst["diag"], count),
        _zero_check(settings, "mixed discriminant bridge",
                    "2^n n! det(M1, .., Mn) = Omega coefficient of ^_i form(tau(Mi) J)",
                    worst["bridge"], bridge_count),
    ]


# ================================
# Hessian and Monge-Ampere identity
# ================================


def hessian_suite(settings: RunSettings, samples: Optional[int] = None) -> List[CheckResult]:
    n = settings.n
    space = PolySpace.group(n, settings.mode)
    rng = _rng(settings, "hessian")
    count = _size(THEOREM_SAMPLES, samples)
    worst = {key: 0.0 for key in ("identity", "routes", "linear", "mixed", "telescoping", "real")}
    not_hyper = 0
    for _ in range(count):
        u = random_polynomial(space, int(rng.integers(2, 4)), rng, min_degree=1)
        xi = _random_point(space, rng)
        worst["identity"] = max(worst["identity"], verify_thm_1_4(u, xi, settings.tol))
        try:
            H = horizontal_hessian(u).evaluate(xi)
        except ValidationError:
            not_hyper += 1
            continue
        worst["routes"] = max(worst["routes"], _matrix_gap(H, hessian_from_laplacian(u).evaluate(xi)))
        worst["real"] = max(worst["real"], (laplacian(u) - rho_j(laplacian(u))).max_abs() / _scale(u))

        v = random_polynomial(space, 2, rng)
        a, b = random_coefficient(rng, space.exact), random_coefficient(rng, space.exact)
        combined = horizontal_hessian(u * a + v * b).evaluate(xi)
        parts = H * a + horizontal_hessian(v).evaluate(xi) * b
        worst["linear"] = max(worst["linear"], _matrix_gap(combined, parts))
        worst["telescoping"] = max(worst["telescoping"], telescoping_identity(u, v).max_abs() / _scale(u, v))

    mixed_count = max(1, count // 5)
    for _ in range(mixed_count):
        us = [random_polynomial(space, 2, rng, min_degree=1) for _ in range(n)]
        lhs, rhs = mixed_identity_sides(us, _random_point(space, rng))
        worst["mixed"] = max(worst["mixed"], abs(complex(lhs - rhs)) / (1.0 + abs(float(rhs))))

    x2 = squared_norm(space)
    density = qma_density(x2, _random_point(space, rng))
    checks = [
        _zero_check(settings, "Monge-Ampere identity", "(Delta u)^n = n! det(Hess u) Omega_2n", worst["identity"], count),
        make_check("density of |x|^2", "det(Hess |x|^2) = 8^n", _inputs(settings, "density of |x|^2"),
                   density, 8 ** n, settings.tol),
        make_check("hyperhermitian Hessian", "Hess(u)_lm = conj(Hess(u)_ml)",
                   _inputs(settings, "hyperhermitian Hessian", samples=count), count - not_hyper, count, 0.0,
                   residual=not_hyper),
        _zero_check(settings, "Hessian routes", "tau(Hess u) J = 2 (Delta_AB u)", worst["routes"], count),
        _zero_check(settings, "real Laplacian", "rho(j) Delta u = Delta u", worst["real"], count),
        _zero_check(settings, "Hessian linearity", "Hess(a u + b v) = a Hess u + b Hess v", worst["linear"], count),
        _zero_check(settings, "telescoping", "(Dv)^n - (Du)^n = sum_p (Dv)^(p-1) ^ D(v-u) ^ (Du)^(n-p)",
                    worst["telescoping"], count),
        _zero_check(settings, "mixed identity", "Du1 ^ .. ^ Dun = n! det(Hess u1, .., Hess un) Omega_2n",
                    worst["mixed"], mixed_count),
    ]

    pair_count = _size(MATRIX_SAMPLES, samples)
    slack = math.inf
    for _ in range(pair_count):
        A = random_hyperhermitian(n, rng, nonneg=True)
        B = random_hyperhermitian(n, rng, nonneg=True)
        joint, da, db = moore_det(A + B), moore_det(A), moore_det(B)
        slack = min(slack, (joint - da - db) / (1.0 + abs(joint)))
    checks.append(make_check("pointwise superadditivity", "det(A + B) >= det A + det B for A, B >= 0",
                             _inputs(settings, "pointwise superadditivity", samples=pair_count),
                             slack, 0.0, settings.tol, residual=max(0.0, -slack), passed=slack >= -settings.tol))
    return checks


# ================================
# Lines
# ================================


def lines_suite(settings: RunSettings, samples: Optional[int] = None) -> List[CheckResult]:
    n = settings.n
    rng = _rng(settings, "lines")
    exact = settings.mode == "rational"
    space = PolySpace.group(n, settings.mode)
    frames = _size(5, samples)
    checks = []

    fs_worst = 0.0
    fs_points = 20
    quad = QuadratureSpec(radial_cells=16, t_cells=16, refinement_levels=1)
    cq_change = cq_oracle = scaling = 0.0
    for _ in range(frames):
        raw = random_line_frame(n, rng)
        frame = line_frame(raw.eta, [c * (1.0 / math.sqrt(raw.Lambda)) for c in raw.q])
        for _ in range(fs_points):
            p = LinePoint(lam=tuple(rng.uniform(-1, 1, size=4)), t=float(rng.uniform(-1, 1)))
            lam2 = sum(c * c for c in p.lam)
            for tested in (raw, frame):
                rho = float(tested.Lambda2) * lam2 * lam2 + p.t ** 2
                for eps in FS_EPSILONS:
                    closed = 32.0 * float(tested.Lambda2) * lam2 * eps / (rho + eps) ** 3
                    fs_worst = max(fs_worst, abs(fs_residual(tested, p, eps)) / (1.0 + closed))
        result = cq_refinement(frame, quad)
        cq_change = max(cq_change, result.change)
        oracle = frame.Lambda / (4.0 * math.pi ** 3)
        cq_oracle = max(cq_oracle, abs(result.value - oracle) / oracle)
        doubled = line_frame(frame.eta, [c * 2.0 for c in frame.q])
        ratio = cq_refinement(doubled, quad).value / result.value
        scaling = max(scaling, abs(ratio - 4.0) / 4.0)
    checks.append(make_check("fundamental solution", "L_q(-1/(rho + eps)) = 32 Lambda^2 |lam|^2 eps / (rho + eps)^3",
                             _inputs(settings, "fundamental solution", frames=frames, points=fs_points, eps=list(FS_EPSILONS)),
                             fs_worst, 0.0, 1e-9, residual=fs_worst))
    checks.append(make_check("C_q refinement", "C_q stable under refinement",
                             _inputs(settings, "C_q refinement", frames=frames), cq_change, 0.0, 1e-4,
                             residual=cq_change))
    checks.append(make_check("C_q closed form", "C_q = Lambda / (4 pi^3)",
                             _inputs(settings, "C_q closed form", frames=frames), cq_oracle, 0.0, 1e-3,
                             residual=cq_oracle))
    checks.append(make_check("C_q scaling", "C_{2q} = 4 C_q", _inputs(settings, "C_q scaling", frames=frames),
                             scaling, 0.0, 1e-3, residual=scaling))

    worst = {key: 0.0 for key in ("intertwine", "qbar", "sublap")}
    for _ in range(frames):
        frame = random_line_frame(n, rng, exact=exact)
        u = random_polynomial(space, 3, rng)
        v = pullback_to_line(frame, u)
        for j in range(1, 5):
            gap = line_field(frame, j, v) - pullback_to_line(frame, pushforward_field(frame, j, u))
            worst["intertwine"] = max(worst["intertwine"], gap.max_abs() / _scale(v))
        qbar_gap = line_qbar(frame, v) - pullback_quaternion(frame, pushforward_qbar(frame, u))
        worst["qbar"] = max(worst["qbar"], max(c.max_abs() for c in qbar_gap.components) / _scale(v))
        lap_gap = line_sublaplacian(frame, v) - pullback_to_line(frame, line_quadratic_form(frame, u))
        worst["sublap"] = max(worst["sublap"], lap_gap.max_abs() / _scale(v))
    checks.extend([
        _zero_check(settings, "intertwining", "X~_j (u o i) = (sum (q_l)_kj X_{4l+k} u) o i",
                    worst["intertwine"], frames),
        _zero_check(settings, "quaternionic pushforward", "Qbar~ (u o i) = (sum_l conj(q_l) Qbar_l u) o i",
                    worst["qbar"], frames),
        _zero_check(settings, "line sub-Laplacian", "L_q (u o i) = (Re sum conj(q_l) Hess(u)_lm q_m) o i",
                    worst["sublap"], frames),
    ])
    checks.extend(_mean_value_checks(settings, rng, frames))
    return checks


def _mean_gap(frame, u: PolyScalar, r: float, quad: QuadratureSpec) -> float:
    base = float(u.evaluate(tuple(float(c) for c in frame.eta.coords())))
    return mean_value(frame, u, r, quad) - base


def _mean_value_checks(settings: RunSettings, rng: np.random.Generator, frames: int) -> List[CheckResult]:
    n = settings.n
    space = PolySpace.group(n, "float")
    one = PolyScalar.constant(space, 1.0)
    quad = QuadratureSpec(radial_cells=8, t_cells=16, refinement_levels=0)
    unit_gap = mq_gap = 0.0
    slack = math.inf
    radii = (0.1, 0.5)
    functions = max(2, 4 * frames)
    line_frames = [random_line_frame(n, rng) for _ in range(2 * frames)]
    for frame in line_frames:
        unit_gap = max(unit_gap, abs(mean_value(frame, one, 0.5, quad) - 1.0))
        oracle = 6.0 * frame.Lambda / math.pi ** 3
        mq_gap = max(mq_gap, abs(mq_constant(frame, quad) - oracle) / oracle)
    for _ in range(functions):
        u = random_psh_quadratic(space, rng)
        for frame in line_frames:
            slack = min(slack, min(_mean_gap(frame, u, r, quad) for r in radii))

    # Hess(u)_00 < 0, so the line along the first quaternionic coordinate must fail
    axis = [Quaternion(1.0, 0.0, 0.0, 0.0)] + [Quaternion(0.0, 0.0, 0.0, 0.0)] * (n - 1)
    non_psh = frames
    agree = 0
    for _ in range(non_psh):
        u = random_non_psh_quadratic(space, rng)
        flagged = not is_psh_poly(u, rng.uniform(-1, 1, size=(8, space.ngens)))
        candidates = [line_frame(random_group_point(n, rng), axis)] + line_frames
        fails = any(_mean_gap(frame, u, r, quad) < -1e-4 for frame in candidates for r in radii)
        agree += int(flagged and fails)
    return [
        make_check("mean of one", "M_r(1) = 1", _inputs(settings, "mean of one", frames=len(line_frames)),
                   unit_gap, 0.0, 1e-6, residual=unit_gap),
        make_check("m_q closed form", "m_q = 6 Lambda / pi^3", _inputs(settings, "m_q closed form"),
                   mq_gap, 0.0, 1e-6, residual=mq_gap),
        make_check("sub-mean-value", "M_r(u)(eta) >= u(eta) for PSH u",
                   _inputs(settings, "sub-mean-value", functions=functions, frames=len(line_frames)),
                   slack, 0.0, 1e-4, residual=max(0.0, -slack), passed=slack >= -1e-4),
        make_check("sub-mean-value failure", "Hess u not >= 0 => M_r(u)(eta) < u(eta) on some line",
                   _inputs(settings, "sub-mean-value failure", functions=non_psh, frames=len(line_frames) + 1),
                   agree, non_psh, 0.0, residual=float(non_psh - agree), passed=agree == non_psh),
    ]


# ================================
# Measures
# ================================


def _measure_grid(n: int) -> GridSpec:
    if n == 1:
        return GridSpec(points_per_axis=6, rule=GRID_RULE, refinement_levels=1)
    return GridSpec(points_per_axis=3, rule=GRID_RULE, refinement_levels=0)


def measures_suite(settings: RunSettings, samples: Optional[int] = None) -> List[CheckResult]:
    n = settings.n
    rng = _rng(settings, "measures")
    space = PolySpace.group(n, "float")
    grid = _measure_grid(n)
    origin = GroupPoint.origin(n)
    cube = BoxDomain.cube(origin, 1.0)
    ball = BoxDomain.gauge_ball(origin, 1.0)
    x2 = squared_norm(space)
    tol = settings.tol
    checks = []

    volume = 2.0 ** (4 * n + 1)
    mass = integrate_density(x2, cube, grid)
    checks.append(make_check("mass of |x|^2", "integral of (Delta |x|^2)^n = n! 8^n vol",
                             _inputs(settings, "mass of |x|^2"), mass, math.factorial(n) * 8 ** n * volume, 1e-10))

    pairs = _size(20, samples)
    slack = math.inf
    for _ in range(pairs):
        u, v = random_psh_quadratic(space, rng), random_psh_quadratic(space, rng)
        joint, apart, _ = superadditivity_check(u, v, cube, grid, tol)
        slack = min(slack, (joint - apart) / (1.0 + abs(apart)))
    checks.append(make_check("integral superadditivity", "mass (D(u+v))^n >= mass (Du)^n + mass (Dv)^n",
                             _inputs(settings, "integral superadditivity", samples=pairs),
                             slack, 0.0, tol, residual=max(0.0, -slack), passed=slack >= -tol))

    v = gauge_quartic(space, origin, 1.0)
    eps = 0.25
    comparison = comparison_check(v * (1.0 - eps), v, ball, grid, tol, seed=settings.seed)
    checks.append(make_check("comparison scaling", "mass (D(1-e)v)^n / mass (Dv)^n = (1-e)^n",
                             _inputs(settings, "comparison scaling", eps=eps),
                             comparison.integral_u / comparison.integral_v, (1.0 - eps) ** n, 1e-3,
                             passed=None))
    checks.append(make_check("comparison principle", "u = v on boundary, u >= v => mass (Du)^n <= mass (Dv)^n",
                             _inputs(settings, "comparison principle", eps=eps),
                             comparison.integral_u, comparison.integral_v, tol,
                             residual=max(0.0, comparison.integral_u - comparison.integral_v),
                             passed=comparison.passed))

    family = [(0.5, 0.0), (0.8, 0.0), (1.0, 0.3)]
    passed = 0
    for alpha, shift in family:
        result = minimum_principle_check(v * alpha + shift, v, ball, grid, tol, seed=settings.seed)
        passed += result.passed
    checks.append(make_check("minimum principle", "(Du)^n <= (Dv)^n => min (u - v) is attained on the boundary",
                             _inputs(settings, "minimum principle", family=family),
                             passed, len(family), 0.0, residual=len(family) - passed))

    chi = gauge_cutoff(space, ball)
    u = random_psh_quadratic(space, rng)
    conv = ma_convergence_check(u, chi, ball, grid, terms=n + 4, tol=1e-6)
    scale = max(1.0, abs(conv.target))
    checks.append(make_check("measure convergence", "integral chi (D(u + |x|^2/j))^n -> integral chi (Du)^n",
                             _inputs(settings, "measure convergence"), conv.limit, conv.target, 1e-6,
                             passed=conv.cauchy and abs(conv.limit - conv.target) <= 1e-6 * scale))
    checks.append(make_check("limit independence", "both approximating sequences share the limit",
                             _inputs(settings, "limit independence"), conv.limit, conv.limit_squared, 1e-6))

    worst = 0.0
    stokes_pairs = _size(2, samples)
    for alpha in (0, 1):
        for _ in range(stokes_pairs):
            h = gauge_cutoff(space, ball) * (1.0 + random_polynomial(space, 1, rng))
            T = _random_form(space, 2 * n - 1, rng, terms=2, poly_degree=2)
            worst = max(worst, stokes_check(h, T, ball, grid, alpha).residual)
    checks.append(_zero_check(settings, "Stokes formula", "integral h d_a T + integral d_a h ^ T = 0",
                              worst, 2 * stokes_pairs))

    K = cube
    L = BoxDomain.cube(origin, 0.5)
    base = cln_check([x2], K, L, grid, seed=settings.seed)
    scaled = cln_check([x2 * 3.0], K, L, grid, seed=settings.seed)
    checks.append(make_check("CLN homogeneity", "||D(cu)||_L / sup_K |cu| = ||Du||_L / sup_K |u|",
                             _inputs(settings, "CLN homogeneity"), scaled.ratio, base.ratio, 1e-10))
    return checks


SUITES: Dict[str, Callable[..., List[CheckResult]]] = {
    "identities": identities_suite,
    "brackets": brackets_suite,
    "positivity": positivity_suite,
    "hessian": hessian_suite,
    "lines": lines_suite,
    "measures": measures_suite,
}


def run_suite(name: str, settings: RunSettings, samples: Optional[int] = None) -> List[CheckResult]:
    """Checks of one suite, or of every suite in order for 'all'."""
    if name == "all":
        checks = []
        for suite in SUITE_NAMES:
            checks.extend(run_suite(suite, settings, samples))
        return checks
    if name not in SUITES:
        raise ValidationError(f"unknown suite '{name}'; expected one of {', '.join(SUITE_NAMES + ('all',))}")
    logger.info(f"running suite '{name}' (n={settings.n}, mode={settings.mode}, seed={settings.seed})")
    return SUITES[name](settings, samples)
