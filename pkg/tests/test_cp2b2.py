import math

import mpmath
import numpy as np
import pytest
from scipy import integrate as sci_integrate
from scipy import optimize as sci_optimize

from toricqe import cp2b2 as C
from toricqe.errors import BoundaryEvaluation, InadmissibleSolution, PositivityViolation
from toricqe.polytope import pentagon


def quadratic_potential(a, k=0.05, j=0.02):
    return C.PentagonPotential(
        a,
        f=lambda x: k * (x[0] ** 2 + x[1] ** 2) + j * x[0] * x[1],
        f11=lambda x: 2 * k,
        f12=lambda x: j,
        f22=lambda x: 2 * k,
    )


def cubic_potential(a, e=0.03):
    # f = e (x1 + x2)^3 / 6 + e x1 x2, symmetric and not quadratic
    return C.PentagonPotential(
        a,
        f=lambda x: e * (x[0] + x[1]) ** 3 / 6 + e * x[0] * x[1],
        f11=lambda x: e * (x[0] + x[1]),
        f12=lambda x: e * (x[0] + x[1]) + e,
        f22=lambda x: e * (x[0] + x[1]),
    )


def random_points(a, n, seed=0, margin=0.02):
    rng = np.random.default_rng(seed)
    spec = pentagon(a)
    pts = []
    while len(pts) < n:
        x = rng.uniform(-1, a - 1, 2)
        if np.min(spec.values(x)) > margin:
            pts.append(tuple(x))
    return pts


@pytest.mark.parametrize("a", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("make", [lambda a: C.PentagonPotential(a), quadratic_potential, cubic_potential])
def test_det_and_inverse(a, make):
    pp = make(a)
    for x in random_points(a, 30):
        H = C.pentagon_hessian(pp, x)
        assert C.pentagon_det(pp, x) == pytest.approx(np.linalg.det(H), rel=1e-10)
        assert C.pentagon_inverse(pp, x) @ H == pytest.approx(np.eye(2), abs=1e-10)


def test_hessian_matches_guillemin_term():
    from toricqe.polytope import guillemin_hessian

    for x in random_points(2.0, 10):
        assert C.pentagon_hessian(C.PentagonPotential(2.0), x) == pytest.approx(guillemin_hessian(pentagon(2.0), x), rel=1e-12)


def test_symmetry_defect():
    pts = random_points(2.0, 10)
    assert cubic_potential(2.0).symmetry_defect(pts) < 1e-15
    lopsided = C.PentagonPotential(2.0, f=lambda x: x[0])
    assert lopsided.symmetry_defect(pts) > 0


def test_boundary_rejected():
    with pytest.raises(BoundaryEvaluation):
        C.pentagon_hessian(C.PentagonPotential(2.0), (-1.0, 0.0))


@pytest.mark.parametrize("make", [lambda a: C.PentagonPotential(a), quadratic_potential, cubic_potential])
@pytest.mark.parametrize("a", [2.0, 2.7])
def test_vertex_values(make, a):
    rep = C.vertex_boundary_report(make(a))
    assert rep.passed, rep.notes


def _state(a=2.0, m=2.0):
    return C.ConstraintState(a, m, -0.0744, 1.0048, -0.4636, 0.2826)


def test_slice_reduction_matches_dblquad():
    st = _state()
    a = st.a

    def integrand(x2, x1):
        return C.constraint_integrand(st, x1 + x2)

    ref, _ = sci_integrate.dblquad(
        integrand, -1, a - 1, lambda x1: -1.0, lambda x1: min(a - 1, a - 1 - x1), epsabs=1e-13, epsrel=1e-13
    )
    assert C.constraint_integral(st) == pytest.approx(ref, abs=1e-10)


def test_constraint_residuals_need_positivity():
    with pytest.raises(PositivityViolation):
        C.constraint_residuals(C.ConstraintState(2.0, 2.0, 1.0, 0.5, 0.0, 1.0))


@pytest.fixture(scope="module")
def solution():
    return C.solve_constraints(2.0, 2.0)


def test_solution_matches_scipy_fsolve(solution):
    def F(v):
        b, c, d, mu = v
        st = C.ConstraintState(2.0, 2.0, b, c, d, mu)
        vert = C.vertex_residuals(2.0, b, c, d, mu)
        integ = sci_integrate.quad(lambda t: C.constraint_integrand(st, t) * (t + 2), -2, 0, epsabs=1e-14)[0]
        integ += sci_integrate.quad(lambda t: C.constraint_integrand(st, t) * (2 - t), 0, 1, epsabs=1e-14)[0]
        return [*vert, integ]

    ref = sci_optimize.fsolve(F, C.DEFAULT_GUESS, xtol=1e-13)
    got = [solution.constants[k] for k in ("b", "c", "d", "mu")]
    assert got == pytest.approx(ref, abs=1e-10)


def test_solution_matches_mpmath():
    mpmath.mp.dps = 30

    def F(b, c, d, mu):
        def phi(t):
            return -2 * mpmath.log((d * b * t + d * c + 1) / (b * t + c))

        def g(t):
            sig = -mpmath.log(b * t + c)
            return (mpmath.exp(-phi(t)) - mu) * mpmath.exp(4 * sig)

        r1, q1 = c - 2 * b, d * c + 1 - 2 * d * b
        r2, q2 = c, d * c + 1
        r3, q3 = c + b, d * c + 1 + d * b
        return [
            4 * b / (r1 * q1) - (1 / r1**2 - mu / q1**2),
            1 / r2**2 - mu / q2**2,
            -2 * b / (r3 * q3) - (1 / r3**2 - mu / q3**2),
            mpmath.quad(lambda t: g(t) * (t + 2), [-2, 0]) + mpmath.quad(lambda t: g(t) * (2 - t), [0, 1]),
        ]

    # undamped findroot falls into the degenerate b = 0 family from nearby starts,
    # so refine the double-precision answer with Newton steps at 30 digits instead
    sol = C.solve_constraints(2.0, 2.0)
    got = [sol.constants[k] for k in ("b", "c", "d", "mu")]
    x = mpmath.matrix(got)
    for _ in range(3):
        fx = mpmath.matrix(F(*x))
        J = mpmath.matrix(4, 4)
        for j in range(4):
            e = mpmath.matrix(4, 1)
            e[j] = mpmath.mpf("1e-12")
            fp, fm = F(*(x + e)), F(*(x - e))
            for i in range(4):
                J[i, j] = (fp[i] - fm[i]) / (2 * e[j])
        x = x - mpmath.lu_solve(J, fx)
    assert max(abs(v) for v in F(*x)) < 1e-20
    assert got == pytest.approx([float(v) for v in x], abs=1e-11)


def test_nearby_guess_same_basin(solution):
    other = C.solve_constraints(2.0, 2.0, (-0.2, 1.0, -0.5, 0.3))
    assert other.constants == pytest.approx(solution.constants, abs=1e-10)


def test_reflected_guess_hits_degenerate_point():
    # b -> 0 makes sigma and phi constant; that point is rejected
    with pytest.raises(InadmissibleSolution):
        C.solve_constraints(2.0, 2.0, (0.1, 1.0, -0.5, 0.3))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        C.solve_constraints(1.0, 2.0)
    with pytest.raises(ValueError):
        C.solve_constraints(2.0, 1.0)


def test_clw_exclusion():
    rep = C.clw_exclusion_check()
    assert not rep.passed
    assert rep.max_abs_residual > 0.01
    b, c = C.CLW_LIMIT
    assert rep.residuals[0] == pytest.approx(4 * b / (c - 2 * b) ** 2)
    assert rep.residuals[1] == 0.0
    with pytest.raises(ValueError):
        C.clw_exclusion_check(a=3.0)


def test_limiting_relations_einstein_stub():
    # b = 0, mu = 1 satisfies every limiting relation
    assert C.limiting_vertex_residuals(2.0, 0.0, 1.0, 1.0) == pytest.approx([0, 0, 0])


def test_ansatz_values():
    st = _state()
    s, p = C.ansatz_sigma_phi(st, 0.5)
    assert s == pytest.approx(-math.log(st.b * 0.5 + st.c))
    assert p == pytest.approx(-2 * math.log((st.d * st.b * 0.5 + st.d * st.c + 1) / (st.b * 0.5 + st.c)))
