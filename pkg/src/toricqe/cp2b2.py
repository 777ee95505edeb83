"""Z2-symmetric toric geometry on the two-point blow-up of CP^2.

Covers the pentagon symplectic-potential algebra (Hessian, determinant,
inverse), the vertex values of the inverse Hessian, the conformal ansatz
``sigma = -log(bt + c)``, ``phi = -m log((dbt + dc + 1)/(bt + c))`` and the
four necessary conditions on ``(b, c, d, mu)`` coming from the Kim-Kim first
integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import numerics
from .errors import BoundaryEvaluation, InadmissibleSolution, PositivityViolation, SingularHessian
from .families import Family, FamilySolution
from .geometry import ConformalData
from .numerics import DEFAULT_CONFIG, Interval, SolverConfig
from .polytope import pentagon, slice_breakpoints, slice_length
from .report import ResidualReport

#: published limit of (b, c) for the Chen-LeBrun-Weber metric at a = 2
CLW_LIMIT = (-0.217907, 1.000632)
DEFAULT_GUESS = (-0.1, 1.0, -0.5, 0.3)
#: |b| below this is the constant-conformal-factor solution of the constraints
DEGENERATE_B = 1e-8

_zero = lambda x: 0.0  # noqa: E731


@dataclass(frozen=True)
class PentagonPotential:
    """``u = (1/2) sum l_i log l_i + f`` with ``f`` symmetric under x1 <-> x2.

    Only the second derivatives of ``f`` enter the metric; ``f`` itself is
    kept for symmetry checks.
    """

    a: float
    f: Callable = _zero
    f11: Callable = _zero
    f12: Callable = _zero
    f22: Callable = _zero

    def symmetry_defect(self, points: Sequence) -> float:
        worst = 0.0
        for x1, x2 in points:
            worst = max(
                worst,
                abs(self.f((x1, x2)) - self.f((x2, x1))),
                abs(self.f11((x1, x2)) - self.f22((x2, x1))),
                abs(self.f12((x1, x2)) - self.f12((x2, x1))),
            )
        return worst


def _pieces(a, x):
    x1, x2 = float(x[0]), float(x[1])
    q1 = (x1 + 1.0) * (a - 1.0 - x1)
    q2 = (x2 + 1.0) * (a - 1.0 - x2)
    l5 = a - 1.0 - x1 - x2
    n1 = a * a - a * x2 - x1 * x1 - 2.0 * x1 - 1.0
    n2 = a * a - a * x1 - x2 * x2 - 2.0 * x2 - 1.0
    return x1, x2, q1, q2, l5, n1, n2


def _require_interior(a, x):
    vals = pentagon(a).values(x)
    if np.min(vals) <= 0:
        raise BoundaryEvaluation(f"x = {tuple(x)} is not interior to the pentagon (a = {a})")


def pentagon_hessian(pp: PentagonPotential, x) -> np.ndarray:
    _require_interior(pp.a, x)
    x1, x2, q1, q2, l5, n1, n2 = _pieces(pp.a, x)
    off = 1.0 / (2.0 * l5) + pp.f12(x)
    return np.array(
        [
            [n1 / (2.0 * q1 * l5) + pp.f11(x), off],
            [off, n2 / (2.0 * q2 * l5) + pp.f22(x)],
        ]
    )


def pentagon_det_numerator(pp: PentagonPotential, x) -> float:
    """The polynomial-in-``f`` numerator of the determinant; smooth up to the boundary."""
    a = pp.a
    x1, x2, q1, q2, l5, n1, n2 = _pieces(a, x)
    f11, f12, f22 = pp.f11(x), pp.f12(x), pp.f22(x)
    return (
        a * (a * a + a - (x1 * x1 + x2 * x2) - 2.0 * (x1 + x2) - 2.0)
        + 2.0 * q1 * n2 * f11
        + 2.0 * q2 * n1 * f22
        - 4.0 * q1 * q2 * f12
        + 4.0 * q1 * q2 * l5 * (f11 * f22 - f12 * f12)
    )


def pentagon_det(pp: PentagonPotential, x) -> float:
    _require_interior(pp.a, x)
    x1, x2, q1, q2, l5, n1, n2 = _pieces(pp.a, x)
    return pentagon_det_numerator(pp, x) / (4.0 * q1 * q2 * l5)


def _inverse_closed(pp: PentagonPotential, x) -> np.ndarray:
    a = pp.a
    x1, x2, q1, q2, l5, n1, n2 = _pieces(a, x)
    D = pentagon_det_numerator(pp, x)
    if abs(D) < 1e-14:
        raise SingularHessian(f"determinant numerator vanishes at {tuple(x)}")
    A11 = 2.0 * q1 * (n2 + 2.0 * q2 * l5 * pp.f22(x))
    A12 = -2.0 * q1 * q2 * (1.0 + 2.0 * l5 * pp.f12(x))
    A22 = 2.0 * q2 * (n1 + 2.0 * q1 * l5 * pp.f11(x))
    return np.array([[A11, A12], [A12, A22]]) / D


def pentagon_inverse(pp: PentagonPotential, x) -> np.ndarray:
    _require_interior(pp.a, x)
    return _inverse_closed(pp, x)


# (vertex, inward sign along x1, inward sign along x2, expected values)
def _vertex_table(a):
    return [
        ((-1.0, -1.0), (1, 1), {"u11_1": 2.0, "u12_1": 0.0, "u12_2": 0.0, "u22_2": 2.0}),
        ((-1.0, a - 1.0), (1, -1), {"u11_1": 2.0, "u12_1": 0.0, "u12_2": 0.0, "u22_2": -2.0}),
        ((0.0, a - 1.0), (-1, -1), {"u11_1": -2.0, "u12_1": 0.0, "u12_2": 2.0, "u22_2": -2.0}),
    ]


def vertex_boundary_report(pp: PentagonPotential, step: float = 1e-5, tolerance: float = 1e-4) -> ResidualReport:
    """Inverse-Hessian values and one-sided derivatives at three pentagon vertices.

    Derivatives use the second-order forward stencil along the inward edge
    direction of each coordinate.
    """
    entries = {"u11": (0, 0), "u12": (0, 1), "u22": (1, 1)}
    residuals, grid, lines = [], [], []
    for vertex, signs, expected in _vertex_table(pp.a):
        v = np.array(vertex)
        U0 = _inverse_closed(pp, v)
        for name, (i, j) in entries.items():
            residuals.append(U0[i, j])
            lines.append(f"{name}{vertex} = {U0[i, j]:+.3e}")
        for key, want in expected.items():
            name, k = key.split("_")
            i, j = entries[name]
            k = int(k) - 1
            s = signs[k]
            e = np.zeros(2)
            e[k] = s * step
            g1 = _inverse_closed(pp, v + e)[i, j]
            g2 = _inverse_closed(pp, v + 2 * e)[i, j]
            deriv = s * (-3.0 * U0[i, j] + 4.0 * g1 - g2) / (2.0 * step)
            residuals.append(deriv - want)
            lines.append(f"{key}{vertex} = {deriv:+.6f} (expected {want:+.0f})")
        grid.append(vertex)
    return ResidualReport.from_residuals("vertex_values", grid, residuals, tolerance, "; ".join(lines))


# ---------------------------------------------------------------------------
# conformal ansatz and constraints


@dataclass(frozen=True)
class ConstraintState:
    a: float
    m: float
    b: float
    c: float
    d: float
    mu: float
    phi_sign: float = -1.0

    @property
    def conformal(self) -> ConformalData:
        return ConformalData(b=self.b, c=self.c, d=self.d, m=self.m, phi_sign=self.phi_sign)

    def positivity_minima(self) -> tuple[float, float]:
        """Minima of ``bt + c`` and ``dbt + dc + 1`` over ``[-2, a - 1]`` (affine, so at ends)."""
        ends = (-2.0, self.a - 1.0)
        r = min(self.b * t + self.c for t in ends)
        q = min(self.d * self.b * t + self.d * self.c + 1.0 for t in ends)
        return r, q

    def check_positive(self):
        r, q = self.positivity_minima()
        if not (r > 0 and q > 0):
            raise PositivityViolation(f"positivity fails: min(bt+c) = {r}, min(dbt+dc+1) = {q}")

    def as_vector(self) -> np.ndarray:
        return np.array([self.b, self.c, self.d, self.mu])


def ansatz_sigma_phi(st: ConstraintState, t: float) -> tuple[float, float]:
    st.check_positive()
    cd = st.conformal
    return cd.sigma(t), cd.phi(t)


def constraint_integrand(st: ConstraintState, t: float) -> float:
    """``(e^{-phi} - mu e^{(2/m - 1) phi}) e^{4 sigma}`` as a function of t."""
    sigma, phi = st.conformal.sigma(t), st.conformal.phi(t)
    return (math.exp(-phi) - st.mu * math.exp((2.0 / st.m - 1.0) * phi)) * math.exp(4.0 * sigma)


def constraint_integral(st: ConstraintState, cfg: SolverConfig = SolverConfig(1e-13)) -> float:
    """Integral of :func:`constraint_integrand` over the pentagon, reduced to t."""
    spec = pentagon(st.a)
    pts = slice_breakpoints(spec)
    total = 0.0
    for lo, hi in zip(pts, pts[1:]):
        if hi > lo:
            total += numerics.integrate(
                lambda t: constraint_integrand(st, t) * slice_length(spec, t), Interval(lo, hi), cfg
            )
    return total


def vertex_residuals(a, b, c, d, mu) -> np.ndarray:
    """The three vertex relations, each as ``lhs - rhs``."""
    r1, q1 = c - 2.0 * b, d * c + 1.0 - 2.0 * d * b
    r2, q2 = c + (a - 2.0) * b, d * c + 1.0 + (a - 2.0) * d * b
    r3, q3 = c + (a - 1.0) * b, d * c + 1.0 + (a - 1.0) * d * b
    return np.array(
        [
            4.0 * b / (r1 * q1) - (1.0 / r1**2 - mu / q1**2),
            1.0 / r2**2 - mu / q2**2,
            -2.0 * b / (r3 * q3) - (1.0 / r3**2 - mu / q3**2),
        ]
    )


def constraint_residuals(st: ConstraintState, cfg: SolverConfig = SolverConfig(1e-13)) -> np.ndarray:
    """Residuals of the three vertex relations and the integral constraint."""
    st.check_positive()
    v = vertex_residuals(st.a, st.b, st.c, st.d, st.mu)
    return np.append(v, constraint_integral(st, cfg))


def solve_constraints(
    a: float,
    m: float,
    guess: Sequence[float] = DEFAULT_GUESS,
    cfg: SolverConfig = DEFAULT_CONFIG,
    *,
    phi_sign: float = -1.0,
) -> FamilySolution:
    """Newton solve of the four constraints for ``(b, c, d, mu)``."""
    if not a > 1:
        raise ValueError("a must exceed 1")
    if not m > 1:
        raise ValueError("m must exceed 1")

    def F(v):
        return constraint_residuals(ConstraintState(a, m, *v, phi_sign=phi_sign))

    res = numerics.newton_system(F, guess, cfg)
    st = ConstraintState(a, m, *map(float, res.x), phi_sign=phi_sign)
    r, q = st.positivity_minima()
    if not (r > 0 and q > 0):
        raise InadmissibleSolution(f"converged to an inadmissible point {res.x}")
    if abs(st.b) < DEGENERATE_B:
        # constant sigma and phi: the relations hold trivially, no quasi-Einstein candidate
        raise InadmissibleSolution(f"converged to the degenerate point b = {st.b:.3e}")
    consts = {k: float(v) for k, v in zip("b c d mu".split(), res.x)}
    prov = {
        "abs_tol": cfg.abs_tol,
        "rel_tol": cfg.rel_tol,
        "max_iter": cfg.max_iter,
        "iterations": res.iterations,
        "residual_norm": float(res.residual_norm),
    }
    return FamilySolution(Family.CP2B2, float(a), consts, m=float(m), conformal=st.conformal, provenance=prov)


def limiting_vertex_residuals(a: float, b: float, c: float, mu: float) -> np.ndarray:
    """Vertex relations in the constant-potential limit.

    ``dc + 1 + k db`` is replaced by ``lambda (c + k b)`` with ``lambda``
    absorbed into ``mu``; only ``(b, c, mu)`` remain.
    """
    r1 = c - 2.0 * b
    r2 = c + (a - 2.0) * b
    r3 = c + (a - 1.0) * b
    return np.array(
        [
            4.0 * b / r1**2 - (1.0 - mu) / r1**2,
            (1.0 - mu) / r2**2,
            -2.0 * b / r3**2 - (1.0 - mu) / r3**2,
        ]
    )


def clw_exclusion_check(a: float = 2.0, threshold: float = 0.01, limit=CLW_LIMIT, mu: float = 1.0) -> ResidualReport:
    """Test whether the Chen-LeBrun-Weber limit can satisfy the vertex relations.

    The report *fails* (residual above ``threshold``) when the limit is
    excluded.
    """
    if a != 2.0:
        raise ValueError("the published limiting values refer to a = 2")
    b, c = limit
    res = limiting_vertex_residuals(a, b, c, mu)
    notes = (
        "limit form: dc+1+k*db -> lambda*(c+k*b), lambda absorbed by mu -> 1; "
        f"residuals = {[round(float(r), 6) for r in res]}; a failing report means the limit is excluded"
    )
    return ResidualReport.from_residuals("clw_exclusion", [(b, c, mu)], res, threshold, notes)


def cp2b2_from_constants(a: float, m: float, b: float, c: float, d: float, mu: float, provenance=None) -> FamilySolution:
    """Rebuild a cp2b2 solution from stored constants (no solving)."""
    if not a > 1:
        raise ValueError("a must exceed 1")
    if not m > 1:
        raise ValueError("m must exceed 1")
    return FamilySolution(
        Family.CP2B2,
        float(a),
        {"b": b, "c": c, "d": d, "mu": mu},
        m=float(m),
        conformal=ConformalData(b=b, c=c, d=d, m=m),
        provenance=dict(provenance or {}),
    )
