"""U(2)-invariant toric Kähler geometry on the trapezium.

Invariant metrics are encoded by a profile ``z(t)``, ``t = x1 + x2``, with
``F = 1/z`` and ``P = (F - 1)/(2 + t)``.  The symplectic potential's
Hessian, its inverse and determinant, the 11-22 differences of Ricci and of
invariant Hessians, the Laplacian of invariant functions and the conformal
transformation laws are collected here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import numerics
from .errors import BoundaryEvaluation, NonPositiveProfile, OutOfRange, PositivityViolation, SingularHessian
from .polytope import PolytopeSpec, guillemin_hessian, guillemin_term, trapezium

#: curvature evaluators refuse points closer than this to a facet
FACET_GUARD = 1e-8
#: and points where the profile is smaller than this
PROFILE_GUARD = 1e-10


@dataclass(frozen=True)
class Profile:
    """Invariant profile ``z`` on ``[-a, 1]`` with analytic derivative."""

    a: float
    z_and_dz: Callable[[float], tuple[float, float]]
    label: str = ""

    def z(self, t: float) -> float:
        return self.z_and_dz(t)[0]

    def dz(self, t: float) -> float:
        return self.z_and_dz(t)[1]

    def F(self, t: float) -> float:
        return 1.0 / self.z(t)

    def dF(self, t: float) -> float:
        z, dz = self.z_and_dz(t)
        return -dz / (z * z)

    def P(self, t: float) -> float:
        return (self.F(t) - 1.0) / (2.0 + t)

    @property
    def polytope(self) -> PolytopeSpec:
        return trapezium(self.a)


def guillemin_profile(a: float) -> Profile:
    """Profile of the bare Guillemin potential (``f = 0``)."""

    def zdz(t):
        P = 1.0 / (1.0 - t) + 1.0 / (a + t)
        dP = 1.0 / (1.0 - t) ** 2 - 1.0 / (a + t) ** 2
        F = 1.0 + (2.0 + t) * P
        dF = P + (2.0 + t) * dP
        return 1.0 / F, -dF / (F * F)

    return Profile(a, zdz, "guillemin")


@dataclass(frozen=True)
class MetricSample:
    x: tuple[float, float]
    hessian: np.ndarray
    inverse: np.ndarray
    det: float


@dataclass(frozen=True)
class ConformalData:
    """Conformal factor ``sigma = -log(b t + c)`` and invariant potential ``phi``.

    ``phi`` is ``phi_sign * m * log((d b t + d c + 1)/(b t + c))`` when ``d``
    and ``m`` are given, ``phi_slope * t`` for the soliton, and zero
    otherwise.
    """

    b: float = 0.0
    c: float = 1.0
    d: Optional[float] = None
    m: Optional[float] = None
    phi_slope: Optional[float] = None
    phi_sign: float = -1.0

    def _r(self, t):
        r = self.b * t + self.c
        if r <= 0:
            raise PositivityViolation(f"b t + c = {r} <= 0 at t = {t}")
        return r

    def _q(self, t):
        q = self.d * self.b * t + self.d * self.c + 1.0
        if q <= 0:
            raise PositivityViolation(f"d b t + d c + 1 = {q} <= 0 at t = {t}")
        return q

    @property
    def has_log_potential(self) -> bool:
        return self.d is not None and self.m is not None

    def sigma(self, t):
        return -math.log(self._r(t))

    def dsigma(self, t):
        return -self.b / self._r(t)

    def d2sigma(self, t):
        return (self.b / self._r(t)) ** 2

    def phi(self, t):
        if self.has_log_potential:
            return self.phi_sign * self.m * math.log(self._q(t) / self._r(t))
        if self.phi_slope is not None:
            return self.phi_slope * t
        return 0.0

    def dphi(self, t):
        if self.has_log_potential:
            db = self.d * self.b
            return self.phi_sign * self.m * (db / self._q(t) - self.b / self._r(t))
        if self.phi_slope is not None:
            return self.phi_slope
        return 0.0

    def d2phi(self, t):
        if self.has_log_potential:
            db = self.d * self.b
            return self.phi_sign * self.m * (-((db / self._q(t)) ** 2) + (self.b / self._r(t)) ** 2)
        return 0.0


def _check_interior(p: Profile, x) -> float:
    ls = p.polytope.values(x)
    if np.min(ls) < FACET_GUARD:
        raise BoundaryEvaluation(f"x = {tuple(x)} within {FACET_GUARD} of a facet")
    t = x[0] + x[1]
    z = p.z(t)
    if z < PROFILE_GUARD:
        raise NonPositiveProfile(f"z({t}) = {z}")
    return t


def hessian_u(p: Profile, x) -> MetricSample:
    """Hessian, inverse and determinant of the symplectic potential at ``x``."""
    t = _check_interior(p, x)
    x1, x2 = float(x[0]), float(x[1])
    P = p.P(t)
    F = p.F(t)
    H = 0.5 * np.array([[1.0 / (x1 + 1.0) + P, P], [P, 1.0 / (x2 + 1.0) + P]])
    pref = 2.0 * (x1 + 1.0) * (x2 + 1.0) / F
    Hinv = pref * np.array([[1.0 / (x2 + 1.0) + P, -P], [-P, 1.0 / (x1 + 1.0) + P]])
    det = F / (4.0 * (x1 + 1.0) * (x2 + 1.0))
    return MetricSample((x1, x2), H, Hinv, det)


def _difference_prefactor(x) -> float:
    x1, x2 = x[0], x[1]
    return 0.5 * (x2 - x1) / ((x1 + 1.0) * (x2 + 1.0))


def ricci_difference(p: Profile, x) -> float:
    """Ric_11 - Ric_22 of the Kähler metric in the x-coordinates."""
    t = _check_interior(p, x)
    F, dF = p.F(t), p.dF(t)
    return _difference_prefactor(x) * (dF / F**2 + 2.0 * (F - 1.0) / (F * (2.0 + t)))


def hessian_phi_difference(p: Profile, dphi: float, x) -> float:
    """(nabla^2 phi)_11 - (nabla^2 phi)_22 for an invariant function with phi'(t) = dphi."""
    t = _check_interior(p, x)
    return _difference_prefactor(x) * dphi / p.F(t)


def _check_t(p: Profile, t: float):
    if not -p.a < t < 1.0:
        raise OutOfRange(f"t = {t} outside ({-p.a}, 1)")


def laplacian_invariant(p: Profile, dphi: float, d2phi: float, t: float) -> float:
    """Analyst's Laplacian of an invariant function from its t-derivatives."""
    _check_t(p, t)
    F, dF = p.F(t), p.dF(t)
    return (-2.0 * (2.0 + t) * dF / F**2 + 4.0 / F) * dphi + 2.0 * (2.0 + t) / F * d2phi


def gradient_pairing(p: Profile, df: float, dg: float, t: float) -> float:
    """g(grad f, grad g) for invariant f, g: ``sum_ij u^ij f' g' = 2(2+t) f' g' / F``."""
    _check_t(p, t)
    return 2.0 * (2.0 + t) * df * dg / p.F(t)


def conformal_ricci(ric, hess_sigma, dsigma_sq, grad_sigma_sq: float, lap_sigma: float, g) -> np.ndarray:
    """Ricci tensor of ``e^{2 sigma} g`` in dimension four."""
    ric = np.asarray(ric, dtype=float)
    return (
        ric
        - 2.0 * (np.asarray(hess_sigma) - np.asarray(dsigma_sq))
        - (2.0 * grad_sigma_sq + lap_sigma) * np.asarray(g)
    )


def conformal_laplacian(lap_phi: float, g_grad_pairing: float, sigma: float) -> float:
    return math.exp(-2.0 * sigma) * (lap_phi + 2.0 * g_grad_pairing)


def conformal_hessian(hess_phi, dsigma, dphi, g, g_pairing: float) -> np.ndarray:
    """Hessian of phi for ``e^{2 sigma} g``; ``g_pairing`` is g(grad sigma, grad phi)."""
    # e^sigma d(e^-sigma) = -d sigma
    ds = np.asarray(dsigma, dtype=float)
    dp = np.asarray(dphi, dtype=float)
    return np.asarray(hess_phi) - np.outer(ds, dp) - np.outer(dp, ds) + g_pairing * np.asarray(g)


# ---------------------------------------------------------------------------
# potentials and the finite-difference Ricci tensor


class ProfilePotential:
    """Symplectic potential ``(1/2)(sum l_i log l_i + f(t))`` rebuilt from a profile.

    ``f'' = P - 1/(1 - t) - 1/(a + t)`` is integrated twice with
    ``f = f' = 0`` at the midpoint ``t0 = (1 - a)/2``.
    """

    def __init__(self, profile: Profile, cfg: numerics.SolverConfig = numerics.SolverConfig(1e-11)):
        self.profile = profile
        self.polytope = profile.polytope
        self.t0 = 0.5 * (1.0 - profile.a)
        self._cfg = cfg

    def f2(self, t: float) -> float:
        a = self.profile.a
        return self.profile.P(t) - 1.0 / (1.0 - t) - 1.0 / (a + t)

    def f(self, t: float) -> float:
        if t == self.t0:
            return 0.0
        lo, hi = sorted((self.t0, t))
        val = numerics.integrate(lambda s: (t - s) * self.f2(s), numerics.Interval(lo, hi), self._cfg)
        return val if t > self.t0 else -val

    def __call__(self, x) -> float:
        return guillemin_term(self.polytope, x) + 0.5 * self.f(x[0] + x[1])

    def hessian(self, x) -> np.ndarray:
        return guillemin_hessian(self.polytope, x) + 0.5 * self.f2(x[0] + x[1]) * np.ones((2, 2))


class GuilleminPotential:
    """The bare ``(1/2) sum l_i log l_i`` on a polytope."""

    def __init__(self, spec: PolytopeSpec):
        self.polytope = spec

    def __call__(self, x) -> float:
        return guillemin_term(self.polytope, x)

    def hessian(self, x) -> np.ndarray:
        return guillemin_hessian(self.polytope, x)


def _fd_hessian(u, x, k):
    x = np.asarray(x, dtype=float)
    H = np.empty((2, 2))
    e = np.eye(2) * k
    u0 = u(x)
    for i in range(2):
        H[i, i] = (u(x + e[i]) - 2.0 * u0 + u(x - e[i])) / (k * k)
    H[0, 1] = H[1, 0] = (u(x + e[0] + e[1]) - u(x + e[0] - e[1]) - u(x - e[0] + e[1]) + u(x - e[0] - e[1])) / (4 * k * k)
    return H


def ricci_full_fd(u, x, h: float = 1e-4, *, spec: PolytopeSpec | None = None, hess_step: float = 1e-2) -> np.ndarray:
    """Ricci block in x-coordinates from Abreu's formula, by central differences.

    ``Ric_ij = (1/2)(d_i d_j - u^kl u_ijk d_l) log det D^2 u``.  If ``u``
    exposes ``hessian(x)`` it is used for ``D^2 u``; otherwise the Hessian
    is itself a central difference of ``u`` with step ``hess_step``.
    """
    x = np.asarray(x, dtype=float)
    hess = getattr(u, "hessian", None)
    reach = 2.0 * h
    if hess is None:
        hess = lambda y: _fd_hessian(u, y, hess_step)  # noqa: E731
        reach += hess_step
    spec = spec if spec is not None else getattr(u, "polytope", None)
    if spec is not None:
        for l in spec.functionals:
            if l(x) <= reach * (abs(l.normal[0]) + abs(l.normal[1])):
                raise BoundaryEvaluation(f"stencil around {tuple(x)} leaves the polytope")

    def logdet(y):
        det = np.linalg.det(hess(y))
        if not det > 0:
            raise SingularHessian(f"det D^2 u = {det} at {tuple(y)}")
        return math.log(det)

    e = np.eye(2) * h
    H0 = hess(x)
    Hinv = np.linalg.inv(H0)
    dH = [(hess(x + e[k]) - hess(x - e[k])) / (2 * h) for k in range(2)]
    L0 = logdet(x)
    Lp = [logdet(x + e[k]) for k in range(2)]
    Lm = [logdet(x - e[k]) for k in range(2)]
    dL = np.array([(Lp[k] - Lm[k]) / (2 * h) for k in range(2)])
    ddL = np.empty((2, 2))
    for i in range(2):
        ddL[i, i] = (Lp[i] - 2.0 * L0 + Lm[i]) / (h * h)
    ddL[0, 1] = ddL[1, 0] = (
        logdet(x + e[0] + e[1]) - logdet(x + e[0] - e[1]) - logdet(x - e[0] + e[1]) + logdet(x - e[0] - e[1])
    ) / (4 * h * h)
    ric = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            corr = sum(Hinv[k, l] * dH[k][i, j] * dL[l] for k in range(2) for l in range(2))
            ric[i, j] = 0.5 * (ddL[i, j] - corr)
    return 0.5 * (ric + ric.T)
