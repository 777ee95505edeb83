"""Solved invariant metrics on the one-point blow-up of CP^2.

Three families live on the trapezium:

* the Lü-Page-Pope quasi-Einstein metrics (one for each ``m > 1``), whose
  profile is a closed-form prefactor times a running integral, and whose
  constant ``b`` is the root of the integral ``I(b)``;
* Page's Einstein metric, whose conformal Kähler metric has a rational
  profile and whose class parameter is a root of a quartic;
* the Koiso-Cao Kähler-Ricci soliton, with an exponential-rational
  profile and a transcendental equation for the soliton slope.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from . import numerics
from .errors import NoAdmissibleRoot, NoSignChange, OutOfRange, PoleEvaluation, PositivityViolation
from .geometry import ConformalData, Profile
from .numerics import DEFAULT_CONFIG, Interval, SolverConfig

log = logging.getLogger(__name__)

LPP_B_MAX = 1.0 / math.sqrt(24.0)
LPP_SCAN_POINTS = 64


class Family(str, Enum):
    LPP = "lpp"
    PAGE = "page"
    KOISO_CAO = "koiso-cao"
    CP2B2 = "cp2b2"


@dataclass(frozen=True)
class FamilySolution:
    family: Family
    a: float
    constants: dict
    m: Optional[float] = None
    profile: Optional[Profile] = None
    conformal: Optional[ConformalData] = None
    provenance: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Lü-Page-Pope


def lpp_constants(b: float) -> tuple[float, float, float]:
    """``c``, ``d`` and ``mu`` forced by ``b`` through the consistency relations."""
    c = math.sqrt(1.0 + b * b)
    d = 1.0 / (2.0 * (2.0 * b - c))
    return c, d, d * d + 4.0 * b * d


def _lpp_integrand(b, c, d, m, s):
    r = b * s + c
    q = d * b * s + d * c + 1.0
    if r <= 0 or q <= 0:
        raise PositivityViolation(f"non-positive base at s = {s}: bs+c = {r}, dbs+dc+1 = {q}")
    return ((2.0 + s) - 2.0 * r * r) * math.exp((m - 2.0) * math.log(q) - (m + 4.0) * math.log(r)) * (2.0 + s)


def lpp_integrand(b: float, m: float, s: float) -> float:
    c, d, _ = lpp_constants(b)
    return _lpp_integrand(b, c, d, m, s)


def _lpp_scale(m: float) -> float:
    # |I(b)| ~ (1/2)^(m-2) over the admissible b-range
    return 0.5 ** (m - 2.0)


def lpp_objective_I(b: float, m: float, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """``I(b)``; ``z(1) = 0`` exactly when this vanishes.

    The absolute tolerance is applied relative to the natural scale
    ``(1/2)^(m-2)`` of the integral, so large ``m`` keeps its accuracy.
    """
    c, d, _ = lpp_constants(b)
    qcfg = cfg.replace(abs_tol=cfg.abs_tol * _lpp_scale(m))
    return numerics.integrate(lambda s: _lpp_integrand(b, c, d, m, s), Interval(-1.0, 1.0), qcfg)


class _RunningIntegral:
    """``t -> int_{lo}^{t} f`` reusing the adaptive partition of ``[lo, hi]``."""

    def __init__(self, f, lo, hi, cfg, fine_cfg):
        self.f = f
        self.lo, self.hi = lo, hi
        self.panels = numerics.integrate_panels(f, Interval(lo, hi), cfg)
        self.starts = [p.lo for p in self.panels]
        self.cumulative = [0.0]
        for p in self.panels:
            self.cumulative.append(self.cumulative[-1] + p.value)
        self.cfg = cfg
        self.fine_cfg = fine_cfg

    @property
    def total(self) -> float:
        return self.cumulative[-1]

    def __call__(self, t: float) -> float:
        if t <= self.lo:
            return 0.0
        if t >= self.hi:
            return self.total
        k = bisect.bisect_right(self.starts, t) - 1
        p = self.panels[k]
        if t == p.lo:
            return self.cumulative[k]
        cfg = self.fine_cfg if t > 0.9 else self.cfg
        return self.cumulative[k] + numerics.integrate(self.f, Interval(p.lo, t), cfg)


def _lpp_profile(m, b, c, d, cfg: SolverConfig) -> Profile:
    scale = _lpp_scale(m)
    f = lambda s: _lpp_integrand(b, c, d, m, s)  # noqa: E731
    running = _RunningIntegral(
        f, -1.0, 1.0, cfg.replace(abs_tol=cfg.abs_tol * scale), cfg.replace(abs_tol=1e-13 * scale)
    )

    def zdz(t):
        if not -1.0 - 1e-12 <= t <= 1.0 + 1e-12:
            raise OutOfRange(f"t = {t} outside [-1, 1]")
        r = b * t + c
        q = d * b * t + d * c + 1.0
        if r <= 0 or q <= 0:
            raise PositivityViolation(f"positivity fails at t = {t}")
        pref = d * math.exp((m + 3.0) * math.log(r) - (m - 1.0) * math.log(q)) / (2.0 + t) ** 2
        dpref = pref * ((m + 3.0) * b / r - (m - 1.0) * d * b / q - 2.0 / (2.0 + t))
        J = running(t)
        return pref * J, dpref * J + pref * f(t)

    return Profile(1.0, zdz, "lpp")


def lpp_from_constants(
    m: float, b: float, c: float, d: float, mu: float, cfg: SolverConfig = DEFAULT_CONFIG, provenance=None
) -> FamilySolution:
    """Assemble an LPP solution from stored constants (no solving)."""
    if not m > 1:
        raise ValueError("m must exceed 1")
    return FamilySolution(
        Family.LPP,
        1.0,
        {"b": b, "c": c, "d": d, "mu": mu},
        m=m,
        profile=_lpp_profile(m, b, c, d, cfg),
        conformal=ConformalData(b=b, c=c, d=d, m=m),
        provenance=dict(provenance or {}),
    )


def lpp_brackets(m: float, cfg: SolverConfig = DEFAULT_CONFIG) -> list[tuple[float, float]]:
    """Sign changes of ``I`` on a uniform scan of ``[0, 1/sqrt(24)]``."""
    grid = [LPP_B_MAX * k / LPP_SCAN_POINTS for k in range(LPP_SCAN_POINTS + 1)]
    vals = [lpp_objective_I(b, m, cfg) for b in grid]
    return [(grid[k], grid[k + 1]) for k in range(LPP_SCAN_POINTS) if vals[k] * vals[k + 1] < 0]


def lpp_solve(m: float, cfg: SolverConfig = DEFAULT_CONFIG) -> FamilySolution:
    """Solve ``I(b) = 0`` for the smallest admissible ``b`` in ``(0, 1/sqrt(24))``."""
    if not m > 1:
        raise ValueError("m must exceed 1")
    brackets = lpp_brackets(m, cfg)
    if not brackets:
        raise NoSignChange(f"I(b) has no sign change on [0, 1/sqrt(24)] for m = {m}")
    if len(brackets) > 1:
        log.warning("I(b) changes sign %d times for m = %g; taking the smallest root", len(brackets), m)
    scale = _lpp_scale(m)
    res = numerics.brent(
        lambda b: lpp_objective_I(b, m, cfg) / scale, Interval(*brackets[0]), cfg
    )
    b = res.root
    c, d, mu = lpp_constants(b)
    prov = {
        "abs_tol": cfg.abs_tol,
        "rel_tol": cfg.rel_tol,
        "max_iter": cfg.max_iter,
        "iterations": res.iterations,
        "brackets_found": len(brackets),
    }
    return lpp_from_constants(m, b, c, d, mu, cfg, prov)


def lpp_potential_halfspan(sol: FamilySolution) -> float:
    """``(phi(1) - phi(-1))/2``, the mean slope of the LPP potential."""
    if sol.family is not Family.LPP:
        raise ValueError("half-span is defined for LPP solutions")
    return 0.5 * (sol.conformal.phi(1.0) - sol.conformal.phi(-1.0))


def lpp_ode_residual(sol: FamilySolution, t: float) -> float:
    b, c, d = (sol.constants[k] for k in ("b", "c", "d"))
    m = sol.m
    pole = b * t + 4.0 * b - c
    if abs(pole) < 1e-10:
        raise PoleEvaluation(f"bt + 4b - c vanishes at t = {t}")
    z, dz = sol.profile.z_and_dz(t)
    r = b * t + c
    q = d * b * t + d * c + 1.0
    coef = 2.0 / (2.0 + t) - 3.0 * b / r - b / pole - m * b / (q * r)
    return dz + coef * z + (2.0 * r * r - (2.0 + t)) / ((2.0 + t) * r * pole)


# ---------------------------------------------------------------------------
# Page


PAGE_QUARTIC = (3.0, -8.0, -42.0, 168.0, -125.0)


def page_coefficients(a: float) -> tuple[float, float, float]:
    den = (1.0 + a) * (a * a - 16.0 * a + 37.0)
    A = 2.0 * (a - 2.0) / den
    B = (a * a + 10.0 * a - 33.0) / den
    C = -2.0 * (2.0 * a * a - 18.0 * a + 37.0) / den
    return A, B, C


def _page_profile(a, A, B, C) -> Profile:
    def zdz(t):
        if not -a - 1e-12 <= t <= 1.0 + 1e-12:
            raise OutOfRange(f"t = {t} outside [{-a}, 1]")
        quad = A * t * t + B * t + C
        N = (t - 1.0) * (t + a) * quad
        dN = (t + a) * quad + (t - 1.0) * quad + (t - 1.0) * (t + a) * (2.0 * A * t + B)
        w = t + 2.0
        return N / w**2, dN / w**2 - 2.0 * N / w**3

    return Profile(a, zdz, "page")


def page_from_constants(a, A, B, C, b, c, provenance=None) -> FamilySolution:
    consts = {"a_star": a, "A": A, "B": B, "C": C, "b": b, "c": c, "volume_ratio": 3.0 / (2.0 - a)}
    return FamilySolution(
        Family.PAGE,
        a,
        consts,
        profile=_page_profile(a, A, B, C),
        conformal=ConformalData(b=b, c=c),
        provenance=dict(provenance or {}),
    )


def page_solve(cfg: SolverConfig = DEFAULT_CONFIG) -> FamilySolution:
    """Conformally-Kähler description of Page's Einstein metric."""
    roots = [r for r in numerics.real_roots_quartic(*PAGE_QUARTIC, cfg=cfg) if 1.0 < r < 2.0]
    if not roots:
        raise NoAdmissibleRoot("the Page quartic has no root in (1, 2)")
    a = roots[0]
    A, B, C = page_coefficients(a)
    ratio = (3.0 * a * a - 4.0 * a - 13.0) / (4.0 * (a - 2.0))
    b = 1.0 / math.sqrt(ratio * ratio - 1.0)
    c = ratio * b
    prov = {"abs_tol": cfg.abs_tol, "rel_tol": cfg.rel_tol, "max_iter": cfg.max_iter, "iterations": 0}
    return page_from_constants(a, A, B, C, b, c, prov)


def page_relations(sol: FamilySolution) -> tuple[float, float]:
    """Residuals of the two boundary-derived relations between ``b`` and ``c``."""
    a, b, c = sol.a, sol.constants["b"], sol.constants["c"]
    return (
        c * c - (b * b + 1.0),
        c * c - (a * (4.0 - 3.0 * a) * b * b + 4.0 * (a - 1.0) * b * c + (2.0 - a)),
    )


def page_ode_residual(sol: FamilySolution, t: float) -> float:
    b, c = sol.constants["b"], sol.constants["c"]
    pole = b * t + 4.0 * b - c
    if abs(pole) < 1e-10:
        raise PoleEvaluation(f"bt + 4b - c vanishes at t = {t}")
    z, dz = sol.profile.z_and_dz(t)
    r = b * t + c
    coef = 2.0 / (2.0 + t) - 3.0 * b / r - b / pole
    return dz + coef * z + (2.0 * r * r - (2.0 + t)) / ((2.0 + t) * r * pole)


# ---------------------------------------------------------------------------
# Koiso-Cao


def koiso_cao_equation(c: float) -> float:
    return math.exp(2.0 * c) * (c * c - 2.0) + 3.0 * c * c + 4.0 * c + 2.0


def _koiso_cao_profile(c, d) -> Profile:
    c3 = c**3

    def zdz(t):
        if not -1.0 - 1e-12 <= t <= 1.0 + 1e-12:
            raise OutOfRange(f"t = {t} outside [-1, 1]")
        w = t + 2.0
        E = d * math.exp(c * w)
        G = (c * c * t * w + 2.0 * c * (t + 1.0) + 2.0) / c3
        dG = (c * c * (2.0 * t + 2.0) + 2.0 * c) / c3
        return (E + G) / w**2, (c * E + dG) / w**2 - 2.0 * (E + G) / w**3

    return Profile(1.0, zdz, "koiso-cao")


def koiso_cao_from_constants(c: float, d: float, provenance=None) -> FamilySolution:
    return FamilySolution(
        Family.KOISO_CAO,
        1.0,
        {"c": c, "d": d},
        profile=_koiso_cao_profile(c, d),
        conformal=ConformalData(phi_slope=c),
        provenance=dict(provenance or {}),
    )


def koiso_cao_solve(cfg: SolverConfig = DEFAULT_CONFIG) -> FamilySolution:
    """Soliton slope ``c`` from the transcendental boundary equation."""
    res = numerics.brent(koiso_cao_equation, Interval(0.1, 1.0), cfg)
    c = res.root
    d = (c * c - 2.0) / (c**3 * math.exp(c))
    prov = {"abs_tol": cfg.abs_tol, "rel_tol": cfg.rel_tol, "max_iter": cfg.max_iter, "iterations": res.iterations}
    return koiso_cao_from_constants(c, d, prov)


def koiso_cao_ode_residual(sol: FamilySolution, t: float) -> float:
    c = sol.constants["c"]
    z, dz = sol.profile.z_and_dz(t)
    return dz + (2.0 - c * (2.0 + t)) / (2.0 + t) * z + t / (2.0 + t)


# ---------------------------------------------------------------------------


def evaluate_z(sol: FamilySolution, t: float) -> tuple[float, float]:
    """``(z(t), z'(t))`` for any family carrying a profile."""
    if sol.profile is None:
        raise ValueError(f"{sol.family.value} solutions carry no profile")
    if not -sol.a - 1e-12 <= t <= 1.0 + 1e-12:
        raise OutOfRange(f"t = {t} outside [{-sol.a}, 1]")
    return sol.profile.z_and_dz(t)


def ode_residual(sol: FamilySolution, t: float) -> float:
    return {
        Family.LPP: lpp_ode_residual,
        Family.PAGE: page_ode_residual,
        Family.KOISO_CAO: koiso_cao_ode_residual,
    }[sol.family](sol, t)
