"""Residual checks of solved families against the identities they must satisfy.

Every check returns a :class:`~toricqe.report.ResidualReport`; nothing here
solves anything, so a family rebuilt from stored constants can be audited
independently of the solver that produced them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import families, numerics
from .cp2b2 import ConstraintState, constraint_residuals
from .errors import PoleEvaluation, ToricQEError
from .families import Family, FamilySolution
from .geometry import (
    ConformalData,
    Profile,
    ProfilePotential,
    conformal_hessian,
    conformal_laplacian,
    conformal_ricci,
    gradient_pairing,
    hessian_phi_difference,
    hessian_u,
    laplacian_invariant,
    ricci_difference,
    ricci_full_fd,
)
from .numerics import Interval, SolverConfig
from .report import ResidualReport

GRID_DELTA = 1e-3
GRID_POINTS = 101
POSITIVITY_POINTS = 1001

BOUNDARY_TOL = 1e-8
BOUNDARY_TOL_LPP = 1e-6
KK_TOL = 1e-7
KK_AGREEMENT = 1e-9
SOLITON_TOL = 1e-8
NORMALIZATION_TOL = 1e-6
QE_TOL = 1e-6
RICCI_TOL = 1e-4
ODE_TOL = 1e-7
RELATION_TOL = 1e-8
CONSTRAINT_TOL = 1e-8


def t_grid(a: float, n: int = GRID_POINTS, delta: float = GRID_DELTA) -> np.ndarray:
    return np.linspace(-a + delta, 1.0 - delta, n)


def _require_profile(sol: FamilySolution):
    if sol.profile is None:
        raise ValueError(f"{sol.family.value} solutions carry no profile")


def check_boundary(sol: FamilySolution) -> ResidualReport:
    _require_profile(sol)
    a = sol.a
    z0, dz0 = sol.profile.z_and_dz(-a)
    z1, dz1 = sol.profile.z_and_dz(1.0)
    res = [z0, z1, dz0 - 1.0 / (2.0 - a), dz1 + 1.0 / 3.0]
    tol = BOUNDARY_TOL_LPP if sol.family is Family.LPP else BOUNDARY_TOL
    return ResidualReport.from_residuals(
        "boundary", [-a, 1.0], res, tol, "z(-a), z(1), z'(-a) - 1/(2-a), z'(1) + 1/3"
    )


def _positivity_report(name, grid, minima: dict) -> ResidualReport:
    # residual is the deficit below zero; tolerance 0 makes pass <=> all minima > 0
    worst = min(minima.values())
    deficit = 0.0 if worst > 0 else max(-worst, np.finfo(float).tiny)
    notes = ", ".join(f"min {k} = {v:.6g}" for k, v in minima.items())
    return ResidualReport(name, list(grid), deficit, 0.0, notes, [deficit])


def check_positivity(sol: FamilySolution) -> ResidualReport:
    cd = sol.conformal or ConformalData()
    b, c, d = cd.b, cd.c, cd.d
    if sol.family is Family.CP2B2:
        ts = np.linspace(-2.0, sol.a - 1.0, POSITIVITY_POINTS)
    else:
        ts = np.linspace(-sol.a, 1.0, POSITIVITY_POINTS)[1:-1]
    minima = {"bt+c": float(np.min(b * ts + c))}
    if d is not None:
        minima["dbt+dc+1"] = float(np.min(d * b * ts + d * c + 1.0))
    if sol.profile is not None and minima["bt+c"] > 0 and minima.get("dbt+dc+1", 1.0) > 0:
        minima["z"] = min(sol.profile.z(float(t)) for t in ts)
    return _positivity_report("positivity", [float(ts[0]), float(ts[-1])], minima)


# ---------------------------------------------------------------------------
# Kim-Kim first integral


@dataclass(frozen=True)
class KimKimSample:
    t: float
    kk_conf: float
    kk: float


def kim_kim_sample(profile: Profile, cd: ConformalData, m: float, mu: float, t: float) -> KimKimSample:
    """Both assemblies of the first integral at one value of t.

    ``kk_conf`` is written on the Kähler metric, ``kk`` on the conformal
    metric through the conformal Laplacian; ``kk_conf = m e^{2 sigma} kk``.
    """
    sigma, ds = cd.sigma(t), cd.dsigma(t)
    phi, dp, d2p = cd.phi(t), cd.dphi(t), cd.d2phi(t)
    lap = laplacian_invariant(profile, dp, d2p, t)
    pair = gradient_pairing(profile, ds, dp, t)
    grad2 = gradient_pairing(profile, dp, dp, t)
    kk_conf = m * (math.exp(2.0 * sigma) - mu * math.exp(2.0 * phi / m + 2.0 * sigma)) - (lap + 2.0 * pair - grad2)
    lap_q = conformal_laplacian(lap, pair, sigma)
    grad2_q = math.exp(-2.0 * sigma) * grad2
    kk = 1.0 - (lap_q - grad2_q) / m - mu * math.exp(2.0 * phi / m)
    return KimKimSample(t, kk_conf, kk)


def kim_kim_residuals(
    profile: Profile, cd: ConformalData, m: float, mu: float, ts: Sequence[float]
) -> tuple[ResidualReport, float]:
    """KKconf residual report and the worst disagreement between the two assemblies."""
    samples = [kim_kim_sample(profile, cd, m, mu, float(t)) for t in ts]
    worst = max(abs(s.kk_conf - m * math.exp(2.0 * cd.sigma(s.t)) * s.kk) for s in samples)
    rep = ResidualReport.from_residuals("kim_kim", list(ts), [s.kk_conf for s in samples], KK_TOL)
    return rep, worst


def check_kim_kim(sol: FamilySolution) -> ResidualReport:
    if sol.family is not Family.LPP:
        raise ValueError("the Kim-Kim check applies to LPP solutions")
    ts = t_grid(sol.a)
    rep, agree = kim_kim_residuals(sol.profile, sol.conformal, sol.m, sol.constants["mu"], ts)
    # a disagreement between the assemblies is reported as a failure
    worst = rep.max_abs_residual if agree <= KK_AGREEMENT else math.inf
    return ResidualReport(
        rep.name, rep.grid, worst, rep.tolerance, f"assembly disagreement {agree:.3e} (limit {KK_AGREEMENT:.0e})", rep.residuals
    )


# ---------------------------------------------------------------------------
# soliton


def soliton_pointwise(profile: Profile, c: float, t: float) -> float:
    """``Delta phi - |grad phi|^2 + 2 phi`` for ``phi = c t``."""
    return laplacian_invariant(profile, c, 0.0, t) - gradient_pairing(profile, c, c, t) + 2.0 * c * t


def soliton_normalization(c: float, cfg: SolverConfig = SolverConfig(1e-13)) -> float:
    """``int_{-1}^{1} t (2 + t) e^{-c t} dt``; ``2 + t`` is the slice length."""
    return numerics.integrate(lambda t: t * (2.0 + t) * math.exp(-c * t), Interval(-1.0, 1.0), cfg)


def check_soliton_identity(sol: FamilySolution) -> ResidualReport:
    if sol.family is not Family.KOISO_CAO:
        raise ValueError("the soliton identity applies to Koiso-Cao solutions")
    c = sol.constants["c"]
    ts = t_grid(sol.a)
    res = [soliton_pointwise(sol.profile, c, float(t)) for t in ts]
    norm = soliton_normalization(c)
    # scale the normalization so that its own tolerance maps onto the pointwise one
    res.append(norm * SOLITON_TOL / NORMALIZATION_TOL)
    return ResidualReport.from_residuals(
        "soliton_identity", list(ts), res, SOLITON_TOL, f"normalization integral = {norm:.3e} (tol {NORMALIZATION_TOL:.0e})"
    )


# ---------------------------------------------------------------------------
# quasi-Einstein 11-22 difference


def _diff(delta: float) -> np.ndarray:
    # any symmetric tensor whose 11-22 entry difference is delta
    return np.diag([0.5 * delta, -0.5 * delta])


def check_quasi_einstein_pointwise(sol: FamilySolution, x, lam: float = 1.0) -> float:
    """11-22 entry of ``Ric + Hess phi - (1/m) dphi dphi - lam g`` for the conformal metric."""
    _require_profile(sol)
    p = sol.profile
    cd = sol.conformal or ConformalData()
    x = (float(x[0]), float(x[1]))
    t = x[0] + x[1]
    # representatives of the 11-22 differences; the x-metric itself is needed in full
    g = hessian_u(p, x).hessian
    ds, dp = cd.dsigma(t), cd.dphi(t)
    sigma = cd.sigma(t)
    ric = _diff(ricci_difference(p, x))
    hs = _diff(hessian_phi_difference(p, ds, x))
    hp = _diff(hessian_phi_difference(p, dp, x))
    grad_s = np.array([ds, ds])
    grad_p = np.array([dp, dp])
    sig2 = gradient_pairing(p, ds, ds, t)
    lap_s = laplacian_invariant(p, ds, cd.d2sigma(t), t)
    pair = gradient_pairing(p, ds, dp, t)
    ric_q = conformal_ricci(ric, hs, np.outer(grad_s, grad_s), sig2, lap_s, g)
    hess_q = conformal_hessian(hp, grad_s, grad_p, g, pair)
    extra = np.outer(grad_p, grad_p) / sol.m if cd.has_log_potential else 0.0
    E = ric_q + hess_q - extra - lam * math.exp(2.0 * sigma) * g
    return float(E[0, 0] - E[1, 1])


def interior_points(a: float, n: int, seed: int = 0, margin: float = 0.1) -> list[tuple[float, float]]:
    """Deterministic random points at least ``margin`` inside the trapezium."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        x1, x2 = rng.uniform(-1.0 + margin, 1.0 + a, size=2)
        t = x1 + x2
        if -a + margin < t < 1.0 - margin and x1 > -1 + margin and x2 > -1 + margin:
            pts.append((float(x1), float(x2)))
    return pts


def check_quasi_einstein(sol: FamilySolution, n: int = 20) -> ResidualReport:
    pts = interior_points(sol.a, n, seed=1)
    res = [check_quasi_einstein_pointwise(sol, x) for x in pts]
    return ResidualReport.from_residuals("quasi_einstein_11_22", pts, res, QE_TOL)


def check_ricci_crosscheck(sol: FamilySolution, n: int = 20, h: float = 1e-4, seed: int = 0) -> ResidualReport:
    _require_profile(sol)
    u = ProfilePotential(sol.profile)
    pts = interior_points(sol.a, n, seed=seed)
    res = []
    for x in pts:
        R = ricci_full_fd(u, x, h)
        res.append(ricci_difference(sol.profile, x) - (R[0, 0] - R[1, 1]))
    return ResidualReport.from_residuals("ricci_crosscheck", pts, res, RICCI_TOL, f"h = {h}")


# ---------------------------------------------------------------------------
# family-specific consistency


def check_ode(sol: FamilySolution) -> ResidualReport:
    _require_profile(sol)
    ts, res, skipped = [], [], 0
    for t in t_grid(sol.a):
        try:
            res.append(families.ode_residual(sol, float(t)))
            ts.append(float(t))
        except PoleEvaluation:
            skipped += 1
    return ResidualReport.from_residuals("profile_ode", ts, res, ODE_TOL, f"{skipped} pole points skipped")


def check_relations(sol: FamilySolution) -> ResidualReport:
    k = sol.constants
    if sol.family is Family.PAGE:
        res = list(families.page_relations(sol))
        res.append(numerics._horner(families.PAGE_QUARTIC, k["a_star"]) / 100.0)
        res.append(k["volume_ratio"] - 3.0 / (2.0 - k["a_star"]))
        notes = "c^2 = b^2 + 1, second boundary relation, quartic(a)/100, volume ratio"
    elif sol.family is Family.LPP:
        c, d, mu = families.lpp_constants(k["b"])
        res = [k["c"] - c, k["d"] - d, k["mu"] - mu]
        notes = "c, d, mu against their values forced by b"
    elif sol.family is Family.KOISO_CAO:
        c = k["c"]
        res = [families.koiso_cao_equation(c), k["d"] - (c * c - 2.0) / (c**3 * math.exp(c))]
        notes = "boundary equation for c, d in terms of c"
    else:
        raise ValueError(f"no relations for {sol.family.value}")
    return ResidualReport.from_residuals("relations", [], res, RELATION_TOL, notes)


def check_constraints(sol: FamilySolution) -> ResidualReport:
    if sol.family is not Family.CP2B2:
        raise ValueError("constraint residuals apply to cp2b2 solutions")
    k = sol.constants
    st = ConstraintState(sol.a, sol.m, k["b"], k["c"], k["d"], k["mu"], sol.conformal.phi_sign)
    res = constraint_residuals(st)
    return ResidualReport.from_residuals(
        "cp2b2_constraints", [], res, CONSTRAINT_TOL, "three vertex relations and the integral constraint"
    )


def _guarded(name, fn, sol) -> ResidualReport:
    try:
        return fn(sol)
    except ToricQEError as exc:
        return ResidualReport(name, [], math.inf, 0.0, f"{type(exc).__name__}: {exc}")


def run_all_checks(sol: FamilySolution) -> list[ResidualReport]:
    """Every check applicable to the family of ``sol``."""
    checks = [("positivity", check_positivity)]
    if sol.family is Family.CP2B2:
        checks.append(("cp2b2_constraints", check_constraints))
    else:
        checks += [
            ("boundary", check_boundary),
            ("relations", check_relations),
            ("profile_ode", check_ode),
            ("quasi_einstein_11_22", check_quasi_einstein),
            ("ricci_crosscheck", check_ricci_crosscheck),
        ]
        if sol.family is Family.LPP:
            checks.append(("kim_kim", check_kim_kim))
        if sol.family is Family.KOISO_CAO:
            checks.append(("soliton_identity", check_soliton_identity))
    return [_guarded(name, fn, sol) for name, fn in checks]


# ---------------------------------------------------------------------------
# large-m behaviour of LPP


@dataclass(frozen=True)
class ConvergenceRow:
    m: float
    b: float
    sup_sigma: float
    sup_phi_gap: float
    half_span: float


def convergence_study(
    m_list: Sequence[float], cfg: SolverConfig = numerics.DEFAULT_CONFIG, n: int = 201, c_kc: Optional[float] = None
) -> list[ConvergenceRow]:
    """LPP against the Koiso-Cao soliton as m grows.

    ``phi_m`` is normalised by ``phi_m(0) = 0`` before comparison with
    ``c_KC t``, since the LPP potential carries an arbitrary additive
    constant.
    """
    if c_kc is None:
        c_kc = families.koiso_cao_solve(cfg).constants["c"]
    ts = np.linspace(-1.0, 1.0, n)
    rows = []
    for m in m_list:
        sol = families.lpp_solve(m, cfg)
        cd = sol.conformal
        phi0 = cd.phi(0.0)
        rows.append(
            ConvergenceRow(
                float(m),
                sol.constants["b"],
                max(abs(cd.sigma(float(t))) for t in ts),
                max(abs(cd.phi(float(t)) - phi0 - c_kc * float(t)) for t in ts),
                families.lpp_potential_halfspan(sol),
            )
        )
    return rows
