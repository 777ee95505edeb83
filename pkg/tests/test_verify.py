import math

import numpy as np
import pytest

from toricqe import families as F, verify as V
from toricqe.cp2b2 import cp2b2_from_constants, solve_constraints
from toricqe.geometry import ConformalData, Profile, guillemin_profile
from toricqe.report import ResidualReport


@pytest.fixture(scope="module")
def sols():
    return {
        "lpp2": F.lpp_solve(2),
        "lpp50": F.lpp_solve(50),
        "page": F.page_solve(),
        "kc": F.koiso_cao_solve(),
        "cp2b2": solve_constraints(2.0, 2.0),
    }


def test_report_pass_invariant():
    r = ResidualReport.from_residuals("x", [], [1e-3, -2e-3], 1e-3)
    assert r.max_abs_residual == 2e-3 and not r.passed
    assert ResidualReport.from_residuals("x", [], [math.nan], 1.0).max_abs_residual == math.inf
    assert ResidualReport.from_residuals("x", [], [], 0.0).passed


@pytest.mark.parametrize("key", ["lpp2", "lpp50", "page", "kc", "cp2b2"])
def test_all_checks_pass_on_fresh_solutions(sols, key):
    reports = V.run_all_checks(sols[key])
    assert reports and all(r.passed for r in reports), [r.line() for r in reports if not r.passed]


@pytest.mark.parametrize("key, tol", [("kc", 1e-8), ("page", 1e-8), ("lpp2", 1e-6)])
def test_boundary(sols, key, tol):
    assert V.check_boundary(sols[key]).max_abs_residual < tol


def test_positivity_detects_violated_d(sols):
    # flipping the sign of d keeps dbt+dc+1 positive for LPP (d < 0, b > 0); push d below -1 instead
    s = sols["lpp2"]
    k = dict(s.constants)
    bad = F.FamilySolution(s.family, s.a, k, m=s.m, conformal=ConformalData(b=k["b"], c=k["c"], d=4 * k["d"], m=s.m))
    assert not V.check_positivity(bad).passed
    assert V.check_positivity(sols["page"]).passed
    assert "dbt+dc+1" not in V.check_positivity(sols["page"]).notes


def test_positivity_cp2b2_violation():
    sol = cp2b2_from_constants(2.0, 2.0, -0.6, 1.0, -0.46, 0.28)
    assert not V.check_positivity(sol).passed


@pytest.mark.parametrize("key", ["lpp2", "lpp50"])
def test_kim_kim_assemblies_agree(sols, key):
    s = sols[key]
    rep, agree = V.kim_kim_residuals(s.profile, s.conformal, s.m, s.constants["mu"], V.t_grid(1.0))
    assert rep.max_abs_residual < 1e-7
    assert agree < 1e-9


def test_kim_kim_einstein_stub():
    # constant phi, sigma = 0 and mu = 1 leave m (1 - mu) = 0
    rep, agree = V.kim_kim_residuals(guillemin_profile(1.0), ConformalData(), 3.0, 1.0, V.t_grid(1.0, 11))
    assert rep.max_abs_residual == 0.0 and agree == 0.0


def test_kim_kim_detects_wrong_mu(sols):
    s = sols["lpp2"]
    rep, _ = V.kim_kim_residuals(s.profile, s.conformal, s.m, s.constants["mu"] * 1.01, V.t_grid(1.0))
    assert not rep.passed


def test_soliton_identity(sols):
    rep = V.check_soliton_identity(sols["kc"])
    assert rep.passed
    assert abs(V.soliton_normalization(sols["kc"].constants["c"])) < 1e-6
    assert V.soliton_pointwise(sols["kc"].profile, 0.0, 0.3) == 0.0
    with pytest.raises(ValueError):
        V.check_soliton_identity(sols["page"])


def test_soliton_normalization_against_closed_form():
    # int t (2 + t) e^{-ct} over [-1, 1] by repeated integration by parts
    c = 0.7

    def antideriv(t):
        return -math.exp(-c * t) * ((t * t + 2 * t) / c + (2 * t + 2) / c**2 + 2 / c**3)

    assert V.soliton_normalization(c) == pytest.approx(antideriv(1) - antideriv(-1), abs=1e-13)


@pytest.mark.parametrize("key", ["page", "lpp2", "kc"])
def test_quasi_einstein_pointwise(sols, key):
    assert abs(V.check_quasi_einstein_pointwise(sols[key], (0.3, -0.1))) < 1e-6
    assert V.check_quasi_einstein_pointwise(sols[key], (0.2, 0.2)) == 0.0


def test_quasi_einstein_detects_wrong_lambda(sols):
    assert abs(V.check_quasi_einstein_pointwise(sols["page"], (0.3, -0.1), lam=1.1)) > 1e-3


@pytest.mark.parametrize("key", ["lpp2", "page", "kc"])
def test_ricci_crosscheck(sols, key):
    rep = V.check_ricci_crosscheck(sols[key])
    assert len(rep.grid) == 20 and rep.max_abs_residual < 1e-4


def test_interior_points_margin():
    for x in V.interior_points(1.0, 50, seed=3):
        assert min(x[0] + 1, x[1] + 1, 1 - x[0] - x[1], x[0] + x[1] + 1) > 0.1 - 1e-12


def test_check_guarded_failure_is_reported():
    broken = F.koiso_cao_from_constants(0.5276, -1.0)
    reports = {r.name: r for r in V.run_all_checks(broken)}
    assert not reports["boundary"].passed
    assert not all(r.passed for r in reports.values())


def test_perturbed_lpp_fails(sols):
    s = sols["lpp2"]
    k = s.constants
    bad = F.lpp_from_constants(2.0, k["b"] + 0.01, k["c"], k["d"], k["mu"])
    assert not all(r.passed for r in V.run_all_checks(bad))


def test_convergence_study_trend():
    rows = V.convergence_study([2, 5, 10, 50])
    bs = [r.b for r in rows]
    sig = [r.sup_sigma for r in rows]
    gap = [r.sup_phi_gap for r in rows]
    assert all(x > y for x, y in zip(bs, bs[1:]))
    assert all(x > y for x, y in zip(sig, sig[1:]))
    assert all(x > y for x, y in zip(gap, gap[1:]))
    assert rows[-1].half_span == pytest.approx(0.517374, abs=1e-4)


def test_profile_absent_rejected(sols):
    with pytest.raises(ValueError):
        V.check_boundary(sols["cp2b2"])
