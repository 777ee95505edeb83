import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci_integrate

from toricqe import polytope as P
from toricqe.errors import BoundaryEvaluation, OutOfRange, OutOfRangeClassParameter


def test_trapezium_vertices_ccw():
    assert P.vertices(P.trapezium(1.0)) == [(0.0, -1.0), (2.0, -1.0), (-1.0, 2.0), (-1.0, 0.0)]


def test_pentagon_vertices_ccw():
    assert P.vertices(P.pentagon(2.0)) == [(-1.0, -1.0), (1.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 1.0)]


@pytest.mark.parametrize("a", [-0.5, 0.0, 1.0, 1.9])
def test_trapezium_area(a):
    spec = P.trapezium(a)
    assert P.shoelace_area(spec) == pytest.approx((9.0 - (2.0 - a) ** 2) / 2.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.05, 4.0))
def test_pentagon_area_equals_slice_integral(a):
    spec = P.pentagon(a)
    lo, mid, hi = P.slice_breakpoints(spec)
    total = sum(
        sci_integrate.quad(lambda t: P.slice_length(spec, t), u, v)[0] for u, v in ((lo, mid), (mid, hi)) if v > u
    )
    assert total == pytest.approx(P.shoelace_area(spec), rel=1e-12)


def test_class_parameter_ranges():
    for a in (-1.0, 2.0, 3.0):
        with pytest.raises(OutOfRangeClassParameter):
            P.trapezium(a)
    for a in (1.0, 0.5):
        with pytest.raises(OutOfRangeClassParameter):
            P.pentagon(a)


def test_contains_and_boundary():
    spec = P.trapezium(1.0)
    assert P.contains(spec, (0.0, 0.0))
    assert not P.contains(spec, (-1.0, 0.0))
    assert not P.contains(spec, (0.0, 0.0), slack=1.5)
    with pytest.raises(BoundaryEvaluation):
        P.guillemin_term(spec, (-1.0, 0.5))
    with pytest.raises(BoundaryEvaluation):
        P.guillemin_hessian(spec, (1.0, 0.0))


def test_guillemin_hessian_matches_differences():
    spec = P.pentagon(2.5)
    x = np.array([0.2, -0.3])
    h = 1e-4
    E = np.eye(2) * h
    H = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            H[i, j] = (
                P.guillemin_term(spec, x + E[i] + E[j])
                - P.guillemin_term(spec, x + E[i] - E[j])
                - P.guillemin_term(spec, x - E[i] + E[j])
                + P.guillemin_term(spec, x - E[i] - E[j])
            ) / (4 * h * h)
    assert P.guillemin_hessian(spec, x) == pytest.approx(H, abs=1e-6)


def test_slice_length_range():
    spec = P.pentagon(2.0)
    assert P.slice_length(spec, -2.0) == 0.0
    assert P.slice_length(spec, 0.0) == pytest.approx(2.0)
    assert P.slice_length(spec, 1.0) == pytest.approx(1.0)
    with pytest.raises(OutOfRange):
        P.slice_length(spec, 1.5)
    assert P.slice_length(P.trapezium(1.0), 1.0) == 3.0
