"""Moment polytopes of the one- and two-point blow-ups of CP^2.

A polytope is stored as a list of affine functionals ``l_i(x) = c_i + n_i . x``
whose common positivity set is the interior.  Invariant integrals of
functions of ``t = x1 + x2`` reduce to one dimension through
:func:`slice_length`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BoundaryEvaluation, OutOfRange, OutOfRangeClassParameter

BOUNDARY_SLACK = 1e-12


class PolytopeKind(str, Enum):
    TRAPEZIUM = "trapezium"
    PENTAGON = "pentagon"


@dataclass(frozen=True)
class AffineFunctional:
    constant: float
    normal: tuple[float, float]

    def __post_init__(self):
        if self.normal[0] == 0 and self.normal[1] == 0:
            raise ValueError("normal must be non-zero")

    def __call__(self, x) -> float:
        return self.constant + self.normal[0] * x[0] + self.normal[1] * x[1]


@dataclass(frozen=True)
class PolytopeSpec:
    kind: PolytopeKind
    a: float
    functionals: tuple[AffineFunctional, ...]

    def values(self, x) -> np.ndarray:
        return np.array([l(x) for l in self.functionals])

    @property
    def t_range(self) -> tuple[float, float]:
        if self.kind is PolytopeKind.TRAPEZIUM:
            return (-self.a, 1.0)
        return (-2.0, self.a - 1.0)

    @property
    def vertices(self) -> list[tuple[float, float]]:
        return vertices(self)


def trapezium(a: float) -> PolytopeSpec:
    """Trapezium for CP^2 # -CP^2; ``a`` fixes the exceptional divisor's volume."""
    if not -1.0 < a < 2.0:
        raise OutOfRangeClassParameter(f"trapezium requires a in (-1, 2), got {a}")
    fs = (
        AffineFunctional(1.0, (1.0, 0.0)),
        AffineFunctional(1.0, (0.0, 1.0)),
        AffineFunctional(1.0, (-1.0, -1.0)),
        AffineFunctional(float(a), (1.0, 1.0)),
    )
    return PolytopeSpec(PolytopeKind.TRAPEZIUM, float(a), fs)


def pentagon(a: float) -> PolytopeSpec:
    """Pentagon for CP^2 # 2(-CP^2)."""
    if not a > 1.0:
        raise OutOfRangeClassParameter(f"pentagon requires a > 1, got {a}")
    fs = (
        AffineFunctional(1.0, (1.0, 0.0)),
        AffineFunctional(1.0, (0.0, 1.0)),
        AffineFunctional(a - 1.0, (-1.0, 0.0)),
        AffineFunctional(a - 1.0, (0.0, -1.0)),
        AffineFunctional(a - 1.0, (-1.0, -1.0)),
    )
    return PolytopeSpec(PolytopeKind.PENTAGON, float(a), fs)


def contains(spec: PolytopeSpec, x, slack: float = 0.0) -> bool:
    return all(l(x) > slack for l in spec.functionals)


def vertices(spec: PolytopeSpec) -> list[tuple[float, float]]:
    """Vertices in counterclockwise order, starting from the lowest-then-leftmost one."""
    pts = []
    fs = spec.functionals
    for i in range(len(fs)):
        for j in range(i + 1, len(fs)):
            M = np.array([fs[i].normal, fs[j].normal])
            if abs(np.linalg.det(M)) < 1e-14:
                continue
            p = np.linalg.solve(M, [-fs[i].constant, -fs[j].constant])
            if all(l(p) >= -1e-12 for l in fs):
                if not any(np.allclose(p, q, atol=1e-12) for q in pts):
                    pts.append(p)
    centre = np.mean(pts, axis=0)
    pts.sort(key=lambda p: math.atan2(p[1] - centre[1], p[0] - centre[0]))
    start = min(range(len(pts)), key=lambda k: (round(pts[k][1], 12), round(pts[k][0], 12)))
    pts = pts[start:] + pts[:start]
    return [(float(p[0]) + 0.0, float(p[1]) + 0.0) for p in pts]


def shoelace_area(spec: PolytopeSpec) -> float:
    vs = vertices(spec)
    s = 0.0
    for (x1, y1), (x2, y2) in zip(vs, vs[1:] + vs[:1]):
        s += x1 * y2 - x2 * y1
    return 0.5 * abs(s)


def guillemin_term(spec: PolytopeSpec, x) -> float:
    """Canonical boundary term ``(1/2) sum l_i log l_i`` of a symplectic potential."""
    total = 0.0
    for l in spec.functionals:
        v = l(x)
        if v <= 0:
            raise BoundaryEvaluation(f"l(x) = {v} <= 0 at x = {tuple(x)}")
        total += v * math.log(v)
    return 0.5 * total


def guillemin_hessian(spec: PolytopeSpec, x) -> np.ndarray:
    """Hessian of :func:`guillemin_term`: ``(1/2) sum n_i n_i^T / l_i``."""
    H = np.zeros((2, 2))
    for l in spec.functionals:
        v = l(x)
        if v <= 0:
            raise BoundaryEvaluation(f"l(x) = {v} <= 0 at x = {tuple(x)}")
        n = np.asarray(l.normal)
        H += np.outer(n, n) / v
    return 0.5 * H


def slice_length(spec: PolytopeSpec, t: float) -> float:
    """Length of the slice ``{x1 + x2 = t}``, measured in the x1 coordinate."""
    lo, hi = spec.t_range
    if not lo <= t <= hi:
        raise OutOfRange(f"t = {t} outside [{lo}, {hi}]")
    if spec.kind is PolytopeKind.TRAPEZIUM:
        return t + 2.0
    if t <= spec.a - 2.0:
        return t + 2.0
    return 2.0 * (spec.a - 1.0) - t


def slice_breakpoints(spec: PolytopeSpec) -> list[float]:
    """t-range endpoints plus interior kinks of :func:`slice_length`."""
    lo, hi = spec.t_range
    if spec.kind is PolytopeKind.PENTAGON:
        return [lo, spec.a - 2.0, hi]
    return [lo, hi]
