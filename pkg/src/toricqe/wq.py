"""CP^1-bundles W_q over a Fano Kähler-Einstein base.

The warping function is ``beta(s) = A (s + s0)^2 - q^2/(4A)`` on ``[0, 4]``,
with ``s0`` tied to ``(p, q, A)`` by ``s0 (s0 + 4) = (8Ap + q^2)/(4A^2)``.
The conformal factor ``sigma(s) = -log|2A(s + s0) - q|`` makes the metric
Kähler, and the Kähler class ratio between the two ends equals
``(p - q)/(p + q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ConformalFactorPole, InvalidTopology, NonPositiveBeta


@dataclass(frozen=True)
class WqTopology:
    p: int
    q: int
    A: float
    s0: float
    #: ``(2A s0 - q, 2A s0 + q)`` evaluated without cancellation; filled in by :func:`wq_normalize`
    factors0: Optional[tuple[float, float]] = None

    def factors(self, s: float) -> tuple[float, float]:
        """``(2A(s + s0) - q, 2A(s + s0) + q)``, whose product is ``4A beta(s)``."""
        if self.factors0 is None:
            x = 2.0 * self.A * (s + self.s0)
            return x - self.q, x + self.q
        shift = 2.0 * self.A * s
        return self.factors0[0] + shift, self.factors0[1] + shift

    def beta(self, s: float) -> float:
        minus, plus = self.factors(s)
        return minus * plus / (4.0 * self.A)

    def constraint_residual(self) -> float:
        return self.s0 * (self.s0 + 4.0) - (8.0 * self.A * self.p + self.q**2) / (4.0 * self.A**2)


def wq_normalize(p: int, q: int, A: float) -> WqTopology:
    """Bundle data with ``s0`` the positive root of its defining quadratic."""
    if int(p) != p or int(q) != q or q == 0 or abs(q) >= p:
        raise InvalidTopology(f"need integers with 0 < |q| < p, got p={p}, q={q}")
    if not A > 0:
        raise InvalidTopology(f"A must be positive, got {A}")
    rhs = (8.0 * A * p + q * q) / (4.0 * A * A)
    # s0 = -2 + sqrt(4 + rhs), written to avoid cancellation for small rhs
    s0 = rhs / (2.0 + math.sqrt(4.0 + rhs))
    # 2A s0 = sqrt(16A^2 + 8Ap + q^2) - 4A; the factor 2A s0 - |q| is rationalised
    root = math.sqrt(16.0 * A * A + 8.0 * A * p + q * q)
    small = 8.0 * A * (p - abs(q)) / (root + 4.0 * A + abs(q))
    big = small + 2.0 * abs(q)
    w = WqTopology(int(p), int(q), float(A), s0, (small, big) if q > 0 else (big, small))
    for s in (0.0, 4.0):
        if not w.beta(s) > 0:
            raise NonPositiveBeta(f"beta({s}) = {w.beta(s)} <= 0")
    return w


def sigma_wq(w: WqTopology, s: float) -> float:
    if not 0.0 <= s <= 4.0:
        raise ValueError(f"s = {s} outside [0, 4]")
    arg = w.factors(s)[0]
    if arg == 0:
        raise ConformalFactorPole(f"2A(s + s0) = q at s = {s}")
    return -math.log(abs(arg))


def chern_class_coeffs(p: int, q: int) -> tuple[int, int]:
    """Coefficients of ``c1(W_q) = (p + q) pi^* a + 2 F``."""
    return (p + q, 2)


def kaehler_class_ratio(w: WqTopology) -> float:
    """``e^{2 sigma(4)} beta(4) / (e^{2 sigma(0)} beta(0))``."""
    top = math.exp(2.0 * sigma_wq(w, 4.0)) * w.beta(4.0)
    bottom = math.exp(2.0 * sigma_wq(w, 0.0)) * w.beta(0.0)
    return top / bottom
