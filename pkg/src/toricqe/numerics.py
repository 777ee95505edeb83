"""Deterministic scalar numerical kernels.

Adaptive Gauss-Kronrod quadrature, Brent's bracketed root finder, a
Ferrari quartic solver with Newton polishing, a damped Newton iteration for
small dense systems and central finite differences.  Everything here is a
pure function of its arguments.
"""

from __future__ import annotations

import cmath
import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateLeadingCoefficient,
    NonConvergence,
    NoSignChange,
    SingularJacobian,
    ToricQEError,
)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite, got {self}")
        if not self.lo < self.hi:
            raise ValueError(f"interval requires lo < hi, got {self}")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class SolverConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 0.0
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.rel_tol >= 0:
            raise ValueError("rel_tol must be non-negative")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")

    def replace(self, **kw) -> "SolverConfig":
        fields = {"abs_tol": self.abs_tol, "rel_tol": self.rel_tol, "max_iter": self.max_iter}
        fields.update(kw)
        return SolverConfig(**fields)


DEFAULT_CONFIG = SolverConfig()


# ---------------------------------------------------------------------------
# quadrature

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (non-negative half).
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
# Gauss weights for the 7-point rule, matching _XGK[1], _XGK[3], _XGK[5], _XGK[7].
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


@dataclass(frozen=True)
class Panel:
    lo: float
    hi: float
    value: float
    error: float
    abs_value: float


def _gk15(f: Callable[[float], float], lo: float, hi: float) -> Panel:
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    fc = f(centre)
    kronrod = _WGK[7] * fc
    gauss = _WG[3] * fc
    absval = _WGK[7] * abs(fc)
    for j in range(7):
        dx = half * _XGK[j]
        f1 = f(centre - dx)
        f2 = f(centre + dx)
        kronrod += _WGK[j] * (f1 + f2)
        absval += _WGK[j] * (abs(f1) + abs(f2))
        if j % 2 == 1:
            gauss += _WG[j // 2] * (f1 + f2)
    value = kronrod * half
    err = abs((kronrod - gauss) * half)
    absval *= abs(half)
    # roundoff floor for the panel estimate
    err = max(err, 50.0 * _EPS * absval)
    return Panel(lo, hi, value, err, absval)


def integrate_panels(
    f: Callable[[float], float], iv: Interval, cfg: SolverConfig = DEFAULT_CONFIG
) -> list[Panel]:
    """Globally adaptive GK15 quadrature, returning the final partition.

    The panel with the largest error estimate is bisected until the summed
    estimate satisfies ``err <= abs_tol + rel_tol * |Q|``.  Panels come back
    sorted by their left endpoint so that callers can build running
    integrals from them.

    Raises
    ------
    NonConvergence
        If the tolerance is not met after ``cfg.max_iter`` bisections.
    """
    first = _gk15(f, iv.lo, iv.hi)
    heap = [(-first.error, 0, first)]
    counter = 1
    total = first.value
    err = first.error
    for _ in range(cfg.max_iter):
        if err <= cfg.abs_tol + cfg.rel_tol * abs(total):
            break
        _, _, worst = heapq.heappop(heap)
        mid = 0.5 * (worst.lo + worst.hi)
        left = _gk15(f, worst.lo, mid)
        right = _gk15(f, mid, worst.hi)
        total += left.value + right.value - worst.value
        err += left.error + right.error - worst.error
        for p in (left, right):
            heapq.heappush(heap, (-p.error, counter, p))
            counter += 1
    else:
        if err > cfg.abs_tol + cfg.rel_tol * abs(total):
            raise NonConvergence(
                f"quadrature error estimate {err:.3e} above tolerance after "
                f"{cfg.max_iter} refinements on [{iv.lo}, {iv.hi}]"
            )
    return sorted((item[2] for item in heap), key=lambda p: p.lo)


def integrate(
    f: Callable[[float], float], iv: Interval, cfg: SolverConfig = DEFAULT_CONFIG
) -> float:
    """Integrate ``f`` over ``iv`` to ``abs_tol + rel_tol * |Q|``."""
    panels = integrate_panels(f, iv, cfg)
    return math.fsum(p.value for p in panels)


# ---------------------------------------------------------------------------
# bracketed roots


@dataclass(frozen=True)
class RootResult:
    root: float
    iterations: int
    evaluations: int


def brent(
    f: Callable[[float], float], iv: Interval, cfg: SolverConfig = DEFAULT_CONFIG
) -> RootResult:
    """Brent's method: inverse quadratic / secant steps with bisection fallback.

    Stops once the bracket is narrower than ``abs_tol`` (plus a few ulps of
    the iterate).
    """
    a, b = iv.lo, iv.hi
    fa, fb = f(a), f(b)
    nev = 2
    if not fa * fb < 0:
        raise NoSignChange(
            f"f({a}) = {fa} and f({b}) = {fb} do not bracket a root"
        )
    c, fc = a, fa
    d = e = b - a
    for it in range(1, cfg.max_iter + 1):
        if fb * fc > 0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * _EPS * abs(b) + 0.5 * cfg.abs_tol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            return RootResult(b, it, nev)
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = f(b)
        nev += 1
    raise NonConvergence(f"Brent iteration did not converge in {cfg.max_iter} steps")


def find_root_bracketed(
    f: Callable[[float], float], iv: Interval, cfg: SolverConfig = DEFAULT_CONFIG
) -> float:
    """Root of ``f`` inside ``iv``; requires a strict sign change."""
    return brent(f, iv, cfg).root


# ---------------------------------------------------------------------------
# quartic


def _horner(coeffs: Sequence[float], x):
    acc = 0.0 * x
    for c in coeffs:
        acc = acc * x + c
    return acc


def _cubic_roots(a2: float, a1: float, a0: float) -> list[complex]:
    # x^3 + a2 x^2 + a1 x + a0 via Cardano in complex arithmetic
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    shift = -a2 / 3.0
    if p == 0.0 and q == 0.0:
        return [complex(shift)] * 3
    disc = cmath.sqrt((q / 2.0) ** 2 + (p / 3.0) ** 3)
    u3 = -q / 2.0 + disc
    if abs(u3) < abs(-q / 2.0 - disc):
        u3 = -q / 2.0 - disc
    u = u3 ** (1.0 / 3.0)
    omega = complex(-0.5, math.sqrt(3.0) / 2.0)
    roots = []
    for k in range(3):
        uk = u * omega**k
        vk = -p / (3.0 * uk) if uk != 0 else 0.0
        roots.append(uk + vk + shift)
    return roots


def _quartic_complex(c4, c3, c2, c1, c0) -> list[complex]:
    b, c, d, e = c3 / c4, c2 / c4, c1 / c4, c0 / c4
    # depressed: y^4 + p y^2 + q y + r, x = y - b/4
    p = c - 3.0 * b * b / 8.0
    q = d - b * c / 2.0 + b**3 / 8.0
    r = e - b * d / 4.0 + b * b * c / 16.0 - 3.0 * b**4 / 256.0
    shift = -b / 4.0
    if abs(q) <= 1e-14 * max(1.0, abs(p), abs(r)):
        w = [(-p + s * cmath.sqrt(p * p - 4.0 * r)) / 2.0 for s in (1, -1)]
        ys = [s * cmath.sqrt(wi) for wi in w for s in (1, -1)]
    else:
        # resolvent: y^4 + p y^2 + q y + r = (y^2 + s)^2 - 2s(y - q/(4s))^2 ... choose largest root
        ms = _cubic_roots(p, p * p / 4.0 - r, -q * q / 8.0)
        mroot = max(ms, key=abs)
        s2 = cmath.sqrt(2.0 * mroot)
        ys = []
        for sgn in (1, -1):
            inner = cmath.sqrt(-(2.0 * p + 2.0 * mroot + sgn * math.sqrt(2.0) * q / cmath.sqrt(mroot)))
            ys.append((sgn * s2 + inner) / 2.0)
            ys.append((sgn * s2 - inner) / 2.0)
    return [y + shift for y in ys]


def _polish_real(coeffs, deriv, deriv2, x: float, tol: float, max_iter: int) -> float:
    for _ in range(max_iter):
        fx = _horner(coeffs, x)
        dfx = _horner(deriv, x)
        if dfx == 0.0 or abs(dfx) < 1e-8 * max(1.0, abs(fx)) ** 0.5:
            # multiple root: Newton on the derivative converges quadratically
            d2 = _horner(deriv2, x)
            if d2 == 0.0:
                break
            step = dfx / d2
        else:
            step = fx / dfx
        x_new = x - step
        if abs(step) <= tol or x_new == x:
            return x_new
        x = x_new
    return x


def real_roots_quartic(
    c4: float, c3: float, c2: float, c1: float, c0: float, cfg: SolverConfig = DEFAULT_CONFIG
) -> list[float]:
    """Real roots of ``c4 x^4 + ... + c0``, ascending, counted with multiplicity.

    Ferrari's reduction produces four complex candidates; those with a
    negligible imaginary part are polished by Newton iteration on the
    original polynomial.
    """
    if c4 == 0:
        raise DegenerateLeadingCoefficient("leading coefficient must be non-zero")
    coeffs = (c4, c3, c2, c1, c0)
    deriv = (4 * c4, 3 * c3, 2 * c2, c1)
    deriv2 = (12 * c4, 6 * c3, 2 * c2)
    scale = max(abs(c) for c in coeffs) / abs(c4)
    out = []
    for z in _quartic_complex(*coeffs):
        mag = max(1.0, abs(z))
        if abs(z.imag) > 1e-6 * mag * max(1.0, scale) ** 0.25:
            continue
        x = _polish_real(coeffs, deriv, deriv2, z.real, cfg.abs_tol, cfg.max_iter)
        # reject spurious candidates from near-complex pairs
        resid = abs(_horner(coeffs, x))
        size = sum(abs(c) * mag ** (4 - k) for k, c in enumerate(coeffs))
        if resid <= 1e-9 * size:
            out.append(float(x))
    return sorted(out)


# ---------------------------------------------------------------------------
# Newton for small systems


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    residual_norm: float
    iterations: int


def fd_jacobian(F: Callable[[np.ndarray], np.ndarray], x: np.ndarray, fx: np.ndarray) -> np.ndarray:
    """Forward-difference Jacobian with step max(1e-7, 1e-7 |x_i|)."""
    n = x.size
    J = np.empty((fx.size, n))
    for i in range(n):
        h = max(1e-7, 1e-7 * abs(x[i]))
        xp = x.copy()
        xp[i] += h
        h = xp[i] - x[i]
        J[:, i] = (np.asarray(F(xp), dtype=float) - fx) / h
    return J


def newton_system(
    F: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    cfg: SolverConfig = DEFAULT_CONFIG,
    *,
    max_cond: float = 1e12,
) -> NewtonResult:
    """Damped Newton iteration with a finite-difference Jacobian.

    Steps are halved (up to 40 times) until the residual max-norm drops;
    a trial point at which ``F`` raises a package error counts as a failed
    step, which keeps iterates inside positivity domains.
    """
    x = np.array(x0, dtype=float)
    fx = np.asarray(F(x), dtype=float)
    if fx.shape != x.shape:
        raise ValueError("F must map R^n to R^n")
    norm = float(np.max(np.abs(fx)))
    for it in range(cfg.max_iter + 1):
        if norm <= cfg.abs_tol:
            return NewtonResult(x, norm, it)
        if it == cfg.max_iter:
            break
        J = fd_jacobian(F, x, fx)
        cond = np.linalg.cond(J)
        if not np.isfinite(cond) or cond > max_cond:
            raise SingularJacobian(f"Jacobian condition estimate {cond:.3e} at x = {x}")
        step = np.linalg.solve(J, -fx)
        lam = 1.0
        for _ in range(40):
            trial = x + lam * step
            try:
                ft = np.asarray(F(trial), dtype=float)
            except ToricQEError:
                ft = None
            if ft is not None and np.all(np.isfinite(ft)):
                tnorm = float(np.max(np.abs(ft)))
                if tnorm < norm:
                    break
            lam *= 0.5
        else:
            raise NonConvergence(f"line search failed at iteration {it}, x = {x}")
        if np.array_equal(trial, x):
            break
        x, fx, norm = trial, ft, tnorm
    raise NonConvergence(
        f"Newton iteration stalled with residual {norm:.3e} after {cfg.max_iter} steps"
    )


def solve_system(
    F: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    cfg: SolverConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Root of ``F`` near ``x0`` with ``max|F(x)| <= abs_tol``."""
    return newton_system(F, x0, cfg).x


# ---------------------------------------------------------------------------
# finite differences


def central_derivative(f: Callable[[float], float], x: float, order: int, h: float) -> float:
    """Second-order central stencil for f' (order=1) or f'' (order=2)."""
    if h <= 0:
        raise ValueError("step must be positive")
    if order == 1:
        return (f(x + h) - f(x - h)) / (2.0 * h)
    if order == 2:
        return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    raise ValueError("order must be 1 or 2")
