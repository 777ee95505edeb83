"""Residual report shared by the verification and vertex checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ResidualReport:
    name: str
    grid: list
    max_abs_residual: float
    tolerance: float
    notes: str = ""
    residuals: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.max_abs_residual <= self.tolerance)

    @classmethod
    def from_residuals(cls, name, grid, residuals, tolerance, notes="") -> "ResidualReport":
        res = [float(r) for r in residuals]
        worst = float(np.max(np.abs(res))) if res else 0.0
        if res and not np.all(np.isfinite(res)):
            worst = float("inf")
        return cls(name, list(grid), worst, float(tolerance), notes, res)

    def summary(self) -> dict:
        return {
            "check": self.name,
            "max_abs": self.max_abs_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<28s} max|r| = {self.max_abs_residual:.3e}  tol = {self.tolerance:.1e}"
