"""Built-in consistency checks: operator identities and reference constants.

Closed-form targets use :func:`math.gamma`, independent of the package's own
Gamma, so a corrupted Gamma shows up as failing checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hhbvp.bvp import compute_constants
from hhbvp.certify import CertifyOptions, certify_leray_schauder, compute_phi
from hhbvp.fraccalc import (
    FracOrder,
    caputo_hadamard_derivative,
    hadamard_derivative,
    hadamard_integral,
    hadamard_integral_grid,
    hilfer_hadamard_derivative,
)
from hhbvp.grid import Grid, GridFunction
from hhbvp.reference import EXAMPLE_41_REFERENCE, EXAMPLE_42_REFERENCE, example_41, example_42


@dataclass(frozen=True)
class SelftestConfig:
    grid_n: int
    resolution: int
    quadrature_tol: float
    inversion_tol: float

    @classmethod
    def full(cls) -> SelftestConfig:
        return cls(grid_n=1024, resolution=4096, quadrature_tol=1e-6, inversion_tol=5e-3)

    @classmethod
    def quick(cls) -> SelftestConfig:
        return cls(grid_n=128, resolution=512, quadrature_tol=1e-4, inversion_tol=5e-2)


# golden constants are compared at the precision they were published with
GOLDEN_TOL = 1e-4
GOLDEN_TOL_FINE = 1e-6


@dataclass(frozen=True)
class Check:
    name: str
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tol)

    def as_dict(self) -> dict:
        return {"name": self.name, "error": self.error, "tol": self.tol, "passed": self.passed}


def smooth_test_function(grid: Grid) -> GridFunction:
    """``(log t)^2 t``: every boundary term of the inversion formulas vanishes."""
    return GridFunction.from_log_callable(grid, lambda u: u**2 * np.exp(u))


def _quadrature_checks(cfg: SelftestConfig) -> list[Check]:
    checks = []
    for a in (0.5, 1.5, 2.5):
        value = hadamard_integral(lambda t: np.ones_like(t), a, math.e, cfg.resolution)
        checks.append(
            Check(f"I^{a} 1 at e", abs(value * math.gamma(a + 1.0) - 1.0), cfg.quadrature_tol)
        )
    for a in (0.5, 1.5):
        value = hadamard_integral(lambda t: np.log(t) ** 2, a, math.e, cfg.resolution)
        exact = 2.0 / math.gamma(3.0 + a)
        checks.append(Check(f"I^{a} (log t)^2 at e", abs(value / exact - 1.0), cfg.quadrature_tol))
    return checks


def _inversion_checks(cfg: SelftestConfig) -> list[Check]:
    grid = Grid(cfg.grid_n)
    phi = smooth_test_function(grid)
    u = grid.u
    checks = []

    f = GridFunction.from_log_callable(grid, np.exp)
    g = hadamard_integral_grid(hadamard_integral_grid(f, 0.5), 0.75)
    # I^{5/4} e^u = sum_k u^{k + 5/4} / Gamma(k + 9/4)
    series = sum(u ** (k + 1.25) / math.gamma(k + 2.25) for k in range(30))
    exact = GridFunction(grid, series)
    checks.append(Check("semigroup I^0.5 I^0.75 = I^1.25", (g - exact).norm(), cfg.inversion_tol))

    for a in (0.5, 1.5):
        back = hadamard_integral_grid(hadamard_derivative(phi, a), a)
        checks.append(Check(f"I^{a} D^{a} phi = phi", (back - phi).norm(), cfg.inversion_tol))

    t_func = GridFunction.from_log_callable(grid, np.exp)
    for a in (0.5, 1.5):
        n = math.floor(a) + 1
        taylor = sum(u**k / math.factorial(k) for k in range(n))
        back = hadamard_integral_grid(caputo_hadamard_derivative(t_func, a), a)
        target = t_func - GridFunction(grid, taylor)
        checks.append(
            Check(f"I^{a} CD^{a} t = t - Taylor part", (back - target).norm(), cfg.inversion_tol)
        )

    for beta in (0.0, 0.5, 1.0):
        order = FracOrder(1.5, beta)
        # the homogeneous modes are annihilated by I^alpha D^{alpha,beta}
        x = phi + GridFunction.power(grid, order.gamma - 1.0, 0.3)
        x = x + GridFunction.power(grid, order.gamma - 2.0, -0.2)
        back = hadamard_integral_grid(hilfer_hadamard_derivative(x, order), order.alpha)
        checks.append(
            Check(f"I^1.5 D^(1.5,{beta}) x = phi", (back - phi).norm(), cfg.inversion_tol)
        )
    return checks


def _golden_checks(cfg: SelftestConfig) -> list[Check]:
    checks = []
    for label, problem, reference in (
        ("ex41", example_41(), EXAMPLE_41_REFERENCE),
        ("ex42", example_42(), EXAMPLE_42_REFERENCE),
    ):
        k = compute_constants(problem).as_dict()
        phi = compute_phi(problem)
        values = dict(k, Phi=phi)
        if problem.lipschitz is not None:
            values["C_Phi"] = problem.lipschitz * phi
        if problem.q is not None:
            cert = certify_leray_schauder(problem, CertifyOptions(grid_n=cfg.grid_n))
            values["L_star"] = cert.constants.get("L_star", math.inf)
        for name, expected in reference.items():
            tol = GOLDEN_TOL_FINE if name == "C_Phi" else GOLDEN_TOL
            checks.append(Check(f"{label} {name}", abs(values[name] - expected), tol))
    return checks


def run_selftest(quick: bool = False) -> list[Check]:
    cfg = SelftestConfig.quick() if quick else SelftestConfig.full()
    return _quadrature_checks(cfg) + _inversion_checks(cfg) + _golden_checks(cfg)
