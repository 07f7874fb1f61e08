"""Unit-frequency electrostatic response Phi_u and the small-coupling table.

Phi_u solves the screened Poisson equation

    -Delta Phi + q^2 u^2 Phi = q u^2

with Neumann behavior on the axis and homogeneous Dirichlet decay outside.
The discrete operator is symmetric positive definite (it is the Hessian of
the Dirichlet energy plus a nonnegative diagonal), so a Jacobi-preconditioned
conjugate gradient solve is used.  The scalar potential at frequency omega is
recovered as phi = omega * Phi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid as g
from .grid import AxiGrid, ScalarField, DIRICHLET0, NEUMANN0
from .linsolve import pcg


@dataclass
class PhiSolveOptions:
    tol: float = 1e-10        # relative residual vs ||q u^2|| (volume-weighted L2)
    max_iter: int = 20000

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


def phi_field(values: np.ndarray, grid: AxiGrid) -> ScalarField:
    return ScalarField(values, grid, axis_bc=NEUMANN0, outer_bc=DIRICHLET0)


def phi_operator_apply(x: np.ndarray, u2: np.ndarray, q: float, grid: AxiGrid) -> np.ndarray:
    """Symmetric (plain-dot-product) form of the screened operator:
    vol * (-Delta x + q^2 u^2 x)."""
    return g.dirichlet_energy_grad(x, grid, NEUMANN0, DIRICHLET0) + grid.vol * (q * q) * u2 * x


def phi_residual_norm(phi: np.ndarray, u2: np.ndarray, q: float, grid: AxiGrid) -> float:
    """Volume-weighted L2 norm of the unweighted equation residual."""
    r_sym = phi_operator_apply(phi, u2, q, grid) - grid.vol * q * u2
    return float(np.sqrt(np.sum(r_sym * r_sym / grid.vol)))


def solve_phi_values(u_values: np.ndarray, q: float, grid: AxiGrid,
                     opts: PhiSolveOptions | None = None,
                     warm_start: np.ndarray | None = None) -> np.ndarray:
    """Array-level Phi solve (hot path for the minimizer)."""
    opts = opts or PhiSolveOptions()
    if q < 0:
        raise ValueError("coupling q must be nonnegative")
    if q == 0.0:
        return np.zeros_like(u_values)

    u2 = u_values * u_values
    vol = grid.vol
    rhs_norm = float(np.sqrt(np.sum(vol * (q * u2) ** 2)))
    if rhs_norm == 0.0:
        return np.zeros_like(u_values)
    diag = g.dirichlet_diag(grid, NEUMANN0, DIRICHLET0) + vol * (q * q) * u2
    return pcg(lambda x: phi_operator_apply(x, u2, q, grid), vol * q * u2,
               warm_start, diag, vol, opts.tol * rhs_norm, opts.max_iter)


def solve_phi(u: ScalarField, q: float, opts: PhiSolveOptions | None = None,
              warm_start: ScalarField | None = None) -> ScalarField:
    """Solve -Delta Phi + q^2 u^2 Phi = q u^2 for the field u.

    The solution obeys the discrete maximum principle 0 <= q*Phi <= 1 up to
    the solve tolerance.  Raises NoConvergence if CG stalls.
    """
    warm = warm_start.values if warm_start is not None else None
    vals = solve_phi_values(u.values, q, u.grid, opts, warm)
    return phi_field(vals, u.grid)


def smallq_coupling(u: ScalarField, q_list, opts: PhiSolveOptions | None = None):
    """Table of (q, q * integral(Phi_u u^2 dV)) for each q in q_list.

    The coupling vanishes like q^2 as q -> 0; callers check the log-log slope.
    """
    qs = [float(q) for q in q_list]
    if any(q < 0 for q in qs) or qs != sorted(qs):
        raise ValueError("q_list must be nonnegative and sorted")
    u2 = u.values ** 2
    rows = []
    warm = None
    for q in qs:
        if q == 0.0:
            rows.append((0.0, 0.0))
            continue
        phi = solve_phi_values(u.values, q, u.grid, opts, warm)
        warm = phi
        rows.append((q, q * g.integrate_values(phi * u2, u.grid)))
    return rows


def fit_loglog_slope(table) -> float:
    """Least-squares slope of log(coupling) vs log(q) over positive entries."""
    qs = np.array([q for q, c in table if q > 0 and c > 0], dtype=float)
    cs = np.array([c for q, c in table if q > 0 and c > 0], dtype=float)
    if qs.size < 2:
        raise ValueError("need at least two positive (q, coupling) points")
    return float(np.polyfit(np.log(qs), np.log(cs), 1)[0])
