"""Torus trial functions and the energy-per-charge scan.

The trial u_lam equals s0 on the solid torus whose meridional cross-section
is the disk of radius lam/2 around (r, x3) = (lam, 0), drops to 0 across a
unit-width shell through a quintic smoothstep in the signed distance, and
vanishes outside.  The smoothstep's maximal slope is 15/8, so |grad u| stays
below 2 for s0 = 1 with margin.

With sigma = sigma_lam = int u_lam^2, the energy-per-charge ratio splits as

    Lambda = 1/2  +  sigma_lam / (2 K_q(u_lam))
           + [int |grad u|^2 + ell^2 int u^2/r^2] / (2 sigma_lam)
           + int N(u_lam) / sigma_lam,

whose third term decays like 1/lam and whose fourth tends to a negative
constant whenever N(s0) < 0 — which is what drives the ratio below 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid as g
from .electrostatic import PhiSolveOptions, solve_phi_values
from .errors import DomainTooSmall
from .functionals import k_charge_values
from .grid import AxiGrid, ScalarField, DIRICHLET0
from .potentials import PotentialSpec


def smoothstep_quintic(t: np.ndarray) -> np.ndarray:
    """6t^5 - 15t^4 + 10t^3 clamped to [0, 1]; max slope 15/8 at t = 1/2."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


@dataclass
class TorusTrial:
    lam: float
    s0: float
    field: ScalarField
    sigma_lambda: float


def build_torus_trial(lam: float, s0: float, grid: AxiGrid,
                      potential: PotentialSpec | None = None,
                      axis_bc: str = DIRICHLET0) -> TorusTrial:
    """Construct u_lam on the grid.

    Raises DomainTooSmall when the outer torus (minor radius lam/2 + 1) exits
    the domain, ValueError when lam <= 2 or when a potential is supplied and
    N(s0) is not negative.
    """
    if lam <= 2.0:
        raise ValueError(f"torus major radius must exceed 2, got {lam}")
    if potential is not None and float(potential.n(s0)) >= 0.0:
        raise ValueError(
            f"s0 = {s0} has N(s0) = {float(potential.n(s0)):.3e} >= 0 "
            f"for {potential.id_string()}; the trial needs N(s0) < 0")
    outer = lam / 2.0 + 1.0
    if lam + outer > grid.R or outer > grid.Z:
        raise DomainTooSmall(
            f"torus (r up to {lam + outer:g}, |x3| up to {outer:g}) exceeds "
            f"domain R={grid.R:g}, Z={grid.Z:g}")

    dist = np.hypot(grid.r[:, None] - lam, grid.z[None, :])
    values = s0 * (1.0 - smoothstep_quintic(dist - lam / 2.0))
    field = ScalarField(values, grid, axis_bc=axis_bc, outer_bc=DIRICHLET0)
    sigma_lam = g.integrate_values(values * values, grid)
    return TorusTrial(lam=float(lam), s0=float(s0), field=field,
                      sigma_lambda=sigma_lam)


def lambda_scan(lambda_list, q_list, s0: float, grid: AxiGrid,
                potential: PotentialSpec | None = None, ell: int = 1,
                phi_opts: PhiSolveOptions | None = None) -> list[dict]:
    """Energy/charge ratio of the torus trials over (lambda, q).

    Each row carries Lambda and its four-term split (term1 = 1/2 rest term,
    term2 = charge term, term3 = gradient + centrifugal, term4 = N term) plus
    sigma_lambda.  term2 equals 1/2 exactly at q = 0.
    """
    pot = potential or PotentialSpec()
    rows = []
    for lam in lambda_list:
        trial = build_torus_trial(float(lam), s0, grid, pot)
        u = trial.field.values
        sigma_lam = trial.sigma_lambda
        grad_sq = 2.0 * g.dirichlet_energy(u, grid, trial.field.axis_bc,
                                           trial.field.outer_bc)
        cent = ell * ell * g.integrate_values(u * u / grid.r[:, None] ** 2, grid)
        n_int = g.integrate_values(pot.n(u), grid)
        term1 = 0.5
        term3 = (grad_sq + cent) / (2.0 * sigma_lam)
        term4 = n_int / sigma_lam
        for q in q_list:
            q = float(q)
            if q == 0.0:
                k = sigma_lam
            else:
                phi = solve_phi_values(u, q, grid, phi_opts)
                k = k_charge_values(u, phi, q, grid)
            term2 = sigma_lam / (2.0 * k)
            rows.append({
                "lambda": float(lam), "q": q,
                "Lambda": term1 + term2 + term3 + term4,
                "term1": term1, "term2": term2,
                "term3": term3, "term4": term4,
                "sigma": sigma_lam,
            })
    return rows
