"""Reduced energies, charges, and their exact discrete gradients.

The charge-constrained energy of a configuration (u, a) with winding ell,
coupling q and charge sigma is

    E_sigma(u, a) = I(u, a) + sigma^2 / (2 K_q(u)),
    I(u, a) = 1/2 int |grad u|^2 + 1/2 int |curl(a grad theta)|^2
              + 1/2 int (ell - q a)^2 u^2 / r^2 + int W(u),
    K_q(u) = int (1 - q Phi_u) u^2,

with frequency omega = sigma / K_q(u).  All integrals use the cylindrical
quadrature from the grid module, and the gradients returned here are the
exact derivatives of the *discretized* functionals (discretize-then-optimize):
differentiating K with Phi frozen at Phi_u is exact because Phi_u is the
stationary point of A(u, Phi) = int |grad Phi|^2 + int u^2 (1 - q Phi)^2 and
A(u, Phi_u) = K(u) holds identically for the discrete quadratures as well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid as g
from .electrostatic import PhiSolveOptions, phi_field, solve_phi_values
from .errors import ZeroMass
from .grid import AxiGrid, ScalarField, DIRICHLET0, NEUMANN0
from .potentials import PotentialSpec

OMEGA_MIN = 1e-6
OMEGA_MAX = 1e6


@dataclass
class VortexState:
    """Minimization unknown (u, a) plus run parameters.

    u >= 0 is the matter amplitude; a is the magnetic potential amplitude in
    A = a grad(theta); ell the integer winding; q >= 0 the coupling;
    sigma > 0 the conserved charge.  The potential is carried along so states
    are self-contained for solving and persistence.
    """

    u: ScalarField
    a: ScalarField
    ell: int
    q: float
    sigma: float
    potential: PotentialSpec

    def __post_init__(self):
        if not self.u.grid.compatible(self.a.grid):
            raise ValueError("u and a must share one grid")
        if np.min(self.u.values) < 0.0:
            raise ValueError("matter amplitude u must be nonnegative")
        if self.q < 0.0:
            raise ValueError("coupling q must be nonnegative")
        if self.sigma <= 0.0:
            raise ValueError("charge sigma must be positive")
        if self.ell != int(self.ell):
            raise ValueError("winding ell must be an integer")
        self.ell = int(self.ell)

    @property
    def grid(self) -> AxiGrid:
        return self.u.grid

    def with_fields(self, u_values: np.ndarray, a_values: np.ndarray) -> "VortexState":
        return VortexState(self.u.with_values(u_values), self.a.with_values(a_values),
                           self.ell, self.q, self.sigma, self.potential)


def make_state(grid: AxiGrid, u_values: np.ndarray, a_values: np.ndarray,
               ell: int, q: float, sigma: float,
               potential: PotentialSpec | None = None,
               outer_bc: str = DIRICHLET0) -> VortexState:
    """Build a VortexState with the axis conditions the reduction dictates:
    u vanishes on the axis when ell != 0 (the ell^2/r^2 weight forces it) and
    is even/regular when ell == 0; a always vanishes on the axis."""
    u_axis = DIRICHLET0 if ell != 0 else NEUMANN0
    u = ScalarField(u_values, grid, axis_bc=u_axis, outer_bc=outer_bc)
    a = ScalarField(a_values, grid, axis_bc=DIRICHLET0, outer_bc=outer_bc)
    return VortexState(u, a, ell, q, sigma, potential or PotentialSpec())


@dataclass
class EnergyBreakdown:
    dirichlet_u: float
    magnetic: float
    centrifugal: float
    potential: float
    charge_term: float
    total: float
    omega: float
    K_q: float
    lam: float              # Lambda = total / sigma
    electric_charge: float  # Q = q * sigma

    def as_dict(self) -> dict:
        return dict(self.__dict__)


# ---------------------------------------------------------------------------
# array-level core (used by the minimizer and by the dataclass wrappers)
# ---------------------------------------------------------------------------

def centrifugal_energy(u: np.ndarray, a: np.ndarray, ell: int, q: float,
                       grid: AxiGrid) -> float:
    w = (ell - q * a) ** 2 * u * u / grid.r[:, None] ** 2
    return 0.5 * g.integrate_values(w, grid)

def potential_energy(u: np.ndarray, pot: PotentialSpec, grid: AxiGrid) -> float:
    return g.integrate_values(pot.w(u), grid)

def k_charge_values(u: np.ndarray, phi: np.ndarray, q: float, grid: AxiGrid) -> float:
    mass = g.integrate_values(u * u, grid)
    if mass <= 0.0:
        raise ZeroMass("K_q undefined: integral of u^2 is zero")
    if q == 0.0:
        return mass
    return g.integrate_values((1.0 - q * phi) * u * u, grid)

def omega_of(sigma: float, k: float) -> float:
    if k <= 0.0:
        raise ZeroMass(f"K_q = {k:.3e} is not positive")
    return sigma / k


def reduced_parts(u: np.ndarray, a: np.ndarray, ell: int, q: float,
                  pot: PotentialSpec, grid: AxiGrid,
                  u_bcs: tuple[str, str], a_outer: str) -> tuple[float, float, float, float]:
    """(Dirichlet, magnetic, centrifugal, potential) pieces of I(u, a)."""
    d = g.dirichlet_energy(u, grid, *u_bcs)
    m = g.magnetic_energy(a, grid, a_outer)
    c = centrifugal_energy(u, a, ell, q, grid)
    p = potential_energy(u, pot, grid)
    return d, m, c, p


def energy_values(u: np.ndarray, a: np.ndarray, ell: int, q: float, sigma: float,
                  pot: PotentialSpec, grid: AxiGrid, phi: np.ndarray,
                  u_bcs: tuple[str, str] = (NEUMANN0, DIRICHLET0),
                  a_outer: str = DIRICHLET0):
    """Total E_sigma with its pieces: returns (total, K, omega, parts-tuple)."""
    d, m, c, p = reduced_parts(u, a, ell, q, pot, grid, u_bcs, a_outer)
    k = k_charge_values(u, phi, q, grid)
    omega = omega_of(sigma, k)
    charge_term = sigma * sigma / (2.0 * k)
    total = d + m + c + p + charge_term
    return total, k, omega, (d, m, c, p, charge_term)


def grad_values(u: np.ndarray, a: np.ndarray, ell: int, q: float,
                pot: PotentialSpec, grid: AxiGrid, phi: np.ndarray, omega: float,
                u_bcs: tuple[str, str] = (NEUMANN0, DIRICHLET0),
                a_outer: str = DIRICHLET0) -> tuple[np.ndarray, np.ndarray]:
    """Exact volume-metric gradients of the discrete E_sigma (or of the
    fixed-omega functional I - omega^2 K / 2, which has the same derivative
    formula once omega is frozen at sigma / K_q(u)).

    g_u = -Delta u + (ell - q a)^2 u / r^2 + W'(u) - omega^2 (1 - q Phi)^2 u
    g_a = [curlcurl(a) - q (ell - q a) u^2] / r^2
    """
    r2 = grid.r[:, None] ** 2
    lap_u = -g.dirichlet_energy_grad(u, grid, *u_bcs) / grid.vol  # = +Delta u
    gu = (-lap_u + (ell - q * a) ** 2 * u / r2 + pot.wprime(u)
          - omega * omega * (1.0 - q * phi) ** 2 * u)
    ga = g.magnetic_energy_grad(a, grid, a_outer) / grid.vol \
        - q * (ell - q * a) * u * u / r2
    return gu, ga


def vol_norm(values: np.ndarray, grid: AxiGrid) -> float:
    return float(np.sqrt(np.sum(grid.vol * values * values)))


# ---------------------------------------------------------------------------
# spec-level operations on VortexState
# ---------------------------------------------------------------------------

def _phi_for(state: VortexState, phi: ScalarField | None,
             opts: PhiSolveOptions | None) -> np.ndarray:
    if phi is not None:
        return phi.values
    return solve_phi_values(state.u.values, state.q, state.grid, opts)


def K_q(state: VortexState, phi: ScalarField | None = None,
        opts: PhiSolveOptions | None = None) -> float:
    """Charge normalizer K_q(u) = int (1 - q Phi_u) u^2; equals int u^2 at q=0."""
    return k_charge_values(state.u.values, _phi_for(state, phi, opts),
                           state.q, state.grid)


def I_reduced(state: VortexState) -> float:
    """Static part I(u, a); every summand is nonnegative for eligible W."""
    d, m, c, p = reduced_parts(
        state.u.values, state.a.values, state.ell, state.q, state.potential,
        state.grid, (state.u.axis_bc, state.u.outer_bc), state.a.outer_bc)
    return d + m + c + p


def E_sigma(state: VortexState, phi: ScalarField | None = None,
            opts: PhiSolveOptions | None = None) -> EnergyBreakdown:
    phi_vals = _phi_for(state, phi, opts)
    total, k, omega, (d, m, c, p, charge) = energy_values(
        state.u.values, state.a.values, state.ell, state.q, state.sigma,
        state.potential, state.grid, phi_vals,
        (state.u.axis_bc, state.u.outer_bc), state.a.outer_bc)
    return EnergyBreakdown(
        dirichlet_u=d, magnetic=m, centrifugal=c, potential=p,
        charge_term=charge, total=total, omega=omega, K_q=k,
        lam=total / state.sigma, electric_charge=state.q * state.sigma)


def total_energy_direct(state: VortexState, omega: float,
                        phi: ScalarField | None = None,
                        opts: PhiSolveOptions | None = None) -> float:
    """Field energy evaluated directly from its defining quadrature with
    phi = omega * Phi_u:

      1/2 int(|grad u|^2 + |grad phi|^2 + |curl A|^2
              + ((ell - q a)^2/r^2 + (omega - q phi)^2) u^2) + int W(u).

    Up to the Phi-solve tolerance this equals I + omega^2 K_q / 2.
    """
    grid = state.grid
    phi_vals = _phi_for(state, phi, opts)
    phi_omega = omega * phi_vals
    d, m, c, p = reduced_parts(
        state.u.values, state.a.values, state.ell, state.q, state.potential,
        grid, (state.u.axis_bc, state.u.outer_bc), state.a.outer_bc)
    d_phi = g.dirichlet_energy(phi_omega, grid, NEUMANN0, DIRICHLET0)
    kinetic_t = 0.5 * g.integrate_values(
        (omega - state.q * phi_omega) ** 2 * state.u.values ** 2, grid)
    return d + d_phi + m + c + kinetic_t + p


def grad_E(state: VortexState, phi: ScalarField | None = None,
           opts: PhiSolveOptions | None = None) -> tuple[ScalarField, ScalarField]:
    """Exact gradient of the discrete E_sigma under the volume-weighted inner
    product, with omega = sigma / K_q(u) and the envelope rule for the
    Phi-dependence (K'(u) = 2 u (1 - q Phi_u)^2)."""
    phi_vals = _phi_for(state, phi, opts)
    k = k_charge_values(state.u.values, phi_vals, state.q, state.grid)
    omega = omega_of(state.sigma, k)
    gu, ga = grad_values(
        state.u.values, state.a.values, state.ell, state.q, state.potential,
        state.grid, phi_vals, omega,
        (state.u.axis_bc, state.u.outer_bc), state.a.outer_bc)
    return state.u.with_values(gu), state.a.with_values(ga)


def phi_omega_field(state: VortexState, omega: float,
                    phi: ScalarField) -> ScalarField:
    """Scalar potential phi = omega * Phi_u as a field."""
    return phi_field(omega * phi.values, state.grid)
