"""Charge-constrained energy minimization and continuation in the coupling q.

The descent is projected gradient (u >= 0 enforced by clipping) with Armijo
backtracking and a safeguarded Barzilai-Borwein trial step; the direction is
the gradient scaled by a positive diagonal (Jacobi) estimate of the Hessian
blocks, which tames the stiff axis cell of the magnetic term.  Accepted steps
never increase the energy; Phi is re-solved at every trial point (warm
started), so the envelope gradient stays exact along the run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import grid as g
from .electrostatic import PhiSolveOptions, phi_field, phi_residual_norm, solve_phi_values
from .errors import EnergyNonFinite, MaxIterations, ZeroMass
from . import functionals as fn
from .linsolve import pcg
from .functionals import (EnergyBreakdown, VortexState, OMEGA_MIN, OMEGA_MAX,
                          vol_norm)
from .grid import AxiGrid, ScalarField
from .potentials import PotentialSpec, validate_hypotheses


def default_q_steps(q_max: float = 0.4, n: int = 8) -> tuple[float, ...]:
    """0 followed by n geometric steps ending at q_max (ratio 2)."""
    return (0.0,) + tuple(q_max / 2.0 ** (n - 1 - k) for k in range(n))


@dataclass
class SolverConfig:
    max_outer_iter: int = 20000
    grad_tol: float = 1e-6          # relative to the initial projected-gradient norm
    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    recenter_every: int = 50
    q_steps: tuple = field(default_factory=default_q_steps)
    phi_tol: float = 1e-11
    phi_max_iter: int = 20000
    collapse_rtol: float = 1e-8     # ||u|| below this fraction of initial -> collapsed
    step_init: float = 0.05
    step_max: float = 1e3
    step_min: float = 1e-14
    verbose: bool = False

    def __post_init__(self):
        for name in ("grad_tol", "armijo_c1", "backtrack", "phi_tol",
                     "collapse_rtol", "step_init"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer_iter < 1 or self.recenter_every < 1:
            raise ValueError("iteration counts must be positive")
        qs = tuple(float(q) for q in self.q_steps)
        if qs and (qs[0] != 0.0 or any(b < a for a, b in zip(qs, qs[1:]))):
            raise ValueError("q_steps must be nondecreasing and start at 0")
        self.q_steps = qs

    def phi_options(self) -> PhiSolveOptions:
        return PhiSolveOptions(tol=self.phi_tol, max_iter=self.phi_max_iter)


@dataclass
class SolveReport:
    u: ScalarField
    a: ScalarField
    phi: ScalarField           # unit-frequency response Phi_u
    phi_omega: ScalarField     # scalar potential phi = omega * Phi_u
    omega: float
    sigma: float
    K_q: float
    breakdown: EnergyBreakdown
    res_z1: float
    res_z3: float
    res_z4: float
    res_z1_rel: float
    res_z3_rel: float
    res_z4_rel: float
    iterations: int
    converged: bool
    collapsed: bool
    grad_norm0: float
    grad_norm: float
    energy_initial: float
    energy_final: float
    energy_monotone: bool
    invariants: dict
    ell: int
    q: float
    potential: PotentialSpec

    def state(self) -> VortexState:
        return VortexState(self.u, self.a, self.ell, self.q, self.sigma,
                           self.potential)

    def hard_invariants_pass(self) -> bool:
        return all(ok for ok, _ in self.invariants.values())


# ---------------------------------------------------------------------------
# residuals and invariant checks
# ---------------------------------------------------------------------------

def _residuals(grid: AxiGrid, u, a, ell, q, pot, phi, omega, u_bcs, a_outer):
    """Volume-weighted norms of the discrete reduced equations and the norms
    of their leading terms (for relative reporting)."""
    r2 = grid.r[:, None] ** 2
    lap_u = -g.dirichlet_energy_grad(u, grid, *u_bcs) / grid.vol
    terms_1 = [lap_u, (ell - q * a) ** 2 * u / r2, pot.wprime(u),
               omega * omega * (1.0 - q * phi) ** 2 * u]
    res1_field = -terms_1[0] + terms_1[1] + terms_1[2] - terms_1[3]
    res1 = vol_norm(res1_field, grid)
    scale1 = max(vol_norm(t, grid) for t in terms_1)

    res3 = phi_residual_norm(phi, u * u, q, grid)
    scale3 = float(np.sqrt(np.sum(grid.vol * (q * u * u) ** 2)))

    b = g.magnetic_energy_grad(a, grid, a_outer) / grid.vol * r2
    src = q * (ell - q * a) * u * u
    res4 = vol_norm(b - src, grid)
    scale4 = max(vol_norm(b, grid), vol_norm(src, grid))

    def rel(r, s):
        return r / s if s > 0 else 0.0

    return (res1, res3, res4, rel(res1, scale1), rel(res3, scale3), rel(res4, scale4))


def _grad_term_scale(grid: AxiGrid, u, a, ell, q, pot, phi, omega, u_bcs, a_outer) -> float:
    """Norm scale of the gradient's leading terms; anchors the stopping rule
    so warm starts (whose initial gradient is already tiny) terminate."""
    r2 = grid.r[:, None] ** 2
    lap_u = -g.dirichlet_energy_grad(u, grid, *u_bcs) / grid.vol
    scale_u = max(vol_norm(lap_u, grid),
                  vol_norm((ell - q * a) ** 2 * u / r2, grid),
                  vol_norm(pot.wprime(u), grid),
                  vol_norm(omega * omega * (1.0 - q * phi) ** 2 * u, grid))
    b_over_r2 = g.magnetic_energy_grad(a, grid, a_outer) / grid.vol
    scale_a = max(vol_norm(b_over_r2, grid),
                  vol_norm(q * (ell - q * a) * u * u / r2, grid))
    return max(scale_u, scale_a)


def invariant_checks(grid: AxiGrid, u, a, ell, q, phi, omega,
                     energy_monotone: bool) -> dict:
    """Named pass/fail checks with their measured values.

    Tolerances: maximum principles within 1e-8, Phi bound within 1e-10, sign
    condition above -1e-10 on the support of u, omega in [1e-6, 1e6].
    """
    checks = {}
    qphi_excess = float(max(np.max(q * phi) - 1.0, np.max(-q * phi), 0.0)) if q > 0 else 0.0
    checks["phi_max_principle"] = (qphi_excess <= 1e-10, qphi_excess)

    phi_om = omega * phi
    v = float(np.max(q * phi_om - omega))
    checks["qphi_below_omega"] = (v <= 1e-8, v)

    if ell > 0:
        v = float(np.max(q * a - ell))
        checks["qa_below_ell"] = (v <= 1e-8, v)
        support = u > 1e-8 * max(float(np.max(u)), 1e-300)
        if np.any(support):
            sign = (ell - q * a) * (omega - q * phi_om)
            v = float(np.min(sign[support]))
        else:
            v = 0.0
        checks["sign_condition"] = (v > -1e-10, v)

    checks["omega_interval"] = (OMEGA_MIN <= omega <= OMEGA_MAX, omega)
    checks["u_nonnegative"] = (float(np.min(u)) >= 0.0, float(np.min(u)))
    checks["energy_monotone"] = (energy_monotone, float(energy_monotone))
    return checks


# ---------------------------------------------------------------------------
# descent loop
# ---------------------------------------------------------------------------

class _Objective:
    """E_sigma when omega_fixed is None, else the fixed-frequency functional
    I - omega^2 K_q / 2 (whose u-gradient has the same closed form)."""

    def __init__(self, grid, ell, q, sigma, pot, u_bcs, a_outer, phi_opts,
                 omega_fixed=None):
        self.grid, self.ell, self.q, self.sigma = grid, ell, q, sigma
        self.pot, self.u_bcs, self.a_outer = pot, u_bcs, a_outer
        self.phi_opts = phi_opts
        self.omega_fixed = omega_fixed

    def solve_phi(self, u, warm):
        return solve_phi_values(u, self.q, self.grid, self.phi_opts, warm)

    def solve_a(self, u, warm):
        """Exact minimizer of the a-dependent energy at fixed u: the linear
        SPD system  curlcurl(a) + q^2 u^2 a = q ell u^2  in symmetric form."""
        grid, q, ell = self.grid, self.q, self.ell
        if q == 0.0:
            return np.zeros(grid.shape)
        r2 = grid.r[:, None] ** 2
        u2_r2 = u * u / r2
        b = grid.vol * q * ell * u2_r2
        rhs_norm = float(np.sqrt(np.sum(grid.vol * (q * ell * u2_r2) ** 2)))
        if rhs_norm == 0.0:
            return np.zeros(grid.shape)
        diag = g.magnetic_diag(grid, self.a_outer) + grid.vol * q * q * u2_r2

        def apply_op(x):
            return g.magnetic_energy_grad(x, grid, self.a_outer) \
                + grid.vol * q * q * u2_r2 * x

        return pcg(apply_op, b, warm, diag, grid.vol,
                   self.phi_opts.tol * rhs_norm, self.phi_opts.max_iter)

    def value(self, u, a, phi):
        d, m, c, p = fn.reduced_parts(u, a, self.ell, self.q, self.pot,
                                      self.grid, self.u_bcs, self.a_outer)
        i_val = d + m + c + p
        if self.omega_fixed is None:
            k = fn.k_charge_values(u, phi, self.q, self.grid)
            omega = fn.omega_of(self.sigma, k)
            return i_val + self.sigma ** 2 / (2.0 * k), k, omega
        omega = self.omega_fixed
        if omega == 0.0:
            return i_val, float("nan"), omega
        k = fn.k_charge_values(u, phi, self.q, self.grid)
        return i_val - 0.5 * omega ** 2 * k, k, omega

    def grad(self, u, a, phi, omega):
        return fn.grad_values(u, a, self.ell, self.q, self.pot, self.grid,
                              phi, omega, self.u_bcs, self.a_outer)

    def diag_scaling(self, u, a, phi, omega):
        """Positive diagonal Hessian estimates for the two blocks."""
        grid = self.grid
        r2 = grid.r[:, None] ** 2
        d_u = (g.dirichlet_diag(grid, *self.u_bcs) / grid.vol
               + (self.ell - self.q * a) ** 2 / r2
               + np.maximum(self.pot.wsecond(u), 0.0) + 1e-3)
        d_a = (g.magnetic_diag(grid, self.a_outer) / grid.vol
               + self.q ** 2 * u * u / r2 + 1e-12)
        return d_u, d_a


def _projected_grad(u, gu, ga):
    pg_u = np.where(u > 0.0, gu, np.minimum(gu, 0.0))
    return pg_u, ga


def _descend(obj: _Objective, u0, a0, cfg: SolverConfig,
             allow_collapse: bool, label: str = ""):
    """Shared monotone descent loop: a projected Armijo/Barzilai-Borwein
    gradient step in u alternating with an exact (CG) minimization over a,
    which is quadratic at fixed u.  Both phases are non-increasing in the
    energy.  Returns the report ingredients."""
    grid = obj.grid
    u = u0.copy()
    u_norm_init = vol_norm(u, grid)
    if u_norm_init == 0.0 and not allow_collapse:
        raise ZeroMass("initial u is identically zero")

    phi = obj.solve_phi(u, None)
    a = obj.solve_a(u, a0.copy()) if u_norm_init > 0.0 else a0.copy()
    energy, k, omega = obj.value(u, a, phi)
    if not np.isfinite(energy):
        raise EnergyNonFinite(f"initial energy is not finite ({label})")
    _check_omega(obj, k, omega)

    energy_init = energy
    gu, ga = obj.grad(u, a, phi, omega)
    pg_u, pg_a = _projected_grad(u, gu, ga)
    pg_norm0 = np.hypot(vol_norm(pg_u, grid), vol_norm(pg_a, grid))
    pg_norm = pg_norm0
    scale = _grad_term_scale(grid, u, a, obj.ell, obj.q, obj.pot, phi,
                             0.0 if np.isnan(omega) else omega,
                             obj.u_bcs, obj.a_outer)
    pg_target = cfg.grad_tol * max(pg_norm0, scale)
    monotone = True
    collapsed = allow_collapse and u_norm_init == 0.0
    t = cfg.step_init
    s_prev = y_prev = None
    iterations = 0
    stall = 0
    best_energy = energy

    while iterations < cfg.max_outer_iter:
        if pg_norm <= pg_target:
            break
        iterations += 1

        d_u, _ = obj.diag_scaling(u, a, phi, omega)
        dir_u = gu / d_u

        if s_prev is not None:
            sy = float(np.sum(grid.vol * s_prev * y_prev))
            ss = float(np.sum(grid.vol * s_prev * s_prev))
            if sy > 0.0:
                # BB1 step, reused as the next trial step
                t = min(max(ss / sy, cfg.step_min), cfg.step_max)

        accepted = False
        while t >= cfg.step_min:
            u_t = np.maximum(u - t * dir_u, 0.0)
            phi_t = obj.solve_phi(u_t, phi)
            try:
                e_t, k_t, omega_t = obj.value(u_t, a, phi_t)
            except ZeroMass:
                if allow_collapse:
                    u, phi = u_t, phi_t
                    collapsed = True
                    break
                raise
            if not np.isfinite(e_t):
                t *= cfg.backtrack
                continue
            gdot = float(np.sum(grid.vol * gu * (u_t - u)))
            if e_t <= energy + cfg.armijo_c1 * gdot:
                if e_t > energy + 1e-14 * abs(energy):
                    monotone = False
                s_prev = u_t - u
                u, phi = u_t, phi_t
                energy, k, omega = e_t, k_t, omega_t
                accepted = True
                break
            t *= cfg.backtrack
        if collapsed:
            break
        if not accepted:
            # line search exhausted: either at numerical stationarity or stuck
            break

        if obj.q > 0.0:
            a = obj.solve_a(u, a)
            energy, k, omega = obj.value(u, a, phi)

        gu_new, ga = obj.grad(u, a, phi, omega)
        y_prev = gu_new - gu
        gu = gu_new

        if best_energy - energy <= 1e-13 * max(abs(best_energy), 1.0):
            stall += 1
            if stall >= 200:
                break  # progress below float resolution of the energy
        else:
            stall = 0
            best_energy = min(best_energy, energy)

        _check_omega(obj, k, omega)

        if vol_norm(u, grid) < cfg.collapse_rtol * u_norm_init:
            if allow_collapse:
                collapsed = True
                break
            raise ZeroMass(
                "u collapsed during minimization (charge/potential admit no "
                "nontrivial minimizer at this coupling)")

        if iterations % cfg.recenter_every == 0:
            mass = g.integrate_values(u * u, grid)
            if mass > 0.0:
                zbar = g.integrate_values(grid.z[None, :] * u * u, grid) / mass
                n_shift = int(round(-zbar / grid.dz))
                if n_shift != 0:
                    u = g.shift_z_values(u, n_shift)
                    a = g.shift_z_values(a, n_shift)
                    phi = obj.solve_phi(u, g.shift_z_values(phi, n_shift))
                    energy, k, omega = obj.value(u, a, phi)
                    gu, ga = obj.grad(u, a, phi, omega)
                    s_prev = y_prev = None
                    stall = 0
                    best_energy = energy

        pg_u, pg_a = _projected_grad(u, gu, ga)
        pg_norm = np.hypot(vol_norm(pg_u, grid), vol_norm(pg_a, grid))
        if cfg.verbose and iterations % 200 == 0:
            print(f"[{label}] it={iterations} E={energy:.10e} |pg|={pg_norm:.3e} t={t:.2e}")

    converged = pg_norm <= pg_target and not collapsed
    return (u, a, phi, energy, energy_init, k, omega, gu, ga,
            pg_norm0, pg_norm, iterations, converged, collapsed, monotone)


def _check_omega(obj, k, omega):
    if obj.omega_fixed is not None:
        return
    if not (OMEGA_MIN <= omega <= OMEGA_MAX):
        if k <= OMEGA_MIN:
            raise ZeroMass(f"omega = {omega:.3e} outside [{OMEGA_MIN}, {OMEGA_MAX}]: "
                           "K_q has collapsed")
        raise EnergyNonFinite(f"omega = {omega:.3e} outside [{OMEGA_MIN}, {OMEGA_MAX}]")


def _build_report(obj, result, sigma, pot) -> SolveReport:
    (u, a, phi, energy, energy_init, k, omega, gu, ga,
     pg0, pg, iterations, converged, collapsed, monotone) = result
    grid = obj.grid
    if obj.omega_fixed is not None and obj.omega_fixed == 0.0:
        k = fn.k_charge_values(u, phi, obj.q, grid) if np.any(u) else 0.0
        omega = 0.0

    res = _residuals(grid, u, a, obj.ell, obj.q, pot, phi, omega,
                     obj.u_bcs, obj.a_outer)
    checks = invariant_checks(grid, u, a, obj.ell, obj.q, phi, omega, monotone)

    d, m, c, p = fn.reduced_parts(u, a, obj.ell, obj.q, pot, grid,
                                  obj.u_bcs, obj.a_outer)
    charge = sigma ** 2 / (2.0 * k) if k > 0 else float("inf")
    total = d + m + c + p + charge
    breakdown = EnergyBreakdown(
        dirichlet_u=d, magnetic=m, centrifugal=c, potential=p,
        charge_term=charge, total=total, omega=omega, K_q=k,
        lam=total / sigma, electric_charge=obj.q * sigma)

    u_field = ScalarField(u, grid, *obj.u_bcs)
    a_field = ScalarField(a, grid, g.DIRICHLET0, obj.a_outer)
    phi_f = phi_field(phi, grid)
    return SolveReport(
        u=u_field, a=a_field, phi=phi_f,
        phi_omega=phi_field(omega * phi, grid),
        omega=omega, sigma=sigma, K_q=k, breakdown=breakdown,
        res_z1=res[0], res_z3=res[1], res_z4=res[2],
        res_z1_rel=res[3], res_z3_rel=res[4], res_z4_rel=res[5],
        iterations=iterations, converged=converged, collapsed=collapsed,
        grad_norm0=pg0, grad_norm=pg, energy_initial=energy_init,
        energy_final=energy, energy_monotone=monotone, invariants=checks,
        ell=obj.ell, q=obj.q, potential=pot)


def minimize(initial: VortexState, cfg: SolverConfig | None = None) -> SolveReport:
    """Minimize E_sigma from the given state.  Raises ZeroMass on collapse,
    EnergyNonFinite on NaN/infinity, MaxIterations (with the report so far)
    when the iteration cap is hit."""
    cfg = cfg or SolverConfig()
    pot = initial.potential
    report = validate_hypotheses(pot, s_max=max(2.0, 2.0 * pot.s0))
    if not report.eligible:
        raise ValueError(
            f"potential {pot.id_string()} is not solver-eligible "
            f"(W1={report.w1_pass}, W2={report.w2_pass}, W3={report.w3_pass})")
    obj = _Objective(initial.grid, initial.ell, initial.q, initial.sigma, pot,
                     (initial.u.axis_bc, initial.u.outer_bc),
                     initial.a.outer_bc, cfg.phi_options())
    result = _descend(obj, initial.u.values, initial.a.values, cfg,
                      allow_collapse=False, label=f"q={initial.q:g}")
    rep = _build_report(obj, result, initial.sigma, pot)
    if not rep.converged:
        raise MaxIterations(rep)
    return rep


def minimize_fixed_omega(initial: VortexState, omega: float,
                         cfg: SolverConfig | None = None) -> SolveReport:
    """Descend the fixed-frequency functional I - omega^2 K_q / 2.

    Used by the non-existence demonstrations: collapse of u is an expected
    outcome and is returned as a flagged report instead of raising.
    Ineligible potentials are allowed here.
    """
    cfg = cfg or SolverConfig()
    obj = _Objective(initial.grid, initial.ell, initial.q, initial.sigma,
                     initial.potential,
                     (initial.u.axis_bc, initial.u.outer_bc),
                     initial.a.outer_bc, cfg.phi_options(), omega_fixed=omega)
    result = _descend(obj, initial.u.values, initial.a.values, cfg,
                      allow_collapse=True, label=f"omega={omega:g}")
    rep = _build_report(obj, result, initial.sigma, initial.potential)
    if not rep.converged and not rep.collapsed:
        raise MaxIterations(rep)
    return rep


def continuation(initial: VortexState, cfg: SolverConfig | None = None
                 ) -> list[SolveReport]:
    """Solve at q = 0 first (a = 0, Phi = 0), then warm-start each q step from
    the previous solution.  Aborts on the first ZeroMass (numerically past the
    largest admissible coupling); MaxIterations reports are kept and the run
    continues from them."""
    cfg = cfg or SolverConfig()
    if not cfg.q_steps or cfg.q_steps[0] != 0.0:
        raise ValueError("q_steps must start at 0")

    reports: list[SolveReport] = []
    state = VortexState(initial.u, initial.a.with_values(np.zeros(initial.grid.shape)),
                        initial.ell, 0.0, initial.sigma, initial.potential)
    for q in cfg.q_steps:
        state = VortexState(state.u, state.a, state.ell, float(q), state.sigma,
                            state.potential)
        try:
            rep = minimize(state, cfg)
        except MaxIterations as err:
            rep = err.report
        except ZeroMass:
            break
        _verify_continuation_step(rep)
        reports.append(rep)
        state = rep.state()
    return reports


def _verify_continuation_step(rep: SolveReport):
    """Structure-of-the-solution checks added to the per-step invariants:
    q = 0 forces phi = 0 and a = 0; for q > 0 the magnetic amplitude is
    nonzero exactly when ell != 0."""
    a_norm = vol_norm(rep.a.values, rep.a.grid)
    phi_norm = vol_norm(rep.phi_omega.values, rep.phi.grid)
    if rep.q == 0.0:
        rep.invariants["a_zero_at_q0"] = (a_norm <= 1e-10, a_norm)
        rep.invariants["phi_zero_at_q0"] = (phi_norm <= 1e-10, phi_norm)
    else:
        rep.invariants["phi_nonzero"] = (phi_norm > 0.0, phi_norm)
        if rep.ell != 0:
            rep.invariants["a_nonzero"] = (a_norm > 0.0, a_norm)
        else:
            rep.invariants["a_zero_at_ell0"] = (a_norm <= 1e-10, a_norm)
