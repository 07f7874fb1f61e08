"""Axisymmetric grid, cylindrical quadrature, and discrete differential operators.

All fields live on a cell-centered (r, x3) grid: r_i = (i + 1/2)*dr so no node
sits on the axis r = 0, z_j = -Z + (j + 1/2)*dz.  Volume integrals carry the
cylindrical measure 2*pi*r dr dz.

The two quadratic energies (the Dirichlet energy of a scalar and the magnetic
energy of the azimuthal potential amplitude a, where A = a*grad(theta)) are
defined as face-based quadratures, and the corresponding operators are exact
gradients of those quadratures in the volume-weighted inner product.  That
exactness is what the finite-difference gradient checks downstream rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroMass

DIRICHLET0 = "dirichlet0"
NEUMANN0 = "neumann0"
_BCS = (DIRICHLET0, NEUMANN0)

TWO_PI = 2.0 * np.pi


@dataclass
class AxiGrid:
    """Cell-centered axisymmetric grid on [0, R] x [-Z, Z]."""

    n_r: int
    n_z: int
    R: float
    Z: float
    dr: float = field(init=False)
    dz: float = field(init=False)
    r: np.ndarray = field(init=False, repr=False)   # (n_r,) node radii
    z: np.ndarray = field(init=False, repr=False)   # (n_z,) node heights
    rf: np.ndarray = field(init=False, repr=False)  # (n_r+1,) face radii, rf[0]=0, rf[-1]=R
    vol: np.ndarray = field(init=False, repr=False)  # (n_r, 1) node volumes 2*pi*r*dr*dz

    def __post_init__(self):
        if self.n_r < 4 or self.n_z < 4:
            raise ValueError(f"grid too small: n_r={self.n_r}, n_z={self.n_z} (need >= 4)")
        if self.R <= 0 or self.Z <= 0:
            raise ValueError(f"extents must be positive: R={self.R}, Z={self.Z}")
        self.dr = self.R / self.n_r
        self.dz = 2.0 * self.Z / self.n_z
        self.r = (np.arange(self.n_r) + 0.5) * self.dr
        self.z = -self.Z + (np.arange(self.n_z) + 0.5) * self.dz
        self.rf = np.arange(self.n_r + 1) * self.dr
        self.vol = (TWO_PI * self.r * self.dr * self.dz)[:, None]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_r, self.n_z)

    def compatible(self, other: "AxiGrid") -> bool:
        return (self.n_r, self.n_z, self.R, self.Z) == (other.n_r, other.n_z, other.R, other.Z)


@dataclass
class ScalarField:
    """Real node data on an AxiGrid with its boundary behavior.

    axis_bc governs the ghost cell at r=0 (dirichlet0 for quantities that must
    vanish on the axis, neumann0 for even/regular ones); outer_bc governs r=R
    and z=+-Z.  Fields are treated as immutable snapshots: operators return
    new instances.
    """

    values: np.ndarray
    grid: AxiGrid
    axis_bc: str = NEUMANN0
    outer_bc: str = DIRICHLET0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if self.axis_bc not in _BCS or self.outer_bc not in _BCS:
            raise ValueError(f"unknown bc: axis={self.axis_bc}, outer={self.outer_bc}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(values, self.grid, self.axis_bc, self.outer_bc)


def integrate_volume(f: ScalarField) -> float:
    """Discrete integral of f over R^3 with cylindrical symmetry:
    2*pi * sum f(r_i, z_j) r_i dr dz."""
    return float(np.sum(f.values * f.grid.vol))


def integrate_values(values: np.ndarray, grid: AxiGrid) -> float:
    """Array-level form of integrate_volume for solver hot paths."""
    return float(np.sum(values * grid.vol))


# ---------------------------------------------------------------------------
# ghost synthesis
# ---------------------------------------------------------------------------

def _ghost(edge: np.ndarray, bc: str) -> np.ndarray:
    # reflection ghost: the boundary value sits on the face between node and ghost
    return -edge if bc == DIRICHLET0 else edge


# ---------------------------------------------------------------------------
# scalar Dirichlet energy  D(u) = 1/2 * integral |grad u|^2 dV
# ---------------------------------------------------------------------------
# Faces carry midpoint weights 2*pi*rf*dr*dz; the axis face has rf = 0 and
# drops out, which is the natural condition there (consistent for both axis
# bcs since r*u_r -> 0 for regular axisymmetric u).  Dirichlet boundary faces
# are half-width cells with the ghost-reflection slope; that specific pairing
# makes the energy gradient coincide with the classic conservative stencil.

def _dirichlet_face_terms(values: np.ndarray, grid: AxiGrid, axis_bc: str, outer_bc: str):
    dr, dz = grid.dr, grid.dz
    rf_int = grid.rf[1:-1][:, None]            # interior radial faces (n_r-1, 1)

    d_r = (values[1:, :] - values[:-1, :]) / dr
    w_r = TWO_PI * rf_int * dr * dz

    terms = [(w_r, d_r, dr, "r_interior")]

    if outer_bc == DIRICHLET0:
        d_rout = -2.0 * values[-1, :] / dr
        w_rout = TWO_PI * grid.R * (dr / 2.0) * dz
        terms.append((w_rout, d_rout, dr, "r_outer"))
        d_zlo = -2.0 * values[:, 0] / dz
        d_zhi = -2.0 * values[:, -1] / dz
        w_zb = (TWO_PI * grid.r * dr * (dz / 2.0))
        terms.append((w_zb, d_zlo, dz, "z_low"))
        terms.append((w_zb, d_zhi, dz, "z_high"))

    d_z = (values[:, 1:] - values[:, :-1]) / dz
    w_z = (TWO_PI * grid.r * dr * dz)[:, None]
    terms.append((w_z, d_z, dz, "z_interior"))
    return terms


def dirichlet_energy(values: np.ndarray, grid: AxiGrid,
                     axis_bc: str = NEUMANN0, outer_bc: str = DIRICHLET0) -> float:
    total = 0.0
    for w, d, _, _ in _dirichlet_face_terms(values, grid, axis_bc, outer_bc):
        total += 0.5 * float(np.sum(w * d * d))
    return total


def dirichlet_energy_grad(values: np.ndarray, grid: AxiGrid,
                          axis_bc: str = NEUMANN0, outer_bc: str = DIRICHLET0) -> np.ndarray:
    """Exact dD/du (not divided by node volumes)."""
    dr, dz = grid.dr, grid.dz
    g = np.zeros_like(values)

    rf_int = grid.rf[1:-1][:, None]
    t = (TWO_PI * rf_int * dr * dz) * (values[1:, :] - values[:-1, :]) / (dr * dr)
    g[1:, :] += t
    g[:-1, :] -= t

    t = (TWO_PI * grid.r * dr * dz)[:, None] * (values[:, 1:] - values[:, :-1]) / (dz * dz)
    g[:, 1:] += t
    g[:, :-1] -= t

    if outer_bc == DIRICHLET0:
        # half-width boundary faces, slope (0 - u_E)/(h/2) = -2 u_E / h
        g[-1, :] += TWO_PI * grid.R * (dr / 2.0) * dz * 4.0 * values[-1, :] / (dr * dr)
        w_zb = TWO_PI * grid.r * dr * (dz / 2.0)
        g[:, 0] += w_zb * 4.0 * values[:, 0] / (dz * dz)
        g[:, -1] += w_zb * 4.0 * values[:, -1] / (dz * dz)
    return g


def dirichlet_diag(grid: AxiGrid, axis_bc: str = NEUMANN0,
                   outer_bc: str = DIRICHLET0) -> np.ndarray:
    """Diagonal of the Hessian of dirichlet_energy (for Jacobi preconditioning)."""
    dr, dz = grid.dr, grid.dz
    d = np.zeros(grid.shape)
    w_rf = TWO_PI * grid.rf * dr * dz / (dr * dr)   # (n_r+1,)
    d += w_rf[:-1, None] + w_rf[1:, None]           # rf[0] = 0 kills the axis face
    if outer_bc == DIRICHLET0:
        # replace the full outer face by the half-width Dirichlet face (factor 2 net)
        d[-1, :] += -w_rf[-1] + TWO_PI * grid.R * (dr / 2.0) * dz * 4.0 / (dr * dr)
    else:
        d[-1, :] -= w_rf[-1]
    w_z = (TWO_PI * grid.r * dr * dz / (dz * dz))
    d += 2.0 * w_z[:, None]
    if outer_bc == DIRICHLET0:
        extra = -w_z + TWO_PI * grid.r * dr * (dz / 2.0) * 4.0 / (dz * dz)
        d[:, 0] += extra
        d[:, -1] += extra
    else:
        d[:, 0] -= w_z
        d[:, -1] -= w_z
    return d


def laplacian_axisym(u: ScalarField) -> ScalarField:
    """Scalar Laplacian restricted to cylindrical symmetry,
    Delta u = u_rr + u_r/r + u_zz, as the (negated, volume-scaled) gradient of
    the discrete Dirichlet energy.  Second-order on smooth fields; exact for
    u = r^2 and z-quadratics at interior nodes."""
    g = dirichlet_energy_grad(u.values, u.grid, u.axis_bc, u.outer_bc)
    return u.with_values(-g / u.grid.vol)


# ---------------------------------------------------------------------------
# magnetic energy  M(a) = 1/2 * integral |curl(a grad theta)|^2 dV
#                       = pi * double-integral (a_r^2 + a_z^2) / r dr dz
# ---------------------------------------------------------------------------
# Faces carry weights 2*pi*dr*dz/rf.  The r=0 face cannot be used directly
# (1/rf blows up); instead the axis cell gets the term
#     2*pi*dz * (4/dr^2) * a_{0j}^2,
# the unique quadratic weight for which the energy gradient vanishes exactly
# on the regular mode a = c*r^2 (curl curl of (x2,-x1,0) is zero).

def magnetic_energy(values: np.ndarray, grid: AxiGrid,
                    outer_bc: str = DIRICHLET0) -> float:
    dr, dz = grid.dr, grid.dz
    rf_int = grid.rf[1:-1][:, None]
    d_r = (values[1:, :] - values[:-1, :]) / dr
    total = 0.5 * float(np.sum((TWO_PI * dr * dz / rf_int) * d_r * d_r))

    total += TWO_PI * dz * (4.0 / dr ** 2) * float(np.sum(values[0, :] ** 2))

    d_z = (values[:, 1:] - values[:, :-1]) / dz
    w_z = (TWO_PI * dr * dz / grid.r)[:, None]
    total += 0.5 * float(np.sum(w_z * d_z * d_z))

    if outer_bc == DIRICHLET0:
        d_rout = -2.0 * values[-1, :] / dr
        total += 0.5 * float(np.sum(TWO_PI * (dr / 2.0) * dz / grid.R * d_rout ** 2))
        w_zb = TWO_PI * dr * (dz / 2.0) / grid.r
        total += 0.5 * float(np.sum(w_zb * (-2.0 * values[:, 0] / dz) ** 2))
        total += 0.5 * float(np.sum(w_zb * (-2.0 * values[:, -1] / dz) ** 2))
    return total


def magnetic_energy_grad(values: np.ndarray, grid: AxiGrid,
                         outer_bc: str = DIRICHLET0) -> np.ndarray:
    """Exact dM/da (not divided by node volumes)."""
    dr, dz = grid.dr, grid.dz
    g = np.zeros_like(values)

    rf_int = grid.rf[1:-1][:, None]
    t = (TWO_PI * dr * dz / rf_int) * (values[1:, :] - values[:-1, :]) / (dr * dr)
    g[1:, :] += t
    g[:-1, :] -= t

    g[0, :] += TWO_PI * dz * (8.0 / dr ** 2) * values[0, :]

    t = (TWO_PI * dr * dz / grid.r)[:, None] * (values[:, 1:] - values[:, :-1]) / (dz * dz)
    g[:, 1:] += t
    g[:, :-1] -= t

    if outer_bc == DIRICHLET0:
        g[-1, :] += TWO_PI * (dr / 2.0) * dz / grid.R * 4.0 * values[-1, :] / (dr * dr)
        w_zb = TWO_PI * dr * (dz / 2.0) / grid.r
        g[:, 0] += w_zb * 4.0 * values[:, 0] / (dz * dz)
        g[:, -1] += w_zb * 4.0 * values[:, -1] / (dz * dz)
    return g


def magnetic_diag(grid: AxiGrid, outer_bc: str = DIRICHLET0) -> np.ndarray:
    """Diagonal of the Hessian of magnetic_energy."""
    dr, dz = grid.dr, grid.dz
    d = np.zeros(grid.shape)
    w_rf = np.zeros(grid.n_r + 1)
    w_rf[1:] = TWO_PI * dr * dz / grid.rf[1:] / (dr * dr)
    d += w_rf[:-1, None] + w_rf[1:, None]
    d[0, :] += TWO_PI * dz * 8.0 / dr ** 2
    if outer_bc == DIRICHLET0:
        d[-1, :] += -w_rf[-1] + TWO_PI * (dr / 2.0) * dz / grid.R * 4.0 / (dr * dr)
    else:
        d[-1, :] -= w_rf[-1]
    w_z = TWO_PI * dr * dz / grid.r / (dz * dz)
    d += 2.0 * w_z[:, None]
    if outer_bc == DIRICHLET0:
        extra = -w_z + TWO_PI * dr * (dz / 2.0) / grid.r * 4.0 / (dz * dz)
        d[:, 0] += extra
        d[:, -1] += extra
    else:
        d[:, 0] -= w_z
        d[:, -1] -= w_z
    return d


def magnetic_operator(a: ScalarField) -> ScalarField:
    """The curl-curl reduction: for A = a*grad(theta),
    curl(curl A) = b*grad(theta) with b = -a_rr + a_r/r - a_zz.

    Computed as r^2 times the volume-metric gradient of the discrete magnetic
    energy, so it is simultaneously the reduced operator and the exact
    derivative used by the minimizer."""
    g = magnetic_energy_grad(a.values, a.grid, a.outer_bc)
    return a.with_values(a.grid.r[:, None] ** 2 * g / a.grid.vol)


# ---------------------------------------------------------------------------
# first derivatives (diagnostics)
# ---------------------------------------------------------------------------

def d_dr(f: ScalarField) -> ScalarField:
    v, g = f.values, f.grid
    out = np.empty_like(v)
    out[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2.0 * g.dr)
    out[0, :] = (v[1, :] - _ghost(v[0, :], f.axis_bc)) / (2.0 * g.dr)
    out[-1, :] = (_ghost(v[-1, :], f.outer_bc) - v[-2, :]) / (2.0 * g.dr)
    return f.with_values(out)


def d_dz(f: ScalarField) -> ScalarField:
    v, g = f.values, f.grid
    out = np.empty_like(v)
    out[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2.0 * g.dz)
    out[:, 0] = (v[:, 1] - _ghost(v[:, 0], f.outer_bc)) / (2.0 * g.dz)
    out[:, -1] = (_ghost(v[:, -1], f.outer_bc) - v[:, -2]) / (2.0 * g.dz)
    return f.with_values(out)


# ---------------------------------------------------------------------------
# translation quotient along x3
# ---------------------------------------------------------------------------

def shift_z_values(values: np.ndarray, n_nodes: int) -> np.ndarray:
    """Shift field content by n_nodes grid cells along z, zero-filling."""
    if n_nodes == 0:
        return values.copy()
    out = np.zeros_like(values)
    if n_nodes > 0:
        out[:, n_nodes:] = values[:, :-n_nodes]
    else:
        out[:, :n_nodes] = values[:, -n_nodes:]
    return out


def recenter_z(u: ScalarField, companions: list[ScalarField] | tuple = ()
               ) -> tuple[float, ScalarField, list[ScalarField]]:
    """Recenter the u^2-weighted centroid onto z = 0 by an integer-node shift.

    Returns (applied shift in length units, shifted u, shifted companions).
    Raises ZeroMass when integral of u^2 vanishes (collapsed state).
    """
    grid = u.grid
    mass = integrate_values(u.values ** 2, grid)
    if mass <= 0.0:
        raise ZeroMass("cannot recenter: integral of u^2 is zero")
    zbar = integrate_values(grid.z[None, :] * u.values ** 2, grid) / mass
    n_shift = int(round(-zbar / grid.dz))
    shifted_u = u.with_values(shift_z_values(u.values, n_shift))
    shifted_companions = [c.with_values(shift_z_values(c.values, n_shift))
                          for c in companions]
    return n_shift * grid.dz, shifted_u, shifted_companions
