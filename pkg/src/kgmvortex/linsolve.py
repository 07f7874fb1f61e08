"""Jacobi-preconditioned conjugate gradient on matrix-free SPD operators.

Both linear subproblems in this package (the screened electrostatic solve and
the magnetic amplitude solve at fixed matter field) are gradients of convex
quadratics assembled from the face energies in the grid module, hence
symmetric positive definite in the plain dot product.  Convergence is judged
on the volume-weighted L2 norm of the *unweighted* equation residual, i.e.
||(A x - b)/vol||_vol <= target.
"""

from __future__ import annotations

import numpy as np

from .errors import NoConvergence


def pcg(apply_op, b: np.ndarray, x0: np.ndarray | None, diag: np.ndarray,
        vol: np.ndarray, target: float, max_iter: int) -> np.ndarray:
    """Solve apply_op(x) = b.  target is the absolute tolerance on the
    weighted residual norm described above."""
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - apply_op(x)

    def wnorm(res):
        return float(np.sqrt(np.sum(res * res / vol)))

    if wnorm(r) <= target:
        return x
    inv_diag = 1.0 / diag
    z = inv_diag * r
    p = z.copy()
    rz = float(np.sum(r * z))
    for _ in range(max_iter):
        ap = apply_op(p)
        alpha = rz / float(np.sum(p * ap))
        x += alpha * p
        r -= alpha * ap
        if wnorm(r) <= target:
            return x
        z = inv_diag * r
        rz_new = float(np.sum(r * z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NoConvergence(max_iter, wnorm(r) / max(target, 1e-300))
