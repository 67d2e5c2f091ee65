"""Galerkin-projected Tikhonov regularization of ``T_w B = rhs``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .fem import assemble_mass, norm, trapezoid_weights
from .fields import FieldError, MatrixField, SpaceTimeField
from .galerkin import CoeffBasis
from .linearized import LinearizedOperator


@dataclass(eq=False)
class NormalSystem:
    """Dense normal equations ``(U + alpha D) c = b`` over a coefficient basis.

    ``images`` caches ``T E_k`` for every basis member as nodal values with
    shape (M+1, N, K).
    """

    basis: CoeffBasis
    U: np.ndarray
    D: np.ndarray
    b: np.ndarray
    images: np.ndarray
    rhs: SpaceTimeField
    degenerate: bool = False

    @property
    def size(self) -> int:
        return self.b.size

    def image_of(self, c: np.ndarray) -> SpaceTimeField:
        """``T (sum_k c_k E_k)`` from the cached basis images."""
        return SpaceTimeField(self.rhs.mesh, self.rhs.times, self.images @ np.asarray(c, dtype=float))


@dataclass(eq=False)
class TikhonovSolution:
    alpha: float
    c: np.ndarray
    B: MatrixField
    residual_norm: float
    solution_norm: float


def _spacetime_gram(mesh, times, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``sum_m w_m X_m^T M Y_m`` for stacks X (M+1, N, p) and Y (M+1, N, q)."""
    M = assemble_mass(mesh)
    w = trapezoid_weights(times)
    out = np.zeros((X.shape[2], Y.shape[2]))
    for m in range(times.size):
        if w[m] == 0.0:
            continue
        out += w[m] * (X[m].T @ (M @ Y[m]))
    return out


def assemble_normal_system(op: LinearizedOperator, basis: CoeffBasis, rhs: SpaceTimeField) -> NormalSystem:
    """Assemble ``U_kl = <T E_k, T E_l>``, ``D_kl = <E_k, E_l>`` and ``b_l = <rhs, T E_l>``.

    For coefficient identification ``rhs`` is the data minus the forward
    solution ``v0`` computed with ``A0``; the exact coefficient correction then
    satisfies ``T_u B = u - v0``.
    """
    mesh = op.mesh
    if basis.mesh is not mesh or rhs.mesh is not mesh:
        raise FieldError("operator, basis and right-hand side must share a mesh")
    if rhs.times.shape != op.times.shape or np.any(rhs.times != op.times):
        raise FieldError("time grid mismatch")
    images = op.apply_batch(basis.matrix_values())  # (M+1, N, K)
    U = _spacetime_gram(mesh, op.times, images, images)
    U = 0.5 * (U + U.T)
    b = _spacetime_gram(mesh, op.times, images, rhs.values[:, :, None])[:, 0]
    degenerate = op.degenerate or not np.any(images)
    return NormalSystem(basis, U, basis.gram(), b, images, rhs, degenerate)


def solve_at_alpha(sys: NormalSystem, alpha: float) -> TikhonovSolution:
    """Regularized solution at one parameter value via a Cholesky factorization."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    factor = sla.cho_factor(sys.U + alpha * sys.D)
    c = sla.cho_solve(factor, sys.b)
    B = sys.basis.reconstruct(c)
    resid = sys.image_of(c) - sys.rhs
    return TikhonovSolution(float(alpha), c, B, norm(resid, "spacetime_L2"), norm(B, "frobenius_L2"))


def solve_path(sys: NormalSystem, alphas) -> list[TikhonovSolution]:
    """One regularized solution per grid value, in input order."""
    alphas = np.asarray(alphas, dtype=float).ravel()
    if alphas.size == 0:
        raise ValueError("empty alpha grid")
    if np.any(alphas <= 0) or np.any(np.diff(alphas) < 0):
        raise ValueError("alpha grid must be positive and ascending")
    return [solve_at_alpha(sys, a) for a in alphas]
