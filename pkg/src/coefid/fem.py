"""P1 assembly, quadrature and the norms used throughout the package."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fields import FieldError, MatrixField, ScalarField, SpaceTimeField
from .mesh import Mesh


def _scatter(mesh: Mesh, local: np.ndarray) -> sp.csr_matrix:
    """Sum element matrices ``local`` (E, k, k) into a global CSR matrix."""
    el = mesh.elements
    k = el.shape[1]
    rows = np.repeat(el, k, axis=1).ravel()
    cols = np.tile(el, (1, k)).ravel()
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes))
    return mat.tocsr()


@lru_cache(maxsize=32)
def _mass_cached(mesh: Mesh) -> sp.csr_matrix:
    k = mesh.dim + 1
    ref = (np.ones((k, k)) + np.eye(k)) / ((k) * (k + 1))
    return _scatter(mesh, mesh.volumes[:, None, None] * ref[None])


def assemble_mass(mesh: Mesh) -> sp.csr_matrix:
    """Consistent P1 mass matrix, entries ``int phi_i phi_j``."""
    return _mass_cached(mesh)


def assemble_stiffness(mesh: Mesh, coeff: MatrixField) -> sp.csr_matrix:
    """Stiffness matrix with entries ``int coeff grad(phi_j) . grad(phi_i)``.

    The coefficient is evaluated once per element (barycentric one-point rule).
    """
    if coeff.mesh is not mesh:
        raise FieldError("coefficient lives on a different mesh")
    G = mesh.grad_basis  # (E, k, d)
    A = coeff.element_values()  # (E, d, d)
    local = np.einsum("eia,eab,ejb->eij", G, A, G) * mesh.volumes[:, None, None]
    return _scatter(mesh, local)


@lru_cache(maxsize=32)
def _laplace_cached(mesh: Mesh) -> sp.csr_matrix:
    return assemble_stiffness(mesh, MatrixField.identity(mesh))


def laplace_stiffness(mesh: Mesh) -> sp.csr_matrix:
    return _laplace_cached(mesh)


def check_ellipticity(coeff: MatrixField) -> float:
    """Smallest eigenvalue of ``coeff(x)`` over the quadrature points.

    A positive value certifies the discrete uniform ellipticity condition.
    Asymmetric coefficients are rejected.
    """
    if not coeff.is_symmetric():
        raise FieldError("coefficient is not symmetric")
    vals = np.linalg.eigvalsh(coeff.element_values())
    return float(vals[:, 0].min())


@lru_cache(maxsize=32)
def _h1_interior_factor(mesh: Mesh):
    H = (assemble_mass(mesh) + laplace_stiffness(mesh)).tocsc()
    idx = mesh.interior_nodes
    return spla.splu(H[idx][:, idx].tocsc())


def dual_norm(mesh: Mesh, functional: np.ndarray) -> np.ndarray:
    """Discrete H^-1 norm of load vectors against Dirichlet-zero test functions.

    ``functional`` holds the actions ``F(phi_i)`` on the hat functions, shape
    (N,) or (..., N). The norm is the Riesz dual norm w.r.t. the full H^1
    inner product (mass + stiffness) restricted to interior nodes.
    """
    F = np.asarray(functional, dtype=float)
    g = F[..., mesh.interior_nodes]
    flat = g.reshape(-1, g.shape[-1]).T  # (n_int, batch)
    sol = _h1_interior_factor(mesh).solve(np.ascontiguousarray(flat))
    out = np.sqrt(np.maximum(np.einsum("ib,ib->b", flat, sol), 0.0))
    return out.reshape(g.shape[:-1]) if g.ndim > 1 else float(out[0])


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    """Quadrature weights of the composite trapezoid rule on a time grid."""
    dt = np.diff(times)
    w = np.zeros_like(times)
    w[:-1] += dt / 2.0
    w[1:] += dt / 2.0
    return w


def _l2_sq(mesh: Mesh, values: np.ndarray) -> np.ndarray:
    M = assemble_mass(mesh)
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        return float(v @ (M @ v))
    return np.einsum("mn,mn->m", v, (M @ v.T).T)


def spacetime_inner(a: SpaceTimeField, b: SpaceTimeField) -> float:
    """Trapezoid-in-time, mass-matrix-in-space L2(0,tau;L2) inner product."""
    M = assemble_mass(a.mesh)
    w = trapezoid_weights(a.times)
    per_level = np.einsum("mn,mn->m", a.values, (M @ b.values.T).T)
    return float(w @ per_level)


def frobenius_inner(a: MatrixField, b: MatrixField) -> float:
    """Inner product ``sum_ij <a_ij, b_ij>_L2``."""
    if a.mesh is not b.mesh:
        raise FieldError("fields live on different meshes")
    if a.kind == "P1" and b.kind == "P1":
        M = assemble_mass(a.mesh)
        return float(sum(a.values[i, j] @ (M @ b.values[i, j]) for i in range(a.dim) for j in range(a.dim)))
    av, bv = a.to_p0().values, b.to_p0().values
    return float(np.einsum("ije,ije,e->", av, bv, a.mesh.volumes))


def grad_sup_per_level(field: SpaceTimeField) -> np.ndarray:
    """``max_x |grad w(x, t_m)|`` for every level (exact for P1)."""
    g = field.gradients()
    return np.sqrt((g**2).sum(axis=-1)).max(axis=-1)


def grad_time_integral(field: SpaceTimeField) -> float:
    """``(int_0^tau ||grad w(., t)||_inf^2 dt)^(1/2)`` by the trapezoid rule."""
    s = grad_sup_per_level(field)
    return float(np.sqrt(trapezoid_weights(field.times) @ s**2))


NORM_KINDS = ("L2", "H1", "grad_Linf", "spacetime_L2", "mixed_assumption", "frobenius_L2")


def norm(target, kind: str) -> float:
    """Norm of a discrete field.

    ``kind`` is one of ``L2``, ``H1``, ``grad_Linf`` (scalar fields),
    ``spacetime_L2``, ``mixed_assumption`` (space-time fields) and
    ``frobenius_L2`` (matrix fields). ``mixed_assumption`` is the data-error
    norm ``||w||_{L2(L2)} + (int ||grad w||_inf^2 dt)^(1/2)``.
    """
    if kind not in NORM_KINDS:
        raise FieldError(f"unknown norm kind {kind!r}")
    if isinstance(target, ScalarField):
        mesh, v = target.mesh, target.values
        if kind == "L2":
            return float(np.sqrt(max(_l2_sq(mesh, v), 0.0)))
        if kind == "H1":
            K = laplace_stiffness(mesh)
            return float(np.sqrt(max(_l2_sq(mesh, v) + v @ (K @ v), 0.0)))
        if kind == "grad_Linf":
            return float(np.sqrt((target.gradient() ** 2).sum(axis=1)).max())
    elif isinstance(target, SpaceTimeField):
        if kind == "spacetime_L2":
            return float(np.sqrt(max(spacetime_inner(target, target), 0.0)))
        if kind == "mixed_assumption":
            return norm(target, "spacetime_L2") + grad_time_integral(target)
    elif isinstance(target, MatrixField):
        if kind == "frobenius_L2":
            return float(np.sqrt(max(frobenius_inner(target, target), 0.0)))
    raise FieldError(f"norm kind {kind!r} does not apply to {type(target).__name__}")
