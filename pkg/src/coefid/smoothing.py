"""Clement-type quasi-interpolation of noisy nodal data.

Each output nodal value is the value at that node of the affine least-squares
fit over the node's element patch, sampled at the patch vertices and element
barycenters. The operator is linear, reproduces affine functions and is
assembled once per mesh as a sparse matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem import assemble_mass, grad_sup_per_level, trapezoid_weights
from .fields import FieldError, ScalarField, SpaceTimeField
from .mesh import Mesh


@lru_cache(maxsize=16)
def clement_matrix(mesh: Mesh) -> sp.csr_matrix:
    """Sparse (N, N) matrix of the patch least-squares quasi-interpolant."""
    d = mesh.dim
    patches = mesh.node_patches.tolil().rows
    rows, cols, data = [], [], []
    for i in range(mesh.n_nodes):
        els = np.asarray(patches[i], dtype=np.int64)
        verts = np.unique(mesh.elements[els].ravel())
        # sample operator: vertex values, then barycenter averages
        n_v, n_e = verts.size, els.size
        pos = {v: a for a, v in enumerate(verts)}
        S = np.zeros((n_v + n_e, n_v))
        S[np.arange(n_v), np.arange(n_v)] = 1.0
        for r, e in enumerate(els):
            for v in mesh.elements[e]:
                S[n_v + r, pos[v]] += 1.0 / (d + 1)
        pts = np.vstack([mesh.nodes[verts], mesh.barycenters[els]]) - mesh.nodes[i]
        V = np.hstack([np.ones((pts.shape[0], 1)), pts])
        coef, *_ = np.linalg.lstsq(V, S, rcond=None)  # (d+1, n_v)
        rows.extend([i] * n_v)
        cols.extend(verts.tolist())
        data.extend(coef[0].tolist())
    return sp.csr_matrix((data, (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes))


def clement_smooth(mesh: Mesh, raw) -> ScalarField:
    """Smoothed P1 field from raw nodal values."""
    vals = raw.values if isinstance(raw, ScalarField) else np.asarray(raw, dtype=float)
    if isinstance(raw, ScalarField) and raw.mesh is not mesh:
        raise FieldError("raw data lives on a different mesh")
    if vals.shape != (mesh.n_nodes,):
        raise FieldError("raw data must have one value per node")
    return ScalarField(mesh, clement_matrix(mesh) @ vals)


def smooth_spacetime(raw: SpaceTimeField) -> SpaceTimeField:
    """Level-wise smoothing; no smoothing across time."""
    P = clement_matrix(raw.mesh)
    return SpaceTimeField(raw.mesh, raw.times, (P @ raw.values.T).T)


def w1inf_norm(mesh: Mesh, values: np.ndarray) -> float:
    """``max(||v||_inf, ||grad v||_inf)`` of a P1 field."""
    g = mesh.gradient(values)
    return float(max(np.abs(values).max(), np.sqrt((g**2).sum(axis=1)).max()))


def _l2(mesh: Mesh, values: np.ndarray) -> float:
    return float(np.sqrt(max(values @ (assemble_mass(mesh) @ values), 0.0)))


def inverse_estimate_ratio(mesh: Mesh, v: np.ndarray) -> float:
    """``||Pi v||_{W^{1,inf}} h^2 / ||v||_{L2}`` for one input."""
    nv = _l2(mesh, v)
    if nv == 0.0:
        return 0.0
    return w1inf_norm(mesh, clement_matrix(mesh) @ v) * mesh.h**2 / nv


def stability_ratio(mesh: Mesh, v: np.ndarray) -> float:
    """``||v - Pi v||_{L2} / ||v||_{L2}`` for one input."""
    nv = _l2(mesh, v)
    return 0.0 if nv == 0.0 else _l2(mesh, v - clement_matrix(mesh) @ v) / nv


def inverse_estimate_sup(mesh: Mesh) -> float:
    """Exact ``sup_v ||grad Pi v||_inf h^2 / ||v||_{L2}`` over nodal inputs.

    Each element gradient component of ``Pi v`` is a linear functional
    ``g . v``; its largest ratio to ``||v||_{L2}`` is ``sqrt(g^T M^{-1} g)``.
    The Euclidean gradient norm is bounded by ``sqrt(d)`` times the largest
    component, which this value includes.
    """
    P = clement_matrix(mesh).toarray()
    G = np.einsum("ead,ean->edn", mesh.grad_basis, P[mesh.elements])  # (E, d, N)
    F = G.reshape(-1, mesh.n_nodes).T
    sol = spla.splu(assemble_mass(mesh).tocsc()).solve(np.ascontiguousarray(F))
    comp = np.sqrt(np.maximum(np.einsum("nk,nk->k", F, sol), 0.0)).max()
    return float(np.sqrt(mesh.dim) * comp * mesh.h**2)


@dataclass
class SmoothingReport:
    """Noise bookkeeping after smoothing on a mesh of size ``h``."""

    h: float
    delta: float
    delta_h: float
    combined_bound: float
    C1: float | None = None
    C5: float | None = None
    grad_misfit: np.ndarray | None = None


def modified_noise_level(delta: float, h: float, C_tilde: float = 1.0) -> SmoothingReport:
    """``delta_h = max(h, delta / h**2)`` and the bound ``2 C_tilde delta_h``."""
    if not h > 0:
        raise ValueError("mesh size must be positive")
    if delta < 0:
        raise ValueError("noise level must be non-negative")
    dh = max(h, delta / h**2)
    return SmoothingReport(h=h, delta=delta, delta_h=dh, combined_bound=2.0 * C_tilde * dh)


def optimal_mesh_size(delta: float) -> float:
    """Minimizer ``delta**(1/3)`` of ``max(h, delta / h**2)``."""
    if not delta > 0:
        raise ValueError("noise level must be positive")
    return delta ** (1.0 / 3.0)


def resolution_for_noise(delta: float, length: float = 1.0, min_resolution: int = 2) -> int:
    """Subdivisions of an interval of ``length`` giving ``h`` near ``delta**(1/3)``.

    The resulting ``h = length / n`` lies within a factor 2 of the minimizer
    (when the minimum resolution does not bind).
    """
    h_opt = optimal_mesh_size(delta)
    n = max(min_resolution, int(round(length / h_opt)))
    return n


def measure_constants(mesh: Mesh, samples: int = 20, seed: int = 0) -> SmoothingReport:
    """Monte-Carlo stability and inverse-estimate constants on white-noise inputs."""
    rng = np.random.default_rng(seed)
    c1 = c5 = 0.0
    for _ in range(samples):
        v = rng.standard_normal(mesh.n_nodes)
        c1 = max(c1, stability_ratio(mesh, v))
        c5 = max(c5, inverse_estimate_ratio(mesh, v))
    rep = modified_noise_level(0.0, mesh.h)
    rep.C1, rep.C5 = c1, c5
    return rep


def gradient_misfit(u: SpaceTimeField, smoothed: SpaceTimeField) -> np.ndarray:
    """``||grad u(t_m) - grad Pi u~(t_m)||_inf`` per level."""
    return grad_sup_per_level(u - smoothed)


def pipeline_misfit(u: SpaceTimeField, smoothed: SpaceTimeField) -> float:
    """Mixed data-error norm between exact data and its smoothed noisy version."""
    diff = u - smoothed
    M = assemble_mass(u.mesh)
    w = trapezoid_weights(u.times)
    l2 = np.sqrt(w @ np.einsum("mn,mn->m", diff.values, (M @ diff.values.T).T))
    g = grad_sup_per_level(diff)
    return float(l2 + np.sqrt(w @ g**2))
