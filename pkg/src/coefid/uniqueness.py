"""Determinant test for uniqueness of the coefficient from time-sliced data.

For ``d**2`` groups of ``d + 1`` sample times, each block

    D^k_ij = det[ grad u(t_r)^T | d_i d_j u(t_r) ]_{r in group k}

is a (d+1) x (d+1) determinant, and ``D`` is the determinant of the
``d**2 x d**2`` matrix of blocks (row ``k``, column ``(i, j)`` row-major).
``D != 0`` almost everywhere is the hypothesis under which two coefficients
producing the same data coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fields import SpaceTimeField
from .mesh import Mesh


class UniquenessError(ValueError):
    pass


@dataclass
class AnalyticProvider:
    """Exact derivatives of ``u``.

    ``grad(x, t)`` returns (P, d) and ``hess(x, t)`` returns (P, d, d) for
    points ``x`` of shape (P, d).
    """

    grad: Callable
    hess: Callable
    tau: float


@dataclass
class UniquenessReport:
    times: np.ndarray
    points: np.ndarray
    values: np.ndarray  # D per evaluation point
    blocks: np.ndarray  # (P, d^2, d^2)
    scale: float
    threshold: float
    provider: str

    @property
    def min_abs(self) -> float:
        return float(np.abs(self.values).min())

    @property
    def max_abs(self) -> float:
        return float(np.abs(self.values).max())

    @property
    def fraction_below(self) -> float:
        """Fraction of evaluation points with ``|D| <= threshold``."""
        return float(np.mean(np.abs(self.values) <= self.threshold))

    @property
    def fraction_holds(self) -> float:
        return 1.0 - self.fraction_below

    def summary(self) -> dict:
        return {
            "provider": self.provider,
            "times": self.times.tolist(),
            "min_abs_D": self.min_abs,
            "max_abs_D": self.max_abs,
            "scale": self.scale,
            "threshold": self.threshold,
            "fraction_below": self.fraction_below,
        }


def _recovered_derivatives(field: SpaceTimeField, t: float):
    """Element gradients and recovered Hessians of ``field`` at time ``t``.

    Element gradients are averaged to the nodes (volume-weighted over each
    patch) and differentiated once more; the result is symmetrized.
    """
    mesh = field.mesh
    vals = field.at(t)
    g = mesh.gradient(vals)  # (E, d)
    P = mesh.node_patches  # (N, E)
    wts = P @ mesh.volumes
    nodal = (P @ (g * mesh.volumes[:, None])) / wts[:, None]  # (N, d)
    H = np.stack([mesh.gradient(nodal[:, i]) for i in range(mesh.dim)], axis=1)  # (E, d, d)
    return g, 0.5 * (H + np.swapaxes(H, 1, 2))


def uniqueness_determinant(provider, times: Sequence[float], mesh: Mesh | None = None,
                           recover: bool = True, rel_threshold: float = 1e-10) -> UniquenessReport:
    """Evaluate ``D`` at element barycenters.

    Parameters
    ----------
    provider : AnalyticProvider or SpaceTimeField
        Source of first and second space derivatives.
    times : sequence of float
        Exactly ``d**2 (d+1)`` sample times in ``(0, tau)``; group ``k`` uses
        ``times[k (d+1) : (k+1) (d+1)]``.
    mesh : Mesh
        Evaluation mesh; required for analytic providers.
    recover : bool
        Must be true for space-time fields, whose element-wise second
        derivatives vanish without gradient recovery.
    rel_threshold : float
        ``|D|`` at or below ``rel_threshold * scale`` counts as zero, where
        ``scale = (G**d H)**(d**2)`` with ``G``, ``H`` the largest first and
        second derivative magnitudes sampled.
    """
    if isinstance(provider, SpaceTimeField):
        if not recover:
            raise UniquenessError("space-time field input needs gradient recovery")
        mesh = provider.mesh
        tau = provider.tau
        tag = "recovered"
    elif isinstance(provider, AnalyticProvider):
        if mesh is None:
            raise UniquenessError("analytic provider needs an evaluation mesh")
        tau = provider.tau
        tag = "analytic"
    else:
        raise UniquenessError(f"unsupported derivative provider {type(provider).__name__}")
    d = mesh.dim
    times = np.asarray(times, dtype=float).ravel()
    need = d * d * (d + 1)
    if times.size != need:
        raise UniquenessError(f"need exactly {need} sample times, got {times.size}")
    if np.any(times <= 0) or np.any(times >= tau):
        raise UniquenessError("sample times must lie in (0, tau)")

    pts = mesh.barycenters
    grads, hess = [], []
    for t in times:
        if tag == "recovered":
            g, H = _recovered_derivatives(provider, t)
        else:
            g = np.asarray(provider.grad(pts, t), dtype=float).reshape(len(pts), d)
            H = np.asarray(provider.hess(pts, t), dtype=float).reshape(len(pts), d, d)
        grads.append(g)
        hess.append(H)
    grads = np.stack(grads, axis=1)  # (P, T, d)
    hess = np.stack(hess, axis=1)  # (P, T, d, d)

    P = len(pts)
    blocks = np.empty((P, d * d, d * d))
    for k in range(d * d):
        sl = slice(k * (d + 1), (k + 1) * (d + 1))
        for i in range(d):
            for j in range(d):
                mat = np.concatenate([grads[:, sl, :], hess[:, sl, i, j][:, :, None]], axis=2)
                blocks[:, k, i * d + j] = np.linalg.det(mat)
    D = np.linalg.det(blocks)
    G = float(np.abs(grads).max())
    Hm = float(np.abs(hess).max())
    scale = (G**d * Hm) ** (d * d)
    return UniquenessReport(times, pts, D, blocks, scale, rel_threshold * scale, tag)
