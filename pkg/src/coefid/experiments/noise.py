"""Seeded noise models for synthetic observations."""

from __future__ import annotations

import numpy as np

from ..fem import norm
from ..fields import SpaceTimeField

NOISE_MODELS = ("raw", "smooth")


def _smooth_profile(u: SpaceTimeField, rng: np.random.Generator, modes: int = 4, time_modes: int = 3) -> np.ndarray:
    """Random low-frequency sine/cosine expansion vanishing on the boundary."""
    mesh = u.mesh
    lo, hi = mesh.bounds[:, 0], mesh.bounds[:, 1]
    xh = (mesh.nodes - lo) / (hi - lo)
    s = u.times / u.tau
    out = np.zeros_like(u.values)
    ks = np.arange(1, modes + 1)
    for j in range(time_modes):
        tf = np.cos(j * np.pi * s)[:, None]
        if mesh.dim == 1:
            c = rng.standard_normal(modes) / ks**2
            space = np.sin(np.pi * np.outer(xh[:, 0], ks)) @ c
        else:
            c = rng.standard_normal((modes, modes)) / np.add.outer(ks, ks) ** 2
            sx = np.sin(np.pi * np.outer(xh[:, 0], ks))
            sy = np.sin(np.pi * np.outer(xh[:, 1], ks))
            space = np.einsum("na,nb,ab->n", sx, sy, c)
        out += tf * space[None, :]
    return out


def make_noisy(u: SpaceTimeField, delta: float, seed: int = 0, model: str = "raw") -> SpaceTimeField:
    """Observation ``u + eta`` with a seeded perturbation of prescribed size.

    ``raw``: i.i.d. Gaussian nodal values rescaled so that
    ``||eta||_{L2(0,tau;L2)} = delta``. ``smooth``: a random low-frequency
    profile rescaled so that the mixed norm
    ``||eta||_{L2(L2)} + (int ||grad eta||_inf^2 dt)^(1/2)`` equals ``delta``.
    """
    if delta < 0:
        raise ValueError("noise level must be non-negative")
    if model not in NOISE_MODELS:
        raise ValueError(f"unknown noise model {model!r}")
    if delta == 0:
        return SpaceTimeField(u.mesh, u.times, u.values.copy())
    rng = np.random.default_rng(seed)
    if model == "raw":
        eta = SpaceTimeField(u.mesh, u.times, rng.standard_normal(u.values.shape))
        size = norm(eta, "spacetime_L2")
    else:
        eta = SpaceTimeField(u.mesh, u.times, _smooth_profile(u, rng))
        size = norm(eta, "mixed_assumption")
    return u + eta * (delta / size)
