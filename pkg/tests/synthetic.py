"""Diagonal-operator instances with a known solution and a known error curve."""

from types import SimpleNamespace

import numpy as np


def diagonal_instance(delta, nu=0.5, rho=1.0, size=200, seed=0):
    """Singular values 1/i, solution B = (T*T)^nu omega with ||omega|| = rho, data error of norm delta."""
    rng = np.random.default_rng(seed)
    sigma = 1.0 / np.arange(1, size + 1)
    omega = rng.standard_normal(size)
    omega *= rho / np.linalg.norm(omega)
    B = sigma ** (2 * nu) * omega
    noise = rng.standard_normal(size)
    y = sigma * B + delta * noise / np.linalg.norm(noise)
    return sigma, B, y


def tikhonov_path(sigma, y, alphas):
    return [SimpleNamespace(alpha=a, B=sigma * y / (sigma**2 + a)) for a in alphas]
