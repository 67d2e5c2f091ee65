# Balancing principle on a diagonal operator with known solution.
#
# Singular values 1/i, a smooth solution and a data error of norm delta. The
# rule picks the largest grid index whose solution stays within 4C/mu^j of
# every coarser one; we compare its error with the best error on the grid.

import numpy as np

from coefid import AdaptiveConfig, build_alpha_grid, select_adaptive

rng = np.random.default_rng(0)
sigma = 1.0 / np.arange(1, 201)
omega = rng.standard_normal(sigma.size)
omega /= np.linalg.norm(omega)
B = sigma * omega
for delta in (1e-2, 1e-3, 1e-4):
    noise = rng.standard_normal(sigma.size)
    y = sigma * B + delta * noise / np.linalg.norm(noise)
    cfg = AdaptiveConfig(delta=delta, mu=1.5, N=30, d=1, C=0.5)
    alphas = build_alpha_grid(cfg)
    sols = [sigma * y / (sigma**2 + a) for a in alphas]
    res = select_adaptive(sols, cfg.C, cfg.mu)
    errs = [np.linalg.norm(s - B) for s in sols]
    print(f"delta={delta:.0e} k={res.k:2d} alpha={alphas[res.k]:.2e} error={errs[res.k]:.3e} best={min(errs):.3e}")
