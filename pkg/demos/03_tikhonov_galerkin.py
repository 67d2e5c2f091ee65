# Galerkin-projected Tikhonov regularization.
#
# Data u come from a bump coefficient A; the guess A0 = 1 gives v0. The
# correction B = A - A0 satisfies T_u B = u - v0 up to linearization error.
# We project onto piecewise-constant cells, assemble the normal equations and
# trace the regularized solutions along an alpha grid.

import numpy as np

from coefid import LinearizedOperator, assemble_normal_system, build_basis, norm, solve_path
from coefid.experiments import ExperimentConfig, build_problem, make_noisy
from coefid.experiments.pipeline import forward

cfg = ExperimentConfig(resolution=32, steps=32)
problem = build_problem(cfg)
u = forward(problem, problem.A)
v0 = forward(problem, problem.A0)
data = make_noisy(u, 1e-3, seed=0)

op = LinearizedOperator(problem.A0, data, stability=1.0)
basis = build_basis(problem.mesh, cfg.level)
system = assemble_normal_system(op, basis, data - v0)
print("basis size:", basis.size, " U symmetric:", np.allclose(system.U, system.U.T))

for sol in solve_path(system, np.geomspace(1e-4, 1.0, 5)):
    err = norm(problem.B - sol.B, "frobenius_L2")
    print(f"alpha={sol.alpha:.1e} |B|={sol.solution_norm:.4f} residual={sol.residual_norm:.4f} error={err:.4f}")
