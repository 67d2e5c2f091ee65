# Forward solver: P1 elements in space, theta-scheme in time.
#
# The heat mode u = exp(-pi^2 t) sin(pi x) solves u_t - u_xx = 0 on (0, 1)
# with zero boundary values. Halving h and quartering the time step should
# divide the space-time L2 error by about 4.

import numpy as np

from coefid import MatrixField, ProblemSpec, SpaceTimeField, build_mesh, norm, solve_forward, uniform_times


def heat_mode(x, t):
    return np.exp(-np.pi**2 * t) * np.sin(np.pi * x[:, 0])


errors = []
for n, steps in ((16, 16), (32, 64), (64, 256)):
    mesh = build_mesh((0, 1), n)
    times = uniform_times(0.1, steps)
    spec = ProblemSpec(mesh, times, MatrixField.identity(mesh), initial=np.sin(np.pi * mesh.nodes[:, 0]))
    u = solve_forward(spec)
    errors.append(norm(u - SpaceTimeField.from_function(mesh, times, heat_mode), "spacetime_L2"))
    print(f"n={n:3d} steps={steps:4d} error={errors[-1]:.3e}")

# Ratios of successive errors
print("ratios:", [round(errors[i] / errors[i + 1], 3) for i in range(2)])

# A 2D problem with an anisotropic, spatially varying coefficient.
mesh = build_mesh(((0, 1), (0, 1)), 16)
vals = np.zeros((2, 2, mesh.n_elements))
vals[0, 0] = 1.0 + mesh.barycenters[:, 0]
vals[1, 1] = 2.0
vals[0, 1] = vals[1, 0] = 0.3
u = solve_forward(ProblemSpec(mesh, uniform_times(0.2, 40), MatrixField(mesh, vals), source=lambda x, t: np.ones(len(x))))
print("2D solution max at tau:", float(u.values[-1].max()))
