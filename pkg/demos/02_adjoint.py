# The linearized operator T_w and its adjoint.
#
# T_w C solves v_t - div(A0 grad v) = div(C grad w) with zero data; the
# adjoint T_w* phi integrates grad z (grad w)^T over time, where z solves a
# backward problem driven by phi. The discrete identity
# <T C, phi> = <C, T* phi> holds up to quadrature error in time.

import numpy as np

from coefid import LinearizedOperator, MatrixField, SpaceTimeField, apply_T, apply_T_star, build_mesh, norm, uniform_times
from coefid.fem import frobenius_inner, spacetime_inner

rng = np.random.default_rng(0)
for n, steps in ((32, 128), (64, 512)):
    mesh = build_mesh((0, 1), n)
    times = uniform_times(0.1, steps)
    w = SpaceTimeField.from_function(
        mesh, times, lambda x, t: np.exp(-np.pi**2 * t) * np.sin(np.pi * x[:, 0]) + t * x[:, 0] * (1 - x[:, 0])
    )
    op = LinearizedOperator(MatrixField.identity(mesh), w, stability=1.0)
    C = MatrixField(mesh, rng.standard_normal((1, 1, mesh.n_elements)))
    phi_vals = rng.standard_normal((times.size, mesh.n_nodes))
    phi_vals[:, mesh.boundary_nodes] = 0.0
    phi = SpaceTimeField(mesh, times, phi_vals)
    lhs = spacetime_inner(apply_T(op, C), phi)
    rhs = frobenius_inner(C, apply_T_star(op, phi))
    rel = abs(lhs - rhs) / (norm(C, "frobenius_L2") * norm(phi, "spacetime_L2"))
    print(f"h=1/{n} steps={steps}: <TC,phi>={lhs:.6f} <C,T*phi>={rhs:.6f} relative mismatch={rel:.2e}")
