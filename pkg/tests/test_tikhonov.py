import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from coefid import MatrixField, ProblemSpec, SpaceTimeField, build_mesh, solve_forward, uniform_times
from coefid.experiments.noise import make_noisy
from coefid.fem import norm
from coefid.fields import FieldError
from coefid.galerkin import build_basis, projection_gap
from coefid.linearized import LinearizedOperator, apply_T_star
from coefid.parabolic import estimate_stability_constant
from coefid.tikhonov import NormalSystem, assemble_normal_system, solve_at_alpha, solve_path

from conftest import PI, heat_mode, heat_mode_plus, heat_problem


def bump_instance(n=16, steps=32, tau=0.2):
    mesh = build_mesh((0, 1), n)
    times = uniform_times(tau, steps)
    A0 = MatrixField.identity(mesh)
    A = MatrixField.from_entries(mesh, [[lambda x: 1 + 0.5 * ((x[:, 0] > 0.25) & (x[:, 0] < 0.75))]])
    src = lambda x, t: np.ones(len(x))
    init = np.sin(PI * mesh.nodes[:, 0])
    u = solve_forward(ProblemSpec(mesh, times, A, source=src, initial=init))
    v0 = solve_forward(ProblemSpec(mesh, times, A0, source=src, initial=init))
    return mesh, times, A, A0, u, v0


def test_level0_U_matches_quadrature():
    tau = 0.1
    mesh, times, w = heat_problem(128, 512, tau)
    op = LinearizedOperator(MatrixField.identity(mesh), w, stability=1.0)
    sys = assemble_normal_system(op, build_basis(mesh, 0), SpaceTimeField.zeros(mesh, times))
    # T(1) = -pi^2 t e^{-pi^2 t} sin(pi x): ||.||^2 = (1/2) int pi^4 t^2 e^{-2 pi^2 t} dt
    exact = 0.5 * quad(lambda t: PI**4 * t**2 * np.exp(-2 * PI**2 * t), 0, tau)[0]
    assert sys.U.shape == (1, 1)
    assert sys.U[0, 0] == pytest.approx(exact, rel=2e-2)
    assert not np.any(sys.b)


def test_U_symmetric_psd_and_D_identity():
    mesh, times, A, A0, u, v0 = bump_instance()
    sys = assemble_normal_system(LinearizedOperator(A0, u, stability=1.0), build_basis(mesh, 3), u - v0)
    assert np.array_equal(sys.U, sys.U.T)
    assert np.linalg.eigvalsh(sys.U).min() >= -1e-10 * np.trace(sys.U) / sys.size
    np.testing.assert_allclose(sys.D, np.eye(sys.size), atol=1e-14)


def test_U_matches_adjoint_cross_check():
    mesh, times, A, A0, u, v0 = bump_instance(32, 128)
    op = LinearizedOperator(A0, u, stability=1.0)
    basis = build_basis(mesh, 2)
    sys = assemble_normal_system(op, basis, u - v0)
    # <T E_k, T E_l> vs <E_k, T* T E_l>
    TE0 = sys.image_of(np.eye(sys.size)[0])
    via_adj = basis.coefficients(apply_T_star(op, TE0))
    np.testing.assert_allclose(via_adj, sys.U[:, 0], rtol=5e-2, atol=5e-2 * np.abs(sys.U[:, 0]).max())


def test_degenerate_system(line32):
    times = uniform_times(0.1, 8)
    with pytest.warns(UserWarning):
        op = LinearizedOperator(MatrixField.identity(line32), SpaceTimeField.zeros(line32, times), stability=1.0)
    sys = assemble_normal_system(op, build_basis(line32, 1), SpaceTimeField.zeros(line32, times))
    assert sys.degenerate and not np.any(sys.U)
    sol = solve_at_alpha(sys, 1.0)
    assert not np.any(sol.c)


def test_one_by_one_system(line32):
    basis = build_basis(line32, 0)
    times = uniform_times(0.1, 2)
    sys = NormalSystem(basis, np.array([[1.0]]), np.array([[1.0]]), np.array([1.0]),
                       np.zeros((3, line32.n_nodes, 1)), SpaceTimeField.zeros(line32, times))
    assert solve_at_alpha(sys, 1.0).c[0] == pytest.approx(0.5)


def test_optimality_and_monotonicity():
    mesh, times, A, A0, u, v0 = bump_instance()
    sys = assemble_normal_system(LinearizedOperator(A0, u, stability=1.0), build_basis(mesh, 3), u - v0)
    alphas = np.geomspace(1e-6, 1e-2, 9)
    path = solve_path(sys, alphas)
    for s in path:
        grad = (sys.U + s.alpha * sys.D) @ s.c - sys.b
        assert np.linalg.norm(grad) <= 1e-8 * np.linalg.norm(sys.b)
        # stored norms agree with the fields
        assert s.solution_norm == pytest.approx(norm(s.B, "frobenius_L2"), rel=1e-8)
    sn = [s.solution_norm for s in path]
    rn = [s.residual_norm for s in path]
    assert all(sn[i + 1] <= sn[i] + 1e-10 for i in range(len(sn) - 1))
    assert all(rn[i + 1] >= rn[i] - 1e-10 for i in range(len(rn) - 1))
    # large alpha drives B to zero
    assert solve_at_alpha(sys, 1e8).solution_norm < 1e-6 * sn[0]


def test_null_case_exact_data():
    mesh, times, A, A0, u, v0 = bump_instance()
    sys = assemble_normal_system(LinearizedOperator(A0, v0, stability=1.0), build_basis(mesh, 2), v0 - v0)
    for s in solve_path(sys, [1e-8, 1e-4, 1.0]):
        assert s.solution_norm == 0.0


def test_path_contract():
    mesh, times, A, A0, u, v0 = bump_instance()
    sys = assemble_normal_system(LinearizedOperator(A0, u, stability=1.0), build_basis(mesh, 1), u - v0)
    single = solve_path(sys, [1e-3])
    assert len(single) == 1 and np.array_equal(single[0].c, solve_at_alpha(sys, 1e-3).c)
    dup = solve_path(sys, [1e-3, 1e-3])
    assert np.array_equal(dup[0].c, dup[1].c)
    for bad in ([], [0.0], [1e-2, 1e-3]):
        with pytest.raises(ValueError):
            solve_path(sys, bad)
    with pytest.raises(ValueError):
        solve_at_alpha(sys, -1.0)


def test_rhs_mismatch():
    mesh, times, A, A0, u, v0 = bump_instance()
    op = LinearizedOperator(A0, u, stability=1.0)
    with pytest.raises(FieldError):
        assemble_normal_system(op, build_basis(mesh, 1), SpaceTimeField.zeros(mesh, uniform_times(0.3, 32)))


def test_projected_solution_recovers_aligned_bump():
    mesh, times, A, A0, u, v0 = bump_instance(32, 64)
    sys = assemble_normal_system(LinearizedOperator(A0, u, stability=1.0), build_basis(mesh, 2), u - v0)
    B = A - A0
    err = norm(solve_at_alpha(sys, 1e-12).B - B, "frobenius_L2")
    assert err <= 1e-4 * norm(B, "frobenius_L2")


@pytest.mark.parametrize("delta", [1e-3, 1e-2])
def test_error_splitting_bound(delta):
    """||B_alpha - B~_{alpha,n}|| <= (d sqrt(C0) delta + eps_n) ||B|| / sqrt(alpha) + delta / (2 sqrt(alpha))."""
    mesh, times, A, A0, u, v0 = bump_instance(16, 32)
    B = A - A0
    C0 = estimate_stability_constant(mesh, times, A0, battery=12).C0
    full = assemble_normal_system(LinearizedOperator(A0, u, stability=C0), build_basis(mesh, 4), u - v0)
    noisy = make_noisy(u, delta, seed=5, model="smooth")
    op_n = LinearizedOperator(A0, noisy, stability=C0)
    basis = build_basis(mesh, 2)
    eps_n = projection_gap(op_n, basis, samples=40)
    proj = assemble_normal_system(op_n, basis, noisy - v0)
    nB = norm(B, "frobenius_L2")
    for alpha in (1e-5, 1e-4, 1e-3, 1e-2):
        diff = norm(solve_at_alpha(full, alpha).B - solve_at_alpha(proj, alpha).B, "frobenius_L2")
        bound = (np.sqrt(C0) * delta + eps_n) * nB / np.sqrt(alpha) + delta / (2 * np.sqrt(alpha))
        assert diff <= bound
