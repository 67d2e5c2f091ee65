import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from coefid import MatrixField, SpaceTimeField, build_mesh, uniform_times
from coefid.fem import frobenius_inner, norm, spacetime_inner
from coefid.fields import FieldError
from coefid.linearized import (
    DegenerateOperatorWarning,
    LinearizedOperator,
    apply_T,
    apply_T_star,
    operator_norm_bound,
    perturbation_bound,
)

from conftest import PI, heat_mode, heat_mode_plus, heat_problem, random_matrix_field, random_spacetime


def test_apply_T_closed_form():
    mesh, times, w = heat_problem(64, 256)
    op = LinearizedOperator(MatrixField.identity(mesh), w, stability=1.0)
    c = -1.3
    v = apply_T(op, MatrixField.constant(mesh, [[c]]))
    exact = SpaceTimeField.from_function(mesh, times, lambda x, t: -c * PI**2 * t * heat_mode(x, t))
    assert norm(v - exact, "spacetime_L2") / norm(exact, "spacetime_L2") <= 2e-2
    assert not np.any(apply_T(op, MatrixField.zeros(mesh)).values)


def test_apply_T_linear(line32, rng):
    times = uniform_times(0.1, 32)
    w = SpaceTimeField.from_function(line32, times, heat_mode_plus)
    op = LinearizedOperator(MatrixField.identity(line32), w, stability=1.0)
    C1, C2 = random_matrix_field(line32, rng), random_matrix_field(line32, rng)
    np.testing.assert_allclose(apply_T(op, C1 + C2).values, (apply_T(op, C1) + apply_T(op, C2)).values, atol=1e-12)


def test_adjoint_closed_form():
    tau = 0.1
    mesh, times, w = heat_problem(128, 512, tau)
    op = LinearizedOperator(MatrixField.identity(mesh), w, stability=1.0)
    out = apply_T_star(op, w).values[0, 0]
    g = lambda t: (np.exp(PI**2 * (t - 2 * tau)) - np.exp(-PI**2 * t)) / (2 * PI**2)
    integral = quad(lambda t: g(t) * np.exp(-PI**2 * t), 0, tau)[0]
    # closed form of the same integral
    closed = (tau * np.exp(-2 * PI**2 * tau) - (1 - np.exp(-2 * PI**2 * tau)) / (2 * PI**2)) / (2 * PI**2)
    assert integral == pytest.approx(closed, rel=1e-10)
    # gradients are element averages of pi cos(pi x); compare with exact cell averages
    xl, xr = mesh.nodes[mesh.elements[:, 0], 0], mesh.nodes[mesh.elements[:, 1], 0]
    avg_cos = (np.sin(PI * xr) - np.sin(PI * xl)) / (PI * (xr - xl))
    expected = PI**2 * avg_cos**2 * closed
    assert np.max(np.abs(out - expected)) <= 2e-2 * np.max(np.abs(expected))
    assert not np.any(apply_T_star(op, SpaceTimeField.zeros(mesh, times)).values)


def test_adjoint_identity_random(rng):
    mesh, times, w = heat_problem(32, 128, fn=heat_mode_plus)
    op = LinearizedOperator(MatrixField.identity(mesh), w, stability=1.0)
    for _ in range(5):
        C = random_matrix_field(mesh, rng)
        phi = random_spacetime(mesh, times, rng)
        a = spacetime_inner(apply_T(op, C), phi)
        b = frobenius_inner(C, apply_T_star(op, phi))
        assert abs(a - b) <= 5e-2 * norm(C, "frobenius_L2") * norm(phi, "spacetime_L2")


def test_adjoint_2d(rng):
    mesh = build_mesh(((0, 1), (0, 1)), 8)
    times = uniform_times(0.1, 32)
    w = SpaceTimeField.from_function(mesh, times, lambda x, t: (1 + t) * x[:, 0] * (1 - x[:, 0]) * np.sin(PI * x[:, 1]) + t * x[:, 1])
    op = LinearizedOperator(MatrixField.identity(mesh), w, stability=1.0)
    C = random_matrix_field(mesh, rng)
    phi = random_spacetime(mesh, times, rng)
    a = spacetime_inner(apply_T(op, C), phi)
    b = frobenius_inner(C, apply_T_star(op, phi))
    assert abs(a - b) <= 5e-2 * norm(C, "frobenius_L2") * norm(phi, "spacetime_L2")


def test_norm_bound_dominates(rng):
    mesh, times, w = heat_problem(32, 64, fn=heat_mode_plus)
    op = LinearizedOperator(MatrixField.identity(mesh), w)
    bound = operator_norm_bound(op)
    for _ in range(20):
        C = random_matrix_field(mesh, rng)
        assert norm(apply_T(op, C), "spacetime_L2") <= bound * norm(C, "frobenius_L2")
    op2 = LinearizedOperator(MatrixField.identity(mesh), w * 3.0, stability=op.C0)
    assert operator_norm_bound(op2) == pytest.approx(3 * bound)


def test_degenerate_operator(line32):
    times = uniform_times(0.1, 8)
    with pytest.warns(DegenerateOperatorWarning):
        op = LinearizedOperator(MatrixField.identity(line32), SpaceTimeField.zeros(line32, times), stability=1.0)
    assert op.degenerate
    assert operator_norm_bound(op) == 0.0
    assert not np.any(apply_T(op, MatrixField.identity(line32)).values)


def test_perturbation_bound(rng):
    mesh, times, u = heat_problem(32, 64, fn=heat_mode_plus)
    A0 = MatrixField.identity(mesh)
    op_u = LinearizedOperator(A0, u)
    assert perturbation_bound(op_u, op_u) == 0.0
    lin = SpaceTimeField.from_function(mesh, times, lambda x, t: x[:, 0] + 0 * t)
    b1 = perturbation_bound(op_u, LinearizedOperator(A0, u + lin * 1e-2, stability=op_u.C0))
    b2 = perturbation_bound(op_u, LinearizedOperator(A0, u + lin * 2e-2, stability=op_u.C0))
    assert b2 == pytest.approx(2 * b1, rel=1e-10)
    with pytest.raises(FieldError):
        perturbation_bound(op_u, LinearizedOperator(A0 * 2.0, u, stability=1.0))


def test_mesh_mismatch(line32):
    times = uniform_times(0.1, 8)
    w = SpaceTimeField.from_function(line32, times, heat_mode)
    op = LinearizedOperator(MatrixField.identity(line32), w, stability=1.0)
    other = build_mesh((0, 1), 16)
    with pytest.raises(FieldError):
        apply_T(op, MatrixField.identity(other))
    with pytest.raises(FieldError):
        apply_T_star(op, SpaceTimeField.zeros(other, times))
