import numpy as np
import pytest

from coefid import MatrixField, SpaceTimeField, build_mesh, uniform_times
from coefid.fem import frobenius_inner, norm
from coefid.galerkin import build_basis, project, projection_gap, projection_residual
from coefid.linearized import LinearizedOperator
from coefid.mesh import MeshError

from conftest import heat_mode_plus, random_matrix_field


def test_level0_1d(line32):
    b = build_basis(line32, 0)
    assert b.n == 1 and b.size == 1
    np.testing.assert_allclose(b.scalar_values(), 1.0)


def test_level2_orthonormal(line32):
    b = build_basis(line32, 2)
    assert b.n == 4
    np.testing.assert_allclose(b.scalar_values().max(axis=0), 2.0)
    np.testing.assert_allclose(b.gram(), np.eye(4), atol=1e-14)


def test_2d_sizes(square8):
    b = build_basis(square8, 1)
    assert b.size == 16
    np.testing.assert_allclose(b.gram(), np.eye(16), atol=1e-14)


def test_incompatible_level(line32):
    with pytest.raises(MeshError):
        build_basis(build_mesh((0, 1), 12), 3)


def test_mean_projection():
    mesh = build_mesh((0, 1), 512)
    C = MatrixField.from_entries(mesh, [[lambda x: np.sin(np.pi * x[:, 0])]])
    P = project(build_basis(mesh, 0), C)
    np.testing.assert_allclose(P.values, 2 / np.pi, rtol=1e-5)


def test_projection_properties(square8, rng):
    b1, b2 = build_basis(square8, 1), build_basis(square8, 2)
    C, D = random_matrix_field(square8, rng), random_matrix_field(square8, rng)
    PC = project(b2, C)
    np.testing.assert_allclose(project(b2, PC).values, PC.values, atol=1e-13)
    assert frobenius_inner(PC, D) == pytest.approx(frobenius_inner(C, project(b2, D)), rel=1e-12)
    assert norm(PC, "frobenius_L2") <= norm(C, "frobenius_L2")
    np.testing.assert_allclose(project(b1, PC).values, project(b1, C).values, atol=1e-13)
    # coefficients round-trip for members of the span
    np.testing.assert_allclose(b2.reconstruct(b2.coefficients(PC)).values, PC.values, atol=1e-13)


def test_projection_residual_decreases():
    mesh = build_mesh((0, 1), 64)
    C = MatrixField.from_entries(mesh, [[lambda x: np.cos(3 * x[:, 0])]])
    res = [projection_residual(build_basis(mesh, l), C) for l in range(5)]
    assert np.all(np.diff(res) < 0)


def test_projection_gap():
    mesh = build_mesh((0, 1), 16)
    times = uniform_times(0.2, 32)
    w = SpaceTimeField.from_function(mesh, times, heat_mode_plus)
    op = LinearizedOperator(MatrixField.identity(mesh), w, stability=1.0)
    gaps = [projection_gap(op, build_basis(mesh, l), samples=50) for l in range(5)]
    assert gaps[-1] == 0.0  # level 4 spans every element
    assert all(g >= 0 for g in gaps)
    assert all(gaps[i + 1] <= gaps[i] * (1 + 1e-6) for i in range(4))
    with pytest.raises(ValueError):
        projection_gap(op, build_basis(mesh, 1), samples=0)


def test_projection_gap_degenerate(line32):
    times = uniform_times(0.1, 4)
    with pytest.warns(UserWarning):
        op = LinearizedOperator(MatrixField.identity(line32), SpaceTimeField.zeros(line32, times), stability=1.0)
    assert projection_gap(op, build_basis(line32, 1)) == 0.0
