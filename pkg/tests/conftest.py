import numpy as np
import pytest

from coefid import MatrixField, SpaceTimeField, build_mesh, uniform_times

PI = np.pi


def heat_mode(x, t):
    return np.exp(-PI**2 * t) * np.sin(PI * x[:, 0])


def heat_mode_plus(x, t):
    # non-separable perturbation of the heat mode
    return heat_mode(x, t) + t * x[:, 0] * (1 - x[:, 0])


@pytest.fixture
def line32():
    return build_mesh((0.0, 1.0), 32)


@pytest.fixture
def square8():
    return build_mesh(((0.0, 1.0), (0.0, 1.0)), 8)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_matrix_field(mesh, rng, symmetric=False):
    d = mesh.dim
    vals = rng.standard_normal((d, d, mesh.n_elements))
    if symmetric:
        vals = 0.5 * (vals + np.transpose(vals, (1, 0, 2)))
    return MatrixField(mesh, vals)


def random_spacetime(mesh, times, rng, zero_boundary=True):
    vals = rng.standard_normal((times.size, mesh.n_nodes))
    if zero_boundary:
        vals[:, mesh.boundary_nodes] = 0.0
    return SpaceTimeField(mesh, times, vals)


def heat_problem(n=32, steps=64, tau=0.1, fn=heat_mode):
    mesh = build_mesh((0.0, 1.0), n)
    times = uniform_times(tau, steps)
    return mesh, times, SpaceTimeField.from_function(mesh, times, fn)
