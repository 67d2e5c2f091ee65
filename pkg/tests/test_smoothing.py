import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coefid import ScalarField, SpaceTimeField, build_mesh, uniform_times
from coefid.experiments.noise import make_noisy
from coefid.fem import norm
from coefid.fields import FieldError
from coefid.smoothing import (
    clement_smooth,
    inverse_estimate_ratio,
    inverse_estimate_sup,
    measure_constants,
    modified_noise_level,
    optimal_mesh_size,
    pipeline_misfit,
    resolution_for_noise,
    smooth_spacetime,
    stability_ratio,
)

MESHES = [build_mesh((0, 1), 40), build_mesh(((0, 2), (0, 1)), (6, 4))]


@pytest.mark.parametrize("mesh", MESHES)
def test_reproduces_constants_and_affine(mesh):
    c = np.full(mesh.n_nodes, 2.5)
    np.testing.assert_allclose(clement_smooth(mesh, c).values, 2.5, atol=1e-12)
    aff = 0.3 - 1.7 * mesh.nodes[:, 0] + (2.0 * mesh.nodes[:, 1] if mesh.dim == 2 else 0)
    np.testing.assert_allclose(clement_smooth(mesh, ScalarField(mesh, aff)).values, aff, atol=1e-12)


def test_mesh_mismatch():
    a, b = MESHES
    with pytest.raises(FieldError):
        clement_smooth(b, ScalarField(a, np.zeros(a.n_nodes)))
    with pytest.raises(FieldError):
        clement_smooth(a, np.zeros(3))


def test_spacetime_levelwise():
    mesh = MESHES[1]
    times = uniform_times(1.0, 5)
    z = SpaceTimeField.zeros(mesh, times)
    out = smooth_spacetime(z)
    assert out.n_levels == z.n_levels and not np.any(out.values)
    rng = np.random.default_rng(0)
    f = SpaceTimeField(mesh, times, rng.standard_normal((6, mesh.n_nodes)))
    out = smooth_spacetime(f)
    np.testing.assert_allclose(out.values[3], clement_smooth(mesh, f.values[3]).values)


def test_stability_constant_stable_under_refinement():
    rng = np.random.default_rng(4)
    c1 = []
    for n in (8, 16, 32):
        mesh = build_mesh(((0, 1), (0, 1)), n)
        rep = measure_constants(mesh, samples=10, seed=1)
        c1.append(rep.C1)
        for _ in range(5):
            v = rng.standard_normal(mesh.n_nodes)
            Pv = clement_smooth(mesh, v).values
            l2 = lambda x: norm(ScalarField(mesh, x), "L2")
            assert l2(Pv) <= (1 + rep.C1 * 1.5) * l2(v)
    assert max(c1) / min(c1) <= 1.5


def test_exact_inverse_constant_is_mesh_independent_2d():
    sups = [inverse_estimate_sup(build_mesh(((0, 1), (0, 1)), n)) for n in (8, 16, 32)]
    assert max(sups) / min(sups) <= 2.0


def test_sampled_ratios_below_exact_sup():
    mesh = build_mesh(((0, 1), (0, 1)), 12)
    sup = inverse_estimate_sup(mesh)
    rng = np.random.default_rng(2)
    for _ in range(10):
        v = rng.standard_normal(mesh.n_nodes)
        Pv = clement_smooth(mesh, v).values
        g = np.sqrt((mesh.gradient(Pv) ** 2).sum(axis=1)).max()
        assert g * mesh.h**2 / norm(ScalarField(mesh, v), "L2") <= sup * (1 + 1e-10)
    assert inverse_estimate_ratio(mesh, np.zeros(mesh.n_nodes)) == 0.0
    assert stability_ratio(mesh, np.zeros(mesh.n_nodes)) == 0.0


def test_modified_noise_level_examples():
    assert modified_noise_level(1e-3, 0.1).delta_h == pytest.approx(0.1)
    assert modified_noise_level(0.0, 0.05).delta_h == 0.05
    r = modified_noise_level(1e-2, 0.1, C_tilde=3.0)
    assert r.delta_h == pytest.approx(1.0) and r.combined_bound == pytest.approx(6.0)
    with pytest.raises(ValueError):
        modified_noise_level(1e-3, 0.0)
    with pytest.raises(ValueError):
        modified_noise_level(-1.0, 0.1)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-12, 1.0), st.floats(1e-3, 1.0))
def test_delta_h_is_max(delta, h):
    dh = modified_noise_level(delta, h).delta_h
    assert dh == max(h, delta / h**2)
    if delta <= h**3:
        assert dh == h


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-9, 1e-2))
def test_mesh_choice_near_minimizer(delta):
    h_opt = optimal_mesh_size(delta)
    n = resolution_for_noise(delta)
    h = 1.0 / n
    assert h_opt / 2 <= h <= 2 * h_opt
    # and delta_h at h is within a factor 4 of the optimum value delta^(1/3)
    assert modified_noise_level(delta, h).delta_h <= 4 * h_opt


def smooth_u(x, t):
    return np.exp(-t) * np.sin(np.pi * x[:, 0]) * np.sin(np.pi * x[:, 1])


def test_smoothing_of_exact_data_is_first_order():
    mis = []
    for n in (8, 16, 32):
        mesh = build_mesh(((0, 1), (0, 1)), n)
        u = SpaceTimeField.from_function(mesh, uniform_times(1.0, 4), smooth_u)
        mis.append(pipeline_misfit(u, smooth_spacetime(u)))
    rates = np.log2(np.array(mis[:-1]) / np.array(mis[1:]))
    assert np.all(rates > 0.8)


def test_pipeline_estimate_shape():
    """(||u - Pi u~|| + gradient misfit) <= 2 C~ delta_h with C~ fitted on the coarsest mesh."""
    deltas = (1e-2, 1e-3, 1e-4, 1e-5)

    def ratios(n):
        mesh = build_mesh(((0, 1), (0, 1)), n)
        u = SpaceTimeField.from_function(mesh, uniform_times(1.0, 8), smooth_u)
        return [pipeline_misfit(u, smooth_spacetime(make_noisy(u, d, seed=0)))
                / modified_noise_level(d, mesh.h).delta_h for d in deltas]

    C_tilde = max(ratios(8)) / 2
    for n in (16, 32):
        assert max(ratios(n)) <= 2 * C_tilde
