"""Theta-scheme Galerkin solvers for the forward, divergence-form and backward problems.

All three problems share homogeneous Dirichlet conditions; boundary rows are
eliminated and the boundary values of every returned level are zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse.linalg as spla

from .fem import assemble_mass, assemble_stiffness, check_ellipticity, dual_norm, laplace_stiffness, trapezoid_weights
from .fields import FieldError, MatrixField, ScalarField, SpaceTimeField, check_time_grid
from .mesh import Mesh


class SolverError(RuntimeError):
    pass


@dataclass(eq=False)
class ProblemSpec:
    """Data of ``u_t - div(coeff grad u) = f`` with ``u(0) = initial``.

    ``source`` is either nodal samples of ``f`` with shape (M+1, N), a
    callable ``f(x, t)``, or ``None`` (f = 0). ``div_source`` optionally adds
    ``div(C grad w)`` as a pair ``(C, w)``.
    """

    mesh: Mesh
    times: np.ndarray
    coeff: MatrixField
    source: np.ndarray | Callable | None = None
    initial: np.ndarray | ScalarField | None = None
    div_source: tuple[MatrixField, SpaceTimeField] | None = None
    theta: float = 1.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        check_time_grid(self.times)
        if self.coeff.mesh is not self.mesh:
            raise FieldError("coefficient lives on a different mesh")
        if not 0.5 <= self.theta <= 1.0:
            raise FieldError("theta must lie in [1/2, 1]")


@dataclass
class StabilityEstimate:
    C0: float
    method: str = "sampled"
    samples: int = 0

    def __post_init__(self):
        if not self.C0 > 0:
            raise ValueError("stability constant must be positive")


def _require_elliptic(coeff: MatrixField) -> None:
    q0 = check_ellipticity(coeff)
    if q0 <= 0.0:
        raise FieldError(f"coefficient is not uniformly elliptic (q0 = {q0:.3g})")


def _march(mesh: Mesh, times: np.ndarray, K, loads: np.ndarray | None, u0: np.ndarray, theta: float) -> np.ndarray:
    """Theta-scheme time stepping on the interior nodes.

    ``loads`` are nodal load vectors ``F(phi_i)`` per level with shape
    (M+1, N) or (M+1, N, k); ``u0`` holds interior initial values with shape
    (n_int,) or (n_int, k). Returns full nodal values per level.
    """
    idx = mesh.interior_nodes
    M = assemble_mass(mesh)
    Mi = M[idx][:, idx].tocsc()
    Ki = K[idx][:, idx].tocsc()
    n_steps = times.size - 1
    out = np.zeros((times.size, mesh.n_nodes) + u0.shape[1:])
    u = u0.copy()
    out[0, idx] = u
    Fi = None if loads is None else loads[:, idx]
    factors: dict[float, object] = {}
    dts = np.diff(times)
    for m in range(n_steps):
        dt = float(dts[m])
        key = round(dt, 15)
        if key not in factors:
            try:
                factors[key] = spla.splu((Mi + theta * dt * Ki).tocsc())
            except RuntimeError as exc:  # singular only for non-elliptic input
                raise SolverError("singular step matrix") from exc
        rhs = Mi @ u
        if theta < 1.0:
            rhs -= (1.0 - theta) * dt * (Ki @ u)
        if Fi is not None:
            rhs += dt * (theta * Fi[m + 1] + (1.0 - theta) * Fi[m])
        u = factors[key].solve(np.ascontiguousarray(rhs))
        out[m + 1, idx] = u
    return out


def _project_initial(mesh: Mesh, initial) -> np.ndarray:
    """L2 projection of a nodal P1 datum onto the Dirichlet-zero P1 space."""
    idx = mesh.interior_nodes
    if initial is None:
        return np.zeros(idx.size)
    vals = initial.values if isinstance(initial, ScalarField) else np.asarray(initial, dtype=float)
    if vals.shape != (mesh.n_nodes,):
        raise FieldError("initial datum must have one value per node")
    if not np.any(vals[mesh.boundary_nodes]):
        return vals[idx].copy()
    M = assemble_mass(mesh)
    Mi = M[idx][:, idx].tocsc()
    return spla.spsolve(Mi, (M @ vals)[idx])


def _source_loads(mesh: Mesh, times: np.ndarray, source) -> np.ndarray | None:
    if source is None:
        return None
    if callable(source):
        vals = np.stack([np.asarray(source(mesh.nodes, t), dtype=float).reshape(-1) for t in times])
    else:
        vals = np.asarray(source, dtype=float)
    if vals.shape != (times.size, mesh.n_nodes):
        raise FieldError("source must have one nodal field per time level")
    return (assemble_mass(mesh) @ vals.T).T


def div_form_loads(coeff_elements: np.ndarray, w_grads: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Weak loads ``-int C grad w . grad phi_i`` per time level.

    ``coeff_elements`` has shape (E, d, d) or (E, d, d, k) for a batch of k
    coefficients; ``w_grads`` has shape (M+1, E, d). Returns (M+1, N) or
    (M+1, N, k).
    """
    G = mesh.grad_basis * mesh.volumes[:, None, None]  # (E, d+1, d)
    if coeff_elements.ndim == 3:
        flux = np.einsum("eij,mej->mei", coeff_elements, w_grads)
        local = -np.einsum("ead,med->mea", G, flux)  # (M+1, E, d+1)
        out = np.zeros((w_grads.shape[0], mesh.n_nodes))
        for a in range(mesh.dim + 1):
            np.add.at(out, (slice(None), mesh.elements[:, a]), local[:, :, a])
        return out
    flux = np.einsum("eijk,mej->meik", coeff_elements, w_grads)
    local = -np.einsum("ead,medk->meak", G, flux)
    out = np.zeros((w_grads.shape[0], mesh.n_nodes, coeff_elements.shape[-1]))
    for a in range(mesh.dim + 1):
        np.add.at(out, (slice(None), mesh.elements[:, a]), local[:, :, a])
    return out


def solve_forward(spec: ProblemSpec) -> SpaceTimeField:
    """Discrete weak solution of the forward problem.

    Each step solves ``(M + theta dt K) u^{m+1} = (M - (1-theta) dt K) u^m
    + dt (theta F^{m+1} + (1-theta) F^m)`` on the interior nodes.
    """
    mesh, times = spec.mesh, spec.times
    _require_elliptic(spec.coeff)
    K = assemble_stiffness(mesh, spec.coeff)
    loads = _source_loads(mesh, times, spec.source)
    if spec.div_source is not None:
        C, w = spec.div_source
        _check_compatible(mesh, times, C, w)
        extra = div_form_loads(C.element_values(), w.gradients(), mesh)
        loads = extra if loads is None else loads + extra
    u0 = _project_initial(mesh, spec.initial)
    return SpaceTimeField(mesh, times, _march(mesh, times, K, loads, u0, spec.theta))


def _check_compatible(mesh: Mesh, times: np.ndarray, C: MatrixField, w: SpaceTimeField) -> None:
    if C.mesh is not mesh or w.mesh is not mesh:
        raise FieldError("mesh mismatch")
    if w.times.shape != times.shape or np.any(w.times != times):
        raise FieldError("time grid mismatch")


def solve_div_form(mesh: Mesh, times, A0: MatrixField, C: MatrixField, w: SpaceTimeField, theta: float = 1.0) -> SpaceTimeField:
    """Solve ``v_t - div(A0 grad v) = div(C grad w)``, ``v(0) = 0``."""
    times = np.asarray(times, dtype=float)
    return solve_forward(ProblemSpec(mesh, times, A0, div_source=(C, w), theta=theta))


def solve_div_form_batch(mesh: Mesh, times, A0: MatrixField, coeffs: np.ndarray, w: SpaceTimeField, theta: float = 1.0) -> np.ndarray:
    """Divergence-form solves for k element-wise coefficients at once.

    ``coeffs`` has shape (E, d, d, k); returns nodal values (M+1, N, k).
    """
    times = np.asarray(times, dtype=float)
    K = assemble_stiffness(mesh, A0)
    loads = div_form_loads(coeffs, w.gradients(), mesh)
    u0 = np.zeros((mesh.interior_nodes.size, coeffs.shape[-1]))
    return _march(mesh, times, K, loads, u0, theta)


def solve_backward(mesh: Mesh, times, A0: MatrixField, phi: SpaceTimeField, theta: float = 1.0) -> SpaceTimeField:
    """Solve ``z_t + div(A0 grad z) = phi`` with ``z(tau) = 0``.

    Substituting ``s = tau - t`` gives a forward problem with source
    ``-phi(tau - s)``, which is marched and returned on the original grid.
    """
    times = np.asarray(times, dtype=float)
    check_time_grid(times)
    _require_elliptic(A0)
    if phi.mesh is not mesh or phi.times.shape != times.shape or np.any(phi.times != times):
        raise FieldError("mesh/time grid mismatch")
    tau = times[-1]
    s = (tau - times[::-1]).copy()
    s[0] = 0.0
    K = assemble_stiffness(mesh, A0)
    loads = -(assemble_mass(mesh) @ phi.values[::-1].T).T
    vals = _march(mesh, s, K, loads, np.zeros(mesh.interior_nodes.size), theta)
    return SpaceTimeField(mesh, times, vals[::-1].copy())


def stability_norms(mesh: Mesh, field: SpaceTimeField) -> tuple[float, float]:
    """``||v||_{L2(H1)}`` and the discrete ``||v_t||_{L2(H^-1)}``.

    The time derivative is the backward difference on each step, measured
    with :func:`dual_norm` and integrated with the step lengths.
    """
    M = assemble_mass(mesh)
    H = M + laplace_stiffness(mesh)
    v = field.values
    h1_sq = np.einsum("mn,mn->m", v, (H @ v.T).T)
    l2h1 = float(np.sqrt(trapezoid_weights(field.times) @ h1_sq))
    dt = np.diff(field.times)
    vt = np.diff(v, axis=0) / dt[:, None]
    dn = dual_norm(mesh, (M @ vt.T).T)
    return l2h1, float(np.sqrt(dt @ np.atleast_1d(dn) ** 2))


def _random_data(mesh: Mesh, times: np.ndarray, rng: np.random.Generator):
    """One battery draw: smooth-in-time random source and random initial datum."""
    n_modes = 4
    coef = rng.standard_normal((n_modes, mesh.n_nodes))
    tt = times / times[-1]
    basis = np.stack([np.cos(np.pi * k * tt) for k in range(n_modes)])  # (modes, M+1)
    f = basis.T @ coef
    h = rng.standard_normal(mesh.n_nodes)
    h[mesh.boundary_nodes] = 0.0
    return f, h


def estimate_stability_constant(mesh: Mesh, times, A0: MatrixField, battery: int = 12, seed: int = 0, theta: float = 1.0) -> StabilityEstimate:
    """Sampled lower bound for the parabolic stability constant.

    Returns the largest observed ratio
    ``(||v||_{L2(H1)} + ||v_t||_{L2(H^-1)}) / (||f||_{L2(H^-1)} + ||h||_{L2})``
    over a fixed battery of random data pairs.
    """
    if battery < 1:
        raise ValueError("empty battery")
    times = np.asarray(times, dtype=float)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(battery):
        f, h = _random_data(mesh, times, rng)
        best = max(best, stability_ratio(mesh, times, A0, f, h, theta))
    return StabilityEstimate(best, "sampled", battery)


def stability_ratio(mesh: Mesh, times, A0: MatrixField, f: np.ndarray, h: np.ndarray, theta: float = 1.0) -> float:
    """Ratio of solution to data norms for a single (source, initial) pair."""
    times = np.asarray(times, dtype=float)
    v = solve_forward(ProblemSpec(mesh, times, A0, source=f, initial=h, theta=theta))
    a, b = stability_norms(mesh, v)
    M = assemble_mass(mesh)
    f_dual = dual_norm(mesh, (M @ np.asarray(f).T).T)
    f_norm = float(np.sqrt(trapezoid_weights(times) @ np.atleast_1d(f_dual) ** 2))
    h_norm = float(np.sqrt(max(h @ (M @ h), 0.0)))
    denom = f_norm + h_norm
    return (a + b) / denom if denom > 0 else 0.0
