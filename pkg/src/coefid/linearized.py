"""The data-dependent linear operator ``T_w C = v`` and its adjoint.

``v`` solves ``v_t - div(A0 grad v) = div(C grad w)`` with zero initial and
boundary values, so ``T_w`` maps d x d coefficient fields to space-time
fields. The adjoint is ``T_w^* phi = int_0^tau grad z (grad w)^T dt`` with
``z`` the backward solution driven by ``phi``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .fem import grad_sup_per_level, trapezoid_weights
from .fields import FieldError, MatrixField, SpaceTimeField
from .parabolic import (
    StabilityEstimate,
    _require_elliptic,
    estimate_stability_constant,
    solve_backward,
    solve_div_form_batch,
)


class DegenerateOperatorWarning(UserWarning):
    pass


@dataclass(eq=False)
class LinearizedOperator:
    """``T_w`` for a fixed base coefficient ``A0`` and linearization point ``w``.

    Parameters
    ----------
    A0 : MatrixField
        Symmetric, uniformly elliptic base coefficient.
    w : SpaceTimeField
        Linearization point (exact data, noisy data or its smoothed version).
    stability : StabilityEstimate or float, optional
        Stability constant of the parabolic problem with coefficient ``A0``;
        estimated by sampling when omitted.
    """

    A0: MatrixField
    w: SpaceTimeField
    stability: StabilityEstimate | float | None = None
    theta: float = 1.0
    degenerate: bool = field(init=False)

    def __post_init__(self):
        if self.A0.mesh is not self.w.mesh:
            raise FieldError("A0 and w live on different meshes")
        _require_elliptic(self.A0)
        self.degenerate = not np.any(self.w_grads)
        if self.degenerate:
            warnings.warn("linearization point has zero gradient; T_w is the zero operator",
                          DegenerateOperatorWarning, stacklevel=2)

    @property
    def mesh(self):
        return self.w.mesh

    @property
    def times(self) -> np.ndarray:
        return self.w.times

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @cached_property
    def w_grads(self) -> np.ndarray:
        """Element gradients of ``w`` per level, shape (M+1, E, d)."""
        return self.w.gradients()

    @cached_property
    def C0(self) -> float:
        if self.stability is None:
            self.stability = estimate_stability_constant(self.mesh, self.times, self.A0, theta=self.theta)
        if isinstance(self.stability, StabilityEstimate):
            return self.stability.C0
        return float(self.stability)

    def apply_batch(self, coeffs: np.ndarray) -> np.ndarray:
        """``T_w`` on k element-wise coefficients (E, d, d, k); returns (M+1, N, k)."""
        return solve_div_form_batch(self.mesh, self.times, self.A0, coeffs, self.w, self.theta)


def apply_T(op: LinearizedOperator, C: MatrixField) -> SpaceTimeField:
    """Solution of the divergence-form problem driven by ``div(C grad w)``."""
    if C.mesh is not op.mesh:
        raise FieldError("coefficient lives on a different mesh")
    vals = op.apply_batch(C.element_values()[..., None])[..., 0]
    return SpaceTimeField(op.mesh, op.times, vals)


def apply_T_star(op: LinearizedOperator, phi: SpaceTimeField) -> MatrixField:
    """Adjoint via a backward solve and trapezoid integration of ``grad z (grad w)^T``.

    This discretizes the continuous adjoint formula; it agrees with the
    transpose of the discrete forward map only up to discretization error.
    """
    if phi.mesh is not op.mesh or phi.times.shape != op.times.shape or np.any(phi.times != op.times):
        raise FieldError("mesh/time grid mismatch")
    z = solve_backward(op.mesh, op.times, op.A0, phi, op.theta)
    wt = trapezoid_weights(op.times)
    vals = np.einsum("m,mei,mej->ije", wt, z.gradients(), op.w_grads)
    return MatrixField(op.mesh, vals)


def operator_norm_bound(op: LinearizedOperator) -> float:
    """``d sqrt(C0) (int ||grad w||_inf^2 dt)^(1/2)``."""
    if op.degenerate:
        return 0.0
    s = grad_sup_per_level(op.w)
    return float(op.dim * np.sqrt(op.C0) * np.sqrt(trapezoid_weights(op.times) @ s**2))


def perturbation_bound(op_u: LinearizedOperator, op_v: LinearizedOperator) -> float:
    """Upper bound ``d sqrt(C0) (int ||grad u - grad v||_inf^2 dt)^(1/2)`` on ``||T_u - T_v||``."""
    if op_u.mesh is not op_v.mesh or np.any(op_u.times != op_v.times):
        raise FieldError("operators live on different discretizations")
    if not np.array_equal(op_u.A0.element_values(), op_v.A0.element_values()):
        raise FieldError("perturbation bound requires a common base coefficient A0")
    diff = op_u.w - op_v.w
    if not np.any(diff.values):
        return 0.0
    s = grad_sup_per_level(diff)
    c0 = max(op_u.C0, op_v.C0)
    return float(op_u.dim * np.sqrt(c0) * np.sqrt(trapezoid_weights(op_u.times) @ s**2))
