"""Nested piecewise-constant coefficient spaces and the entry-wise projection onto them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fem import norm
from .fields import FieldError, MatrixField
from .linearized import LinearizedOperator, apply_T, apply_T_star
from .mesh import Mesh


@dataclass(eq=False)
class CoeffBasis:
    """L2-orthonormal indicator functions of the level-``level`` dyadic partition.

    The scalar space has ``n = 2**(level*d)`` functions; the induced matrix
    basis has ``n * d**2`` members, ordered by entry ``(i, j)`` (row-major)
    and then by cell.
    """

    mesh: Mesh
    level: int
    cells: np.ndarray = field(init=False)  # cell index of each element
    cell_volumes: np.ndarray = field(init=False)

    def __post_init__(self):
        self.cells = self.mesh.locate_cells(self.level)
        n = 2 ** (self.level * self.mesh.dim)
        self.cell_volumes = np.bincount(self.cells, weights=self.mesh.volumes, minlength=n)
        if np.any(self.cell_volumes <= 0):
            raise FieldError("partition has empty cells on this mesh")

    @property
    def n(self) -> int:
        return self.cell_volumes.size

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def size(self) -> int:
        return self.n * self.dim**2

    def scalar_values(self) -> np.ndarray:
        """Element values of the scalar basis, shape (E, n)."""
        out = np.zeros((self.mesh.n_elements, self.n))
        out[np.arange(self.mesh.n_elements), self.cells] = 1.0 / np.sqrt(self.cell_volumes[self.cells])
        return out

    def matrix_values(self) -> np.ndarray:
        """Element values of every matrix basis member, shape (E, d, d, n*d^2)."""
        d, n = self.dim, self.n
        phi = self.scalar_values()
        out = np.zeros((self.mesh.n_elements, d, d, d * d * n))
        for i in range(d):
            for j in range(d):
                k0 = (i * d + j) * n
                out[:, i, j, k0:k0 + n] = phi
        return out

    def element(self, k: int) -> MatrixField:
        return MatrixField(self.mesh, np.transpose(self.matrix_values()[..., k], (1, 2, 0)))

    def gram(self) -> np.ndarray:
        """Frobenius-L2 Gram matrix of the matrix basis."""
        V = self.matrix_values()
        return np.einsum("eijk,eijl,e->kl", V, V, self.mesh.volumes)

    def coefficients(self, C: MatrixField) -> np.ndarray:
        """Coordinates ``<C, E_k>`` of the projection of ``C``."""
        if C.mesh is not self.mesh:
            raise FieldError("coefficient lives on a different mesh")
        vals = C.to_p0().values  # (d, d, E)
        d, n = self.dim, self.n
        out = np.empty(d * d * n)
        for i in range(d):
            for j in range(d):
                integ = np.bincount(self.cells, weights=vals[i, j] * self.mesh.volumes, minlength=n)
                out[(i * d + j) * n:(i * d + j + 1) * n] = integ / np.sqrt(self.cell_volumes)
        return out

    def reconstruct(self, c: np.ndarray) -> MatrixField:
        """Expansion ``sum_k c_k E_k`` as an element-wise constant field."""
        d, n = self.dim, self.n
        c = np.asarray(c, dtype=float).reshape(d, d, n)
        scale = 1.0 / np.sqrt(self.cell_volumes)
        return MatrixField(self.mesh, (c * scale)[:, :, self.cells])


def build_basis(mesh: Mesh, level: int) -> CoeffBasis:
    """Piecewise constants on the dyadic partition with ``2**level`` cells per axis."""
    return CoeffBasis(mesh, level)


def project(basis: CoeffBasis, C: MatrixField) -> MatrixField:
    """Entry-wise L2-orthogonal projection (cell means)."""
    return basis.reconstruct(basis.coefficients(C))


def projection_gap(op: LinearizedOperator, basis: CoeffBasis, samples: int = 30, seed: int = 0,
                   safety: float = 2.0) -> float:
    """Estimate of ``||T - T P_n||`` by power iteration, inflated by ``safety``.

    Iterates ``x <- (I - P_n) T^* T (I - P_n) x`` starting from a seeded random
    element-wise coefficient; ``samples`` is the iteration count.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if op.degenerate:
        return 0.0
    mesh = op.mesh
    rng = np.random.default_rng(seed)
    d = mesh.dim
    x = MatrixField(mesh, rng.standard_normal((d, d, mesh.n_elements)))
    x = x - project(basis, x)
    nx = norm(x, "frobenius_L2")
    if nx == 0.0:
        return 0.0
    x = x * (1.0 / nx)
    est = 0.0
    for _ in range(samples):
        Tx = apply_T(op, x)
        est = norm(Tx, "spacetime_L2")
        y = apply_T_star(op, Tx)
        y = y - project(basis, y)
        ny = norm(y, "frobenius_L2")
        if ny == 0.0 or est == 0.0:
            return 0.0
        x = y * (1.0 / ny)
    return float(safety * est)


def projection_residual(basis: CoeffBasis, C: MatrixField) -> float:
    """``||P_n C - C||`` in the Frobenius-L2 norm."""
    return norm(project(basis, C) - C, "frobenius_L2")
