"""Discrete field carriers: nodal scalars, space-time stacks and d x d coefficient fields."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import Mesh


class FieldError(ValueError):
    pass


def _check_mesh(a: Mesh, b: Mesh) -> None:
    if a is not b:
        raise FieldError("fields live on different meshes")


@dataclass(eq=False)
class ScalarField:
    """Nodal values of a continuous P1 function."""

    mesh: Mesh
    values: np.ndarray
    dirichlet_zero: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_nodes,):
            raise FieldError(
                f"expected {self.mesh.n_nodes} nodal values, got shape {self.values.shape}"
            )
        if self.dirichlet_zero and np.any(self.values[self.mesh.boundary_nodes] != 0.0):
            raise FieldError("field tagged Dirichlet-zero is nonzero on the boundary")

    @classmethod
    def from_function(cls, mesh: Mesh, fn: Callable, **kw) -> "ScalarField":
        return cls(mesh, np.asarray(fn(mesh.nodes), dtype=float).reshape(-1), **kw)

    def gradient(self) -> np.ndarray:
        return self.mesh.gradient(self.values)


@dataclass(eq=False)
class SpaceTimeField:
    """One nodal P1 field per level of a time grid ``0 = t_0 < ... < t_M = tau``."""

    mesh: Mesh
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        check_time_grid(self.times)
        if self.values.shape != (self.times.size, self.mesh.n_nodes):
            raise FieldError(
                f"values must have shape {(self.times.size, self.mesh.n_nodes)}, "
                f"got {self.values.shape}"
            )

    @classmethod
    def zeros(cls, mesh: Mesh, times) -> "SpaceTimeField":
        times = np.asarray(times, dtype=float)
        return cls(mesh, times, np.zeros((times.size, mesh.n_nodes)))

    @classmethod
    def from_function(cls, mesh: Mesh, times, fn: Callable) -> "SpaceTimeField":
        """Sample ``fn(x, t)`` (x of shape (N, d)) at every node and level."""
        times = np.asarray(times, dtype=float)
        vals = np.stack([np.asarray(fn(mesh.nodes, t), dtype=float).reshape(-1) for t in times])
        return cls(mesh, times, vals)

    @property
    def tau(self) -> float:
        return float(self.times[-1])

    @property
    def n_levels(self) -> int:
        return self.times.size

    def level(self, m: int) -> ScalarField:
        return ScalarField(self.mesh, self.values[m])

    def at(self, t: float) -> np.ndarray:
        """Nodal values linearly interpolated in time."""
        if t < self.times[0] or t > self.times[-1]:
            raise FieldError(f"time {t} outside [{self.times[0]}, {self.times[-1]}]")
        m = int(np.clip(np.searchsorted(self.times, t) - 1, 0, self.times.size - 2))
        t0, t1 = self.times[m], self.times[m + 1]
        s = (t - t0) / (t1 - t0)
        return (1.0 - s) * self.values[m] + s * self.values[m + 1]

    def gradients(self) -> np.ndarray:
        """Element-wise gradients per level, shape (M+1, E, d)."""
        return self.mesh.gradient(self.values)

    def _like(self, values) -> "SpaceTimeField":
        return SpaceTimeField(self.mesh, self.times, values)

    def _other(self, other) -> np.ndarray:
        if isinstance(other, SpaceTimeField):
            _check_mesh(self.mesh, other.mesh)
            if other.times.shape != self.times.shape or np.any(other.times != self.times):
                raise FieldError("fields live on different time grids")
            return other.values
        return other

    def __add__(self, other):
        return self._like(self.values + self._other(other))

    def __sub__(self, other):
        return self._like(self.values - self._other(other))

    def __mul__(self, s: float):
        return self._like(self.values * s)

    __rmul__ = __mul__

    def __neg__(self):
        return self._like(-self.values)


def check_time_grid(times: np.ndarray) -> None:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise FieldError("time grid needs at least two levels")
    if times[0] != 0.0:
        raise FieldError("time grid must start at 0")
    if np.any(np.diff(times) <= 0.0):
        raise FieldError("time grid must be strictly increasing")


def uniform_times(tau: float, steps: int) -> np.ndarray:
    if tau <= 0 or steps < 1:
        raise FieldError("need tau > 0 and at least one step")
    return np.linspace(0.0, tau, steps + 1)


@dataclass(eq=False)
class MatrixField:
    """A d x d array of scalar coefficient fields on a shared mesh.

    ``values`` has shape (d, d, n) where n is the element count for the
    element-wise constant representation (``kind="P0"``) or the node count
    for nodal P1 entries (``kind="P1"``).
    """

    mesh: Mesh
    values: np.ndarray
    kind: str = "P0"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        d = self.mesh.dim
        if self.kind not in ("P0", "P1"):
            raise FieldError(f"unknown representation {self.kind!r}")
        n = self.mesh.n_elements if self.kind == "P0" else self.mesh.n_nodes
        if self.values.shape != (d, d, n):
            raise FieldError(f"matrix field must have shape {(d, d, n)}, got {self.values.shape}")

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @classmethod
    def constant(cls, mesh: Mesh, matrix) -> "MatrixField":
        mat = np.atleast_2d(np.asarray(matrix, dtype=float))
        if mat.shape != (mesh.dim, mesh.dim):
            raise FieldError(f"constant matrix must be {mesh.dim}x{mesh.dim}")
        return cls(mesh, np.repeat(mat[:, :, None], mesh.n_elements, axis=2))

    @classmethod
    def zeros(cls, mesh: Mesh) -> "MatrixField":
        return cls.constant(mesh, np.zeros((mesh.dim, mesh.dim)))

    @classmethod
    def identity(cls, mesh: Mesh) -> "MatrixField":
        return cls.constant(mesh, np.eye(mesh.dim))

    @classmethod
    def from_entries(cls, mesh: Mesh, entries, kind: str = "P0") -> "MatrixField":
        """Build from a nested d x d list of callables ``f(x) -> values``.

        P0 entries are sampled at element barycenters, P1 entries at nodes.
        """
        pts = mesh.barycenters if kind == "P0" else mesh.nodes
        d = mesh.dim
        vals = np.empty((d, d, pts.shape[0]))
        for i in range(d):
            for j in range(d):
                vals[i, j] = np.broadcast_to(np.asarray(entries[i][j](pts), dtype=float), pts.shape[:1])
        return cls(mesh, vals, kind)

    def element_values(self) -> np.ndarray:
        """Coefficient at each element's barycenter, shape (E, d, d)."""
        if self.kind == "P0":
            return np.transpose(self.values, (2, 0, 1))
        vals = self.values[:, :, self.mesh.elements].mean(axis=3)  # (d, d, E)
        return np.transpose(vals, (2, 0, 1))

    def to_p0(self) -> "MatrixField":
        if self.kind == "P0":
            return self
        return MatrixField(self.mesh, np.transpose(self.element_values(), (1, 2, 0)))

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.values, np.transpose(self.values, (1, 0, 2))))

    def _other(self, other) -> np.ndarray:
        if isinstance(other, MatrixField):
            _check_mesh(self.mesh, other.mesh)
            if other.kind != self.kind:
                return other.to_p0().values if self.kind == "P0" else other.values
            return other.values
        return other

    def __add__(self, other):
        if isinstance(other, MatrixField) and other.kind != self.kind:
            return self.to_p0() + other.to_p0()
        return MatrixField(self.mesh, self.values + self._other(other), self.kind)

    def __sub__(self, other):
        if isinstance(other, MatrixField) and other.kind != self.kind:
            return self.to_p0() - other.to_p0()
        return MatrixField(self.mesh, self.values - self._other(other), self.kind)

    def __mul__(self, s: float):
        return MatrixField(self.mesh, self.values * s, self.kind)

    __rmul__ = __mul__

    def __neg__(self):
        return MatrixField(self.mesh, -self.values, self.kind)
