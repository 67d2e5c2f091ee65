"""Structured simplicial meshes on intervals and axis-aligned rectangles."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp


class MeshError(ValueError):
    pass


@dataclass(eq=False)
class Mesh:
    """Conforming P1 mesh of an interval (d=1) or rectangle (d=2).

    Parameters
    ----------
    nodes : ndarray, shape (N, d)
    elements : ndarray, shape (E, d+1)
        Vertex indices of each simplex.
    boundary_nodes : ndarray
        Sorted indices of the nodes lying on the boundary.
    bounds : ndarray, shape (d, 2)
        Lower/upper corner of the bounding box (the domain itself).
    shape : tuple of int
        Subdivisions per axis used to build the mesh.
    """

    nodes: np.ndarray
    elements: np.ndarray
    boundary_nodes: np.ndarray
    bounds: np.ndarray
    shape: tuple[int, ...]
    h: float = field(init=False)
    gamma0: float = field(init=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(len(self.nodes), -1)
        self.elements = np.asarray(self.elements, dtype=np.int64)
        self.boundary_nodes = np.unique(np.asarray(self.boundary_nodes, dtype=np.int64))
        if np.any(self.volumes <= 0.0):
            raise MeshError("mesh has elements of non-positive measure")
        diam = self.diameters
        self.h = float(diam.max())
        self.gamma0 = float(diam.min() / self.h)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @cached_property
    def interior_nodes(self) -> np.ndarray:
        mask = np.ones(self.n_nodes, dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    @cached_property
    def _jacobians(self) -> np.ndarray:
        x = self.nodes[self.elements]  # (E, d+1, d)
        return np.transpose(x[:, 1:, :] - x[:, :1, :], (0, 2, 1))  # (E, d, d)

    @cached_property
    def volumes(self) -> np.ndarray:
        """Element measures |K|."""
        det = np.linalg.det(self._jacobians)
        fact = 1.0 if self.dim == 1 else 2.0
        return np.abs(det) / fact

    @cached_property
    def grad_basis(self) -> np.ndarray:
        """Constant gradients of the P1 hat functions, shape (E, d+1, d)."""
        jinv = np.linalg.inv(self._jacobians)  # (E, d, d)
        ref = np.vstack([-np.ones(self.dim), np.eye(self.dim)])  # (d+1, d)
        # grad phi_a = J^{-T} grad_ref phi_a
        return np.einsum("ekd,ak->ead", jinv, ref)

    @cached_property
    def diameters(self) -> np.ndarray:
        x = self.nodes[self.elements]
        k = self.dim + 1
        d = np.zeros(self.n_elements)
        for a in range(k):
            for b in range(a + 1, k):
                d = np.maximum(d, np.linalg.norm(x[:, a] - x[:, b], axis=1))
        return d

    @cached_property
    def barycenters(self) -> np.ndarray:
        return self.nodes[self.elements].mean(axis=1)

    @property
    def measure(self) -> float:
        return float(self.volumes.sum())

    @cached_property
    def node_patches(self) -> sp.csr_matrix:
        """Incidence matrix, shape (N, E): entry 1 when the node is a vertex of the element."""
        rows = self.elements.ravel()
        cols = np.repeat(np.arange(self.n_elements), self.dim + 1)
        data = np.ones(rows.size)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n_nodes, self.n_elements))

    def gradient(self, values: np.ndarray) -> np.ndarray:
        """Element-wise gradients of P1 fields.

        ``values`` may be (N,) or (..., N); the result is (E, d) or (..., E, d).
        """
        values = np.asarray(values, dtype=float)
        local = values[..., self.elements]  # (..., E, d+1)
        return np.einsum("...ea,ead->...ed", local, self.grad_basis)

    def locate_cells(self, level: int) -> np.ndarray:
        """Index of the level-``level`` dyadic cell containing each element.

        Cells are numbered row-major (y outer, x inner) on rectangles.
        """
        if level < 0:
            raise MeshError("level must be non-negative")
        k = 2**level
        if any(n % k for n in self.shape):
            raise MeshError(
                f"dyadic level {level} ({k} cells per axis) does not divide the mesh "
                f"resolution {self.shape}"
            )
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        rel = (self.barycenters - lo) / (hi - lo)
        idx = np.clip(np.floor(rel * k).astype(np.int64), 0, k - 1)
        if self.dim == 1:
            return idx[:, 0]
        return idx[:, 1] * k + idx[:, 0]


def _as_bounds(domain) -> np.ndarray:
    arr = np.asarray(domain, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, 2)
    if arr.shape not in {(1, 2), (2, 2)}:
        raise MeshError("domain must be an interval (a, b) or a rectangle ((a, b), (c, d))")
    if np.any(arr[:, 1] - arr[:, 0] <= 0.0):
        raise MeshError("degenerate domain")
    return arr


def build_mesh(domain, resolution: int | Sequence[int]) -> Mesh:
    """Build a uniform mesh of an interval or rectangle.

    Parameters
    ----------
    domain : (a, b) or ((a, b), (c, d))
        Interval or axis-aligned rectangle.
    resolution : int or sequence of int
        Subdivisions per axis (at least 2). Each rectangular cell is split
        into two triangles along its lower-left/upper-right diagonal.

    Examples
    --------
    >>> m = build_mesh((0.0, 1.0), 4)
    >>> m.n_nodes, m.h
    (5, 0.25)
    """
    bounds = _as_bounds(domain)
    dim = bounds.shape[0]
    res = (resolution,) * dim if np.isscalar(resolution) else tuple(resolution)
    if len(res) != dim:
        raise MeshError("resolution must give one count per axis")
    res = tuple(int(r) for r in res)
    if any(r < 2 for r in res):
        raise MeshError("resolution must be at least 2")

    if dim == 1:
        (a, b), n = bounds[0], res[0]
        nodes = np.linspace(a, b, n + 1)[:, None]
        elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
        boundary = np.array([0, n])
        return Mesh(nodes, elements, boundary, bounds, res)

    nx, ny = res
    xs = np.linspace(*bounds[0], nx + 1)
    ys = np.linspace(*bounds[1], ny + 1)
    X, Y = np.meshgrid(xs, ys)  # row-major: y outer
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    n00 = (j * (nx + 1) + i).ravel()
    n10, n01, n11 = n00 + 1, n00 + nx + 1, n00 + nx + 2
    elements = np.vstack(
        [np.column_stack([n00, n10, n11]), np.column_stack([n00, n11, n01])]
    )
    on_bnd = (
        np.isclose(nodes[:, 0], xs[0])
        | np.isclose(nodes[:, 0], xs[-1])
        | np.isclose(nodes[:, 1], ys[0])
        | np.isclose(nodes[:, 1], ys[-1])
    )
    return Mesh(nodes, elements, np.flatnonzero(on_bnd), bounds, res)
