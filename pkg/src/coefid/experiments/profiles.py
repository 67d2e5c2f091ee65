"""Named analytic profiles used by experiment configurations.

Every profile maps points ``x`` of shape (P, d) to values of shape (P,).
Matrix coefficients are built as ``profile(x) * I``, optionally with a
constant symmetric off-diagonal entry in 2D.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..fields import MatrixField
from ..mesh import Mesh

PROFILES = ("constant", "sinusoid", "bump", "affine")


def _floats(value, default=None):
    if value is None:
        return default
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in value]


def make_profile(spec: dict) -> Callable:
    """Build ``f(x)`` from a dict with a ``profile`` key and its parameters.

    constant : ``value``
    sinusoid : ``offset + amplitude * prod_i sin(freq pi x_i)``
    bump     : ``base + height`` inside the box ``lo < x_i < hi``, ``base`` outside
    affine   : ``offset + sum_i slope_i x_i``
    """
    name = spec.get("profile", "constant")
    p = {k: v for k, v in spec.items() if k != "profile"}
    if name == "constant":
        c = float(p.get("value", 0.0))
        return lambda x: np.full(len(x), c)
    if name == "sinusoid":
        amp, freq, off = float(p.get("amplitude", 1.0)), float(p.get("freq", 1.0)), float(p.get("offset", 0.0))
        return lambda x: off + amp * np.prod(np.sin(freq * np.pi * x), axis=1)
    if name == "bump":
        base, height = float(p.get("base", 1.0)), float(p.get("height", 0.5))
        lo, hi = float(p.get("lo", 0.25)), float(p.get("hi", 0.75))
        return lambda x: base + height * np.all((x > lo) & (x < hi), axis=1)
    if name == "affine":
        off = float(p.get("offset", 0.0))
        slope = np.asarray(_floats(p.get("slope"), [0.0]))

        def f(x):
            s = np.broadcast_to(slope, (x.shape[1],)) if slope.size == 1 else slope
            return off + x @ s
        return f
    raise ValueError(f"unknown profile {name!r}; expected one of {PROFILES}")


def make_coefficient(mesh: Mesh, spec: dict) -> MatrixField:
    """Element-wise coefficient ``profile(x) I`` (plus ``offdiag`` in 2D)."""
    f = make_profile(spec)
    vals = f(mesh.barycenters)
    d = mesh.dim
    out = np.zeros((d, d, mesh.n_elements))
    for i in range(d):
        out[i, i] = vals
    off = float(spec.get("offdiag", 0.0))
    if off and d == 2:
        out[0, 1] = out[1, 0] = off
    return MatrixField(mesh, out)


def make_source(spec: dict) -> Callable:
    """Time-independent source ``f(x, t) = profile(x)``."""
    f = make_profile(spec)
    return lambda x, t: f(x)
