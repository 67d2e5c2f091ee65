"""A-posteriori choice of the regularization parameter by the balancing principle."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fem import frobenius_inner
from .fields import MatrixField


@dataclass
class AdaptiveConfig:
    """Parameters of the geometric grid and the balancing rule.

    The grid is ``alpha_i = mu**(2 i) * delta**2 * (d + 2)**2`` for
    ``i = 0..N``. ``C`` is the balancing constant; ``nu`` and ``rho``
    describe a power-type source condition ``phi(lam) = lam**nu`` and are
    only needed for rate diagnostics. ``gamma``, when given, must dominate
    ``||T||**2`` and bounds the first grid point.
    """

    delta: float
    mu: float = 1.5
    N: int = 20
    d: int = 1
    C: float = 1.0
    nu: float | None = None
    rho: float | None = None
    gamma: float | None = None
    family: str = "power"

    def __post_init__(self):
        if not self.mu > 1.0:
            raise ValueError("grid ratio mu must exceed 1")
        if self.N < 0:
            raise ValueError("N must be non-negative")
        if self.delta < 0:
            raise ValueError("noise level must be non-negative")
        if not self.C > 0:
            raise ValueError("balancing constant C must be positive")

    @property
    def alpha0(self) -> float:
        return self.delta**2 * (self.d + 2) ** 2


@dataclass
class AdaptiveResult:
    alphas: np.ndarray
    solutions: list
    k: int
    distances: np.ndarray  # distances[i, j] = ||B_i - B_j||
    C: float
    mu: float
    l: int | None = None
    rate: float | None = None
    bound: float | None = field(default=None)

    @property
    def alpha(self) -> float:
        return float(self.alphas[self.k])

    @property
    def selected(self):
        return self.solutions[self.k]

    def satisfies_rule(self, i: int | None = None) -> bool:
        """Check ``||B_i - B_j|| <= 4 C / mu**j`` for all ``j <= i`` (default ``i = k``)."""
        i = self.k if i is None else i
        j = np.arange(i + 1)
        return bool(np.all(self.distances[i, : i + 1] <= 4.0 * self.C / self.mu**j))


def build_alpha_grid(cfg: AdaptiveConfig) -> np.ndarray:
    """Geometric grid ``mu**(2 i) * delta**2 (d+2)**2``, ``i = 0..N``."""
    a0 = cfg.alpha0
    if not a0 > 0:
        raise ValueError("noise level must be positive to build the grid")
    if cfg.gamma is not None and a0 > cfg.gamma:
        raise ValueError(f"alpha_0 = {a0:.3g} exceeds gamma = {cfg.gamma:.3g}")
    return a0 * cfg.mu ** (2.0 * np.arange(cfg.N + 1))


def _as_vector(item):
    if hasattr(item, "B"):
        item = item.B
    return item


def distance_table(solutions: Sequence) -> np.ndarray:
    """Pairwise distances, Frobenius-L2 for matrix fields, Euclidean for arrays."""
    items = [_as_vector(s) for s in solutions]
    n = len(items)
    out = np.zeros((n, n))
    if isinstance(items[0], MatrixField):
        for i in range(n):
            for j in range(i):
                diff = items[i] - items[j]
                out[i, j] = out[j, i] = np.sqrt(max(frobenius_inner(diff, diff), 0.0))
        return out
    arr = np.array([np.asarray(x, dtype=float).ravel() for x in items])
    diff = arr[:, None, :] - arr[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def select_adaptive(solutions: Sequence, C: float, mu: float) -> AdaptiveResult:
    """Balancing-principle index.

    ``k = max{i : ||B_i - B_j|| <= 4 C / mu**j for j = 0..i}`` with the
    solutions ordered by ascending regularization parameter.
    """
    if len(solutions) == 0:
        raise ValueError("no solutions to select from")
    if not C > 0:
        raise ValueError("C must be positive")
    if not mu > 1:
        raise ValueError("mu must exceed 1")
    dist = distance_table(solutions)
    thresholds = 4.0 * C / mu ** np.arange(len(solutions))
    k = 0
    for i in range(len(solutions)):
        if np.all(dist[i, : i + 1] <= thresholds[: i + 1]):
            k = i
    alphas = np.array([getattr(s, "alpha", np.nan) for s in solutions], dtype=float)
    return AdaptiveResult(alphas, list(solutions), k, dist, float(C), float(mu))


def power_source(nu: float):
    return lambda lam: np.asarray(lam, dtype=float) ** nu


def balancing_index_l(alphas: np.ndarray, rho: float, nu: float, C: float, mu: float) -> int | None:
    """``l = max{i <= N-1 : rho mu**i phi(alpha_i) <= C}`` for ``phi(lam) = lam**nu``.

    Returns ``None`` when no index qualifies.
    """
    alphas = np.asarray(alphas, dtype=float)
    idx = np.arange(alphas.size - 1)
    ok = rho * mu**idx * alphas[:-1] ** nu <= C
    if alphas.size == 1:
        return None
    return int(idx[ok].max()) if np.any(ok) else None


def rate_diagnostic(cfg: AdaptiveConfig) -> tuple[float, float]:
    """``Psi^{-1}(delta)`` and the error bound ``6 mu rho Psi^{-1}(delta)``.

    ``Psi(lam) = rho lam sqrt(phi^{-1}(lam)) / (C (d+2))``; for
    ``phi(lam) = lam**nu`` the inverse is
    ``(delta C (d+2) / rho)**(2 nu / (2 nu + 1))``.
    """
    if cfg.family != "power":
        raise ValueError(f"unsupported source family {cfg.family!r}")
    if cfg.nu is None or cfg.rho is None:
        raise ValueError("rate diagnostic needs nu and rho")
    if not 0 < cfg.nu <= 1:
        raise ValueError("nu must lie in (0, 1]")
    if not cfg.rho > 0:
        raise ValueError("rho must be positive")
    expo = 2.0 * cfg.nu / (2.0 * cfg.nu + 1.0)
    lam = (cfg.delta * cfg.C * (cfg.d + 2) / cfg.rho) ** expo
    return float(lam), float(6.0 * cfg.mu * cfg.rho * lam)


def psi(lam: float, cfg: AdaptiveConfig) -> float:
    """``Psi(lam)`` for the power family (used to check the closed-form inverse)."""
    return float(cfg.rho * lam * np.sqrt(lam ** (1.0 / cfg.nu)) / (cfg.C * (cfg.d + 2)))
