"""End-to-end identification runs on manufactured problems.

Stages: truth forward solve, noise, optional smoothing, reference solve with
the base guess ``A0``, operator and normal system at the data, Tikhonov path,
balancing choice, reconstruction ``A0 + B~`` and reporting.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..adaptive import AdaptiveConfig, build_alpha_grid, select_adaptive
from ..fem import check_ellipticity, norm
from ..fields import MatrixField, SpaceTimeField, uniform_times
from ..galerkin import build_basis, projection_gap
from ..linearized import LinearizedOperator, operator_norm_bound
from ..mesh import Mesh, build_mesh
from ..parabolic import ProblemSpec, StabilityEstimate, estimate_stability_constant, solve_forward
from ..smoothing import modified_noise_level, smooth_spacetime
from ..tikhonov import assemble_normal_system, solve_path
from ..uniqueness import uniqueness_determinant
from .config import ExperimentConfig
from .noise import make_noisy
from .profiles import make_coefficient, make_profile, make_source

CSV_COLUMNS = ("delta", "h", "dt", "alpha_k", "error", "residual", "eps_n", "delta_h", "runtime", "seed", "k")


class PipelineError(RuntimeError):
    """Failure inside a named pipeline stage."""

    def __init__(self, stage: str, message):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


@contextmanager
def stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, f"{type(exc).__name__}: {exc}") from exc


@dataclass(eq=False)
class Problem:
    mesh: Mesh
    times: np.ndarray
    A: MatrixField
    A0: MatrixField
    source: object
    initial: np.ndarray
    theta: float = 1.0
    _stability: StabilityEstimate | None = field(default=None, repr=False)

    @property
    def B(self) -> MatrixField:
        return self.A - self.A0

    def stability(self) -> StabilityEstimate:
        if self._stability is None:
            self._stability = estimate_stability_constant(self.mesh, self.times, self.A0, battery=4,
                                                          theta=self.theta)
        return self._stability


def build_problem(cfg: ExperimentConfig, resolution: int | None = None) -> Problem:
    """Mesh, time grid and coefficients; rejects asymmetric or non-elliptic input."""
    n = cfg.resolution if resolution is None else resolution
    mesh = build_mesh(cfg.bounds if cfg.dim == 2 else cfg.bounds[0], n)
    times = uniform_times(cfg.tau, cfg.steps)
    A = make_coefficient(mesh, cfg.truth)
    A0 = make_coefficient(mesh, cfg.guess)
    for name, coeff in (("truth", A), ("guess", A0)):
        q = check_ellipticity(coeff)
        if not q > 0:
            raise ValueError(f"{name} coefficient is not uniformly elliptic (min eigenvalue {q:.3g})")
    initial = make_profile(cfg.initial)(mesh.nodes)
    return Problem(mesh, times, A, A0, make_source(cfg.source), initial, cfg.theta)


def forward(problem: Problem, coeff: MatrixField) -> SpaceTimeField:
    spec = ProblemSpec(problem.mesh, problem.times, coeff, source=problem.source,
                       initial=problem.initial, theta=problem.theta)
    return solve_forward(spec)


def default_uniqueness_times(tau: float, d: int) -> list:
    if d == 1:
        return [tau / 4, 3 * tau / 4]
    count = d * d * (d + 1)
    return [tau * (i + 1) / (count + 1) for i in range(count)]


@dataclass(eq=False)
class RunRecord:
    """Outcome of one identification at one noise level and seed."""

    delta: float
    seed: int
    h: float
    dt: float
    k: int
    alpha_k: float
    error: float
    residual: float
    eps_n: float
    delta_h: float | None
    runtime: float
    gamma: float | None
    alphas: list
    errors_on_grid: list
    uniqueness: dict
    B_tilde: MatrixField = field(repr=False)
    A_tilde: MatrixField = field(repr=False)
    level: int = 0

    @property
    def eps_shortfall(self) -> bool:
        """True when the projection-gap estimate is not below the noise level."""
        return not self.eps_n < (self.delta_h if self.delta_h is not None else self.delta)

    def row(self) -> dict:
        return {
            "delta": self.delta, "h": self.h, "dt": self.dt, "alpha_k": self.alpha_k,
            "error": self.error, "residual": self.residual, "eps_n": self.eps_n,
            "delta_h": float("nan") if self.delta_h is None else self.delta_h,
            "runtime": self.runtime, "seed": self.seed, "k": self.k,
        }

    def summary(self) -> dict:
        out = self.row()
        out["delta_h"] = self.delta_h
        out.update(level=self.level, gamma=self.gamma, eps_shortfall=self.eps_shortfall,
                   alphas=self.alphas, errors_on_grid=self.errors_on_grid,
                   uniqueness=self.uniqueness)
        return out


@dataclass(eq=False)
class ReconstructionReport:
    runs: list
    provenance: dict
    problem: Problem = field(repr=False)
    u: SpaceTimeField | None = field(default=None, repr=False)
    v0: SpaceTimeField | None = field(default=None, repr=False)

    def medians(self) -> dict:
        """Median selected error per noise level."""
        by: dict = {}
        for r in self.runs:
            by.setdefault(r.delta, []).append(r.error)
        return {d: float(np.median(v)) for d, v in sorted(by.items(), reverse=True)}

    def to_json(self) -> dict:
        return {
            "runs": [r.summary() for r in self.runs],
            "median_error": {repr(d): e for d, e in self.medians().items()},
            "provenance": self.provenance,
        }


def identify(problem: Problem, cfg: ExperimentConfig, u: SpaceTimeField, v0: SpaceTimeField,
             delta: float, seed: int) -> RunRecord:
    """Stages 2-9 for a single noise level and seed."""
    t0 = time.perf_counter()
    mesh = problem.mesh
    with stage("noise"):
        noisy = make_noisy(u, delta, seed, cfg.noise_model)
    delta_h = None
    data, level_delta = noisy, delta
    if cfg.smoothing:
        with stage("smoothing"):
            data = smooth_spacetime(noisy)
            delta_h = modified_noise_level(delta, mesh.h).delta_h
            level_delta = delta_h
    with stage("operator"):
        op = LinearizedOperator(problem.A0, data, stability=problem.stability() if cfg.check_gamma else 1.0,
                                theta=problem.theta)
        gamma = operator_norm_bound(op) ** 2 if cfg.check_gamma else None
    with stage("galerkin"):
        basis = build_basis(mesh, cfg.level)
        eps_n = projection_gap(op, basis, samples=cfg.gap_samples, seed=seed)
    with stage("normal_system"):
        system = assemble_normal_system(op, basis, data - v0)
    with stage("tikhonov"):
        acfg = AdaptiveConfig(delta=level_delta, mu=cfg.mu, N=cfg.N, d=mesh.dim, C=cfg.C, gamma=gamma)
        alphas = build_alpha_grid(acfg)
        path = solve_path(system, alphas)
    with stage("adaptive"):
        res = select_adaptive(path, cfg.C, cfg.mu)
    with stage("report"):
        chosen = res.selected
        A_tilde = problem.A0 + chosen.B
        error = norm(problem.A - A_tilde, "frobenius_L2")
        grid_err = [norm(problem.B - s.B, "frobenius_L2") for s in path]
    with stage("uniqueness"):
        times = cfg.uniqueness_times or default_uniqueness_times(problem.times[-1], mesh.dim)
        uniq = uniqueness_determinant(data, times).summary()
    runtime = time.perf_counter() - t0 if cfg.timing else 0.0
    return RunRecord(
        delta=float(delta), seed=int(seed), h=float(mesh.h), dt=float(problem.times[1] - problem.times[0]),
        k=int(res.k), alpha_k=float(res.alpha), error=float(error), residual=float(chosen.residual_norm),
        eps_n=float(eps_n), delta_h=delta_h, runtime=float(runtime), gamma=gamma,
        alphas=[float(a) for a in alphas], errors_on_grid=grid_err, uniqueness=uniq,
        B_tilde=chosen.B, A_tilde=A_tilde, level=cfg.level,
    )


def _provenance(cfg: ExperimentConfig, problem: Problem) -> dict:
    from importlib.metadata import PackageNotFoundError, version

    try:
        pkg = version("artifact")
    except PackageNotFoundError:  # pragma: no cover
        pkg = "unknown"
    mesh = problem.mesh
    return {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "mesh": {"dim": mesh.dim, "shape": list(mesh.shape), "n_nodes": mesh.n_nodes,
                 "n_elements": mesh.n_elements, "h": mesh.h},
        "time": {"tau": float(problem.times[-1]), "steps": int(problem.times.size - 1)},
        "stability_C0": problem._stability.C0 if problem._stability is not None else None,
        "versions": {"package": pkg, "numpy": np.__version__, "python": platform.python_version()},
    }


def run_pipeline(cfg: ExperimentConfig, write: bool = True, threads: int = 1,
                 resolution: int | None = None) -> ReconstructionReport:
    """Full identification for every configured noise level and repeat.

    Seeds are ``cfg.seed + r`` for repeat ``r``, shared across noise levels.
    With ``write`` the report, table and fields go to ``cfg.out``, which
    must be set; this is checked before any solve.
    """
    if write and not cfg.out:
        raise PipelineError("config", "missing output path")
    with stage("setup"):
        problem = build_problem(cfg, resolution)
    with stage("forward"):
        u = forward(problem, problem.A)
    with stage("reference"):
        v0 = forward(problem, problem.A0)
    if cfg.check_gamma:
        with stage("stability"):
            problem.stability()
    jobs = [(d, cfg.seed + r) for d in cfg.deltas for r in range(cfg.repeats)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(lambda j: identify(problem, cfg, u, v0, *j), jobs))
    else:
        runs = [identify(problem, cfg, u, v0, *j) for j in jobs]
    report = ReconstructionReport(runs, _provenance(cfg, problem), problem, u, v0)
    if write:
        with stage("output"):
            write_outputs(report, cfg.out)
    return report


# ----------------------------------------------------------------- output

def format_table(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([repr(float(r[c])) if c not in ("seed", "k") else str(int(r[c])) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_grid(path, array) -> None:
    """Plain-text grid: a header line with the dimensions, then row-major values.

    Arrays with more than two axes are written as rows of the last axis.
    """
    arr = np.asarray(array, dtype=float)
    with open(path, "w") as fh:
        fh.write(" ".join(str(s) for s in arr.shape) + "\n")
        for row in arr.reshape(-1, arr.shape[-1]):
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_grid(path) -> np.ndarray:
    with open(path) as fh:
        shape = tuple(int(s) for s in fh.readline().split())
        vals = np.array(fh.read().split(), dtype=float)
    return vals.reshape(shape)


def element_grid(mesh: Mesh, vals: np.ndarray) -> np.ndarray:
    """Element values as (1, nx) in 1D or (2, ny, nx) in 2D (lower, upper triangles)."""
    if mesh.dim == 1:
        return vals.reshape(1, -1)
    nx, ny = mesh.shape
    return vals.reshape(2, ny, nx)


def cell_grid(mesh: Mesh, level: int, vals: np.ndarray) -> np.ndarray:
    """Cell means on the dyadic partition, as (1, k) in 1D or (k, k) in 2D."""
    cells = mesh.locate_cells(level)
    k = 2**level
    n = k**mesh.dim
    vol = np.bincount(cells, weights=mesh.volumes, minlength=n)
    means = np.bincount(cells, weights=vals * mesh.volumes, minlength=n) / vol
    return means.reshape(1, k) if mesh.dim == 1 else means.reshape(k, k)


def write_outputs(report: ReconstructionReport, out) -> None:
    out = Path(out)
    fields = out / "fields"
    fields.mkdir(parents=True, exist_ok=True)
    mesh = report.problem.mesh
    d = mesh.dim
    A = report.problem.A.element_values()
    A0 = report.problem.A0.element_values()
    for i in range(d):
        for j in range(d):
            write_grid(fields / f"A_true_{i + 1}{j + 1}.txt", element_grid(mesh, A[:, i, j]))
            write_grid(fields / f"A0_{i + 1}{j + 1}.txt", element_grid(mesh, A0[:, i, j]))
    for r, run in enumerate(report.runs):
        At = run.A_tilde.element_values()
        for i in range(d):
            for j in range(d):
                write_grid(fields / f"run{r:03d}_A_tilde_{i + 1}{j + 1}.txt",
                           cell_grid(mesh, run.level, At[:, i, j]))
    (out / "table.csv").write_text(format_table([r.row() for r in report.runs]))
    (out / "report.json").write_text(json.dumps(report.to_json(), indent=2, sort_keys=True, default=_json_default))


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
