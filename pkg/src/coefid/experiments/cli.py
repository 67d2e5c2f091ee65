"""Command-line entry point: ``run``, ``sweep``, ``adjoint-test`` and ``uniqueness``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .pipeline import PipelineError, build_problem, default_uniqueness_times, forward, run_pipeline
from .study import convergence_study


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    kw = {}
    if getattr(args, "out", None):
        kw["out"] = args.out
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    return cfg.replace(**kw) if kw else cfg


def _write_json(out, payload) -> None:
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True))


def cmd_run(args) -> int:
    cfg = _config(args)
    report = run_pipeline(cfg, write=True, threads=args.threads)
    for d, e in report.medians().items():
        print(f"delta={d:.3g}  median error={e:.6g}")
    print(f"wrote {cfg.out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    if args.kind == "h":
        sweep = cfg.resolutions or [cfg.resolution]
    else:
        sweep = cfg.deltas
    res = convergence_study(cfg, sweep, kind=args.kind, threads=args.threads)
    for v, e in zip(res.sweep, res.summary["median_error"]):
        print(f"{args.kind}={v:.4g}  median error={e:.6g}")
    print(f"slope={res.summary['slope_error']}")
    return 0


def cmd_adjoint(args) -> int:
    from ..fem import norm, frobenius_inner, spacetime_inner
    from ..fields import MatrixField, SpaceTimeField
    from ..linearized import LinearizedOperator, apply_T, apply_T_star

    cfg = _config(args)
    problem = build_problem(cfg)
    u = forward(problem, problem.A)
    op = LinearizedOperator(problem.A0, u, stability=1.0, theta=problem.theta)
    rng = np.random.default_rng(cfg.seed)
    mesh, d = problem.mesh, problem.mesh.dim
    worst = 0.0
    for _ in range(args.pairs):
        C = MatrixField(mesh, rng.standard_normal((d, d, mesh.n_elements)))
        phi = SpaceTimeField(mesh, problem.times, rng.standard_normal((problem.times.size, mesh.n_nodes)))
        lhs = spacetime_inner(apply_T(op, C), phi)
        rhs = frobenius_inner(C, apply_T_star(op, phi))
        worst = max(worst, abs(lhs - rhs) / (norm(C, "frobenius_L2") * norm(phi, "spacetime_L2")))
    print(f"max relative adjoint mismatch over {args.pairs} pairs: {worst:.3e}")
    _write_json(args.out, {"pairs": args.pairs, "max_mismatch": worst, "h": mesh.h,
                           "steps": int(problem.times.size - 1)})
    return 0


def cmd_uniqueness(args) -> int:
    from ..uniqueness import uniqueness_determinant

    cfg = _config(args)
    problem = build_problem(cfg)
    u = forward(problem, problem.A)
    times = cfg.uniqueness_times or default_uniqueness_times(cfg.tau, problem.mesh.dim)
    rep = uniqueness_determinant(u, times)
    summary = rep.summary()
    print(json.dumps(summary, indent=2))
    _write_json(args.out, summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coefid", description="Diffusion-matrix identification experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, threads=True):
        sp.add_argument("--config", help="INI configuration file (defaults: 1D bump study)")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="base noise seed (non-negative integer)")
        if threads:
            sp.add_argument("--threads", type=int, default=1, help="worker threads for independent runs")

    common(sub.add_parser("run", help="single identification pipeline"))
    sw = sub.add_parser("sweep", help="convergence study over noise level or mesh size")
    common(sw)
    sw.add_argument("--kind", choices=("delta", "h"), default="delta")
    adj = sub.add_parser("adjoint-test", help="check <T C, phi> = <C, T* phi> on random pairs")
    common(adj, threads=False)
    adj.add_argument("--pairs", type=int, default=20)
    common(sub.add_parser("uniqueness", help="determinant diagnostic on the forward solution"), threads=False)
    return p


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "adjoint-test": cmd_adjoint, "uniqueness": cmd_uniqueness}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return 2
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
