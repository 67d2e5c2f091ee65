"""Identification of matrix diffusion coefficients in parabolic equations."""

from .adaptive import AdaptiveConfig, AdaptiveResult, build_alpha_grid, rate_diagnostic, select_adaptive
from .fem import assemble_mass, assemble_stiffness, check_ellipticity, norm
from .fields import MatrixField, ScalarField, SpaceTimeField, uniform_times
from .galerkin import CoeffBasis, build_basis, project, projection_gap
from .linearized import LinearizedOperator, apply_T, apply_T_star, operator_norm_bound, perturbation_bound
from .mesh import Mesh, build_mesh
from .parabolic import (
    ProblemSpec,
    estimate_stability_constant,
    solve_backward,
    solve_div_form,
    solve_forward,
)
from .smoothing import clement_smooth, modified_noise_level, smooth_spacetime
from .tikhonov import NormalSystem, TikhonovSolution, assemble_normal_system, solve_at_alpha, solve_path
from .uniqueness import AnalyticProvider, UniquenessReport, uniqueness_determinant

__all__ = [
    "Mesh",
    "build_mesh",
    "ScalarField",
    "SpaceTimeField",
    "MatrixField",
    "uniform_times",
    "assemble_mass",
    "assemble_stiffness",
    "check_ellipticity",
    "norm",
    "ProblemSpec",
    "solve_forward",
    "solve_div_form",
    "solve_backward",
    "estimate_stability_constant",
    "LinearizedOperator",
    "apply_T",
    "apply_T_star",
    "operator_norm_bound",
    "perturbation_bound",
    "CoeffBasis",
    "build_basis",
    "project",
    "projection_gap",
    "NormalSystem",
    "TikhonovSolution",
    "assemble_normal_system",
    "solve_at_alpha",
    "solve_path",
    "AdaptiveConfig",
    "AdaptiveResult",
    "build_alpha_grid",
    "select_adaptive",
    "rate_diagnostic",
    "clement_smooth",
    "smooth_spacetime",
    "modified_noise_level",
    "AnalyticProvider",
    "UniquenessReport",
    "uniqueness_determinant",
]
