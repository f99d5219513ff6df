"""Reproducing-kernel collocation for the linear peridynamic Navier equation."""

__version__ = "0.1.0"

from .assembly import SolveReport, SparseSystem, assemble, l2_error, solve
from .bench import ManufacturedCase, run_convergence, solve_case, truncation_study
from .config import RunConfig, parse_config
from .estimator import RKCollocationSolver
from .exceptions import *  # noqa: F401,F403
from .grid import DomainBox, GridSpec, NodeClass, build_grid, classify_node, unit_square
from .kernel import RadialKernel, compute_moments
from .nlops import Material, TrialField, apply_navier, local_navier
from .quad import QuadSet, build_quadset, polar_rule, solve_weights
from .rkbasis import cubic_bspline, quasi_interpolant, shape_value
from .symbols import lattice_symbol, local_symbol, navier_symbol, scalar_symbols, stability_scan

__all__ = [
    "RKCollocationSolver",
    "DomainBox",
    "GridSpec",
    "NodeClass",
    "build_grid",
    "classify_node",
    "unit_square",
    "RadialKernel",
    "compute_moments",
    "Material",
    "TrialField",
    "apply_navier",
    "local_navier",
    "QuadSet",
    "build_quadset",
    "polar_rule",
    "solve_weights",
    "cubic_bspline",
    "quasi_interpolant",
    "shape_value",
    "SolveReport",
    "SparseSystem",
    "assemble",
    "solve",
    "l2_error",
    "ManufacturedCase",
    "run_convergence",
    "solve_case",
    "truncation_study",
    "RunConfig",
    "parse_config",
    "lattice_symbol",
    "local_symbol",
    "navier_symbol",
    "scalar_symbols",
    "stability_scan",
]
