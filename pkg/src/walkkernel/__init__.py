"""Exact kernel-method solver for weighted Kreweras and reverse Kreweras
quarter-plane walks, checked against brute-force enumeration."""

from .models import ModelSpec, build_model, model_spec
from .pipeline import Solution, solve_model
from .series import LaurentPoly, PuiseuxSeries, RootSeries, arith, invert, puiseux_roots, sqrt, substitute_x, x_part
from .walks import WalkTable, boundary_series, enumerate_walks, functional_equation_residual

__all__ = [
    "LaurentPoly",
    "ModelSpec",
    "PuiseuxSeries",
    "RootSeries",
    "Solution",
    "WalkTable",
    "arith",
    "boundary_series",
    "build_model",
    "enumerate_walks",
    "functional_equation_residual",
    "invert",
    "model_spec",
    "puiseux_roots",
    "solve_model",
    "sqrt",
    "substitute_x",
    "x_part",
]
