"""Numerical toolkit for an upper bound on the Dirichlet fundamental gap of
domains in surfaces with two-sided curvature bounds."""

from .config import Tolerances, load_tolerances
from .gap_bound import GapBoundReport, evaluate_ball, evaluate_mesh, evaluate_warped
from .spaceform import CurvaturePair, Spaceform

__all__ = [
    "CurvaturePair",
    "GapBoundReport",
    "Spaceform",
    "Tolerances",
    "evaluate_ball",
    "evaluate_mesh",
    "evaluate_warped",
    "load_tolerances",
]
__version__ = "0.1.0"
