"""Isogeometric analysis on tensor-product B-spline spaces with Galerkin or
piece-wise constant (indicator) test functions."""

from .bspline import BasisSpec, make_uniform_clamped
from .fields import Field
from .problems import ProblemConfig, l2_project, laplace_solve, bitmap_project
from .testspace import PwcTestSet, default_pwc

__all__ = ["BasisSpec", "Field", "ProblemConfig", "PwcTestSet", "bitmap_project",
           "default_pwc", "l2_project", "laplace_solve", "make_uniform_clamped"]
__version__ = "0.1.0"
