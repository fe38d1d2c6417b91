"""Verification toolkit for thin-gap singularities of the Lame system.

Symbolic side: exact construction of the auxiliary neck families and
machine checks of their defining identities, residual orders, and degree
structure.  Numeric side: a 2D quadratic-element solver on the two-disk
geometry with rigid-inclusion constraints, driving epsilon-sweep studies
of blow-up rates and constant asymptotics.
"""

from .coeffs import LAM, MU, ONE, ParamPoly, RationalCoeff, parse
from .neck import DIM2, DIM3, DimConfig, NeckField, NeckScalar, green_solve
from .families import AuxFamily, build_family, lame_apply, rigid_basis
from .checks import CheckReport, run_suite

__version__ = "0.1.0"

__all__ = [
    "AuxFamily",
    "CheckReport",
    "DIM2",
    "DIM3",
    "DimConfig",
    "LAM",
    "MU",
    "NeckField",
    "NeckScalar",
    "ONE",
    "ParamPoly",
    "RationalCoeff",
    "build_family",
    "green_solve",
    "lame_apply",
    "parse",
    "rigid_basis",
    "run_suite",
    "__version__",
]
