"""Real bounds and polynomial-like restrictions for the unimodal family z^l + c1."""

from __future__ import annotations

from .bounds import K_bound, K_star, K_star_limit, LevelData, cross_ratio_B, cross_ratio_C, measure_space_ratio
from .builder import assemble_polylike, build_omega, filled_julia_membership, verify_containment
from .core import PolynomialFamily, RealInterval
from .errors import PolylikeError
from .geometry import PoincareNeighborhood, intersection_Z
from .search import ParameterQuery, cascade_parameters, fibonacci_parameter, superstable_parameter

__version__ = "0.1.0"

__all__ = [
    "K_bound",
    "K_star",
    "K_star_limit",
    "LevelData",
    "ParameterQuery",
    "PoincareNeighborhood",
    "PolylikeError",
    "PolynomialFamily",
    "RealInterval",
    "assemble_polylike",
    "build_omega",
    "cascade_parameters",
    "cross_ratio_B",
    "cross_ratio_C",
    "fibonacci_parameter",
    "filled_julia_membership",
    "intersection_Z",
    "measure_space_ratio",
    "superstable_parameter",
    "verify_containment",
]
