"""Numerical complex Finsler geometry: jets, adapted frames, the pullback
connection, curvature and torsion, geodesics and Jacobi fields."""

from .connection import (ProjPoint, ProjTangent, connection_coefficients, covariant_derivative_D,
                         covariant_derivative_nabla, horizontal_lift)
from .curvature import curvature, square_holonomy, torsion, weakly_kahler_check
from .dsl import parse_metric, pretty
from .errors import (ConfigError, ConvergenceError, DSLError, FinslerError, NotPseudoconvexError,
                     OutsideDomainError, SingularMetricError)
from .frames import adapted_frame, pseudoconvexity_scan
from .geodesics import geodesic_bvp, integrate_geodesic, integrate_jacobi
from .metric import BUILTINS, FinslerMetric, builtin_metric, homogeneity_check, metric_from_expression
from .tensors import fd_oracle, jet, vertical_tensors
from .verify import run_verify

__version__ = "0.1.0"

__all__ = [
    "BUILTINS", "ConfigError", "ConvergenceError", "DSLError", "FinslerError", "FinslerMetric",
    "NotPseudoconvexError", "OutsideDomainError", "ProjPoint", "ProjTangent", "SingularMetricError",
    "adapted_frame", "builtin_metric", "connection_coefficients", "covariant_derivative_D",
    "covariant_derivative_nabla", "curvature", "fd_oracle", "geodesic_bvp", "homogeneity_check",
    "horizontal_lift", "integrate_geodesic", "integrate_jacobi", "jet", "metric_from_expression",
    "parse_metric", "pretty", "pseudoconvexity_scan", "run_verify", "square_holonomy", "torsion",
    "vertical_tensors", "weakly_kahler_check",
]
