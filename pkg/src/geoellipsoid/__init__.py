"""Ellipsoid-like method for geodesically convex optimization in constant curvature."""
from .ellipsoid import Ellipsoid, central_cut_update
from .geodesic_map import CutKind, EuclideanCut, GeodesicMap
from .manifold import Kind, ManifoldSpec, TangentFrame, hyperbolic, spherical
from .problems import DistanceTo, GeometricMedian, MaxDistance, ProblemInstance
from .solver import SolveResult, SolverConfig, solve, solve_subproblem, zeta

__all__ = [
    "CutKind", "DistanceTo", "Ellipsoid", "EuclideanCut", "GeodesicMap", "GeometricMedian",
    "Kind", "ManifoldSpec", "MaxDistance", "ProblemInstance", "SolveResult", "SolverConfig",
    "TangentFrame", "central_cut_update", "hyperbolic", "solve", "solve_subproblem",
    "spherical", "zeta",
]
__version__ = "0.1.0"
