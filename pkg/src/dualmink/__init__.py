"""Discrete G-invariant dual Minkowski problem: conditions, solver and estimates."""
from .body import BodySpec, dual_curvature_measure, dual_quermassintegral
from .conditions import (
    ConditionError,
    check_classical,
    check_concentration,
    check_mass_inequality,
    equivalence_audit,
)
from .estimators import DualMinkowskiSolver, JohnEllipsoidEstimator
from .group import FiniteGroup, NAMED as NAMED_GROUPS
from .john import BlockEllipsoid, john_ellipsoid
from .measure import DiscreteMeasure, symmetrize
from .solver import SolveConfig, SolveResult, solve, solve_log_with_equality, verify

__version__ = "0.1.0"

__all__ = [
    "BlockEllipsoid", "BodySpec", "ConditionError", "DiscreteMeasure", "DualMinkowskiSolver",
    "FiniteGroup", "JohnEllipsoidEstimator", "NAMED_GROUPS", "SolveConfig", "SolveResult",
    "check_classical", "check_concentration", "check_mass_inequality", "dual_curvature_measure",
    "dual_quermassintegral", "equivalence_audit", "john_ellipsoid", "solve",
    "solve_log_with_equality", "symmetrize", "verify",
]
