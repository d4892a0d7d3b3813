"""Continuous DR-submodular maximization over down-closed convex sets."""

from .constraints import (
    BoxConstraint,
    CardinalityPolytope,
    DownClosedPolytope,
    UnsupportedOperation,
    derive_upper_bound,
)
from .core import TOL, Box, DimensionError, DomainError, Objective, ObjectiveFlags, join, meet
from .instances import Instance, gen_quadratic_instance, gen_softmax_instance
from .solvers import (
    SolverConfig,
    SolverError,
    Trajectory,
    non_stationarity,
    nonconvex_fw,
    pga,
    shrunken_fw,
    solve,
    submodular_fw,
    two_phase,
)

__version__ = "0.1.0"

__all__ = [
    "TOL",
    "Box",
    "BoxConstraint",
    "CardinalityPolytope",
    "DimensionError",
    "DomainError",
    "DownClosedPolytope",
    "Instance",
    "Objective",
    "ObjectiveFlags",
    "SolverConfig",
    "SolverError",
    "Trajectory",
    "UnsupportedOperation",
    "derive_upper_bound",
    "gen_quadratic_instance",
    "gen_softmax_instance",
    "join",
    "meet",
    "non_stationarity",
    "nonconvex_fw",
    "pga",
    "shrunken_fw",
    "solve",
    "submodular_fw",
    "two_phase",
]
