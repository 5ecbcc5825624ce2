"""Maximal admissible sets and a reference governor with a dynamic overshoot constraint."""

__version__ = "0.1.0"

from .governor import GovernorDecision, GovernorState, govern_step, rg_dc_kappa, rg_static_kappa
from .mas import (
    ConstraintSet,
    DiscreteLtiSystem,
    DynamicMasPair,
    MasConstructionError,
    MasRepresentation,
    NonTerminationError,
    UncertainSystem,
    build_dynamic_mas_pair,
    build_robust_dynamic_pair,
    build_robust_mas_polytopic,
    build_static_mas,
    select_dynamic_mas,
    shrink_for_disturbance,
)
from .numerics import LpProblem, LpResult, LpSolverError, solve_lp, zoh_discretize
from .simkit import ReferenceSignal, SimulationTrace, pll_system, simulate

__all__ = [
    "ConstraintSet", "DiscreteLtiSystem", "DynamicMasPair", "GovernorDecision", "GovernorState",
    "LpProblem", "LpResult", "LpSolverError", "MasConstructionError", "MasRepresentation",
    "NonTerminationError", "ReferenceSignal", "SimulationTrace", "UncertainSystem",
    "build_dynamic_mas_pair", "build_robust_dynamic_pair", "build_robust_mas_polytopic",
    "build_static_mas", "govern_step", "pll_system", "rg_dc_kappa", "rg_static_kappa",
    "select_dynamic_mas", "shrink_for_disturbance", "simulate", "solve_lp", "zoh_discretize",
]
