"""Multi-moon tour search: branching, Pareto pruning, handoffs, tables."""

__all__ = [
    "CompletedTour",
    "EmptyFront",
    "ExitState",
    "FlybyRecord",
    "InconsistentChain",
    "MoonPhase",
    "ObjectiveVector",
    "ParetoArchive",
    "PathNode",
    "RowKind",
    "SearchSettings",
    "Tour",
    "TourResult",
    "branch",
    "eoi_delta_v",
    "exit_feasible",
    "pareto_prune",
    "reconstruct_tour",
    "run_full_tour",
    "run_moon_tour",
]

from .nodes import CompletedTour, ExitState, PathNode
from .pareto import ObjectiveVector, ParetoArchive, pareto_prune
from .search import (
    EmptyFront,
    MoonPhase,
    SearchSettings,
    TourResult,
    branch,
    eoi_delta_v,
    exit_feasible,
    run_full_tour,
    run_moon_tour,
)
from .tours import (
    FlybyRecord,
    InconsistentChain,
    RowKind,
    Tour,
    reconstruct_tour,
)
