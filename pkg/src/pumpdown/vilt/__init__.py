"""V-infinity leveraging legs: the optimal leg solver and its database."""

__all__ = [
    "BelowFamilyFloor",
    "DatabaseFormatError",
    "DeltaVCapExceeded",
    "FamilyTable",
    "LegEstimate",
    "LegProblem",
    "OptimalLeg",
    "OutOfSpan",
    "SeedInfeasible",
    "SolverDiverged",
    "ViltDatabase",
    "ViltRecord",
    "build_database",
    "dumps_database",
    "interpolate",
    "leg_from_departure",
    "read_database",
    "solve_record",
    "solve_leg",
    "velocity_grid",
    "write_database",
]

from ._tpbvp import (
    LegProblem,
    OptimalLeg,
    SeedInfeasible,
    SolverDiverged,
    solve_leg,
)
from .database import (
    BelowFamilyFloor,
    DatabaseFormatError,
    DeltaVCapExceeded,
    FamilyTable,
    LegEstimate,
    OutOfSpan,
    ViltDatabase,
    ViltRecord,
    build_database,
    dumps_database,
    interpolate,
    leg_from_departure,
    read_database,
    solve_record,
    velocity_grid,
    write_database,
)
