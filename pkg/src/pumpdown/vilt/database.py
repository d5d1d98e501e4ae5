"""Leveraging-transfer database: records, tables, CSV files, linear model."""

__all__ = [
    # Exceptions.
    "BelowFamilyFloor",
    "DatabaseFormatError",
    "DeltaVCapExceeded",
    "OutOfSpan",
    # Types.
    "FamilyTable",
    "LegEstimate",
    "ViltDatabase",
    "ViltRecord",
    # Functionalities.
    "COLUMNS",
    "build_database",
    "dumps_database",
    "interpolate",
    "leg_from_departure",
    "read_database",
    "solve_record",
    "velocity_grid",
    "write_database",
]

import csv
import dataclasses
import io
import logging
import math
import pathlib
import typing

import numpy

from .. import _parallel
from ..astro import MOON_NAMES, MoonParams, SearchBounds, SystemModel
from ..resonance import (
    ResonanceFamily,
    enumerate_families,
    feasible_vinf_range,
)
from ._tpbvp import LegProblem, SeedInfeasible, SolverDiverged, solve_leg


logger = logging.getLogger(__name__)


COLUMNS = (
    "moon",
    "M",
    "N",
    "p",
    "q",
    "vinf_mps",
    "tof_days",
    "alpha_deg",
    "dtof_dDV_days_per_mps",
    "dvinfdep_dDV",
    "dvinfarr_dDV",
    "dalphadep_dDV_deg_per_mps",
    "dalphaarr_dDV_deg_per_mps",
    "d2tof_dDV2_days_per_mps2",
)

DEFAULT_PERTURBATION = 5.0  # m/s

DEFAULT_DV_CAP = 100.0  # m/s

# Tolerance when matching a stored speed back onto the grid.
_GRID_MATCH = 1e-6


@dataclasses.dataclass()
class OutOfSpan(Exception):
    family: ResonanceFamily
    vinf: float


@dataclasses.dataclass()
class DeltaVCapExceeded(Exception):
    dv: float
    cap: float


@dataclasses.dataclass()
class BelowFamilyFloor(Exception):
    vinf_arr: float
    floor: float


@dataclasses.dataclass()
class DatabaseFormatError(Exception):
    path: pathlib.Path
    line: int
    reason: str


@dataclasses.dataclass(frozen=True)
class ViltRecord:
    """Ballistic leg of a family at ``vinf`` plus delta-V sensitivities.

    ``alpha`` is the unsigned ballistic pump angle. Derivatives are taken
    with respect to the signed leg delta-V; ``d2tof`` is the second-order
    ToF coefficient, zero when only one perturbed leg was solved.
    """

    moon: str
    family: ResonanceFamily
    vinf: float
    tof: float
    alpha: float
    dtof: float
    dvinf_dep: float
    dvinf_arr: float
    dalpha_dep: float
    dalpha_arr: float
    d2tof: float = 0.0

    def __post_init__(self):
        if not self.dvinf_dep > 0.0 or not self.dvinf_arr < 0.0:
            raise ValueError(
                f"bad V-infinity sensitivities for {self.family.label} at "
                f"{self.vinf}: {self.dvinf_dep}, {self.dvinf_arr}"
            )

    def values(self) -> typing.Tuple[float, ...]:
        """The continuous fields, in CSV column order."""
        return (
            self.vinf,
            self.tof,
            self.alpha,
            self.dtof,
            self.dvinf_dep,
            self.dvinf_arr,
            self.dalpha_dep,
            self.dalpha_arr,
            self.d2tof,
        )


def _linearised(source, required_vinf_dep):
    """Leg fields ``(dv, vinf_arr, alpha_dep, alpha_arr, tof)`` departing at
    ``required_vinf_dep``, from a record or elementwise from a table.
    """
    dv = (required_vinf_dep - source.vinf) / source.dvinf_dep
    return (
        dv,
        source.vinf + source.dvinf_arr * dv,
        source.alpha + source.dalpha_dep * dv,
        source.alpha + source.dalpha_arr * dv,
        source.tof + (source.dtof + source.d2tof * dv) * dv,
    )


def velocity_grid(vmin: float, vmax: float, step: float) -> numpy.ndarray:
    """Grid from ``vmin`` by ``step``, always closed by ``vmax``."""
    if not step > 0.0:
        raise ValueError(f"grid step must be positive, got {step!r}")
    grid = numpy.arange(vmin, vmax, step, dtype=float)
    if grid.size and vmax - grid[-1] <= _GRID_MATCH:
        grid = grid[:-1]
    return numpy.append(grid, vmax)


class FamilyTable:
    """Records of one family ordered by V-infinity.

    Interpolation is allowed only between records on adjacent grid points;
    a dropped record leaves a gap that cannot be crossed.
    """

    def __init__(
        self,
        family: ResonanceFamily,
        records: typing.Sequence[ViltRecord],
        grid_index: typing.Sequence[int],
        floor: float,
    ) -> None:
        order = sorted(range(len(records)), key=lambda i: records[i].vinf)
        self.family = family
        self.records = tuple(records[i] for i in order)
        self.grid_index = numpy.array(
            [grid_index[i] for i in order], dtype=int
        )
        self.floor = floor
        values = numpy.array(
            [r.values() for r in self.records], dtype=float
        ).reshape(-1, len(COLUMNS) - 5)
        (
            self.vinf,
            self.tof,
            self.alpha,
            self.dtof,
            self.dvinf_dep,
            self.dvinf_arr,
            self.dalpha_dep,
            self.dalpha_arr,
            self.d2tof,
        ) = values.T
        # Segment i joins records i and i + 1.
        self.linked = numpy.diff(self.grid_index) == 1
        for array in (self.vinf, self.grid_index, self.linked):
            array.setflags(write=False)

    def __len__(self) -> int:
        return len(self.records)

    def __repr__(self) -> str:
        return f"<FamilyTable {self.family.label} ({len(self)} records)>"

    def span(self) -> typing.Tuple[float, float]:
        if not self.records:
            return (math.nan, math.nan)
        return (self.records[0].vinf, self.records[-1].vinf)

    def legs(self, required_vinf_dep: float) -> numpy.ndarray:
        """Linearised legs of every record, one column per record.

        Rows are delta-V, arrival V-infinity, departure and arrival pump
        angles, and ToF, as in :func:`leg_from_departure`.
        """
        return numpy.stack(_linearised(self, required_vinf_dep))

    def interpolate(self, vinf: float) -> ViltRecord:
        i = int(numpy.searchsorted(self.vinf, vinf))
        if i < len(self.records) and self.vinf[i] == vinf:
            return self.records[i]
        if i == 0 or i == len(self.records) or not self.linked[i - 1]:
            raise OutOfSpan(self.family, vinf)
        lo, hi = self.records[i - 1], self.records[i]
        w = (vinf - lo.vinf) / (hi.vinf - lo.vinf)
        blended = [
            a + w * (b - a) for a, b in zip(lo.values(), hi.values())
        ]
        return ViltRecord(lo.moon, self.family, vinf, *blended[1:])


@dataclasses.dataclass(frozen=True)
class ViltDatabase:
    moon: str
    bounds: SearchBounds
    step: float
    tables: typing.Tuple[FamilyTable, ...]

    def __post_init__(self):
        bounds = self.bounds
        grid = velocity_grid(bounds.vinf_min, bounds.vinf_max, self.step)
        for table in self.tables:
            if table.family.m > self.bounds.max_m:
                raise ValueError(f"{table.family.label} exceeds max M")
            if numpy.any(numpy.diff(table.vinf) <= 0.0):
                raise ValueError(f"{table.family.label}: grid not increasing")
            if len(table) and not numpy.allclose(
                table.vinf, grid[table.grid_index], rtol=0.0, atol=1e-6
            ):
                raise ValueError(f"{table.family.label}: records off grid")

    @property
    def families(self) -> typing.List[ResonanceFamily]:
        return [t.family for t in self.tables]

    def table(self, family: ResonanceFamily) -> FamilyTable:
        for t in self.tables:
            if t.family == family:
                return t
        raise KeyError(family)

    def records(self) -> typing.Iterator[ViltRecord]:
        for table in self.tables:
            yield from table.records

    def __len__(self) -> int:
        return sum(len(t) for t in self.tables)


def interpolate(
    db: ViltDatabase, family: ResonanceFamily, vinf: float
) -> ViltRecord:
    """Piecewise-linear record of ``family`` at ``vinf``; exact on the grid."""
    try:
        table = db.table(family)
    except KeyError:
        raise OutOfSpan(family, vinf) from None
    return table.interpolate(vinf)


@dataclasses.dataclass(frozen=True)
class LegEstimate:
    """Linearised leg: speeds in m/s, unsigned pump angles in deg, ToF in
    days. ``dv`` is signed; its magnitude is the maneuver cost.
    """

    family: ResonanceFamily
    vinf_dep: float
    vinf_arr: float
    alpha_dep: float
    alpha_arr: float
    tof: float
    dv: float


def leg_from_departure(
    rec: ViltRecord,
    required_vinf_dep: float,
    *,
    floor: float = 0.0,
    dv_cap: float = DEFAULT_DV_CAP,
) -> LegEstimate:
    """Leg of ``rec``'s family that departs at ``required_vinf_dep`` m/s."""
    dv, vinf_arr, alpha_dep, alpha_arr, tof = _linearised(
        rec, required_vinf_dep
    )
    if abs(dv) > dv_cap:
        raise DeltaVCapExceeded(dv, dv_cap)
    if vinf_arr < floor:
        raise BelowFamilyFloor(vinf_arr, floor)
    return LegEstimate(
        family=rec.family,
        vinf_dep=required_vinf_dep,
        vinf_arr=vinf_arr,
        alpha_dep=alpha_dep,
        alpha_arr=alpha_arr,
        tof=tof,
        dv=dv,
    )


class _WorkItem(typing.NamedTuple):
    family: ResonanceFamily
    index: int
    vinf: float


_worker_context: typing.Dict[str, typing.Any] = {}


def _init_worker(
    moon: MoonParams, sys: SystemModel, perturbation: float
) -> None:
    _worker_context.update(moon=moon, sys=sys, perturbation=perturbation)


def _solve_record(item: _WorkItem) -> typing.Optional[ViltRecord]:
    return solve_record(
        item.family,
        _worker_context["moon"],
        _worker_context["sys"],
        item.vinf,
        perturbation=_worker_context["perturbation"],
    )


def solve_record(
    family: ResonanceFamily,
    moon: MoonParams,
    sys: SystemModel,
    vinf: float,
    *,
    perturbation: float = DEFAULT_PERTURBATION,
) -> typing.Optional[ViltRecord]:
    """Record of ``family`` at ``vinf``, or None when a solve fails."""

    def solve(delta):
        return solve_leg(LegProblem(family, moon, sys, vinf, delta))

    try:
        ballistic = solve(0.0)
    except (SeedInfeasible, SolverDiverged, ValueError) as e:
        logger.debug("Skipped %s at %g: %r", family.label, vinf, e)
        return None

    # Both splits are solved: together with the ballistic leg they fit the
    # ToF curvature. A split that fails or stays ballistic is skipped.
    solved = []
    for delta in (perturbation, -perturbation):
        try:
            leg = solve(delta)
        except (SeedInfeasible, SolverDiverged, ValueError) as e:
            logger.debug(
                "Perturbed solve failed for %s at %g (%+g): %r",
                family.label,
                vinf,
                delta,
                e,
            )
            continue
        if leg.dv > 0.0:
            solved.append((math.copysign(leg.dv, delta), leg))
    if not solved:
        return None

    dv, perturbed = solved[0]
    dtof = (perturbed.tof - ballistic.tof) / dv
    d2tof = 0.0
    if len(solved) == 2:
        dv_minus, reversed_leg = solved[1]
        dtof_minus = (reversed_leg.tof - ballistic.tof) / dv_minus
        d2tof = (dtof - dtof_minus) / (dv - dv_minus)
        dtof -= d2tof * dv

    alpha = abs(ballistic.alpha_dep)
    try:
        return ViltRecord(
            moon=moon.name,
            family=family,
            vinf=vinf,
            tof=ballistic.tof,
            alpha=alpha,
            dtof=dtof,
            dvinf_dep=(perturbed.vinf_dep - ballistic.vinf_dep) / dv,
            dvinf_arr=(perturbed.vinf_arr - ballistic.vinf_arr) / dv,
            dalpha_dep=(abs(perturbed.alpha_dep) - alpha) / dv,
            dalpha_arr=(abs(perturbed.alpha_arr) - alpha) / dv,
            d2tof=d2tof,
        )
    except ValueError as e:
        logger.debug("Dropped %s at %g: %s", family.label, vinf, e)
        return None


def _family_floor(
    family: ResonanceFamily,
    moon: MoonParams,
    sys: SystemModel,
    records: typing.Sequence[ViltRecord],
) -> float:
    if family.symmetric:
        return feasible_vinf_range(family, moon, sys)[0]
    return min((r.vinf for r in records), default=0.0)


def _assemble(
    moon: MoonParams,
    sys: SystemModel,
    bounds: SearchBounds,
    step: float,
    families: typing.Sequence[ResonanceFamily],
    items: typing.Sequence[_WorkItem],
    results: typing.Sequence[typing.Optional[ViltRecord]],
) -> ViltDatabase:
    collected: typing.Dict[
        ResonanceFamily, typing.List[typing.Tuple[int, ViltRecord]]
    ] = {f: [] for f in families}
    for item, record in zip(items, results):
        if record is not None:
            collected[item.family].append((item.index, record))
    tables = []
    for family in sorted(families):
        pairs = collected[family]
        if not pairs:
            continue
        records = [r for _, r in pairs]
        tables.append(
            FamilyTable(
                family,
                records,
                [i for i, _ in pairs],
                _family_floor(family, moon, sys, records),
            )
        )
    return ViltDatabase(moon.name, bounds, step, tuple(tables))


def build_database(
    moon: MoonParams,
    sys: SystemModel,
    bounds: SearchBounds,
    step: float,
    *,
    perturbation: float = DEFAULT_PERTURBATION,
    workers: int = 1,
) -> ViltDatabase:
    """Solve the ballistic and both perturbed legs at every feasible grid
    point.

    Failed records are logged and left out; the result does not depend on
    the worker count.
    """
    grid = velocity_grid(bounds.vinf_min, bounds.vinf_max, step)
    families = enumerate_families(moon, sys, bounds)
    items = []
    for family in families:
        lo, hi = feasible_vinf_range(family, moon, sys)
        for index, vinf in enumerate(grid):
            if lo <= vinf <= hi:
                items.append(_WorkItem(family, index, float(vinf)))

    logger.info(
        "%s: solving %d grid points over %d families",
        moon.name,
        len(items),
        len(families),
    )
    results = _parallel.ordered_map(
        _solve_record,
        items,
        workers,
        initializer=_init_worker,
        initargs=(moon, sys, perturbation),
    )
    db = _assemble(moon, sys, bounds, step, families, items, results)
    logger.info(
        "%s: %d records, %d skipped", moon.name, len(db), len(items) - len(db)
    )
    return db


def _format(value: float) -> str:
    return f"{value:.12g}"


def write_database(db: ViltDatabase, out: typing.TextIO) -> None:
    """Write ``db`` as CSV, sorted by (moon, M, N, p, q, vinf)."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for table in sorted(db.tables, key=lambda t: t.family):
        for record in table.records:
            f = record.family
            writer.writerow(
                [record.moon, f.m, f.n, f.p, f.q]
                + [_format(v) for v in record.values()]
            )


def dumps_database(db: ViltDatabase) -> str:
    buf = io.StringIO()
    write_database(db, buf)
    return buf.getvalue()


def read_database(
    path: pathlib.Path,
    moon: MoonParams,
    sys: SystemModel,
    bounds: SearchBounds,
    step: float,
) -> ViltDatabase:
    """Load one moon's CSV written by :func:`write_database`."""
    grid = velocity_grid(bounds.vinf_min, bounds.vinf_max, step)
    rows: typing.Dict[
        ResonanceFamily, typing.List[typing.Tuple[int, ViltRecord]]
    ] = {}
    with path.open(newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != COLUMNS:
            raise DatabaseFormatError(path, 1, "unexpected header")
        for lineno, row in enumerate(reader, 2):
            if len(row) != len(COLUMNS):
                raise DatabaseFormatError(path, lineno, "wrong column count")
            name, m, n, p, q = row[:5]
            if name != moon.name or name not in MOON_NAMES:
                raise DatabaseFormatError(path, lineno, f"moon {name!r}")
            try:
                family = ResonanceFamily(int(m), int(n), int(p), int(q))
                values = [float(v) for v in row[5:]]
                record = ViltRecord(name, family, *values)
            except ValueError as e:
                raise DatabaseFormatError(path, lineno, str(e))
            index = int(numpy.argmin(numpy.abs(grid - record.vinf)))
            if abs(grid[index] - record.vinf) > _GRID_MATCH:
                raise DatabaseFormatError(path, lineno, "speed off grid")
            rows.setdefault(family, []).append((index, record))

    tables = []
    for family in sorted(rows):
        pairs = rows[family]
        records = [r for _, r in pairs]
        tables.append(
            FamilyTable(
                family,
                records,
                [i for i, _ in pairs],
                _family_floor(family, moon, sys, records),
            )
        )
    return ViltDatabase(moon.name, bounds, step, tuple(tables))
