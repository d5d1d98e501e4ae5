"""Grid dynamic programming over pump-angle and V-infinity nodes.

Each stage branches every archived node through one more leg at the same
moon, then prunes the children to a 4D Pareto archive. Nodes that can hand
off to the next moon inwards (or, at Enceladus, that are slow enough for
orbit insertion) are harvested at every stage and stay in the search.
"""

__all__ = [
    "EmptyFront",
    "MoonPhase",
    "SearchSettings",
    "StageDiagnostics",
    "TourResult",
    "branch",
    "eoi_delta_v",
    "exit_feasible",
    "moon_sequence",
    "run_full_tour",
    "run_moon_tour",
]

import dataclasses
import logging
import math
import operator
import pathlib
import typing

import numpy

from .. import _parallel
from ..astro import (
    FlybyState,
    HyperbolicOrbit,
    MOON_NAMES,
    MoonParams,
    SearchBounds,
    SystemModel,
    circular_velocity,
    conic_from_flyby,
    crossing_velocity,
    load_bounds,
    max_bend_angle,
)
from ..resonance import ResonanceFamily
from ..vilt import FamilyTable, LegEstimate, ViltDatabase, velocity_grid
from . import checkpoint
from .nodes import CompletedTour, ExitState, PathNode
from .pareto import ParetoArchive, pareto_prune
from .tours import Tour, reconstruct_tour


logger = logging.getLogger(__name__)


DAYS_PER_YEAR = 365.25


@dataclasses.dataclass()
class EmptyFront(Exception):
    moon: str


@dataclasses.dataclass(frozen=True)
class SearchSettings:
    """DP knobs. ``max_flybys`` of None lifts the per-moon stage cap;
    ``binning`` off keeps the exact Pareto set at every stage.
    """

    tof_cap: float = 3.0 * DAYS_PER_YEAR  # days
    dp_grid_step: float = 30.0
    dv_cap: float = 100.0
    bin_tof: float = 5.0
    bin_dv: float = 1.0
    bin_alpha_fraction: float = 0.25
    bin_vinf: float = 10.0
    binning: bool = True
    eoi_trigger_vinf: float = 450.0
    eoi_altitude: float = 100.0
    max_flybys: typing.Optional[int] = 40


@dataclasses.dataclass(frozen=True)
class StageDiagnostics:
    moon: str
    stage: int
    archive: int
    harvested: int

    def __str__(self) -> str:
        return (
            f"{self.moon} stage {self.stage}: archive {self.archive}, "
            f"harvested {self.harvested}"
        )


@dataclasses.dataclass(frozen=True)
class MoonPhase:
    """Outcome of the DP at one moon.

    Exactly one of ``handoff`` (arrival nodes at the next moon) and
    ``completed`` (tours closed by orbit insertion) is set.
    """

    moon: str
    handoff: typing.Optional[ParetoArchive[PathNode]] = None
    completed: typing.Optional[ParetoArchive[CompletedTour]] = None
    diagnostics: typing.Tuple[StageDiagnostics, ...] = ()
    archives: typing.Tuple[ParetoArchive[PathNode], ...] = ()


@dataclasses.dataclass(frozen=True)
class TourResult:
    front: ParetoArchive[CompletedTour]
    phases: typing.Tuple[MoonPhase, ...]
    tours: typing.Tuple[Tour, ...]


def eoi_delta_v(
    vinf: float, moon: MoonParams, altitude: float = 100.0
) -> float:
    """Insertion burn (m/s) from a ``vinf`` m/s approach into a circular
    orbit ``altitude`` km above the moon.
    """
    if vinf < 0.0:
        raise ValueError(f"negative V-infinity {vinf!r}")
    if not altitude > 0.0:
        raise ValueError(f"altitude must be positive, got {altitude!r}")
    r = moon.radius + altitude
    v = vinf / 1000.0
    circular = math.sqrt(moon.gm / r)
    return (math.sqrt(v * v + 2.0 * moon.gm / r) - circular) * 1000.0


def exit_feasible(
    node: PathNode,
    moon1: MoonParams,
    moon2: MoonParams,
    sys: SystemModel,
    bounds: typing.Optional[SearchBounds] = None,
) -> typing.Optional[ExitState]:
    """Handoff to ``moon2`` after one unpowered maximum-bend flyby.

    The flyby pumps the orbit down as far as it can. The handoff exists when
    the new periapsis reaches inside ``moon2``'s orbit and the arrival
    V-infinity there lies within ``moon2``'s bounds.
    """
    if bounds is None:
        bounds = load_bounds()[moon2.name]
    bend = max_bend_angle(moon1, node.vinf)
    alpha_dep = min(180.0, abs(node.alpha) + bend)
    try:
        state = FlybyState(node.vinf, alpha_dep)
        orbit = conic_from_flyby(moon1, sys, state)
    except HyperbolicOrbit:
        return None
    r2 = moon2.a
    if orbit.periapsis > r2:
        return None

    v_t, v_r = crossing_velocity(orbit, r2)
    v_moon = circular_velocity(moon2, sys)
    vinf = math.hypot(v_t - v_moon, v_r)
    if vinf * 1000.0 not in bounds or vinf == 0.0:
        return None
    cos_alpha = min(1.0, max(-1.0, (v_t - v_moon) / vinf))
    return ExitState(
        moon=moon1.name,
        next_moon=moon2.name,
        a=orbit.a,
        e=orbit.e,
        rp=orbit.periapsis,
        ra=orbit.apoapsis,
        alpha_dep=alpha_dep,
        vinf=vinf * 1000.0,
        alpha=math.degrees(math.acos(cos_alpha)),
        # Falling from moon1 towards periapsis, the first crossing of
        # moon2's orbit is on the way in.
        inbound=True,
        parent=node,
    )


class _Child(typing.NamedTuple):
    family: typing.Tuple[int, int, int, int]
    vinf_arr: float
    alpha_dep: float
    alpha_arr: float
    tof: float
    dv: float


def _family_children(
    table: FamilyTable,
    vinf: float,
    window: typing.Tuple[float, float],
    grid: numpy.ndarray,
    dv_cap: float,
) -> typing.List[_Child]:
    """Legs of one family leaving at ``vinf`` and arriving on grid speeds.

    Every record gives a linearised leg; grid speeds between the arrival
    speeds of two linked records take the blend of both legs.
    """
    if not len(table):
        return []
    legs = table.legs(vinf)
    arrival = legs[1]
    fields = legs[[0, 2, 3, 4]]

    hits: typing.Dict[typing.Tuple[int, float], numpy.ndarray] = {}
    for g, i in zip(*numpy.nonzero(grid[:, None] == arrival[None, :])):
        hits[(int(g), float(i))] = fields[:, i]
    if len(table) > 1:
        a0, a1 = arrival[:-1], arrival[1:]
        inside = (
            (grid[:, None] >= numpy.minimum(a0, a1)[None, :])
            & (grid[:, None] <= numpy.maximum(a0, a1)[None, :])
            & table.linked[None, :]
            & (a0 != a1)[None, :]
        )
        for g, i in zip(*numpy.nonzero(inside)):
            w = (grid[g] - a0[i]) / (a1[i] - a0[i])
            key = (int(g), round(float(i + w), 9))
            if key not in hits:
                step = fields[:, i + 1] - fields[:, i]
                hits[key] = fields[:, i] + w * step

    lo, hi = window
    children = []
    for (g, _), (leg_dv, alpha_dep, alpha_arr, tof) in sorted(hits.items()):
        target = float(grid[g])
        if abs(leg_dv) > dv_cap or not lo <= alpha_dep <= hi:
            continue
        if target < table.floor or not tof > 0.0:
            continue
        children.append(
            _Child(
                table.family.as_tuple(),
                target,
                float(alpha_dep),
                float(min(180.0, max(0.0, alpha_arr))),
                float(tof),
                float(leg_dv),
            )
        )
    return children


def _bend_window(
    moon: MoonParams, vinf: float, alpha: float, flip: bool = False
) -> typing.Tuple[float, float]:
    """Departure |alpha| reachable from arrival |alpha| in one flyby.

    With ``flip`` the pump angle changes sign, so the bend spans both angles.
    """
    bend = max_bend_angle(moon, vinf)
    if flip:
        return (0.0, bend - abs(alpha))
    return (max(0.0, abs(alpha) - bend), min(180.0, abs(alpha) + bend))


class _BranchContext(typing.NamedTuple):
    moon: MoonParams
    tables: typing.Tuple[FamilyTable, ...]
    grid: numpy.ndarray
    dv_cap: float


_context: typing.Dict[str, _BranchContext] = {}


def _install_context(ctx: _BranchContext) -> None:
    _context["branch"] = ctx


def _branch_state(
    state: typing.Tuple[float, float, int]
) -> typing.List[_Child]:
    ctx = _context["branch"]
    vinf, alpha, sign = state
    window = _bend_window(ctx.moon, vinf, alpha)
    flipped = _bend_window(ctx.moon, vinf, alpha, flip=True)
    children = []
    for table in ctx.tables:
        family = table.family
        # Only the 1:1 legs are bound to a departure sign.
        flip = sign != 0 and family.m == family.n and family.p != sign
        children.extend(
            _family_children(
                table,
                vinf,
                flipped if flip else window,
                ctx.grid,
                ctx.dv_cap,
            )
        )
    return children


def _make_child(
    parent: PathNode, rank: int, child: _Child, moon: str
) -> PathNode:
    leg = LegEstimate(
        family=ResonanceFamily(*child.family),
        vinf_dep=parent.vinf,
        vinf_arr=child.vinf_arr,
        alpha_dep=child.alpha_dep,
        alpha_arr=child.alpha_arr,
        tof=child.tof,
        dv=child.dv,
    )
    return PathNode(
        moon=moon,
        vinf=child.vinf_arr,
        alpha=child.alpha_arr,
        tof=parent.tof + child.tof,
        dv=parent.dv + abs(child.dv),
        flybys=parent.flybys + 1,
        parent=parent,
        leg=leg,
        parent_rank=rank,
    )


def _context_for(
    db: ViltDatabase, moon: MoonParams, grid_step: float, dv_cap: float
) -> _BranchContext:
    grid = velocity_grid(db.bounds.vinf_min, db.bounds.vinf_max, grid_step)
    return _BranchContext(moon, db.tables, grid, dv_cap)


def branch(
    node: PathNode,
    db: ViltDatabase,
    grid_step: float,
    moon: MoonParams,
    *,
    dv_cap: float = 100.0,
    parent_rank: int = -1,
) -> typing.List[PathNode]:
    """Children of ``node`` through one more leg at ``moon``."""
    _install_context(_context_for(db, moon, grid_step, dv_cap))
    return [
        _make_child(node, parent_rank, child, moon.name)
        for child in _branch_state((node.vinf, node.alpha, node.sign))
    ]


def _node_bins(
    moon: MoonParams, settings: SearchSettings
) -> typing.Callable[[PathNode], typing.Tuple[float, ...]]:
    def widths(node: PathNode) -> typing.Tuple[float, ...]:
        alpha = max_bend_angle(moon, node.vinf) * settings.bin_alpha_fraction
        return (settings.bin_tof, settings.bin_dv, alpha, settings.bin_vinf)

    return widths


def _prune_nodes(
    nodes: typing.Iterable[PathNode],
    moon: MoonParams,
    settings: SearchSettings,
) -> ParetoArchive[PathNode]:
    return pareto_prune(
        nodes,
        operator.attrgetter("objectives"),
        order_key=PathNode.order_key,
        bin_widths=_node_bins(moon, settings) if settings.binning else None,
    )


def run_moon_tour(
    initial: typing.Sequence[PathNode],
    moon: MoonParams,
    next_moon: typing.Optional[MoonParams],
    db: ViltDatabase,
    sys: SystemModel,
    settings: SearchSettings,
    *,
    next_bounds: typing.Optional[SearchBounds] = None,
    workers: int = 1,
) -> MoonPhase:
    """Branch and prune at ``moon`` until no stage produces children.

    Without ``next_moon`` this is the Enceladus endgame: paths slower than
    the insertion trigger are closed with the insertion burn.
    """
    if not initial:
        raise ValueError("initial node set is empty")

    archive: typing.Sequence[PathNode] = sorted(
        initial, key=PathNode.order_key
    )
    exits: typing.List[ExitState] = []
    completed: typing.List[CompletedTour] = []
    diagnostics = []
    archives = []

    ctx = _context_for(db, moon, settings.dp_grid_step, settings.dv_cap)
    with _parallel.OrderedPool(workers, _install_context, (ctx,)) as pool:
        stage = 0
        while True:
            if next_moon is None:
                closed = [
                    CompletedTour(
                        n, eoi_delta_v(n.vinf, moon, settings.eoi_altitude)
                    )
                    for n in archive
                    if n.vinf < settings.eoi_trigger_vinf
                ]
                completed.extend(closed)
                harvested = len(closed)
            else:
                found = [
                    exit_feasible(n, moon, next_moon, sys, next_bounds)
                    for n in archive
                ]
                states = [e for e in found if e is not None]
                exits.extend(states)
                harvested = len(states)

            diag = StageDiagnostics(moon.name, stage, len(archive), harvested)
            diagnostics.append(diag)
            logger.info("%s", diag)

            if settings.max_flybys is not None:
                if stage >= settings.max_flybys:
                    break
            results = pool.map(
                _branch_state, [(n.vinf, n.alpha, n.sign) for n in archive]
            )
            children = [
                _make_child(parent, rank, child, moon.name)
                for rank, (parent, batch) in enumerate(zip(archive, results))
                for child in batch
                if parent.tof + child.tof <= settings.tof_cap
            ]
            if not children:
                break
            pruned = _prune_nodes(children, moon, settings)
            archives.append(pruned)
            archive = pruned.members
            stage += 1

    if next_moon is None:
        front = pareto_prune(
            completed,
            operator.attrgetter("objectives"),
            order_key=CompletedTour.order_key,
        )
        if not len(front):
            raise EmptyFront(moon.name)
        return MoonPhase(
            moon.name,
            completed=front,
            diagnostics=tuple(diagnostics),
            archives=tuple(archives),
        )

    arrivals = [state.arrival_node(rank) for rank, state in enumerate(exits)]
    handoff = _prune_nodes(arrivals, next_moon, settings)
    if not len(handoff):
        raise EmptyFront(moon.name)
    logger.info(
        "%s: %d handoffs to %s, %d kept",
        moon.name,
        len(exits),
        next_moon.name,
        len(handoff),
    )
    return MoonPhase(
        moon.name,
        handoff=handoff,
        diagnostics=tuple(diagnostics),
        archives=tuple(archives),
    )


def moon_sequence(initial_moon: str) -> typing.List[str]:
    """Moons visited from ``initial_moon`` inwards to Enceladus."""
    return list(MOON_NAMES[MOON_NAMES.index(initial_moon) :])


def run_full_tour(
    sys: SystemModel,
    databases: typing.Mapping[str, ViltDatabase],
    start: PathNode,
    settings: SearchSettings,
    *,
    bounds: typing.Optional[typing.Mapping[str, SearchBounds]] = None,
    workers: int = 1,
    checkpoint_dir: typing.Optional[pathlib.Path] = None,
    resume: bool = False,
) -> TourResult:
    """Chain the moon phases from ``start.moon`` down to orbit insertion.

    With ``checkpoint_dir`` the handoff set of every phase is saved; with
    ``resume`` the search restarts after the last saved phase.
    """
    if bounds is None:
        bounds = load_bounds()
    sequence = moon_sequence(start.moon)
    phases: typing.List[MoonPhase] = []
    nodes: typing.Sequence[PathNode] = [start]

    first = 0
    if resume and checkpoint_dir is not None:
        for index in reversed(range(len(sequence) - 1)):
            path = checkpoint.checkpoint_path(checkpoint_dir, sequence[index])
            if path.exists():
                nodes = checkpoint.read_checkpoint(path)
                for name in sequence[: index + 1]:
                    saved = checkpoint.read_checkpoint(
                        checkpoint.checkpoint_path(checkpoint_dir, name)
                    )
                    handoff = ParetoArchive(tuple(saved))
                    phases.append(MoonPhase(name, handoff=handoff))
                first = index + 1
                logger.info(
                    "Resuming at %s with %d nodes", sequence[first], len(nodes)
                )
                break

    for index in range(first, len(sequence)):
        name = sequence[index]
        moon = sys.moon(name)
        next_moon = None
        next_bounds = None
        if index + 1 < len(sequence):
            next_moon = sys.moon(sequence[index + 1])
            next_bounds = bounds[next_moon.name]
        phase = run_moon_tour(
            nodes,
            moon,
            next_moon,
            databases[name],
            sys,
            settings,
            next_bounds=next_bounds,
            workers=workers,
        )
        phases.append(phase)
        if phase.handoff is not None:
            nodes = phase.handoff.members
            if checkpoint_dir is not None:
                checkpoint.write_checkpoint(
                    checkpoint.checkpoint_path(checkpoint_dir, name), nodes
                )

    front = phases[-1].completed
    assert front is not None
    tours = tuple(
        reconstruct_tour(t, sys, eoi_altitude=settings.eoi_altitude)
        for t in front
    )
    return TourResult(front=front, phases=tuple(phases), tours=tours)
