__all__ = ["dispatch"]

import dataclasses
import filecmp
import functools
import logging
import pathlib
import sys
import tempfile
import typing

from . import __version__, outputs
from ._argparse import PumpdownArgumentParser
from ._logging import attach_logfile, configure_logging, detach_handler
from .astro import MOON_NAMES
from .config import (
    ConfigParseError,
    ConfigValidationError,
    RunConfig,
    load_config,
)
from .errs import Error, errorlog
from .pathfinder import EmptyFront, TourResult, run_full_tour
from .pathfinder.checkpoint import CheckpointFormatError
from .pathfinder.search import moon_sequence
from .resonance import (
    enumerate_families,
    sample_pump_vinf_map,
    tisserand_samples,
)
from .vilt import (
    DatabaseFormatError,
    ViltDatabase,
    build_database,
    read_database,
    velocity_grid,
    write_database,
)


_ArgList = typing.List[str]

_Options = typing.Any


logger = logging.getLogger(__name__)


def _io_failed(e: OSError) -> int:
    logger.error("I/O failed: %s", e)
    return Error.io_failed


def _bad_database(e: DatabaseFormatError) -> int:
    logger.error(
        "Malformed database %s, line %d: %s", e.path, e.line, e.reason
    )
    return Error.io_failed


def _bad_checkpoint(e: CheckpointFormatError) -> int:
    logger.error("Malformed checkpoint %s, line %d", e.path, e.line)
    return Error.io_failed


def _empty_front(e: EmptyFront) -> int:
    logger.error(
        "Empty front: no path got past %s (see run.log for stage counts)",
        e.moon,
    )
    return Error.empty_front


def _unknown_tour(e: outputs.UnknownTourId) -> int:
    logger.error("No tour with id %d", e.tour_id)
    return Error.tour_unknown


def _bad_option(e: ConfigValidationError) -> int:
    logger.error("Invalid %s: %s", e.field, e.reason)
    return Error.config_invalid


def _moons(options: _Options) -> typing.List[str]:
    if not options.moons:
        return list(MOON_NAMES)
    names = [n.strip() for n in options.moons.split(",") if n.strip()]
    lookup = {n.lower(): n for n in MOON_NAMES}
    unknown = [n for n in names if n.lower() not in lookup]
    if unknown:
        raise ConfigValidationError("moons", f"unknown {', '.join(unknown)}")
    return [lookup[n.lower()] for n in names]


def _database_path(out: pathlib.Path, moon: str) -> pathlib.Path:
    return out.joinpath("db", f"{moon}.csv")


def _load_database(config: RunConfig, moon: str) -> ViltDatabase:
    sys_model = config.system()
    return read_database(
        _database_path(pathlib.Path(config.out_dir), moon),
        sys_model.moon(moon),
        sys_model,
        config.search_bounds()[moon],
        config.db_grid_step,
    )


@errorlog(ConfigValidationError, _bad_option)
@errorlog(DatabaseFormatError, _bad_database)
@errorlog(OSError, _io_failed)
def gen_db(config: RunConfig, options: _Options) -> int:
    sys_model = config.system()
    bounds = config.search_bounds()
    out = pathlib.Path(config.out_dir)
    for name in _moons(options):
        db = build_database(
            sys_model.moon(name),
            sys_model,
            bounds[name],
            config.db_grid_step,
            perturbation=config.perturbation,
            workers=config.workers,
        )
        path = _database_path(out, name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as f:
            write_database(db, f)
        logger.info(
            "%s: %d families, %d records -> %s",
            name,
            len(db.tables),
            len(db),
            path,
        )
    return 0


def _run(
    config: RunConfig,
    checkpoint_dir: typing.Optional[pathlib.Path] = None,
    resume: bool = False,
) -> TourResult:
    sys_model = config.system()
    start = config.start_node()
    databases = {
        name: _load_database(config, name)
        for name in moon_sequence(start.moon)
    }
    return run_full_tour(
        sys_model,
        databases,
        start,
        config.search_settings(),
        bounds=config.search_bounds(),
        workers=config.workers,
        checkpoint_dir=checkpoint_dir,
        resume=resume,
    )


def _same_fronts(left: pathlib.Path, right: pathlib.Path) -> bool:
    names = sorted(p.name for p in left.joinpath("fronts").iterdir())
    match, mismatch, errors = filecmp.cmpfiles(
        left.joinpath("fronts"),
        right.joinpath("fronts"),
        names,
        shallow=False,
    )
    for name in mismatch + errors:
        logger.error("Front %s differs between runs", name)
    return not mismatch and not errors


@errorlog(EmptyFront, _empty_front)
@errorlog(CheckpointFormatError, _bad_checkpoint)
@errorlog(DatabaseFormatError, _bad_database)
@errorlog(OSError, _io_failed)
def tour(config: RunConfig, options: _Options) -> int:
    out = pathlib.Path(config.out_dir)
    if options.seedless:
        with tempfile.TemporaryDirectory() as tmp:
            runs = [pathlib.Path(tmp, "a"), pathlib.Path(tmp, "b")]
            for run_dir in runs:
                outputs.write_results(run_dir, _run(config))
            if not _same_fronts(*runs):
                return Error.nondeterministic
        logger.info("Repeated runs produced identical fronts")

    result = _run(
        config,
        checkpoint_dir=out.joinpath("checkpoints"),
        resume=options.resume,
    )
    outputs.write_results(out, result)
    for tour_id, t in enumerate(result.tours, 1):
        logger.info(
            "Tour %d: %.1f days, %.1f m/s (EOI %.1f m/s)",
            tour_id,
            t.tof,
            t.dv,
            t.eoi_dv,
        )
    logger.info("Wrote %d tours to %s", len(result.tours), out)
    return 0


@errorlog(ConfigValidationError, _bad_option)
@errorlog(DatabaseFormatError, _bad_database)
@errorlog(OSError, _io_failed)
def map_(config: RunConfig, options: _Options) -> int:
    sys_model = config.system()
    out = pathlib.Path(config.out_dir)
    for name in _moons(options):
        moon = sys_model.moon(name)
        bounds = config.search_bounds()[name]
        db = _load_database(config, name)
        if config.map_max_m is not None:
            bounds = dataclasses.replace(bounds, max_m=config.map_max_m)
            families = enumerate_families(moon, sys_model, bounds)
        else:
            families = db.families
        grid = velocity_grid(
            bounds.vinf_min, bounds.vinf_max, config.db_grid_step
        )
        samples = sample_pump_vinf_map(moon, sys_model, families, grid)
        ticks = outputs.map_ticks(db, config.map_tick_dv)

        outputs.write_map(out.joinpath("map", f"{name}.csv"), name, samples)
        outputs.write_ticks(
            out.joinpath("map", f"{name}_ticks.csv"), ticks
        )
        outputs.write_tisserand(
            out.joinpath("map", f"{name}_tisserand.csv"),
            name,
            tisserand_samples(moon, sys_model, samples),
        )
        if options.svg:
            out.joinpath("map", f"{name}.svg").write_text(
                outputs.render_svg(moon, samples, ticks), encoding="utf-8"
            )
        logger.info(
            "%s: %d families, %d samples, %d ticks",
            name,
            len(families),
            len(samples),
            len(ticks),
        )
    return 0


@errorlog(outputs.UnknownTourId, _unknown_tour)
@errorlog(OSError, _io_failed)
def report(config: RunConfig, options: _Options) -> int:
    directory = pathlib.Path(config.out_dir)
    text = outputs.render_report(directory, options.tour_id)
    sys.stdout.write(text)
    return 0


def _handle_missing(parser, config, options) -> int:
    parser.print_help()
    return 0


def _parse_args(argv: _ArgList) -> _Options:
    parser = PumpdownArgumentParser(
        prog="pumpdown",
        description="Saturn moon pump-down tour design.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.set_defaults(
        func=functools.partial(_handle_missing, parser), logfile=False
    )

    subparsers = parser.add_subparsers()

    parser_db = subparsers.add_parser(
        "gen-db",
        aliases=["gen_db"],
        description="Generate the leveraging-transfer database per moon.",
    )
    parser_db.add_argument(
        "--moons", help="comma-separated moons (default: all)", default=None
    )
    parser_db.set_defaults(func=gen_db, logfile=True)

    parser_tour = subparsers.add_parser(
        "tour", description="Search the multi-moon tour and write fronts."
    )
    parser_tour.add_argument(
        "--seedless",
        action="store_true",
        default=False,
        help="run twice and fail unless the fronts are byte-identical",
    )
    parser_tour.add_argument(
        "--resume",
        action="store_true",
        default=False,
        help="continue after the last saved moon phase",
    )
    parser_tour.set_defaults(func=tour, logfile=True)

    parser_map = subparsers.add_parser(
        "map", description="Sample pump-angle/V-infinity map curves."
    )
    parser_map.add_argument(
        "--moons", help="comma-separated moons (default: all)", default=None
    )
    parser_map.add_argument(
        "--svg", action="store_true", default=False, help="also write SVG"
    )
    parser_map.set_defaults(func=map_)

    parser_report = subparsers.add_parser(
        "report", description="Print the flyby tables of one tour."
    )
    parser_report.add_argument("tour_id", type=int, help="tour number")
    parser_report.set_defaults(func=report)

    return parser.parse_args(argv)


def _configure(options: _Options) -> RunConfig:
    if options.config is None:
        config = RunConfig().validate()
    else:
        config = load_config(pathlib.Path(options.config))
    changes: typing.Dict[str, typing.Any] = {}
    if options.out is not None:
        changes["out_dir"] = options.out
    if options.workers is not None:
        changes["workers"] = options.workers
    if changes:
        config = dataclasses.replace(config, **changes).validate()
    return config


def dispatch(argv: typing.Optional[_ArgList]) -> int:
    if argv is None:
        argv = sys.argv[1:]
    opts = _parse_args(argv)
    configure_logging(opts.log_level)

    try:
        config = _configure(opts)
    except ConfigParseError as e:
        where = f" ({e.field})" if e.field else ""
        logger.error("%s, line %d%s: %s", e.path, e.line, where, e.message)
        return Error.config_invalid
    except ConfigValidationError as e:
        logger.error("Invalid config field %s: %s", e.field, e.reason)
        return Error.config_invalid
    except OSError as e:
        logger.error("Cannot read config: %s", e)
        return Error.io_failed

    handler = None
    if opts.logfile:
        try:
            handler = attach_logfile(
                pathlib.Path(config.out_dir).joinpath("run.log")
            )
        except OSError as e:
            logger.error("Cannot open run.log: %s", e)
            return Error.io_failed
    try:
        return opts.func(config, opts)
    finally:
        detach_handler(handler)
