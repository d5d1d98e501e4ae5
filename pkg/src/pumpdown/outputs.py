"""Result files: fronts, flyby tables, map data and the Markdown report.

Every CSV has one header line and writes floats with 12 significant digits.
"""

__all__ = [
    "UnknownTourId",
    "map_ticks",
    "render_report",
    "render_svg",
    "tour_path",
    "write_final_front",
    "write_map",
    "write_moon_front",
    "write_results",
    "write_summary",
    "write_tisserand",
    "write_ticks",
    "write_tour",
]

import csv
import dataclasses
import pathlib
import shutil
import typing

from .astro import MoonParams
from .pathfinder import (
    CompletedTour,
    ParetoArchive,
    PathNode,
    Tour,
    TourResult,
)
from .resonance import MapSample, TisserandSample
from .vilt import OutOfSpan, ViltDatabase


MOON_FRONT_COLUMNS = (
    "moon",
    "next_moon",
    "tof_days",
    "dv_mps",
    "arrival_alpha_deg",
    "arrival_vinf_mps",
)

FINAL_FRONT_COLUMNS = (
    "tour_id",
    "tof_days",
    "dv_mps",
    "eoi_dv_mps",
    "final_vinf_mps",
)

TOUR_COLUMNS = (
    "moon",
    "flyby",
    "resonance",
    "tof_days",
    "alt_km",
    "vinf_mps",
    "dv_mps",
)

SUMMARY_COLUMNS = ("tour_id", "moon", "tof_days", "dv_mps")

MAP_COLUMNS = ("moon", "M", "N", "p", "q", "vinf_mps", "alpha_deg", "tof_days")

TICK_COLUMNS = ("moon", "M", "N", "p", "q", "tick", "vinf_mps", "alpha_deg")

TISSERAND_COLUMNS = ("moon", "M", "N", "p", "q", "vinf_mps", "rp_km", "ra_km")


@dataclasses.dataclass()
class UnknownTourId(Exception):
    tour_id: int


def _f(value: float) -> str:
    return f"{value:.12g}"


def _writer(path: pathlib.Path, columns: typing.Sequence[str]):
    path.parent.mkdir(parents=True, exist_ok=True)
    f = path.open("w", newline="", encoding="utf-8")
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(columns)
    return f, writer


def write_moon_front(
    path: pathlib.Path, moon: str, archive: ParetoArchive[PathNode]
) -> None:
    """4D front at the end of the ``moon`` phase.

    Pump angle and V-infinity are those of the arrival at the next moon,
    named in ``next_moon``.
    """
    f, writer = _writer(path, MOON_FRONT_COLUMNS)
    with f:
        for node in archive:
            writer.writerow(
                [moon, node.moon, _f(node.tof), _f(node.dv)]
                + [_f(node.alpha), _f(node.vinf)]
            )


def write_final_front(
    path: pathlib.Path, front: ParetoArchive[CompletedTour]
) -> None:
    f, writer = _writer(path, FINAL_FRONT_COLUMNS)
    with f:
        for tour_id, tour in enumerate(front, 1):
            writer.writerow(
                [
                    tour_id,
                    _f(tour.tof),
                    _f(tour.dv),
                    _f(tour.eoi_dv),
                    _f(tour.node.vinf),
                ]
            )


def tour_path(directory: pathlib.Path, tour_id: int) -> pathlib.Path:
    return directory.joinpath("tours", f"{tour_id:03d}.csv")


def write_tour(path: pathlib.Path, tour: Tour) -> None:
    f, writer = _writer(path, TOUR_COLUMNS)
    with f:
        for row in tour.rows:
            writer.writerow(
                [
                    row.moon,
                    "" if row.number is None else row.number,
                    row.resonance,
                    _f(row.tof),
                    "" if row.altitude is None else _f(row.altitude),
                    _f(row.vinf),
                    _f(row.dv),
                ]
            )


def write_summary(path: pathlib.Path, tours: typing.Sequence[Tour]) -> None:
    f, writer = _writer(path, SUMMARY_COLUMNS)
    with f:
        for tour_id, tour in enumerate(tours, 1):
            for item in tour.summary():
                writer.writerow(
                    [tour_id, item.moon, _f(item.tof), _f(item.dv)]
                )


def write_results(directory: pathlib.Path, result: TourResult) -> None:
    """Moon fronts, the final front and the tour tables of one run.

    Fronts and tour tables left by an earlier run are removed first.
    """
    for name in ("fronts", "tours"):
        shutil.rmtree(directory.joinpath(name), ignore_errors=True)
    for phase in result.phases:
        if phase.handoff is not None:
            write_moon_front(
                directory.joinpath("fronts", f"{phase.moon}.csv"),
                phase.moon,
                phase.handoff,
            )
    write_final_front(directory.joinpath("fronts", "final.csv"), result.front)
    for tour_id, tour in enumerate(result.tours, 1):
        write_tour(tour_path(directory, tour_id), tour)
    write_summary(directory.joinpath("tours", "summary.csv"), result.tours)


def write_map(
    path: pathlib.Path, moon: str, samples: typing.Iterable[MapSample]
) -> None:
    f, writer = _writer(path, MAP_COLUMNS)
    with f:
        for s in samples:
            writer.writerow(
                [moon, *s.family.as_tuple()]
                + [_f(s.vinf), _f(s.alpha), _f(s.tof)]
            )


def write_tisserand(
    path: pathlib.Path, moon: str, samples: typing.Iterable[TisserandSample]
) -> None:
    f, writer = _writer(path, TISSERAND_COLUMNS)
    with f:
        for s in samples:
            writer.writerow(
                [moon, *s.family.as_tuple()]
                + [_f(s.vinf), _f(s.periapsis), _f(s.apoapsis)]
            )


class Tick(typing.NamedTuple):
    moon: str
    family: typing.Tuple[int, int, int, int]
    index: int
    vinf: float
    alpha: float


def map_ticks(db: ViltDatabase, tick_dv: float) -> typing.List[Tick]:
    """Marks every ``tick_dv`` m/s of leveraging along each family curve.

    A leg of delta-V ``dv`` lowers V-infinity from departure to arrival by
    ``(dvinf_dep - dvinf_arr) * dv``; ticks walk down from the top of each
    family's span until they leave it.
    """
    ticks = []
    for table in db.tables:
        if not len(table):
            continue
        vinf = float(table.vinf[-1])
        index = 0
        while True:
            try:
                rec = table.interpolate(vinf)
            except OutOfSpan:
                break
            ticks.append(
                Tick(db.moon, table.family.as_tuple(), index, vinf, rec.alpha)
            )
            drop = (rec.dvinf_dep - rec.dvinf_arr) * tick_dv
            if not drop > 0.0:
                break
            vinf -= drop
            index += 1
    return ticks


def write_ticks(path: pathlib.Path, ticks: typing.Iterable[Tick]) -> None:
    f, writer = _writer(path, TICK_COLUMNS)
    with f:
        for t in ticks:
            writer.writerow(
                [t.moon, *t.family, t.index, _f(t.vinf), _f(t.alpha)]
            )


_SVG_WIDTH = 800
_SVG_HEIGHT = 500
_SVG_MARGIN = 50


def render_svg(
    moon: MoonParams,
    samples: typing.Sequence[MapSample],
    ticks: typing.Sequence[Tick] = (),
) -> str:
    """Pump angle against V-infinity, one polyline per family."""
    vinfs = [s.vinf for s in samples] or [0.0, 1.0]
    v_lo, v_hi = min(vinfs), max(vinfs)
    if v_hi == v_lo:
        v_hi = v_lo + 1.0
    plot_w = _SVG_WIDTH - 2 * _SVG_MARGIN
    plot_h = _SVG_HEIGHT - 2 * _SVG_MARGIN

    def x(v: float) -> float:
        return _SVG_MARGIN + (v - v_lo) / (v_hi - v_lo) * plot_w

    def y(alpha: float) -> float:
        return _SVG_MARGIN + (1.0 - alpha / 180.0) * plot_h

    curves: typing.Dict[typing.Tuple[int, ...], typing.List[MapSample]] = {}
    for s in samples:
        curves.setdefault(s.family.as_tuple(), []).append(s)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_WIDTH}" '
        f'height="{_SVG_HEIGHT}">',
        f'<rect x="{_SVG_MARGIN}" y="{_SVG_MARGIN}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="black"/>',
        f'<text x="{_SVG_WIDTH / 2}" y="{_SVG_HEIGHT - 10}" '
        f'text-anchor="middle">{moon.name} V-infinity (m/s) '
        f"{v_lo:.0f} to {v_hi:.0f}</text>",
        f'<text x="15" y="{_SVG_HEIGHT / 2}" text-anchor="middle" '
        f'transform="rotate(-90 15 {_SVG_HEIGHT / 2})">'
        f"pump angle (deg)</text>",
    ]
    for family, curve in sorted(curves.items()):
        points = " ".join(f"{x(s.vinf):.2f},{y(s.alpha):.2f}" for s in curve)
        label = curve[0].family.label
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="steelblue">'
            f"<title>{label}</title></polyline>"
        )
    for t in ticks:
        parts.append(
            f'<circle cx="{x(t.vinf):.2f}" cy="{y(t.alpha):.2f}" r="1.5" '
            f'fill="firebrick"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _read_rows(path: pathlib.Path) -> typing.List[typing.Dict[str, str]]:
    with path.open(newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def _altitude(text: str) -> str:
    return f"{float(text):.0f}" if text else "-"


def render_report(directory: pathlib.Path, tour_id: int) -> str:
    """Markdown flyby tables of one tour, one section per moon, plus the
    per-moon summary with totals.
    """
    path = tour_path(directory, tour_id)
    if not path.is_file():
        raise UnknownTourId(tour_id)
    rows = _read_rows(path)

    lines = [f"# Tour {tour_id}", ""]
    sections: typing.Dict[str, typing.List[typing.Dict[str, str]]] = {}
    for row in rows:
        sections.setdefault(row["moon"], []).append(row)
    header = (
        "| Flyby | Resonance | ToF (d) | Alt. (km) | V-inf (m/s) "
        "| dV (m/s) |"
    )
    for moon, moon_rows in sections.items():
        lines += [f"## {moon}", "", header, "|---|---|---|---|---|---|"]
        for row in moon_rows:
            lines.append(
                f"| {row['flyby'] or '-'} | {row['resonance']} "
                f"| {float(row['tof_days']):.2f} "
                f"| {_altitude(row['alt_km'])} "
                f"| {float(row['vinf_mps']):.0f} "
                f"| {float(row['dv_mps']):.1f} |"
            )
        lines.append("")

    tof = sum(float(r["tof_days"]) for r in rows)
    dv = sum(float(r["dv_mps"]) for r in rows)
    lines += [
        "## Summary",
        "",
        "| Moon | ToF (d) | dV (m/s) |",
        "|---|---|---|",
    ]
    summary = directory.joinpath("tours", "summary.csv")
    if summary.is_file():
        for row in _read_rows(summary):
            if row["tour_id"] == str(tour_id) and row["moon"] != "Total":
                lines.append(
                    f"| {row['moon']} | {float(row['tof_days']):.2f} "
                    f"| {float(row['dv_mps']):.1f} |"
                )
    lines.append(f"| Total | {tof:.2f} | {dv:.1f} |")
    return "\n".join(lines) + "\n"
