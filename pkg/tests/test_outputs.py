import pytest

from pumpdown import outputs
from pumpdown.pathfinder import (
    CompletedTour,
    ParetoArchive,
    PathNode,
    TourResult,
    reconstruct_tour,
)
from pumpdown.resonance import ResonanceFamily, sample_pump_vinf_map
from pumpdown.vilt import LegEstimate


def _header(path):
    return path.read_text().splitlines()[0].split(",")


@pytest.fixture()
def tour(saturn):
    start = PathNode("Enceladus", 500.0, 90.0, 1000.0, 200.0)
    leg = LegEstimate(
        ResonanceFamily(3, 4, 1, 1), 500.0, 440.0, 95.0, 96.0, 5.4, 30.0
    )
    end = PathNode(
        "Enceladus", 440.0, 96.0, 1005.4, 230.0, 1, start, leg, 0
    )
    return CompletedTour(end, 341.2)


def test_moon_front(tmp_path):
    nodes = (PathNode("Dione", 900.0, 60.0, 400.0, 100.0),)
    path = tmp_path.joinpath("fronts", "Rhea.csv")
    outputs.write_moon_front(path, "Rhea", ParetoArchive(nodes))
    lines = path.read_text().splitlines()
    assert lines[0] == (
        "moon,next_moon,tof_days,dv_mps,arrival_alpha_deg,arrival_vinf_mps"
    )
    assert lines[1] == "Rhea,Dione,400,100,60,900"


def test_final_front_ids(tmp_path, tour):
    path = tmp_path.joinpath("final.csv")
    outputs.write_final_front(path, ParetoArchive((tour,)))
    lines = path.read_text().splitlines()
    assert _header(path) == list(outputs.FINAL_FRONT_COLUMNS)
    assert lines[1].split(",")[0] == "1"
    assert float(lines[1].split(",")[2]) == pytest.approx(571.2)


def test_report(tmp_path, saturn, tour):
    table = reconstruct_tour(tour, saturn)
    outputs.write_tour(outputs.tour_path(tmp_path, 1), table)
    outputs.write_summary(
        tmp_path.joinpath("tours", "summary.csv"), [table]
    )
    assert tmp_path.joinpath("tours", "001.csv").is_file()

    text = outputs.render_report(tmp_path, 1)
    assert "## Enceladus" in text
    assert "| 3:4^{+,+} |" in text
    assert "| EOI |" in text
    assert "| Total | 5.40 | 371.2 |" in text


def test_report_unknown_tour(tmp_path):
    with pytest.raises(outputs.UnknownTourId) as ctx:
        outputs.render_report(tmp_path, 4)
    assert ctx.value.tour_id == 4


def test_map_ticks_walk_down(synthetic_db):
    db = synthetic_db("Rhea", [ResonanceFamily(2, 1, 1, 1)], 30.0)
    ticks = outputs.map_ticks(db, 15.0)
    speeds = [t.vinf for t in ticks]
    assert speeds[0] == 1900.0
    assert speeds[1] == pytest.approx(1870.0)
    assert speeds == sorted(speeds, reverse=True)
    assert [t.index for t in ticks] == list(range(len(ticks)))


def test_map_files(tmp_path, saturn):
    rhea = saturn.moon("Rhea")
    samples = sample_pump_vinf_map(
        rhea, saturn, [ResonanceFamily(2, 1, 1, 1)], [1500.0, 1800.0]
    )
    path = tmp_path.joinpath("Rhea.csv")
    outputs.write_map(path, "Rhea", samples)
    assert _header(path) == list(outputs.MAP_COLUMNS)
    assert len(path.read_text().splitlines()) == 3

    svg = outputs.render_svg(rhea, samples)
    assert svg.startswith("<svg")
    assert "<title>2:1^{+,+}</title>" in svg


def test_map_file_without_samples(tmp_path):
    path = tmp_path.joinpath("Dione.csv")
    outputs.write_map(path, "Dione", [])
    assert path.read_text() == ",".join(outputs.MAP_COLUMNS) + "\n"


def test_report_without_turning_flyby(tmp_path, saturn, tour):
    # Departing at the arrival pump angle needs no flyby bend.
    leg = LegEstimate(
        ResonanceFamily(3, 4, 1, 1), 440.0, 420.0, 96.0, 97.0, 5.4, 10.0
    )
    node = tour.node
    end = PathNode(
        "Enceladus", 420.0, 97.0, node.tof + 5.4, node.dv + 10.0, 2, node, leg
    )
    table = reconstruct_tour(end, saturn)
    path = outputs.tour_path(tmp_path, 1)
    outputs.write_tour(path, table)
    assert path.read_text().splitlines()[2].split(",")[4] == ""
    assert "| 2 | 3:4^{+,+} | 5.40 | - | 440 | 10.0 |" in (
        outputs.render_report(tmp_path, 1)
    )


def test_results_replace_earlier_run(tmp_path, tour, saturn):
    stale = outputs.tour_path(tmp_path, 7)
    stale.parent.mkdir(parents=True)
    stale.write_text("left over\n")
    tmp_path.joinpath("fronts").mkdir()
    tmp_path.joinpath("fronts", "Titan.csv").write_text("left over\n")

    result = TourResult(
        front=ParetoArchive((tour,)),
        phases=(),
        tours=(reconstruct_tour(tour, saturn),),
    )
    outputs.write_results(tmp_path, result)
    assert sorted(p.name for p in tmp_path.joinpath("tours").iterdir()) == [
        "001.csv",
        "summary.csv",
    ]
    assert [p.name for p in tmp_path.joinpath("fronts").iterdir()] == [
        "final.csv"
    ]
