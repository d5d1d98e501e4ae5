import json

import pytest

from pumpdown.cmds import dispatch
from pumpdown.errs import Error
from pumpdown.vilt.database import COLUMNS


def test_report_unknown_tour(tmp_path):
    code = dispatch(["--out", str(tmp_path), "report", "7"])
    assert code == Error.tour_unknown


def test_invalid_config(tmp_path):
    path = tmp_path.joinpath("run.json")
    path.write_text(json.dumps({"dp_grid_step": -1}))
    code = dispatch(["--config", str(path), "report", "1"])
    assert code == Error.config_invalid


def test_unknown_config_key(tmp_path):
    path = tmp_path.joinpath("run.json")
    path.write_text('{"nope": 1}')
    assert dispatch(["--config", str(path), "report", "1"]) == (
        Error.config_invalid
    )


def test_missing_database(tmp_path):
    code = dispatch(["--out", str(tmp_path), "map", "--moons", "Tethys"])
    assert code == Error.io_failed


def test_unknown_moon(tmp_path):
    code = dispatch(["--out", str(tmp_path), "map", "--moons", "Mimas"])
    assert code == Error.config_invalid


def test_map_with_empty_database(tmp_path):
    db = tmp_path.joinpath("db")
    db.mkdir()
    db.joinpath("Dione.csv").write_text(",".join(COLUMNS) + "\n")
    code = dispatch(
        ["--out", str(tmp_path), "map", "--moons", "Dione", "--svg"]
    )
    assert code == 0
    lines = tmp_path.joinpath("map", "Dione.csv").read_text().splitlines()
    assert len(lines) == 1
    assert tmp_path.joinpath("map", "Dione_ticks.csv").is_file()
    assert tmp_path.joinpath("map", "Dione.svg").is_file()


def test_tour_needs_databases(tmp_path):
    code = dispatch(["--out", str(tmp_path), "tour"])
    assert code == Error.io_failed
    assert tmp_path.joinpath("run.log").is_file()


@pytest.mark.slow
def test_gen_db_writes_database(tmp_path):
    path = tmp_path.joinpath("run.json")
    path.write_text(
        json.dumps(
            {"bounds": {"Titan": [1400, 1460, 1]}, "out_dir": str(tmp_path)}
        )
    )
    code = dispatch(["--config", str(path), "gen-db", "--moons", "Titan"])
    assert code == 0
    text = tmp_path.joinpath("db", "Titan.csv").read_text()
    assert text.splitlines()[0] == ",".join(COLUMNS)
