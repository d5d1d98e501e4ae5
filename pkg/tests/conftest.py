import dataclasses

import pytest

from pumpdown.astro import SearchBounds, load_bounds, load_system
from pumpdown.resonance import (
    InfeasibleResonance,
    ResonanceFamily,
    ballistic_case1,
)
from pumpdown.vilt import FamilyTable, ViltDatabase, ViltRecord, velocity_grid


@pytest.fixture(scope="session")
def saturn():
    return load_system()


@pytest.fixture(scope="session")
def bounds():
    return load_bounds()


def _record(moon, family, vinf, tof, alpha):
    return ViltRecord(
        moon=moon,
        family=family,
        vinf=float(vinf),
        tof=tof,
        alpha=alpha,
        dtof=0.0,
        dvinf_dep=1.0,
        dvinf_arr=-1.0,
        dalpha_dep=0.0,
        dalpha_arr=0.0,
    )


@pytest.fixture()
def synthetic_db(saturn):
    """Database factory with unit V-infinity sensitivities.

    ``shapes`` maps families to fixed ``(tof, alpha)`` pairs; families left
    out take their ballistic values where the resonance exists.
    """

    def build(moon_name, families, step, *, bounds=None, shapes=None):
        moon = saturn.moon(moon_name)
        if bounds is None:
            bounds = load_bounds()[moon_name]
        shapes = shapes or {}
        grid = velocity_grid(bounds.vinf_min, bounds.vinf_max, step)
        tables = []
        for family in sorted(families):
            records, index = [], []
            for i, vinf in enumerate(grid):
                if family in shapes:
                    tof, alpha = shapes[family]
                else:
                    try:
                        sol = ballistic_case1(family, moon, saturn, vinf)
                    except InfeasibleResonance:
                        continue
                    tof, alpha = sol.tof, sol.alpha
                records.append(_record(moon_name, family, vinf, tof, alpha))
                index.append(i)
            tables.append(FamilyTable(family, records, index, 0.0))
        return ViltDatabase(moon_name, bounds, step, tuple(tables))

    return build


@pytest.fixture()
def wide_bounds():
    return SearchBounds(0.0, 20000.0, 25)


@pytest.fixture()
def one_to_one():
    return ResonanceFamily(1, 1, 1, 1)


@pytest.fixture(scope="session")
def point_mass_saturn(saturn):
    """Saturn with moons shrunk to points: every flyby bends almost 180 deg.

    Orbits and periods are untouched, so handoffs between moons keep their
    real geometry while any pump angle is reachable in one flyby.
    """
    moons = tuple(
        dataclasses.replace(m, radius=1e-3, min_flyby_alt=1e-3)
        for m in saturn.moons
    )
    return dataclasses.replace(saturn, moons=moons)


@pytest.fixture()
def endgame_bounds():
    inner = SearchBounds(0.0, 3000.0, 25)
    return {"Tethys": inner, "Enceladus": inner}


@pytest.fixture()
def endgame_databases(synthetic_db, endgame_bounds):
    """Coarse Tethys and Enceladus tables with fixed leg shapes."""
    shapes = {
        "Tethys": {ResonanceFamily(2, 1, 1, 1): (3.8, 100.0)},
        "Enceladus": {
            ResonanceFamily(3, 2, 1, 1): (2.1, 120.0),
            ResonanceFamily(2, 1, 1, 1): (2.7, 150.0),
        },
    }
    return {
        name: synthetic_db(
            name,
            list(shapes[name]),
            30.0,
            bounds=endgame_bounds[name],
            shapes=shapes[name],
        )
        for name in shapes
    }
