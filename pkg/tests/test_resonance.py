import math

import numpy
import pytest
import scipy.optimize

from pumpdown.astro import DAY, FlybyState, conic_from_flyby
from pumpdown.resonance import (
    InfeasibleResonance,
    ResonanceFamily,
    ballistic_case1,
    ballistic_case2,
    enumerate_families,
    feasible_vinf_range,
    sample_pump_vinf_map,
    solve_ballistic,
    split_transfer_angle,
    tisserand_samples,
    tof_mismatch,
)


@pytest.mark.parametrize(
    "args", [(0, 1, 1, 1), (1, 0, 1, 1), (2, 1, 0, 1), (2, 1, 1, 2)]
)
def test_family_validation(args):
    with pytest.raises(ValueError):
        ResonanceFamily(*args)


@pytest.mark.parametrize(
    "family, correction",
    [
        ((2, 1, 1, 1), 0),
        ((2, 1, -1, -1), 0),
        ((1, 1, -1, 1), 0),
        ((1, 1, 1, -1), 1),
        ((1, 1, 1, 1), 1),
        ((1, 2, -1, -1), -1),
        ((3, 4, 1, 1), 1),
    ],
)
def test_periapsis_correction(family, correction):
    assert ResonanceFamily(*family).periapsis_correction == correction


def test_label():
    assert ResonanceFamily(2, 1, 1, 1).label == "2:1^{+,+}"
    assert ResonanceFamily(1, 1, -1, 1).label == "1:1^{-,+}"


def test_family_order():
    families = [
        ResonanceFamily(2, 1, 1, 1),
        ResonanceFamily(1, 1, 1, -1),
        ResonanceFamily(1, 1, -1, 1),
    ]
    assert [f.as_tuple() for f in sorted(families)] == [
        (1, 1, -1, 1),
        (1, 1, 1, -1),
        (2, 1, 1, 1),
    ]


def test_one_to_one_pump_angle(saturn):
    sol = ballistic_case1(
        ResonanceFamily(1, 1, 1, 1), saturn.moon("Rhea"), saturn, 900.0
    )
    assert sol.alpha == pytest.approx(93.04, abs=0.01)
    assert sol.tof == pytest.approx(saturn.moon("Rhea").period, rel=1e-3)


def test_one_to_one_pumps_outward_of_the_orbit(saturn, bounds):
    rhea = saturn.moon("Rhea")
    family = ResonanceFamily(1, 1, 1, 1)
    b = bounds["Rhea"]
    for vinf in range(int(b.vinf_min), int(b.vinf_max) + 1, 30):
        sol = ballistic_case1(family, rhea, saturn, float(vinf))
        assert 90.0 < sol.alpha < 180.0


def test_case1_sign_symmetry(saturn):
    rhea = saturn.moon("Rhea")
    plus = ballistic_case1(ResonanceFamily(2, 1, 1, 1), rhea, saturn, 1826.0)
    minus = ballistic_case1(
        ResonanceFamily(2, 1, -1, -1), rhea, saturn, 1826.0
    )
    assert minus.alpha == pytest.approx(plus.alpha)
    assert minus.tof == pytest.approx(plus.tof)


def test_two_to_one_pump_angle(saturn):
    rhea = saturn.moon("Rhea")
    family = ResonanceFamily(2, 1, 1, 1)
    sol = ballistic_case1(family, rhea, saturn, 1826.0)
    assert sol.alpha == pytest.approx(41.24, abs=0.01)
    assert sol.tof == pytest.approx(2.0 * rhea.period, rel=1e-3)
    floor, _ = feasible_vinf_range(family, rhea, saturn)
    assert floor == pytest.approx(1446.0, abs=1.0)
    with pytest.raises(InfeasibleResonance):
        ballistic_case1(family, rhea, saturn, floor - 10.0)


def test_case1_rejects_asymmetric(saturn):
    with pytest.raises(ValueError):
        ballistic_case1(
            ResonanceFamily(1, 1, 1, -1), saturn.moon("Rhea"), saturn, 900.0
        )


@pytest.mark.parametrize("p, q, tof", [(-1, 1, 6.51), (1, -1, 6.21)])
def test_asymmetric_one_to_one(saturn, p, q, tof):
    rhea = saturn.moon("Rhea")
    family = ResonanceFamily(1, 1, p, q)
    sol = ballistic_case2(family, rhea, saturn, 920.0)
    assert sol.tof == pytest.approx(tof, abs=0.05)
    assert 0.0 <= sol.alpha <= 180.0
    mismatch = tof_mismatch(family, rhea, saturn, 920.0, sol.alpha)
    assert abs(mismatch) < 1e-8


@pytest.mark.parametrize(
    "family, vinf",
    [
        ((2, 1, 1, 1), 1700.0),
        ((3, 2, 1, 1), 1700.0),
        ((1, 1, 1, 1), 1700.0),
        ((1, 1, -1, 1), 920.0),
        ((1, 1, 1, -1), 920.0),
    ],
)
def test_transfer_angle_split(saturn, family, vinf):
    family = ResonanceFamily(*family)
    sol = solve_ballistic(family, saturn.moon("Rhea"), saturn, vinf)
    theta1, theta2 = split_transfer_angle(sol)
    assert theta1 > 0.0 and theta2 > 0.0
    assert theta1 + theta2 == pytest.approx(sol.transfer_angle)
    if family.symmetric:
        assert sol.transfer_angle == pytest.approx(360.0 * family.n)


def test_enumerate_families(saturn, bounds):
    rhea = saturn.moon("Rhea")
    families = enumerate_families(rhea, saturn, bounds["Rhea"])
    assert families == sorted(families)
    assert {(1, 1, 1, 1), (1, 1, 1, -1), (1, 1, -1, 1)} <= {
        f.as_tuple() for f in families
    }
    for f in families:
        assert f.m <= 15
        if f.m != f.n:
            assert (f.p, f.q) == (1, 1)
            assert math.gcd(f.m, f.n) == 1
            lo, hi = feasible_vinf_range(f, rhea, saturn)
            assert lo <= 1900.0 and hi >= 650.0


def test_map_samples_skip_infeasible_points(saturn):
    rhea = saturn.moon("Rhea")
    family = ResonanceFamily(2, 1, 1, 1)
    samples = sample_pump_vinf_map(
        rhea, saturn, [family], [1900.0, 1000.0, 1500.0]
    )
    assert [s.vinf for s in samples] == [1500.0, 1900.0]
    for s in tisserand_samples(rhea, saturn, samples):
        assert s.periapsis <= rhea.a <= s.apoapsis


def test_map_without_families_is_empty(saturn):
    rhea = saturn.moon("Rhea")
    assert sample_pump_vinf_map(rhea, saturn, [], [900.0, 930.0]) == []


@pytest.mark.parametrize(
    "moon", ["Titan", "Rhea", "Dione", "Tethys", "Enceladus"]
)
def test_case1_orbit_closes_the_resonance(saturn, bounds, moon):
    params = saturn.moon(moon)
    b = bounds[moon]
    rng = numpy.random.default_rng(17)
    period = saturn.moon_period(params)
    for family in enumerate_families(params, saturn, b):
        if not family.symmetric:
            continue
        lo, hi = feasible_vinf_range(family, params, saturn)
        lo, hi = max(lo, b.vinf_min), min(hi, b.vinf_max)
        if lo >= hi:
            continue
        for vinf in rng.uniform(lo, hi, 10):
            sol = ballistic_case1(family, params, saturn, vinf)
            assert sol.tof * DAY == pytest.approx(family.m * period, rel=1e-9)
            orbit = conic_from_flyby(
                params, saturn, FlybyState(vinf, sol.alpha)
            )
            assert family.n * orbit.period == pytest.approx(
                family.m * period, rel=1e-9
            )


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("p, q", [(1, -1), (-1, 1)])
def test_case2_root_matches_bisection(saturn, seed, p, q):
    rhea = saturn.moon("Rhea")
    family = ResonanceFamily(1, 1, p, q)
    vinf = numpy.random.default_rng(seed).uniform(850.0, 1000.0)
    sol = ballistic_case2(family, rhea, saturn, vinf)

    def mismatch(alpha):
        return tof_mismatch(family, rhea, saturn, vinf, alpha)

    root = scipy.optimize.bisect(
        mismatch, sol.alpha - 1.0, sol.alpha + 1.0, xtol=1e-10
    )
    assert sol.alpha == pytest.approx(root, abs=1e-6)


def test_one_to_one_variants_form_three_bands(saturn):
    rhea = saturn.moon("Rhea")
    variants = {
        (-1, 1): 85.0,
        (1, 1): 90.0,
        (1, -1): 105.0,
    }
    families = [ResonanceFamily(1, 1, p, q) for p, q in variants]
    speeds = [860.0, 920.0, 980.0]
    samples = sample_pump_vinf_map(rhea, saturn, families, speeds)
    assert len(samples) == len(families) * len(speeds)

    curves = {}
    for s in samples:
        curves.setdefault((s.family.p, s.family.q), {})[s.vinf] = s.alpha
    for vinf in speeds:
        alphas = [curves[key][vinf] for key in variants]
        assert alphas == sorted(alphas)
    for key, centre in variants.items():
        assert curves[key][920.0] == pytest.approx(centre, abs=6.0)
