import dataclasses
import math

import pytest

from pumpdown.astro import (
    DAY,
    FlybyState,
    HyperbolicOrbit,
    RadiusOutOfRange,
    SearchBounds,
    SystemModel,
    circular_velocity,
    conic_from_flyby,
    crossing_velocity,
    flyby_altitude,
    max_bend_angle,
    mean_anomaly,
    sc_speed_after_flyby,
    time_from_periapsis,
    true_anomaly_at_radius,
)


def test_packaged_periods_follow_kepler(saturn):
    assert saturn.check_periods() == []


def test_transposed_rhea_period_is_flagged(saturn):
    moons = tuple(
        dataclasses.replace(m, period=4.152) if m.name == "Rhea" else m
        for m in saturn.moons
    )
    assert SystemModel(saturn.gm, moons).check_periods() == ["Rhea"]


def test_moon_order_is_enforced(saturn):
    with pytest.raises(ValueError):
        SystemModel(saturn.gm, tuple(reversed(saturn.moons)))


def test_search_bounds(bounds):
    assert bounds["Rhea"] == SearchBounds(650.0, 1900.0, 15)
    assert 650.0 in bounds["Rhea"]
    assert 1900.5 not in bounds["Rhea"]


@pytest.mark.parametrize(
    "moon, vinf, expected",
    [("Enceladus", 450.0, 13.075), ("Titan", 1460.0, 60.29)],
)
def test_max_bend_angle(saturn, moon, vinf, expected):
    bend = max_bend_angle(saturn.moon(moon), vinf)
    assert bend == pytest.approx(expected, abs=0.01)


def test_max_bend_shrinks_with_speed(saturn):
    moon = saturn.moon("Dione")
    bends = [max_bend_angle(moon, v) for v in (300.0, 600.0, 900.0)]
    assert bends == sorted(bends, reverse=True)


@pytest.mark.parametrize("moon", ["Titan", "Rhea", "Enceladus"])
def test_flyby_altitude_at_max_bend(saturn, moon):
    params = saturn.moon(moon)
    bend = max_bend_angle(params, 800.0)
    altitude = flyby_altitude(params, 800.0, bend)
    assert altitude == pytest.approx(params.min_flyby_alt, rel=1e-6)
    assert flyby_altitude(params, 800.0, bend / 2.0) > altitude


@pytest.mark.parametrize("bend", [0.0, 1e-4, -5e-4])
def test_flyby_without_bend_has_no_altitude(saturn, bend):
    assert flyby_altitude(saturn.moon("Rhea"), 900.0, bend) is None


def test_circular_velocity(saturn):
    assert circular_velocity(saturn.moon("Rhea"), saturn) == pytest.approx(
        8.483, abs=1e-3
    )


@pytest.mark.parametrize(
    "alpha, apse", [(0.0, "periapsis"), (180.0, "apoapsis")]
)
def test_tangential_flyby_leaves_moon_on_apse(saturn, alpha, apse):
    moon = saturn.moon("Tethys")
    orbit = conic_from_flyby(moon, saturn, FlybyState(700.0, alpha))
    assert getattr(orbit, apse) == pytest.approx(moon.a, rel=1e-9)


def test_pump_angle_sign_keeps_the_conic(saturn):
    moon = saturn.moon("Dione")
    outbound = conic_from_flyby(moon, saturn, FlybyState(800.0, 60.0))
    inbound = conic_from_flyby(moon, saturn, FlybyState(800.0, -60.0))
    assert outbound.a == pytest.approx(inbound.a)
    assert outbound.e == pytest.approx(inbound.e)


def test_fast_flyby_escapes(saturn):
    with pytest.raises(HyperbolicOrbit):
        conic_from_flyby(
            saturn.moon("Enceladus"), saturn, FlybyState(6000.0, 0.0)
        )


@pytest.mark.parametrize(
    "vinf, alpha", [(-1.0, 0.0), (100.0, 181.0), (100.0, -180.5)]
)
def test_flyby_state_validation(vinf, alpha):
    with pytest.raises(ValueError):
        FlybyState(vinf, alpha)


def test_true_anomaly_at_apses(saturn):
    moon = saturn.moon("Rhea")
    orbit = conic_from_flyby(moon, saturn, FlybyState(1500.0, 120.0))
    at_rp = true_anomaly_at_radius(orbit, orbit.periapsis)
    at_ra = true_anomaly_at_radius(orbit, orbit.apoapsis)
    assert at_rp.degrees == pytest.approx(0.0, abs=1e-4)
    assert at_ra.degrees == pytest.approx(180.0, abs=1e-4)
    with pytest.raises(RadiusOutOfRange):
        true_anomaly_at_radius(orbit, orbit.apoapsis * 1.01)


def test_half_period_to_apoapsis(saturn):
    moon = saturn.moon("Rhea")
    orbit = conic_from_flyby(moon, saturn, FlybyState(1500.0, 120.0))
    assert time_from_periapsis(orbit, 180.0) == pytest.approx(
        orbit.period / 2.0
    )
    assert time_from_periapsis(orbit, 179.999) == pytest.approx(
        orbit.period / 2.0, rel=1e-4
    )


@pytest.mark.parametrize("f", [0.5, 3.0, 7.0, 13.0, -4.0])
def test_mean_anomaly_circular_is_identity(f):
    assert mean_anomaly(f, 0.0) == pytest.approx(f)


def test_mean_anomaly_is_monotone_across_revolutions():
    values = [mean_anomaly(0.1 * i, 0.6) for i in range(200)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert mean_anomaly(2.0 * math.pi, 0.6) == pytest.approx(2.0 * math.pi)


@pytest.mark.parametrize(
    "moon", ["Titan", "Rhea", "Dione", "Tethys", "Enceladus"]
)
def test_model_period_round_trip(saturn, moon):
    params = saturn.moon(moon)
    period = saturn.moon_period(params)
    a = (saturn.gm * (period / (2.0 * math.pi)) ** 2) ** (1.0 / 3.0)
    assert a == pytest.approx(params.a, rel=1e-12)
    assert period / DAY == pytest.approx(params.period, rel=5e-3)


@pytest.mark.parametrize("f", [-2.5, 0.0, 1.0, 3.0])
@pytest.mark.parametrize("alpha", [30.0, 95.0, 160.0])
def test_one_revolution_takes_one_period(saturn, f, alpha):
    orbit = conic_from_flyby(
        saturn.moon("Dione"), saturn, FlybyState(800.0, alpha)
    )
    n = math.sqrt(saturn.gm / orbit.a ** 3)
    sweep = mean_anomaly(f + 2.0 * math.pi, orbit.e) - mean_anomaly(
        f, orbit.e
    )
    assert sweep / n == pytest.approx(orbit.period, rel=1e-12)


@pytest.mark.parametrize(
    "moon, vinf, alpha",
    [
        ("Titan", 1460.0, 50.0),
        ("Rhea", 1200.0, -120.0),
        ("Dione", 700.0, 90.0),
        ("Tethys", 600.0, 170.0),
        ("Enceladus", 400.0, -10.0),
    ],
)
def test_conic_satisfies_vis_viva(saturn, moon, vinf, alpha):
    params = saturn.moon(moon)
    orbit = conic_from_flyby(params, saturn, FlybyState(vinf, alpha))
    v_moon = circular_velocity(params, saturn)
    speed = sc_speed_after_flyby(v_moon, vinf / 1000.0, alpha)
    vis_viva = saturn.gm * (2.0 / params.a - 1.0 / orbit.a)
    assert speed * speed == pytest.approx(vis_viva, rel=1e-12)

    # The orbit crosses the moon's radius with the flyby's V-infinity.
    v_t, v_r = crossing_velocity(orbit, params.a)
    assert v_t * v_t + v_r * v_r == pytest.approx(vis_viva, rel=1e-9)
    assert math.hypot(v_t - v_moon, v_r) * 1000.0 == pytest.approx(
        vinf, rel=1e-6
    )
    cos_alpha = (v_t - v_moon) * 1000.0 / vinf
    assert math.degrees(math.acos(cos_alpha)) == pytest.approx(
        abs(alpha), abs=1e-4
    )


def test_crossing_velocity_outside_orbit(saturn):
    moon = saturn.moon("Rhea")
    orbit = conic_from_flyby(moon, saturn, FlybyState(900.0, 120.0))
    with pytest.raises(RadiusOutOfRange):
        crossing_velocity(orbit, orbit.periapsis * 0.9)
    v_t, v_r = crossing_velocity(orbit, orbit.apoapsis)
    assert v_r == pytest.approx(0.0, abs=1e-6)
    assert v_t == pytest.approx(orbit.h / orbit.apoapsis)
