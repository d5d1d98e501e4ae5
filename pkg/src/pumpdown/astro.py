"""Keplerian primitives and Saturn-system constants.

Units: interfaces that mirror tour tables take V-infinity in m/s and angles in
degrees. The low-level conic helpers (``sc_speed_after_flyby`` and friends)
work in km, km/s and degrees, like the rest of the dynamics.
"""

__all__ = [
    # Exceptions.
    "HyperbolicOrbit",
    "RadiusOutOfRange",
    # Types.
    "ConicOrbit",
    "FlybyState",
    "MoonParams",
    "SearchBounds",
    "SystemModel",
    "TrueAnomaly",
    # Functionalities.
    "DAY",
    "DEFAULT_GM_SATURN",
    "MOON_NAMES",
    "NEGLIGIBLE_BEND",
    "apsides_from_flyby",
    "circular_velocity",
    "conic_from_flyby",
    "crossing_velocity",
    "flyby_altitude",
    "load_bounds",
    "load_system",
    "max_bend_angle",
    "mean_anomaly",
    "sc_angular_momentum",
    "sc_speed_after_flyby",
    "time_from_periapsis",
    "true_anomaly_at_radius",
]

import configparser
import dataclasses
import importlib.resources
import math
import typing


DAY = 86400.0

DEFAULT_GM_SATURN = 37931207.0

MOON_NAMES = ("Titan", "Rhea", "Dione", "Tethys", "Enceladus")

# Relative tolerance of the tabulated periods against Kepler's third law.
_PERIOD_TOLERANCE = 0.005

# Below this eccentricity the true anomaly of a radius is undefined.
_CIRCULAR_ECCENTRICITY = 1e-12


@dataclasses.dataclass()
class HyperbolicOrbit(Exception):
    speed: float
    escape: float


@dataclasses.dataclass()
class RadiusOutOfRange(Exception):
    radius: float
    periapsis: float
    apoapsis: float


@dataclasses.dataclass(frozen=True)
class MoonParams:
    """One row of the moon table.

    ``a`` and ``radius`` are in km, ``period`` in days, ``gm`` in km^3/s^2 and
    ``min_flyby_alt`` in km. ``e`` and ``i`` are stored but the dynamics treat
    every moon as circular and coplanar.
    """

    name: str
    a: float
    e: float
    i: float
    radius: float
    period: float
    gm: float
    min_flyby_alt: float

    def __post_init__(self):
        if self.name not in MOON_NAMES:
            raise ValueError(f"unknown moon {self.name!r}")
        positive = ("a", "radius", "period", "gm", "min_flyby_alt")
        for field in positive:
            if not getattr(self, field) > 0.0:
                raise ValueError(f"{self.name}.{field} must be positive")
        if self.e < 0.0 or self.i < 0.0:
            raise ValueError(f"{self.name}: e and i must be non-negative")

    @property
    def bend_parameter(self) -> float:
        """Flyby parameter ``(r_M + min altitude) / GM`` in s^2/km^2."""
        return (self.radius + self.min_flyby_alt) / self.gm


@dataclasses.dataclass(frozen=True)
class SearchBounds:
    """Search domain of one moon: V-infinity in m/s and max M."""

    vinf_min: float
    vinf_max: float
    max_m: int

    def __post_init__(self):
        if not 0.0 <= self.vinf_min < self.vinf_max:
            raise ValueError(f"bad V-infinity bounds {self!r}")
        if self.max_m < 1:
            raise ValueError(f"bad max M {self.max_m!r}")

    def __contains__(self, vinf: float) -> bool:
        return self.vinf_min <= vinf <= self.vinf_max


@dataclasses.dataclass(frozen=True)
class SystemModel:
    gm: float
    moons: typing.Tuple[MoonParams, ...]

    def __post_init__(self):
        if not self.gm > 0.0:
            raise ValueError("GM of Saturn must be positive")
        if tuple(m.name for m in self.moons) != MOON_NAMES:
            raise ValueError("expected the five moons from Titan inwards")
        for outer, inner in zip(self.moons, self.moons[1:]):
            if not outer.a > inner.a:
                raise ValueError(f"{outer.name} inside {inner.name}")
        if any(m.gm * 1e3 > self.gm for m in self.moons):
            raise ValueError("moon GM not negligible against Saturn")

    def moon(self, name: str) -> MoonParams:
        return self.moons[self.index(name)]

    def index(self, name: str) -> int:
        try:
            return MOON_NAMES.index(name)
        except ValueError:
            raise KeyError(name) from None

    def moon_period(self, moon: MoonParams) -> float:
        """Model orbital period of a moon in seconds."""
        return 2.0 * math.pi * math.sqrt(moon.a ** 3 / self.gm)

    def period_mismatch(self, moon: MoonParams) -> float:
        """Relative gap between the tabulated and the model period."""
        model = self.moon_period(moon) / DAY
        return abs(model - moon.period) / moon.period

    def check_periods(self) -> typing.List[str]:
        """Names of moons whose tabulated period fails Kepler's third law."""
        return [
            m.name
            for m in self.moons
            if self.period_mismatch(m) > _PERIOD_TOLERANCE
        ]


@dataclasses.dataclass(frozen=True)
class ConicOrbit:
    """Elliptic spacecraft orbit about Saturn (km, km^2/s)."""

    a: float
    e: float
    h: float
    gm: float

    def __post_init__(self):
        if not self.a > 0.0:
            raise ValueError(f"orbit must be elliptic, got a={self.a!r}")
        if not 0.0 <= self.e < 1.0:
            raise ValueError(f"eccentricity out of range: {self.e!r}")
        expected = self.gm * self.a * (1.0 - self.e * self.e)
        if abs(self.h * self.h - expected) > 1e-9 * expected:
            raise ValueError("angular momentum inconsistent with a and e")

    @property
    def periapsis(self) -> float:
        return self.a * (1.0 - self.e)

    @property
    def apoapsis(self) -> float:
        return self.a * (1.0 + self.e)

    @property
    def semilatus(self) -> float:
        return self.h * self.h / self.gm

    @property
    def period(self) -> float:
        return 2.0 * math.pi * math.sqrt(self.a ** 3 / self.gm)


@dataclasses.dataclass(frozen=True)
class FlybyState:
    """Encounter state: V-infinity in m/s, signed pump angle in degrees.

    Positive pump angles are outbound encounters (radial V-infinity component
    away from Saturn), negative ones inbound.
    """

    vinf: float
    alpha: float

    def __post_init__(self):
        if self.vinf < 0.0:
            raise ValueError(f"negative V-infinity {self.vinf!r}")
        if abs(self.alpha) > 180.0:
            raise ValueError(f"pump angle out of range {self.alpha!r}")

    @property
    def direction(self) -> int:
        return 1 if self.alpha >= 0.0 else -1


class TrueAnomaly(typing.NamedTuple):
    degrees: float
    circular: bool


def circular_velocity(moon: MoonParams, sys: SystemModel) -> float:
    """Circular orbit speed of the moon in km/s."""
    return math.sqrt(sys.gm / moon.a)


def sc_speed_after_flyby(v_moon: float, vinf: float, alpha: float) -> float:
    """Spacecraft speed from the law of cosines (km/s in, km/s out)."""
    if vinf < 0.0:
        raise ValueError(f"negative V-infinity {vinf!r}")
    c = math.cos(math.radians(alpha))
    return math.sqrt(v_moon * v_moon + vinf * vinf + 2.0 * v_moon * vinf * c)


def sc_angular_momentum(
    r_moon: float, v_moon: float, vinf: float, alpha: float
) -> float:
    return r_moon * (v_moon + vinf * math.cos(math.radians(alpha)))


def conic_from_flyby(
    moon: MoonParams, sys: SystemModel, state: FlybyState
) -> ConicOrbit:
    r = moon.a
    v_moon = circular_velocity(moon, sys)
    vinf = state.vinf / 1000.0
    speed = sc_speed_after_flyby(v_moon, vinf, state.alpha)
    escape = math.sqrt(2.0 * sys.gm / r)
    if speed >= escape:
        raise HyperbolicOrbit(speed, escape)
    a = 1.0 / (2.0 / r - speed * speed / sys.gm)
    h = sc_angular_momentum(r, v_moon, vinf, state.alpha)
    e_squared = 1.0 - h * h / (a * sys.gm)
    # Round-off can push a circular orbit a hair below zero.
    e = math.sqrt(max(e_squared, 0.0))
    h = math.copysign(math.sqrt(sys.gm * a * (1.0 - e * e)), h)
    return ConicOrbit(a=a, e=e, h=h, gm=sys.gm)


def apsides_from_flyby(
    moon: MoonParams, sys: SystemModel, state: FlybyState
) -> typing.Tuple[float, float]:
    """Periapsis and apoapsis radii (km) of the post-flyby orbit."""
    orbit = conic_from_flyby(moon, sys, state)
    return orbit.periapsis, orbit.apoapsis


def max_bend_angle(moon: MoonParams, vinf: float) -> float:
    """Largest V-infinity rotation (deg) of one flyby at ``vinf`` m/s."""
    if vinf < 0.0:
        raise ValueError(f"negative V-infinity {vinf!r}")
    v = vinf / 1000.0
    return math.degrees(
        2.0 * math.asin(1.0 / (1.0 + moon.bend_parameter * v * v))
    )


# Smaller bends need no flyby: the V-infinity direction is already right.
NEGLIGIBLE_BEND = 1e-3  # deg


def flyby_altitude(
    moon: MoonParams, vinf: float, bend: float
) -> typing.Optional[float]:
    """Altitude (km) at which a flyby at ``vinf`` m/s bends by ``bend`` deg.

    This inverts the bend-angle bound: the result is at least the moon's
    minimum flyby altitude whenever ``bend`` is achievable. A negligible bend
    gives None since no finite altitude produces it.
    """
    if abs(bend) < NEGLIGIBLE_BEND:
        return None
    v = vinf / 1000.0
    if v <= 0.0:
        return moon.min_flyby_alt
    bend = min(abs(bend), 180.0)
    s = math.sin(math.radians(bend) / 2.0)
    rp = moon.gm / (v * v) * (1.0 / s - 1.0)
    return max(rp - moon.radius, moon.min_flyby_alt)


def true_anomaly_at_radius(orbit: ConicOrbit, r: float) -> TrueAnomaly:
    """Principal true anomaly (deg, in [0, 180]) where the orbit reaches r."""
    rp, ra = orbit.periapsis, orbit.apoapsis
    slack = 1e-9 * ra
    if not rp - slack <= r <= ra + slack:
        raise RadiusOutOfRange(r, rp, ra)
    if orbit.e < _CIRCULAR_ECCENTRICITY:
        return TrueAnomaly(0.0, True)
    c = (orbit.semilatus / r - 1.0) / orbit.e
    c = min(1.0, max(-1.0, c))
    return TrueAnomaly(math.degrees(math.acos(c)), False)


def mean_anomaly(f: float, e: float) -> float:
    """Unwrapped mean anomaly (rad) for an unwrapped true anomaly f (rad).

    Continuous and monotone in f across any number of revolutions.
    """
    k = math.floor((f + math.pi) / (2.0 * math.pi))
    w = f - 2.0 * math.pi * k
    big_e = 2.0 * math.atan2(
        math.sqrt(1.0 - e) * math.sin(w / 2.0),
        math.sqrt(1.0 + e) * math.cos(w / 2.0),
    )
    return big_e - e * math.sin(big_e) + 2.0 * math.pi * k


def time_from_periapsis(
    orbit: ConicOrbit, f: float, gm: typing.Optional[float] = None
) -> float:
    """Seconds from periapsis to true anomaly ``f`` (deg, in [-180, 180])."""
    if gm is None:
        gm = orbit.gm
    if f >= 180.0:
        return orbit.period / 2.0
    if f <= -180.0:
        return -orbit.period / 2.0
    n = math.sqrt(gm / orbit.a ** 3)
    return mean_anomaly(math.radians(f), orbit.e) / n


def crossing_velocity(
    orbit: ConicOrbit, r: float
) -> typing.Tuple[float, float]:
    """Transverse and radial speed magnitudes (km/s) at radius r."""
    if not orbit.periapsis * (1 - 1e-12) <= r <= orbit.apoapsis * (1 + 1e-12):
        raise RadiusOutOfRange(r, orbit.periapsis, orbit.apoapsis)
    v_t = orbit.h / r
    v_squared = orbit.gm * (2.0 / r - 1.0 / orbit.a)
    return v_t, math.sqrt(max(v_squared - v_t * v_t, 0.0))


def _read_constants() -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    # Keep moon names as written; configparser lowercases keys otherwise.
    parser.optionxform = str  # type: ignore
    text = importlib.resources.read_text("pumpdown.data", "saturn.ini")
    parser.read_string(text)
    return parser


def load_system(gm: typing.Optional[float] = None) -> SystemModel:
    """Build the system model from the packaged constants file."""
    parser = _read_constants()
    moons = tuple(
        MoonParams(
            name=name,
            a=parser.getfloat(name, "a"),
            e=parser.getfloat(name, "e"),
            i=parser.getfloat(name, "i"),
            radius=parser.getfloat(name, "radius"),
            period=parser.getfloat(name, "period"),
            gm=parser.getfloat(name, "gm"),
            min_flyby_alt=parser.getfloat(name, "min_flyby_alt"),
        )
        for name in MOON_NAMES
    )
    if gm is None:
        gm = parser.getfloat("saturn", "gm")
    return SystemModel(gm=gm, moons=moons)


def load_bounds() -> typing.Dict[str, SearchBounds]:
    parser = _read_constants()
    bounds = {}
    for name in MOON_NAMES:
        vmin, vmax, max_m = (
            v.strip() for v in parser.get("bounds", name).split(",")
        )
        bounds[name] = SearchBounds(float(vmin), float(vmax), int(max_m))
    return bounds
