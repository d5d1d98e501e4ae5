"""Ballistic resonant transfers and pump-V-infinity map sampling.

A resonance family [M, N, p, q] re-encounters the same moon after M moon
revolutions and about N spacecraft revolutions, departing inbound (p = -1) or
outbound (p = +1) and arriving likewise (q). Symmetric families (p = q) have a
closed-form pump angle; the others are solved by matching the spacecraft and
moon flight times.
"""

__all__ = [
    # Exceptions.
    "InfeasibleResonance",
    "NoConvergence",
    # Types.
    "BallisticSolution",
    "MapSample",
    "ResonanceFamily",
    "TisserandSample",
    # Functionalities.
    "ballistic_case1",
    "ballistic_case2",
    "enumerate_families",
    "feasible_vinf_range",
    "sample_pump_vinf_map",
    "solve_ballistic",
    "split_transfer_angle",
    "tisserand_samples",
    "tof_mismatch",
]

import dataclasses
import math
import typing

import scipy.optimize

from .astro import (
    DAY,
    FlybyState,
    HyperbolicOrbit,
    MoonParams,
    SearchBounds,
    SystemModel,
    apsides_from_flyby,
    circular_velocity,
    mean_anomaly,
)


_NEWTON_MAX_ITERATIONS = 50

_NEWTON_STEP = 1e-7  # rad, central difference

_RESIDUAL_TOLERANCE = 1e-9  # days

# Pump angle samples used to bracket a root when Newton gives up.
_BRACKET_SAMPLES = 721


@dataclasses.dataclass(frozen=True, order=True)
class ResonanceFamily:
    m: int
    n: int
    p: int
    q: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"M and N must be positive: {self!r}")
        if self.p not in (-1, 1) or self.q not in (-1, 1):
            raise ValueError(f"p and q must be +1 or -1: {self!r}")

    @property
    def exterior(self) -> bool:
        return self.m > self.n

    @property
    def interior(self) -> bool:
        return self.m < self.n

    @property
    def symmetric(self) -> bool:
        return self.p == self.q

    @property
    def periapsis_correction(self) -> int:
        """Revolution correction counting the periapses actually crossed."""
        if self.m > self.n:
            return 0
        if self.m == self.n and (self.p, self.q) == (-1, 1):
            return 0
        return self.p

    @property
    def label(self) -> str:
        def sign(v):
            return "+" if v > 0 else "-"

        return f"{self.m}:{self.n}^{{{sign(self.p)},{sign(self.q)}}}"

    def as_tuple(self) -> typing.Tuple[int, int, int, int]:
        return (self.m, self.n, self.p, self.q)


@dataclasses.dataclass()
class InfeasibleResonance(Exception):
    family: ResonanceFamily
    vinf: float


@dataclasses.dataclass()
class NoConvergence(Exception):
    family: ResonanceFamily
    vinf: float
    iterations: int


@dataclasses.dataclass(frozen=True)
class BallisticSolution:
    """Ballistic leg: V-infinity in m/s, angles in degrees, ToF in days.

    ``alpha`` is the unsigned pump angle shared by departure and arrival, and
    ``f`` the unsigned true anomaly of the encounters.
    """

    family: ResonanceFamily
    vinf: float
    alpha: float
    tof: float
    f: float
    theta1: float
    theta2: float
    delta: int

    @property
    def transfer_angle(self) -> float:
        return self.theta1 + self.theta2


class MapSample(typing.NamedTuple):
    family: ResonanceFamily
    vinf: float
    alpha: float
    tof: float


class TisserandSample(typing.NamedTuple):
    family: ResonanceFamily
    vinf: float
    periapsis: float
    apoapsis: float


class _Encounter(typing.NamedTuple):
    a: float
    e: float
    f: float  # rad


def _encounter(
    alpha: float, v_moon: float, vinf: float, r: float, gm: float
) -> _Encounter:
    """Orbit through the moon for a pump angle in radians (km, km/s)."""
    c = math.cos(alpha)
    speed_squared = v_moon * v_moon + vinf * vinf + 2.0 * v_moon * vinf * c
    inverse_a = 2.0 / r - speed_squared / gm
    if inverse_a <= 0.0:
        raise HyperbolicOrbit(math.sqrt(speed_squared), math.sqrt(2 * gm / r))
    a = 1.0 / inverse_a
    h = r * (v_moon + vinf * c)
    semilatus = h * h / gm
    e = math.sqrt(max(1.0 - semilatus / a, 0.0))
    if e < 1e-12:
        return _Encounter(a, e, 0.0)
    cos_f = min(1.0, max(-1.0, (semilatus / r - 1.0) / e))
    return _Encounter(a, e, math.acos(cos_f))


def _angles(
    family: ResonanceFamily, f: float
) -> typing.Tuple[float, float, float]:
    """Total transfer angle and its split (deg) for true anomaly f (deg)."""
    delta = family.periapsis_correction
    fp = family.p * f
    if family.symmetric:
        total = 360.0 * family.n
    else:
        total = 360.0 * (family.n + delta) + family.q * f - fp
    theta1 = 180.0 * (1 + delta + 2 * (family.n // 2)) - fp
    return total, theta1, total - theta1


def feasible_vinf_range(
    family: ResonanceFamily, moon: MoonParams, sys: SystemModel
) -> typing.Tuple[float, float]:
    """V-infinity interval (m/s) where the M:N resonance can be realised.

    The lower end sits at alpha = 0 for exterior families and at alpha = 180
    for interior ones. Asymmetric families share the interval of their
    symmetric M:N counterpart, which seeds their solution.
    """
    r = moon.a
    v_moon = circular_velocity(moon, sys)
    a = r * (family.m / family.n) ** (2.0 / 3.0)
    speed_squared = sys.gm * (2.0 / r - 1.0 / a)
    if speed_squared <= 0.0:
        return (math.inf, math.inf)
    speed = math.sqrt(speed_squared)
    return (abs(speed - v_moon) * 1000.0, (speed + v_moon) * 1000.0)


def ballistic_case1(
    family: ResonanceFamily,
    moon: MoonParams,
    sys: SystemModel,
    vinf: float,
) -> BallisticSolution:
    """Closed-form ballistic leg of a symmetric (p = q) family."""
    if not family.symmetric:
        raise ValueError(f"family {family.label} is not symmetric")
    r = moon.a
    v_moon = circular_velocity(moon, sys)
    v = vinf / 1000.0
    a = r * (family.m / family.n) ** (2.0 / 3.0)
    speed_squared = sys.gm * (2.0 / r - 1.0 / a)
    if v <= 0.0 or speed_squared <= 0.0:
        raise InfeasibleResonance(family, vinf)
    c = (speed_squared - v_moon * v_moon - v * v) / (2.0 * v_moon * v)
    if abs(c) > 1.0:
        raise InfeasibleResonance(family, vinf)
    alpha = math.acos(c)
    encounter = _encounter(alpha, v_moon, v, r, sys.gm)
    f = math.degrees(encounter.f)
    _, theta1, theta2 = _angles(family, f)
    return BallisticSolution(
        family=family,
        vinf=vinf,
        alpha=math.degrees(alpha),
        tof=family.m * sys.moon_period(moon) / DAY,
        f=f,
        theta1=theta1,
        theta2=theta2,
        delta=family.periapsis_correction,
    )


def _flight_times(
    family: ResonanceFamily,
    moon: MoonParams,
    sys: SystemModel,
    vinf: float,
    alpha: float,
) -> typing.Tuple[float, float, float]:
    """Spacecraft and moon flight times (days) and f (rad) at alpha (rad)."""
    r = moon.a
    v_moon = circular_velocity(moon, sys)
    encounter = _encounter(alpha, v_moon, vinf / 1000.0, r, sys.gm)
    delta = family.periapsis_correction
    fp = family.p * encounter.f
    fq = family.q * encounter.f
    e = encounter.e
    n_sc = math.sqrt(sys.gm / encounter.a ** 3)
    revs = 2.0 * math.pi * (family.n + delta)
    t_sc = (revs + mean_anomaly(fq, e) - mean_anomaly(fp, e)) / n_sc
    sweep = 2.0 * math.pi * (family.m + delta) + fq - fp
    t_moon = sweep * r / v_moon
    return t_sc / DAY, t_moon / DAY, encounter.f


def tof_mismatch(
    family: ResonanceFamily,
    moon: MoonParams,
    sys: SystemModel,
    vinf: float,
    alpha: float,
) -> float:
    """Spacecraft minus moon flight time (days) at pump angle ``alpha`` deg."""
    t_sc, t_moon, _ = _flight_times(
        family, moon, sys, vinf, math.radians(alpha)
    )
    return t_sc - t_moon


def _bracketed_root(
    residual: typing.Callable[[float], float], seed: float
) -> typing.Optional[float]:
    """Root of ``residual`` on (0, pi) in the sign change closest to seed."""
    grid = [
        math.pi * (i + 0.5) / _BRACKET_SAMPLES for i in range(_BRACKET_SAMPLES)
    ]
    values = []
    for x in grid:
        try:
            values.append(residual(x))
        except HyperbolicOrbit:
            values.append(math.nan)
    brackets = [
        (lo, hi)
        for lo, hi, v_lo, v_hi in zip(grid, grid[1:], values, values[1:])
        if not (math.isnan(v_lo) or math.isnan(v_hi)) and v_lo * v_hi <= 0.0
    ]
    if not brackets:
        return None
    lo, hi = min(brackets, key=lambda b: abs(0.5 * (b[0] + b[1]) - seed))
    return scipy.optimize.brentq(residual, lo, hi, xtol=1e-15, maxiter=200)


def ballistic_case2(
    family: ResonanceFamily,
    moon: MoonParams,
    sys: SystemModel,
    vinf: float,
) -> BallisticSolution:
    """Ballistic leg of an asymmetric (p != q) family by root finding.

    Newton's method on the flight-time mismatch, seeded with the symmetric
    solution of the same M:N; a bracketing pass takes over if Newton fails.
    """
    if family.symmetric:
        raise ValueError(f"family {family.label} is symmetric")
    seed_family = ResonanceFamily(family.m, family.n, 1, 1)
    seed = math.radians(ballistic_case1(seed_family, moon, sys, vinf).alpha)

    def residual(alpha: float) -> float:
        t_sc, t_moon, _ = _flight_times(family, moon, sys, vinf, alpha)
        return t_sc - t_moon

    def derivative(alpha: float) -> float:
        step = _NEWTON_STEP
        return (residual(alpha + step) - residual(alpha - step)) / (2 * step)

    def converged(alpha: typing.Optional[float]) -> bool:
        if alpha is None or not 0.0 <= alpha <= math.pi:
            return False
        try:
            return abs(residual(alpha)) <= _RESIDUAL_TOLERANCE
        except HyperbolicOrbit:
            return False

    root: typing.Optional[float]
    try:
        root = scipy.optimize.newton(
            residual,
            seed,
            fprime=derivative,
            tol=1e-13,
            maxiter=_NEWTON_MAX_ITERATIONS,
        )
    except (RuntimeError, HyperbolicOrbit, ZeroDivisionError):
        root = None
    if not converged(root):
        root = _bracketed_root(residual, seed)
    if root is None or not converged(root):
        raise NoConvergence(family, vinf, _NEWTON_MAX_ITERATIONS)

    _, t_moon, f = _flight_times(family, moon, sys, vinf, root)
    f = math.degrees(f)
    _, theta1, theta2 = _angles(family, f)
    return BallisticSolution(
        family=family,
        vinf=vinf,
        alpha=math.degrees(root),
        tof=t_moon,
        f=f,
        theta1=theta1,
        theta2=theta2,
        delta=family.periapsis_correction,
    )


def solve_ballistic(
    family: ResonanceFamily,
    moon: MoonParams,
    sys: SystemModel,
    vinf: float,
) -> BallisticSolution:
    if family.symmetric:
        return ballistic_case1(family, moon, sys, vinf)
    return ballistic_case2(family, moon, sys, vinf)


def split_transfer_angle(
    sol: BallisticSolution,
) -> typing.Tuple[float, float]:
    """Transfer angles (deg) before and after the leveraging maneuver.

    The maneuver sits on an apse of the middle revolution: apoapsis for
    exterior legs, periapsis for interior ones.
    """
    _, theta1, theta2 = _angles(sol.family, sol.f)
    if theta1 <= 0.0 or theta2 <= 0.0:
        raise ValueError(f"degenerate split for {sol.family.label}")
    return theta1, theta2


def enumerate_families(
    moon: MoonParams, sys: SystemModel, bounds: SearchBounds
) -> typing.List[ResonanceFamily]:
    """Families searched at a moon, sorted by (M, N, p, q).

    Only p = q = +1 is kept for M != N since the four sign variants nearly
    overlap in |alpha|; the 1:1 resonance keeps its three distinct variants.
    """
    families = []
    for m in range(1, bounds.max_m + 1):
        # Orbits with M/N below 2^(-3/2) cannot reach the moon's radius.
        for n in range(1, 3 * m + 1):
            if m == n or math.gcd(m, n) != 1:
                continue
            family = ResonanceFamily(m, n, 1, 1)
            lo, hi = feasible_vinf_range(family, moon, sys)
            if lo <= bounds.vinf_max and hi >= bounds.vinf_min:
                families.append(family)
    families.extend(
        ResonanceFamily(1, 1, p, q) for p, q in [(1, 1), (1, -1), (-1, 1)]
    )
    return sorted(families)


def sample_pump_vinf_map(
    moon: MoonParams,
    sys: SystemModel,
    families: typing.Iterable[ResonanceFamily],
    vinf_grid: typing.Iterable[float],
) -> typing.List[MapSample]:
    """Ballistic (|alpha|, ToF) samples of each family across the grid."""
    grid = sorted(vinf_grid)
    samples = []
    for family in families:
        for vinf in grid:
            try:
                sol = solve_ballistic(family, moon, sys, vinf)
            except (InfeasibleResonance, NoConvergence):
                continue
            samples.append(MapSample(family, vinf, sol.alpha, sol.tof))
    samples.sort(key=lambda s: (s.family.as_tuple(), s.vinf))
    return samples


def tisserand_samples(
    moon: MoonParams, sys: SystemModel, samples: typing.Iterable[MapSample]
) -> typing.List[TisserandSample]:
    """Map samples re-expressed as (periapsis, apoapsis) radii in km."""
    result = []
    for s in samples:
        state = FlybyState(s.vinf, s.family.p * s.alpha)
        rp, ra = apsides_from_flyby(moon, sys, state)
        result.append(TisserandSample(s.family, s.vinf, rp, ra))
    return result
