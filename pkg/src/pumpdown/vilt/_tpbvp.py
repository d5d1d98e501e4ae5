"""Single-impulse multi-revolution leg solver.

The leg is split at one impulsive maneuver: a forward arc from the departure
flyby sweeps ``theta1`` and a backward arc from the arrival flyby sweeps
``theta2``. Both arcs are planar two-body conics. The solver works in moon
units (the moon's orbit radius, circular speed and GM of Saturn are all one,
so the moon's longitude equals time).
"""

__all__ = [
    "LegProblem",
    "OptimalLeg",
    "SeedInfeasible",
    "SolverDiverged",
    "solve_leg",
]

import dataclasses
import logging
import math
import typing

import scipy.optimize

from ..astro import DAY, MoonParams, SystemModel, circular_velocity
from ..astro import mean_anomaly
from ..resonance import (
    InfeasibleResonance,
    NoConvergence,
    ResonanceFamily,
    feasible_vinf_range,
    solve_ballistic,
    split_transfer_angle,
)


logger = logging.getLogger(__name__)


POSITION_TOLERANCE = 1.0  # km

TIME_TOLERANCE = 1e-6  # days

# Objective is |dv|^2 in units of this many moon speeds.
_DV_SCALE = 1e-3

_PENALTY_WEIGHT = 1e8


@dataclasses.dataclass()
class SeedInfeasible(Exception):
    family: ResonanceFamily
    vinf: float
    reason: str


@dataclasses.dataclass()
class SolverDiverged(Exception):
    family: ResonanceFamily
    vinf: float
    delta_vinf: float
    position_error: float
    time_error: float


@dataclasses.dataclass(frozen=True)
class LegProblem:
    """A leg of ``family`` about ``vinf`` (m/s) split by ``delta_vinf``.

    The flyby speeds are ``vinf + delta_vinf`` at departure and
    ``vinf - delta_vinf`` at arrival.
    """

    family: ResonanceFamily
    moon: MoonParams
    sys: SystemModel
    vinf: float
    delta_vinf: float = 0.0

    def __post_init__(self):
        if self.vinf_dep < 0.0 or self.vinf_arr < 0.0:
            raise ValueError(
                f"split V-infinity must be non-negative: "
                f"{self.vinf_dep!r}, {self.vinf_arr!r}"
            )

    @property
    def vinf_dep(self) -> float:
        return self.vinf + self.delta_vinf

    @property
    def vinf_arr(self) -> float:
        return self.vinf - self.delta_vinf


@dataclasses.dataclass(frozen=True)
class OptimalLeg:
    """Solved leg. Angles in degrees (pump angles signed), times in days,
    speeds in m/s, residual position error in km.
    """

    family: ResonanceFamily
    vinf_dep: float
    vinf_arr: float
    theta1: float
    theta2: float
    alpha_dep: float
    alpha_arr: float
    tof: float
    dv: float
    dt1: float
    dt2: float
    position_error: float
    time_error: float


class _Unbound(Exception):
    pass


class _ArcEnd(typing.NamedTuple):
    x: float
    y: float
    vx: float
    vy: float
    dt: float


def _propagate(
    vr: float, vt: float, start: float, sweep: float
) -> _ArcEnd:
    """Follow the conic through (r=1, longitude ``start``) by ``sweep`` rad.

    Returns the Cartesian end state and the signed time taken.
    """
    h = vt
    energy = 0.5 * (vr * vr + vt * vt) - 1.0
    if energy >= 0.0 or h <= 0.0:
        raise _Unbound()
    a = -0.5 / energy
    e_cos = h * h - 1.0
    e_sin = h * vr
    e = math.hypot(e_cos, e_sin)
    f0 = math.atan2(e_sin, e_cos)
    f1 = f0 + sweep
    r = h * h / (1.0 + e * math.cos(f1))
    radial = e * math.sin(f1) / h
    transverse = h / r
    dt = (mean_anomaly(f1, e) - mean_anomaly(f0, e)) * a ** 1.5

    lon = start + sweep
    c, s = math.cos(lon), math.sin(lon)
    return _ArcEnd(
        x=r * c,
        y=r * s,
        vx=radial * c - transverse * s,
        vy=radial * s + transverse * c,
        dt=dt,
    )


class _Evaluation(typing.NamedTuple):
    dv: float
    residuals: typing.Tuple[float, float, float]
    dt1: float
    dt2: float


class _Leg:
    """Objective and constraints over (theta1, theta2, a_dep, a_arr, t_f)."""

    def __init__(self, v_dep: float, v_arr: float) -> None:
        self.v_dep = v_dep
        self.v_arr = v_arr
        self._last: typing.Optional[typing.Tuple[float, ...]] = None
        self._value: typing.Optional[_Evaluation] = None

    def evaluate(self, x) -> _Evaluation:
        key = tuple(float(v) for v in x)
        if key == self._last and self._value is not None:
            return self._value
        theta1, theta2, a_dep, a_arr, t_f = key
        try:
            fwd = _propagate(
                self.v_dep * math.sin(a_dep),
                1.0 + self.v_dep * math.cos(a_dep),
                0.0,
                theta1,
            )
            bwd = _propagate(
                self.v_arr * math.sin(a_arr),
                1.0 + self.v_arr * math.cos(a_arr),
                t_f,
                -theta2,
            )
        except _Unbound:
            value = _Evaluation(1e3, (1e3, 1e3, 1e3), math.nan, math.nan)
        else:
            value = _Evaluation(
                dv=math.hypot(fwd.vx - bwd.vx, fwd.vy - bwd.vy),
                residuals=(
                    fwd.x - bwd.x,
                    fwd.y - bwd.y,
                    fwd.dt - bwd.dt - t_f,
                ),
                dt1=fwd.dt,
                dt2=-bwd.dt,
            )
        self._last, self._value = key, value
        return value

    def objective(self, x) -> float:
        return (self.evaluate(x).dv / _DV_SCALE) ** 2

    def constraints(self, x) -> typing.List[float]:
        return list(self.evaluate(x).residuals)

    def penalized(self, x) -> float:
        value = self.evaluate(x)
        violation = sum(r * r for r in value.residuals)
        return (value.dv / _DV_SCALE) ** 2 + _PENALTY_WEIGHT * violation


def _alpha_bounds(sign: int) -> typing.Tuple[float, float]:
    return (0.0, math.pi) if sign > 0 else (-math.pi, 0.0)


class _Units(typing.NamedTuple):
    length: float  # km
    speed: float  # km/s
    time: float  # days


def _units(moon: MoonParams, sys: SystemModel) -> _Units:
    speed = circular_velocity(moon, sys)
    return _Units(moon.a, speed, moon.a / speed / DAY)


def _meets_tolerances(value: _Evaluation, units: _Units) -> bool:
    dx, dy, dt = value.residuals
    return (
        math.hypot(dx, dy) * units.length < POSITION_TOLERANCE
        and abs(dt) * units.time < TIME_TOLERANCE
    )


def _make_leg(
    problem: LegProblem, units: _Units, leg: _Leg, x
) -> OptimalLeg:
    value = leg.evaluate(x)
    theta1, theta2, a_dep, a_arr, t_f = (float(v) for v in x)
    dx, dy, dt = value.residuals
    return OptimalLeg(
        family=problem.family,
        vinf_dep=problem.vinf_dep,
        vinf_arr=problem.vinf_arr,
        theta1=math.degrees(theta1),
        theta2=math.degrees(theta2),
        alpha_dep=math.degrees(a_dep),
        alpha_arr=math.degrees(a_arr),
        tof=t_f * units.time,
        dv=value.dv * units.speed * 1000.0,
        dt1=value.dt1 * units.time,
        dt2=value.dt2 * units.time,
        position_error=math.hypot(dx, dy) * units.length,
        time_error=abs(dt) * units.time,
    )


def solve_leg(problem: LegProblem) -> OptimalLeg:
    """Minimum-impulse leg for ``problem``, seeded by the ballistic leg.

    The seed puts the maneuver on the apse of the middle revolution given by
    :func:`pumpdown.resonance.split_transfer_angle`. A zero split returns the
    ballistic leg itself.
    """
    family = problem.family
    try:
        seed = solve_ballistic(family, problem.moon, problem.sys, problem.vinf)
    except (InfeasibleResonance, NoConvergence) as e:
        raise SeedInfeasible(family, problem.vinf, type(e).__name__)

    lo, hi = feasible_vinf_range(family, problem.moon, problem.sys)
    for v in (problem.vinf_dep, problem.vinf_arr):
        if not lo <= v <= hi:
            raise SeedInfeasible(family, problem.vinf, f"{v} outside range")

    units = _units(problem.moon, problem.sys)
    theta1, theta2 = split_transfer_angle(seed)
    x0 = [
        math.radians(theta1),
        math.radians(theta2),
        family.p * math.radians(seed.alpha),
        family.q * math.radians(seed.alpha),
        seed.tof / units.time,
    ]
    v_dep = problem.vinf_dep / 1000.0 / units.speed
    v_arr = problem.vinf_arr / 1000.0 / units.speed
    leg = _Leg(v_dep, v_arr)

    if problem.delta_vinf == 0.0:
        return _make_leg(problem, units, leg, x0)

    bounds = [
        (1e-6, None),
        (1e-6, None),
        _alpha_bounds(family.p),
        _alpha_bounds(family.q),
        (1e-6, None),
    ]
    constraints = [{"type": "eq", "fun": leg.constraints}]
    options = {"ftol": 1e-14, "maxiter": 300}

    result = scipy.optimize.minimize(
        leg.objective,
        x0,
        method="SLSQP",
        bounds=bounds,
        constraints=constraints,
        options=options,
    )
    x = result.x
    if not _meets_tolerances(leg.evaluate(x), units):
        logger.debug(
            "SLSQP missed tolerances for %s at %.1f m/s (%s), "
            "falling back to penalty search",
            family.label,
            problem.vinf,
            result.message,
        )
        penalized = scipy.optimize.minimize(
            leg.penalized, x0, method="BFGS", options={"gtol": 1e-10}
        )
        result = scipy.optimize.minimize(
            leg.objective,
            penalized.x,
            method="SLSQP",
            bounds=bounds,
            constraints=constraints,
            options=options,
        )
        x = result.x

    solved = _make_leg(problem, units, leg, x)
    if not _meets_tolerances(leg.evaluate(x), units):
        raise SolverDiverged(
            family,
            problem.vinf,
            problem.delta_vinf,
            solved.position_error,
            solved.time_error,
        )
    return solved
