"""Flyby tables rebuilt from DP parent chains."""

__all__ = [
    "FlybyRecord",
    "InconsistentChain",
    "MoonSummary",
    "RowKind",
    "Tour",
    "reconstruct_tour",
]

import dataclasses
import enum
import typing

from ..astro import (
    MOON_NAMES,
    SystemModel,
    flyby_altitude,
    max_bend_angle,
)
from ..resonance import ResonanceFamily
from .nodes import CompletedTour, PathNode


_BEND_TOLERANCE = 1e-6  # deg


@dataclasses.dataclass()
class InconsistentChain(Exception):
    reason: str


class RowKind(enum.Enum):
    leg = "leg"
    handoff = "handoff"
    eoi = "eoi"


@dataclasses.dataclass(frozen=True)
class FlybyRecord:
    """One table row: a flyby and the leg after it.

    ``tof`` is the leg's time of flight in days, ``altitude`` the flyby
    altitude in km, None when the pump angle needs no turning. ``vinf`` is
    the flyby V-infinity and ``dv`` the leg's maneuver, both in m/s. Handoff
    and insertion rows carry no family.
    """

    moon: str
    number: typing.Optional[int]
    kind: RowKind
    family: typing.Optional[ResonanceFamily]
    tof: float
    altitude: typing.Optional[float]
    vinf: float
    dv: float

    @property
    def resonance(self) -> str:
        if self.family is not None:
            return self.family.label
        return "EOI" if self.kind is RowKind.eoi else "---"


@dataclasses.dataclass(frozen=True)
class MoonSummary:
    moon: str
    tof: float
    dv: float


@dataclasses.dataclass(frozen=True)
class Tour:
    rows: typing.Tuple[FlybyRecord, ...]

    @property
    def tof(self) -> float:
        return sum(r.tof for r in self.rows)

    @property
    def dv(self) -> float:
        return sum(r.dv for r in self.rows)

    @property
    def eoi_dv(self) -> float:
        return sum(r.dv for r in self.rows if r.kind is RowKind.eoi)

    def moons(self) -> typing.List[str]:
        seen: typing.List[str] = []
        for row in self.rows:
            if row.kind is not RowKind.eoi and row.moon not in seen:
                seen.append(row.moon)
        return seen

    def summary(self) -> typing.List[MoonSummary]:
        """Per-moon ToF and delta-V, the insertion burn, then totals."""
        result = []
        for moon in self.moons():
            rows = [
                r
                for r in self.rows
                if r.moon == moon and r.kind is not RowKind.eoi
            ]
            result.append(
                MoonSummary(
                    moon, sum(r.tof for r in rows), sum(r.dv for r in rows)
                )
            )
        if any(r.kind is RowKind.eoi for r in self.rows):
            result.append(MoonSummary("EOI", 0.0, self.eoi_dv))
        result.append(MoonSummary("Total", self.tof, self.dv))
        return result


def _check_chain(chain: typing.Sequence[PathNode]) -> None:
    if not chain or chain[0].parent is not None:
        raise InconsistentChain("chain does not start at a root node")
    for parent, node in zip(chain, chain[1:]):
        if node.tof < parent.tof or node.dv < parent.dv:
            raise InconsistentChain(f"accumulators decrease at {node.moon}")
        if node.leg is None:
            step = MOON_NAMES.index(node.moon) - MOON_NAMES.index(parent.moon)
            if step != 1:
                raise InconsistentChain(
                    f"handoff from {parent.moon} to {node.moon}"
                )
        elif node.moon != parent.moon:
            raise InconsistentChain(f"leg crosses from {parent.moon}")
        elif abs(node.leg.vinf_dep - parent.vinf) > 1e-6:
            raise InconsistentChain(f"leg departs off the node at {node.moon}")


def _signed_families(
    chain: typing.Sequence[PathNode],
) -> typing.List[typing.Optional[ResonanceFamily]]:
    """Families with pump-angle signs agreeing across consecutive flybys.

    Legs of the 1:1 resonance keep their stored signs. Any other family
    stands for all its sign variants: it departs with the sign of the
    incoming arrival and arrives with the sign the next 1:1 leg needs.
    """
    legs = [node.leg for node in chain]
    signed: typing.List[typing.Optional[ResonanceFamily]] = []
    incoming = 1
    for index, leg in enumerate(legs):
        if leg is None:
            signed.append(None)
            # The first crossing of a new moon's orbit is inbound.
            incoming = 1 if index == 0 else -1
            continue
        f = leg.family
        if f.m == f.n:
            family = f
        else:
            upcoming = legs[index + 1] if index + 1 < len(legs) else None
            q = incoming
            if upcoming is not None:
                u = upcoming.family
                if u.m == u.n:
                    q = u.p
            family = ResonanceFamily(f.m, f.n, incoming, q)
        signed.append(family)
        incoming = family.q
    return signed


def reconstruct_tour(
    end: typing.Union[CompletedTour, PathNode],
    sys: SystemModel,
    *,
    eoi_altitude: float = 100.0,
) -> Tour:
    """Flyby rows from the tour start to ``end``.

    Each flyby altitude is the one whose bend equals the pump-angle change
    actually flown, never below the moon's minimum altitude; handoff flybys
    bend as far as possible, at minimum altitude. A chain whose signed pump
    angles need more bend than one flyby gives is inconsistent.
    """
    node = end.node if isinstance(end, CompletedTour) else end
    chain = node.chain()
    _check_chain(chain)
    families = _signed_families(chain)

    rows = []
    numbers: typing.Dict[str, int] = {}
    incoming_sign = 1

    def number(moon: str) -> int:
        numbers[moon] = numbers.get(moon, 0) + 1
        return numbers[moon]

    for index, (current, family) in enumerate(zip(chain, families)):
        if current.leg is None:
            if index:
                parent = chain[index - 1]
                moon = sys.moon(parent.moon)
                rows.append(
                    FlybyRecord(
                        moon=parent.moon,
                        number=number(parent.moon),
                        kind=RowKind.handoff,
                        family=None,
                        tof=0.0,
                        altitude=moon.min_flyby_alt,
                        vinf=parent.vinf,
                        dv=0.0,
                    )
                )
            incoming_sign = 1 if index == 0 else -1
            continue

        assert family is not None
        parent = chain[index - 1]
        leg = current.leg
        moon = sys.moon(current.moon)
        bend = abs(family.p * leg.alpha_dep - incoming_sign * parent.alpha)
        if bend > max_bend_angle(moon, leg.vinf_dep) + _BEND_TOLERANCE:
            raise InconsistentChain(
                f"{family.label} at {current.moon} needs a {bend:.2f} deg bend"
            )
        rows.append(
            FlybyRecord(
                moon=current.moon,
                number=number(current.moon),
                kind=RowKind.leg,
                family=family,
                tof=leg.tof,
                altitude=flyby_altitude(moon, leg.vinf_dep, bend),
                vinf=leg.vinf_dep,
                dv=abs(leg.dv),
            )
        )
        incoming_sign = family.q

    if isinstance(end, CompletedTour):
        rows.append(
            FlybyRecord(
                moon=node.moon,
                number=None,
                kind=RowKind.eoi,
                family=None,
                tof=0.0,
                altitude=eoi_altitude,
                vinf=node.vinf,
                dv=end.eoi_dv,
            )
        )
    return Tour(tuple(rows))
