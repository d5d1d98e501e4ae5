__all__ = ["CompletedTour", "ExitState", "PathNode"]

import dataclasses
import typing

from ..vilt import LegEstimate


@dataclasses.dataclass(frozen=True, eq=False)
class PathNode:
    """A partial tour ending with an arrival at ``moon``.

    ``alpha`` is the unsigned arrival pump angle. ``tof`` (days) and ``dv``
    (m/s) accumulate from the start of the tour. ``leg`` is the leg that
    produced the node, absent for the tour start and for the first node at a
    moon after a handoff. ``flybys`` counts legs flown at the current moon.
    """

    moon: str
    vinf: float
    alpha: float
    tof: float
    dv: float
    flybys: int = 0
    parent: typing.Optional["PathNode"] = None
    leg: typing.Optional[LegEstimate] = None
    parent_rank: int = -1

    @property
    def objectives(self) -> typing.Tuple[float, float, float, float]:
        return (self.tof, self.dv, -self.alpha, self.vinf)

    @property
    def sign(self) -> int:
        """Sign of the arrival pump angle, 0 when either sign can be flown.

        The tour starts outbound and a handoff arrives inbound. A 1:1 leg
        fixes its arrival sign; other families come in every sign variant.
        """
        if self.leg is None:
            return 1 if self.parent is None else -1
        family = self.leg.family
        return family.q if family.m == family.n else 0

    def order_key(self) -> typing.Tuple:
        """Total order used to break ties between equal objectives."""
        family = self.leg.family.as_tuple() if self.leg else (0, 0, 0, 0)
        return (self.objectives, family, self.parent_rank)

    def chain(self) -> typing.List["PathNode"]:
        """Nodes from the tour start to this node."""
        nodes = []
        node: typing.Optional[PathNode] = self
        while node is not None:
            nodes.append(node)
            node = node.parent
        nodes.reverse()
        return nodes


@dataclasses.dataclass(frozen=True, eq=False)
class ExitState:
    """Unpowered handoff from ``parent.moon`` to the next moon inwards.

    The spacecraft orbit is given by ``a``, ``e``, periapsis ``rp`` and
    apoapsis ``ra`` in km. ``alpha_dep`` is the pump angle (deg) leaving the
    departing moon after its last flyby; ``vinf`` (m/s) and ``alpha`` (deg,
    unsigned) describe the arrival at the next moon.
    """

    moon: str
    next_moon: str
    a: float
    e: float
    rp: float
    ra: float
    alpha_dep: float
    vinf: float
    alpha: float
    inbound: bool
    parent: PathNode

    def arrival_node(self, parent_rank: int = -1) -> PathNode:
        return PathNode(
            moon=self.next_moon,
            vinf=self.vinf,
            alpha=self.alpha,
            tof=self.parent.tof,
            dv=self.parent.dv,
            parent=self.parent,
            parent_rank=parent_rank,
        )


@dataclasses.dataclass(frozen=True, eq=False)
class CompletedTour:
    """A path closed by the Enceladus orbit insertion burn."""

    node: PathNode
    eoi_dv: float

    @property
    def tof(self) -> float:
        return self.node.tof

    @property
    def dv(self) -> float:
        return self.node.dv + self.eoi_dv

    @property
    def objectives(self) -> typing.Tuple[float, float]:
        return (self.tof, self.dv)

    def order_key(self) -> typing.Tuple:
        return (self.objectives, self.node.order_key())
