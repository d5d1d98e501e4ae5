"""Pareto sorting with optional grid-bin thinning. All objectives minimised."""

__all__ = [
    "ObjectiveVector",
    "ParetoArchive",
    "dominates",
    "nondominated_mask",
    "pareto_prune",
]

import dataclasses
import functools
import math
import typing

import numpy


class ObjectiveVector(typing.NamedTuple):
    """(total ToF in days, total delta-V in m/s, -|alpha| in deg, V-inf)."""

    tof: float
    dv: float
    neg_alpha: float
    vinf: float

    def check(self) -> "ObjectiveVector":
        if not all(math.isfinite(v) for v in self):
            raise ValueError(f"non-finite objectives {self!r}")
        if self.neg_alpha > 0.0:
            raise ValueError(f"pump angle component must be <= 0: {self!r}")
        return self


def dominates(a: typing.Sequence[float], b: typing.Sequence[float]) -> bool:
    """Whether ``a`` is no worse than ``b`` everywhere and better somewhere."""
    return all(x <= y for x, y in zip(a, b)) and any(
        x < y for x, y in zip(a, b)
    )


def nondominated_mask(points: numpy.ndarray) -> numpy.ndarray:
    """Boolean mask of the rows not dominated by any other row.

    Rows are swept in lexicographic order, where a row can only be dominated
    by an earlier one, and each row is checked against the front kept so
    far. Equal rows do not dominate each other.
    """
    points = numpy.asarray(points, dtype=float)
    n = len(points)
    mask = numpy.zeros(n, dtype=bool)
    if n == 0:
        return mask
    order = numpy.lexsort(points.T[::-1])
    front = numpy.empty_like(points)
    size = 0
    for i in order:
        p = points[i]
        kept = front[:size]
        le = numpy.all(kept <= p, axis=1)
        lt = numpy.any(kept < p, axis=1)
        if not numpy.any(le & lt):
            front[size] = p
            size += 1
            mask[i] = True
    return mask


_Item = typing.TypeVar("_Item")


@dataclasses.dataclass(frozen=True)
class ParetoArchive(typing.Generic[_Item]):
    """Mutually non-dominated members in ascending total order."""

    members: typing.Tuple[_Item, ...]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> typing.Iterator[_Item]:
        return iter(self.members)

    def __getitem__(self, index: int) -> _Item:
        return self.members[index]


def _bin_key(
    vector: typing.Sequence[float], widths: typing.Sequence[float]
) -> typing.Tuple[int, ...]:
    return tuple(math.floor(v / w) for v, w in zip(vector, widths))


def _identity(item):
    return item


def _as_tuple(objectives, item):
    return tuple(objectives(item))


def pareto_prune(
    candidates: typing.Iterable[_Item],
    objectives: typing.Optional[
        typing.Callable[[_Item], typing.Sequence[float]]
    ] = None,
    *,
    order_key: typing.Optional[typing.Callable[[_Item], typing.Any]] = None,
    bin_widths: typing.Optional[
        typing.Callable[[_Item], typing.Sequence[float]]
    ] = None,
) -> ParetoArchive[_Item]:
    """Keep the non-dominated candidates, then one per occupied bin.

    Candidates are first sorted by ``order_key`` (the objective vector by
    default) so the result does not depend on input order; the member kept
    in a bin is the first in that order.
    """
    if objectives is None:
        objectives = _identity
    if order_key is None:
        order_key = functools.partial(_as_tuple, objectives)
    items = sorted(candidates, key=order_key)
    if not items:
        return ParetoArchive(())
    points = numpy.array([tuple(objectives(i)) for i in items], dtype=float)
    mask = nondominated_mask(points)
    survivors = [item for item, keep in zip(items, mask) if keep]
    if bin_widths is None:
        return ParetoArchive(tuple(survivors))

    seen = set()
    members = []
    for item in survivors:
        key = _bin_key(objectives(item), bin_widths(item))
        if key not in seen:
            seen.add(key)
            members.append(item)
    return ParetoArchive(tuple(members))
