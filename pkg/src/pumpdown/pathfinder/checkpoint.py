"""Saved handoff sets, one CSV per finished moon phase.

Every node is written with its whole parent chain, one row per chain
element from the tour start. Floats keep full precision so a resumed search
continues exactly where the saved one stopped.
"""

__all__ = [
    "CheckpointFormatError",
    "checkpoint_path",
    "read_checkpoint",
    "write_checkpoint",
]

import csv
import dataclasses
import pathlib
import typing

from ..resonance import ResonanceFamily
from ..vilt import LegEstimate
from .nodes import PathNode


COLUMNS = (
    "chain",
    "depth",
    "moon",
    "vinf",
    "alpha",
    "tof",
    "dv",
    "flybys",
    "parent_rank",
    "M",
    "N",
    "p",
    "q",
    "leg_vinf_dep",
    "leg_vinf_arr",
    "leg_alpha_dep",
    "leg_alpha_arr",
    "leg_tof",
    "leg_dv",
)


@dataclasses.dataclass()
class CheckpointFormatError(Exception):
    path: pathlib.Path
    line: int


def checkpoint_path(directory: pathlib.Path, moon: str) -> pathlib.Path:
    return directory.joinpath(f"{moon}.csv")


def _row(chain: int, depth: int, node: PathNode) -> typing.List[str]:
    row = [
        str(chain),
        str(depth),
        node.moon,
        repr(node.vinf),
        repr(node.alpha),
        repr(node.tof),
        repr(node.dv),
        str(node.flybys),
        str(node.parent_rank),
    ]
    leg = node.leg
    if leg is None:
        return row + [""] * 10
    return row + [str(v) for v in leg.family.as_tuple()] + [
        repr(leg.vinf_dep),
        repr(leg.vinf_arr),
        repr(leg.alpha_dep),
        repr(leg.alpha_arr),
        repr(leg.tof),
        repr(leg.dv),
    ]


def write_checkpoint(
    path: pathlib.Path, nodes: typing.Iterable[PathNode]
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COLUMNS)
        for chain, node in enumerate(nodes):
            for depth, member in enumerate(node.chain()):
                writer.writerow(_row(chain, depth, member))


def _node(row: typing.Dict[str, str], parent) -> PathNode:
    leg = None
    if row["M"]:
        leg = LegEstimate(
            family=ResonanceFamily(
                int(row["M"]), int(row["N"]), int(row["p"]), int(row["q"])
            ),
            vinf_dep=float(row["leg_vinf_dep"]),
            vinf_arr=float(row["leg_vinf_arr"]),
            alpha_dep=float(row["leg_alpha_dep"]),
            alpha_arr=float(row["leg_alpha_arr"]),
            tof=float(row["leg_tof"]),
            dv=float(row["leg_dv"]),
        )
    return PathNode(
        moon=row["moon"],
        vinf=float(row["vinf"]),
        alpha=float(row["alpha"]),
        tof=float(row["tof"]),
        dv=float(row["dv"]),
        flybys=int(row["flybys"]),
        parent=parent,
        leg=leg,
        parent_rank=int(row["parent_rank"]),
    )


def read_checkpoint(path: pathlib.Path) -> typing.List[PathNode]:
    """Chain tips in the order they were written."""
    tips: typing.Dict[int, PathNode] = {}
    with path.open(newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise CheckpointFormatError(path, 1)
        for lineno, row in enumerate(reader, 2):
            try:
                chain, depth = int(row["chain"]), int(row["depth"])
                parent = tips.get(chain) if depth else None
                if depth and parent is None:
                    raise ValueError("chain starts mid-way")
                tips[chain] = _node(row, parent)
            except (KeyError, ValueError):
                raise CheckpointFormatError(path, lineno) from None
    return [tips[chain] for chain in sorted(tips)]
