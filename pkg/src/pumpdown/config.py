"""Run configuration: a flat JSON object whose keys override the defaults."""

__all__ = [
    "ConfigParseError",
    "ConfigValidationError",
    "RunConfig",
    "default_out_dir",
    "load_config",
]

import dataclasses
import json
import os
import pathlib
import typing

from .astro import (
    DEFAULT_GM_SATURN,
    MOON_NAMES,
    SearchBounds,
    SystemModel,
    load_bounds,
    load_system,
)
from .pathfinder import PathNode, SearchSettings
from .pathfinder.search import DAYS_PER_YEAR


OUT_DIR_ENV = "PUMPDOWN_OUT"


@dataclasses.dataclass()
class ConfigParseError(Exception):
    path: pathlib.Path
    line: int
    field: typing.Optional[str]
    message: str


@dataclasses.dataclass()
class ConfigValidationError(Exception):
    field: str
    reason: str


def default_out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV) or "results"


def _default_bounds() -> typing.Dict[str, typing.Tuple[float, float, int]]:
    return {
        name: (b.vinf_min, b.vinf_max, b.max_m)
        for name, b in load_bounds().items()
    }


@dataclasses.dataclass(frozen=True)
class RunConfig:
    gm_saturn: float = DEFAULT_GM_SATURN
    initial_moon: str = "Titan"
    initial_vinf: float = 1460.0
    initial_alpha: float = 50.0
    tof_cap_years: float = 3.0
    dp_grid_step: float = 30.0
    db_grid_step: float = 30.0
    bin_vinf: float = 10.0
    bin_alpha_fraction: float = 0.25
    bin_dv: float = 1.0
    bin_tof: float = 5.0
    binning: bool = True
    dv_cap: float = 100.0
    eoi_trigger_vinf: float = 450.0
    eoi_altitude: float = 100.0
    bounds: typing.Dict[str, typing.Tuple[float, float, int]] = (
        dataclasses.field(default_factory=_default_bounds)
    )
    workers: int = 1
    out_dir: str = dataclasses.field(default_factory=default_out_dir)
    max_flybys_per_moon: int = 40
    perturbation: float = 5.0
    map_tick_dv: float = 15.0
    map_max_m: typing.Optional[int] = None

    _POSITIVE = (
        "gm_saturn",
        "initial_vinf",
        "tof_cap_years",
        "dp_grid_step",
        "db_grid_step",
        "bin_vinf",
        "bin_alpha_fraction",
        "bin_dv",
        "bin_tof",
        "dv_cap",
        "eoi_trigger_vinf",
        "eoi_altitude",
        "perturbation",
        "map_tick_dv",
    )

    def validate(self) -> "RunConfig":
        for name in self._POSITIVE:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigValidationError(name, "must be a number")
            if not value > 0.0:
                raise ConfigValidationError(name, "must be positive")
        if self.initial_moon not in MOON_NAMES:
            raise ConfigValidationError("initial_moon", "unknown moon")
        if not 0.0 <= self.initial_alpha <= 180.0:
            raise ConfigValidationError("initial_alpha", "not in [0, 180]")
        if not isinstance(self.binning, bool):
            raise ConfigValidationError("binning", "must be true or false")
        for name in ("workers", "max_flybys_per_moon"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigValidationError(name, "must be an integer")
        if self.workers < 1:
            raise ConfigValidationError("workers", "must be at least 1")
        if self.max_flybys_per_moon < 0:
            raise ConfigValidationError(
                "max_flybys_per_moon", "must not be negative"
            )
        if self.map_max_m is not None and (
            isinstance(self.map_max_m, bool)
            or not isinstance(self.map_max_m, int)
            or self.map_max_m < 1
        ):
            raise ConfigValidationError("map_max_m", "must be at least 1")
        if set(self.bounds) != set(MOON_NAMES):
            raise ConfigValidationError("bounds", "needs every moon")
        for name, row in self.bounds.items():
            try:
                vmin, vmax, max_m = row
                SearchBounds(float(vmin), float(vmax), int(max_m))
            except (TypeError, ValueError):
                raise ConfigValidationError(
                    f"bounds.{name}", "expected [min, max, max M]"
                ) from None
        return self

    def system(self) -> SystemModel:
        return load_system(self.gm_saturn)

    def search_bounds(self) -> typing.Dict[str, SearchBounds]:
        return {
            name: SearchBounds(float(vmin), float(vmax), int(max_m))
            for name, (vmin, vmax, max_m) in self.bounds.items()
        }

    def search_settings(self) -> SearchSettings:
        return SearchSettings(
            tof_cap=self.tof_cap_years * DAYS_PER_YEAR,
            dp_grid_step=self.dp_grid_step,
            dv_cap=self.dv_cap,
            bin_tof=self.bin_tof,
            bin_dv=self.bin_dv,
            bin_alpha_fraction=self.bin_alpha_fraction,
            bin_vinf=self.bin_vinf,
            binning=self.binning,
            eoi_trigger_vinf=self.eoi_trigger_vinf,
            eoi_altitude=self.eoi_altitude,
            max_flybys=self.max_flybys_per_moon or None,
        )

    def start_node(self) -> PathNode:
        return PathNode(
            moon=self.initial_moon,
            vinf=self.initial_vinf,
            alpha=self.initial_alpha,
            tof=0.0,
            dv=0.0,
        )


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _line_of(text: str, key: str) -> int:
    needle = json.dumps(key)
    for lineno, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return lineno
    return 0


def load_config(path: pathlib.Path) -> RunConfig:
    """Read and validate a config file; an empty file gives the defaults."""
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        return RunConfig().validate()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(path, e.lineno, None, e.msg)
    if not isinstance(data, dict):
        raise ConfigParseError(path, 1, None, "expected a JSON object")

    for key in data:
        if key not in _FIELDS:
            raise ConfigParseError(
                path, _line_of(text, key), key, "unknown key"
            )
    if "bounds" in data:
        if not isinstance(data["bounds"], dict):
            raise ConfigValidationError("bounds", "expected an object")
        bounds = _default_bounds()
        for name, row in data["bounds"].items():
            if name not in bounds:
                raise ConfigValidationError(f"bounds.{name}", "unknown moon")
            if not isinstance(row, list) or len(row) != 3:
                raise ConfigValidationError(
                    f"bounds.{name}", "expected [min, max, max M]"
                )
            bounds[name] = (row[0], row[1], row[2])
        data["bounds"] = bounds
    return RunConfig(**data).validate()
