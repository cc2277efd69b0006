"""Pipeline configuration: defaults, TOML files, and key=value overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .angles import ExtrapolationParams
from .errors import ParameterError
from .wetmap import MapParams


@dataclass(frozen=True)
class TaubinConfig:
    lam: float = 0.5
    mu: float = -0.53
    iterations_ff: int = 12
    iterations_sf: int = 10


@dataclass(frozen=True)
class SplineConfig:
    smoothing: float = 0.25   # RMS node displacement budget, voxels
    spacing: float = 1.0      # node spacing after resampling, voxels
    min_nodes: int = 8        # shorter smoothed paths are not measured


@dataclass(frozen=True)
class OutlierConfig:
    window: int = 15
    threshold: float = 3.5
    min_count: int = 5


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the measurement and mapping pipelines can be told."""

    v_min: int = 64           # invading clusters smaller than this are dropped
    connectivity: int = 6
    tp_standoff: float = 1.3  # fluid-fluid faces this close to the contact
                              # line never vote in a normal fit
    figures: bool = True
    taubin: TaubinConfig = field(default_factory=TaubinConfig)
    spline: SplineConfig = field(default_factory=SplineConfig)
    extrapolation: ExtrapolationParams = field(default_factory=ExtrapolationParams)
    outliers: OutlierConfig = field(default_factory=OutlierConfig)
    mapping: MapParams = field(default_factory=MapParams)


_SECTIONS = {
    "taubin": TaubinConfig,
    "spline": SplineConfig,
    "extrapolation": ExtrapolationParams,
    "outliers": OutlierConfig,
    "map": MapParams,
}
_SECTION_FIELD = {"map": "mapping"}
_TOP_LEVEL = ("v_min", "connectivity", "tp_standoff", "figures")


def _build_section(cls, values: dict, where: str):
    names = {f.name for f in fields(cls)}
    unknown = set(values) - names
    if unknown:
        raise ParameterError(f"unknown key(s) in [{where}]: {sorted(unknown)}")
    return cls(**values)


def load_config(path=None) -> PipelineConfig:
    """PipelineConfig from a TOML file; None gives the defaults."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.exists():
        raise ParameterError(f"config file not found: {path}")
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ParameterError(f"config file {path} is not valid TOML: {exc}") from exc
    kwargs = {}
    for key, value in raw.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ParameterError(f"[{key}] must be a table")
            kwargs[_SECTION_FIELD.get(key, key)] = _build_section(
                _SECTIONS[key], value, key)
        elif key in _TOP_LEVEL:
            kwargs[key] = value
        else:
            raise ParameterError(f"unknown config key: {key}")
    return PipelineConfig(**kwargs)


def _parse_scalar(text: str):
    low = text.strip()
    if low.lower() in ("true", "false"):
        return low.lower() == "true"
    for cast in (int, float):
        try:
            return cast(low)
        except ValueError:
            pass
    return low


def apply_overrides(cfg: PipelineConfig, pairs) -> PipelineConfig:
    """Apply "section.key=value" (or "key=value") command-line overrides."""
    for pair in pairs:
        if "=" not in pair:
            raise ParameterError(f"override {pair!r} is not key=value")
        key, _, text = pair.partition("=")
        value = _parse_scalar(text)
        parts = key.strip().split(".")
        if len(parts) == 1 and parts[0] in _TOP_LEVEL:
            cfg = dataclasses.replace(cfg, **{parts[0]: value})
        elif len(parts) == 2 and parts[0] in _SECTIONS:
            attr = _SECTION_FIELD.get(parts[0], parts[0])
            section = getattr(cfg, attr)
            if parts[1] not in {f.name for f in fields(section)}:
                raise ParameterError(f"unknown config key: {key}")
            section = dataclasses.replace(section, **{parts[1]: value})
            cfg = dataclasses.replace(cfg, **{attr: section})
        else:
            raise ParameterError(f"unknown config key: {key}")
    return cfg
