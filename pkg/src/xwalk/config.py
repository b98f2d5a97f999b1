"""Harvest configuration: a single JSON file, validated up front.

All thresholds default to the published harvesting parameters, so a
minimal config only needs regions and a provider choice.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from .errors import ConfigError
from .geo import GeoPoint, Region


@dataclass
class Thresholds:
    max_dimension_deg: float = 0.25
    min_sites: int = 50
    max_sites: int = 2000
    max_gap_deg: float = 1e-4
    pano_snap_radius_deg: float = 4.5e-4
    sector_half_angle_deg: float = 35.0
    sector_min_dist_deg: float = 5e-5
    sector_max_dist_deg: float = 2.5e-4

    def validate(self):
        for name in (
            "max_dimension_deg", "max_gap_deg", "pano_snap_radius_deg",
            "sector_half_angle_deg", "sector_min_dist_deg", "sector_max_dist_deg",
        ):
            if getattr(self, name) <= 0:
                raise ConfigError(f"threshold {name} must be positive")
        if self.min_sites < 0 or self.max_sites <= 0:
            raise ConfigError("site thresholds must be non-negative")
        if self.sector_min_dist_deg >= self.sector_max_dist_deg:
            raise ConfigError("sector distance band lower bound must be below upper")


@dataclass
class SimSpecConfig:
    block_size: float = 1e-3
    n_sites: int = 200
    pano_spacing: float = 1e-4
    pano_jitter: float = 0.3


@dataclass
class SplitConfig:
    test_fraction: float = 0.25
    val_fraction_of_trainval: float = 0.10
    negative_ratio: float = 2.0


@dataclass
class NamedRegion:
    name: str
    region: Region


@dataclass
class HarvestConfig:
    regions: List[NamedRegion]
    provider: str = "sim"
    seed: int = 0
    cache_dir: str = "cache"
    parallelism: int = 4
    api_key_env: str = "XWALK_API_KEY"
    shuffle_sites: bool = False
    thresholds: Thresholds = field(default_factory=Thresholds)
    sim: SimSpecConfig = field(default_factory=SimSpecConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    rate_limits: Dict[str, float] = field(default_factory=dict)
    daily_caps: Dict[str, int] = field(default_factory=dict)
    endpoints: Dict[str, str] = field(default_factory=dict)

    def validate(self):
        if not self.regions:
            raise ConfigError("at least one region is required")
        if self.provider not in ("sim", "live"):
            raise ConfigError(f"unknown provider {self.provider!r}")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        self.thresholds.validate()


def _point(raw, where: str) -> GeoPoint:
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise ConfigError(f"{where}: expected [lat, lon]")
    try:
        return GeoPoint(float(raw[0]), float(raw[1]))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _apply(obj, raw: Dict, where: str):
    for key, value in raw.items():
        if not hasattr(obj, key):
            raise ConfigError(f"{where}: unknown key {key!r}")
        setattr(obj, key, value)
    return obj


def load_config(path, overrides: Optional[Dict] = None) -> HarvestConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(raw, overrides, where=str(path))


def parse_config(raw: Dict, overrides: Optional[Dict] = None, where: str = "config") -> HarvestConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: top level must be an object")
    raw = dict(raw)
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    regions = []
    for i, reg in enumerate(raw.pop("regions", [])):
        where_reg = f"{where}: regions[{i}]"
        if not isinstance(reg, dict) or "name" not in reg:
            raise ConfigError(f"{where_reg}: expected object with name/bottom_left/top_right")
        try:
            region = Region(
                _point(reg.get("bottom_left"), where_reg),
                _point(reg.get("top_right"), where_reg),
            )
        except Exception as exc:
            raise ConfigError(f"{where_reg}: {exc}") from exc
        regions.append(NamedRegion(name=str(reg["name"]), region=region))
    thresholds = _apply(Thresholds(), raw.pop("thresholds", {}), f"{where}: thresholds")
    sim = _apply(SimSpecConfig(), raw.pop("sim", {}), f"{where}: sim")
    split = _apply(SplitConfig(), raw.pop("split", {}), f"{where}: split")
    config = HarvestConfig(regions=regions, thresholds=thresholds, sim=sim, split=split)
    _apply(config, raw, where)
    config.validate()
    return config
