"""Region tiling and density-based sub-region filtering.

User regions wider/taller than the provider's 1/4-degree cap are tiled
into an equal-sized grid.  Each tile is then kept, discarded, or split
recursively into quadrants depending on how many crosswalk sites it
contains.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List

from .errors import InvalidRegion
from .geo import GeoPoint, Region

log = logging.getLogger(__name__)

MAX_DIMENSION_DEG = 0.25
MIN_SITES = 50
MAX_SITES = 2000
# Recursion guard: a point-mass site cloud would otherwise split forever.
MAX_DEPTH = 12

CountFn = Callable[[Region], int]


@dataclass(frozen=True)
class SubRegion:
    bounds: Region
    parent_id: str
    depth: int = 0

    @property
    def region_id(self) -> str:
        return self.parent_id


def _tile_count(extent: float, limit: float) -> int:
    ratio = extent / limit
    # Guard against float noise pushing an exact multiple over the next
    # integer (0.5 / 0.25 -> 2.0000000000000004).
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) < 1e-9:
        return nearest
    return math.ceil(ratio)


def split_region(
    region: Region, name: str = "region", limit: float = MAX_DIMENSION_DEG
) -> List[SubRegion]:
    """Tile ``region`` into the minimal grid of equal cells within ``limit``.

    Returns ceil(width/limit) x ceil(height/limit) sub-regions exactly
    tiling the input; a compliant region comes back as a single tile.
    """
    if limit <= 0:
        raise InvalidRegion(f"non-positive dimension limit: {limit}")
    nx = _tile_count(region.width, limit)
    ny = _tile_count(region.height, limit)
    cell_w = region.width / nx
    cell_h = region.height / ny
    lat0 = region.bottom_left.lat
    lon0 = region.bottom_left.lon
    out = []
    for row in range(ny):
        for col in range(nx):
            # Outer edges reuse the exact input coordinates so the tiles
            # cover the region with no float gap.
            lo_lat = lat0 + row * cell_h
            lo_lon = lon0 + col * cell_w
            hi_lat = region.top_right.lat if row == ny - 1 else lat0 + (row + 1) * cell_h
            hi_lon = region.top_right.lon if col == nx - 1 else lon0 + (col + 1) * cell_w
            bounds = Region(GeoPoint(lo_lat, lo_lon), GeoPoint(hi_lat, hi_lon))
            out.append(SubRegion(bounds, parent_id=f"{name}/r{row}c{col}", depth=0))
    return out


def _quadrants(sub: SubRegion) -> List[SubRegion]:
    b = sub.bounds
    mid_lat = (b.bottom_left.lat + b.top_right.lat) / 2.0
    mid_lon = (b.bottom_left.lon + b.top_right.lon) / 2.0
    corners = [
        (b.bottom_left.lat, b.bottom_left.lon, mid_lat, mid_lon, "q0"),
        (b.bottom_left.lat, mid_lon, mid_lat, b.top_right.lon, "q1"),
        (mid_lat, b.bottom_left.lon, b.top_right.lat, mid_lon, "q2"),
        (mid_lat, mid_lon, b.top_right.lat, b.top_right.lon, "q3"),
    ]
    return [
        SubRegion(
            Region(GeoPoint(lo_lat, lo_lon), GeoPoint(hi_lat, hi_lon)),
            parent_id=f"{sub.parent_id}/{tag}",
            depth=sub.depth + 1,
        )
        for lo_lat, lo_lon, hi_lat, hi_lon, tag in corners
    ]


def density_partition(
    sub: SubRegion,
    count: CountFn,
    min_sites: int = MIN_SITES,
    max_sites: int = MAX_SITES,
    max_depth: int = MAX_DEPTH,
) -> List[SubRegion]:
    """Keep, discard, or recursively quarter ``sub`` by crosswalk density.

    Fewer than ``min_sites`` sites: discarded.  Between the bounds
    (inclusive): kept as-is.  More than ``max_sites``: split into 2x2
    quadrants and recursed, stopping (with a warning) at ``max_depth``.
    """
    n = count(sub.bounds)
    if n < min_sites:
        return []
    if n <= max_sites:
        return [sub]
    if sub.depth >= max_depth:
        log.warning(
            "sub-region %s still has %d sites at max depth %d; keeping it",
            sub.parent_id, n, max_depth,
        )
        return [sub]
    kept = []
    for quad in _quadrants(sub):
        kept.extend(density_partition(quad, count, min_sites, max_sites, max_depth))
    return kept
