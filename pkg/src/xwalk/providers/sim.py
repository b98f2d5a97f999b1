"""Deterministic simulated world: streets, crosswalk sites, panoramas, and a
procedural image renderer.

The world is a Manhattan grid of streets inside a bounding region.  Sites
and panoramas are derived purely from (seed, spec), so every provider call
is a pure function and repeated runs are bit-identical.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from PIL import Image

from ..errors import ProviderError
from ..geo import CameraPose, GeoPoint, Region, angular_diff, bearing, degree_distance
from ..polyline import encode
from ..seeding import derive_seed, derive_unit
from .base import (
    PANO_SNAP_RADIUS_DEG,
    ImageRequest,
    PanoMeta,
    QuotaLedger,
    check_waypoint_count,
)

# Radial visibility band of the procedural renderer.  Matches the
# annotation band: a crosswalk nearer than the lower bound is under the
# vehicle, one farther than the upper bound is too small to resolve.
RENDER_MIN_DIST = 5e-5
RENDER_MAX_DIST = 2.5e-4


@dataclass(frozen=True)
class SimWorldSpec:
    bounds: Region
    block_size: float = 1e-3
    n_sites: int = 200
    pano_spacing: float = 1e-4
    pano_jitter: float = 0.3  # fraction of pano_spacing


class SimWorld:
    """Synthetic street environment backing all four provider roles."""

    def __init__(self, seed: int, spec: SimWorldSpec):
        self.seed = seed
        self.spec = spec
        b = spec.bounds
        self._h_lats = _grid_lines(b.bottom_left.lat, b.top_right.lat, spec.block_size)
        self._v_lons = _grid_lines(b.bottom_left.lon, b.top_right.lon, spec.block_size)
        self.sites = self._generate_sites()

    # -- site generation ---------------------------------------------------

    def _generate_sites(self) -> List[GeoPoint]:
        rng = np.random.default_rng(derive_seed(self.seed, "sites"))
        b = self.spec.bounds
        sites = []
        for _ in range(self.spec.n_sites):
            if rng.random() < 0.5 and self._h_lats:
                lat = float(rng.choice(self._h_lats))
                lon = float(rng.uniform(b.bottom_left.lon, b.top_right.lon))
            elif self._v_lons:
                lon = float(rng.choice(self._v_lons))
                lat = float(rng.uniform(b.bottom_left.lat, b.top_right.lat))
            else:
                lat = float(rng.uniform(b.bottom_left.lat, b.top_right.lat))
                lon = float(rng.uniform(b.bottom_left.lon, b.top_right.lon))
            sites.append(GeoPoint(lat, lon))
        return sites

    # -- provider: crosswalk sites ----------------------------------------

    def query_sites(self, region: Region) -> List[GeoPoint]:
        return [s for s in self.sites if region.contains(s)]

    def count_sites(self, region: Region) -> int:
        return len(self.query_sites(region))

    # -- provider: directions ---------------------------------------------

    def route(
        self, origin: GeoPoint, waypoints: List[GeoPoint], destination: GeoPoint
    ) -> str:
        check_waypoint_count(waypoints)
        stops = [self._snap_to_street(p) for p in [origin, *waypoints, destination]]
        path: List[GeoPoint] = []
        for a, b in zip(stops, stops[1:]):
            _extend(path, a)
            corner = GeoPoint(a.lat, b.lon)
            _extend(path, corner)
            _extend(path, b)
        if not path:
            _extend(path, stops[0])
        return encode(path)

    def _snap_to_street(self, p: GeoPoint) -> GeoPoint:
        lat_line = _nearest(self._h_lats, p.lat)
        lon_line = _nearest(self._v_lons, p.lon)
        d_h = abs(p.lat - lat_line) if lat_line is not None else math.inf
        d_v = abs(p.lon - lon_line) if lon_line is not None else math.inf
        if math.isinf(d_h) and math.isinf(d_v):
            return p
        if d_h <= d_v:
            return GeoPoint(lat_line, p.lon)
        return GeoPoint(p.lat, lon_line)

    # -- provider: panorama metadata --------------------------------------

    def nearest_pano(self, loc: GeoPoint) -> Optional[PanoMeta]:
        best: Optional[Tuple[float, str, GeoPoint]] = None
        for key, fixed, along in self._candidate_streets(loc):
            for pano_id, pos in self._panos_near(key, fixed, along):
                d = degree_distance(loc, pos)
                cand = (d, pano_id, pos)
                if best is None or (d, pano_id) < (best[0], best[1]):
                    best = cand
        if best is None or best[0] > PANO_SNAP_RADIUS_DEG:
            return None
        d, pano_id, pos = best
        year = 2015 + derive_seed(self.seed, "date", pano_id) % 5
        month = 1 + derive_seed(self.seed, "month", pano_id) % 12
        return PanoMeta(
            pano_id=pano_id,
            location=pos,
            capture_date=f"{year:04d}-{month:02d}",
            copyright="simworld",
        )

    def _candidate_streets(self, loc: GeoPoint):
        reach = PANO_SNAP_RADIUS_DEG
        for i, lat in enumerate(self._h_lats):
            if abs(loc.lat - lat) <= reach:
                yield (f"h{i:04d}", lat, loc.lon)
        for j, lon in enumerate(self._v_lons):
            if abs(loc.lon - lon) <= reach:
                yield (f"v{j:04d}", lon, loc.lat)

    def _panos_near(self, key: str, fixed: float, along: float):
        spacing = self.spec.pano_spacing
        b = self.spec.bounds
        horizontal = key.startswith("h")
        start = b.bottom_left.lon if horizontal else b.bottom_left.lat
        stop = b.top_right.lon if horizontal else b.top_right.lat
        k0 = int((along - start) / spacing)
        for k in range(max(0, k0 - 3), k0 + 4):
            base = start + k * spacing
            if base > stop:
                continue
            jitter = (derive_unit(self.seed, "pano", key, k) * 2 - 1)
            coord = base + jitter * self.spec.pano_jitter * spacing
            coord = min(max(coord, start), stop)
            pos = GeoPoint(fixed, coord) if horizontal else GeoPoint(coord, fixed)
            yield f"{key}k{k:06d}", pos

    # -- provider: imagery -------------------------------------------------

    def fetch_image(self, req: ImageRequest) -> bytes:
        img = render_scene(req, self.sites)
        buf = io.BytesIO()
        Image.fromarray(img).save(buf, format="PNG")
        return buf.getvalue()


def _grid_lines(lo: float, hi: float, step: float) -> List[float]:
    if step <= 0:
        raise ProviderError(f"non-positive street block size: {step}")
    n = int(math.floor((hi - lo) / step))
    return [lo + i * step for i in range(n + 1) if lo + i * step <= hi]


def _nearest(lines: List[float], x: float) -> Optional[float]:
    if not lines:
        return None
    return min(lines, key=lambda line: (abs(x - line), line))


def _extend(path: List[GeoPoint], p: GeoPoint) -> None:
    if not path or degree_distance(path[-1], p) > 1e-12:
        path.append(p)


def render_scene(req: ImageRequest, sites: List[GeoPoint]) -> np.ndarray:
    """Procedural frame: gray road below the horizon, sky above, and a
    high-contrast striped band for every site inside the rendered frustum.

    Band size and vertical placement scale with proximity, so nearer
    crosswalks dominate the frame.
    """
    h, w = req.height, req.width
    img = np.empty((h, w, 3), dtype=np.uint8)
    horizon = int(h * 0.45)
    img[:horizon] = 170
    img[horizon:] = 90

    visible = []
    for site in sites:
        d = degree_distance(req.pose.position, site)
        if not RENDER_MIN_DIST < d < RENDER_MAX_DIST:
            continue
        offset = _signed_offset(bearing(req.pose.position, site), req.pose.heading)
        if abs(offset) > req.fov / 2.0:
            continue
        visible.append((d, offset))
    # Paint far bands first so near ones overdraw them.
    for d, offset in sorted(visible, reverse=True):
        _paint_band(img, horizon, d, offset, req.fov)
    return img


def _signed_offset(bearing_deg: float, heading_deg: float) -> float:
    diff = angular_diff(bearing_deg, heading_deg)
    # Recover the sign: positive if the target is to the right.
    return diff if (bearing_deg - heading_deg) % 360.0 <= 180.0 else -diff


def _paint_band(img: np.ndarray, horizon: int, d: float, offset: float, fov: float):
    h, w = img.shape[:2]
    t = (RENDER_MAX_DIST - d) / (RENDER_MAX_DIST - RENDER_MIN_DIST)  # 0 far .. 1 near
    x_center = w * (0.5 + offset / fov)
    half_w = w * (0.06 + 0.30 * t)
    y_center = horizon + (h - horizon) * (0.12 + 0.75 * t)
    half_h = max(2.0, h * (0.01 + 0.09 * t))
    x0, x1 = int(max(0, x_center - half_w)), int(min(w, x_center + half_w))
    y0, y1 = int(max(horizon, y_center - half_h)), int(min(h, y_center + half_h))
    if x0 >= x1 or y0 >= y1:
        return
    stripe = max(4, int((x1 - x0) / 10))
    cols = np.arange(x0, x1)
    white = ((cols - x0) // stripe) % 2 == 0
    img[y0:y1, cols[white]] = 235
    img[y0:y1, cols[~white]] = 60


class CountingProviders:
    """Wrap a SimWorld with quota accounting, presenting the provider API."""

    def __init__(self, world: SimWorld, ledger: Optional[QuotaLedger] = None):
        self.world = world
        self.ledger = ledger or QuotaLedger()

    def query_sites(self, region: Region) -> List[GeoPoint]:
        self.ledger.record("sites")
        return self.world.query_sites(region)

    def route(self, origin, waypoints, destination) -> str:
        self.ledger.record("directions")
        return self.world.route(origin, waypoints, destination)

    def nearest_pano(self, loc: GeoPoint) -> Optional[PanoMeta]:
        self.ledger.record("metadata")
        return self.world.nearest_pano(loc)

    def fetch_image(self, req: ImageRequest) -> bytes:
        self.ledger.record("imagery")
        return self.world.fetch_image(req)
