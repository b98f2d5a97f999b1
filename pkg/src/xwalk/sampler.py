"""Densify decoded route points and snap them to real panorama locations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

from .errors import NotEnoughPoints
from .geo import GeoPoint, degree_distance
from .providers.base import PanoMeta, PanoMetadataProvider

# Maximum gap between consecutive candidate locations after augmentation.
MAX_GAP_DEG = 1e-4
# Two points closer than this (per coordinate, after rounding) are the
# same location: ~0.1 m, below panorama spacing and above float noise.
DEDUP_DECIMALS = 6


@dataclass(frozen=True)
class PanoLocation:
    meta: PanoMeta
    source_point: GeoPoint


@dataclass
class SnapStats:
    """Counters surfaced in the run report; drops are expected, not errors."""

    requested: int = 0
    no_pano: int = 0
    duplicates: int = 0


def augment_path(points: List[GeoPoint], max_gap: float = MAX_GAP_DEG) -> List[GeoPoint]:
    """Insert evenly spaced points so no consecutive gap exceeds ``max_gap``.

    Each segment of length d gets k - 1 interior points with k =
    ceil(d / max_gap); original points are preserved in order.
    """
    if len(points) < 2:
        raise NotEnoughPoints(f"need at least 2 points, got {len(points)}")
    out: List[GeoPoint] = [points[0]]
    for a, b in zip(points, points[1:]):
        d = degree_distance(a, b)
        if d > 0:
            k = int(-(-d // max_gap))  # ceil without float drift on exact multiples
            if k * max_gap < d:
                k += 1
            for i in range(1, k):
                t = i / k
                out.append(GeoPoint(a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon)))
        out.append(b)
    return out


def dedup_points(points: List[GeoPoint]) -> List[GeoPoint]:
    """Drop later occurrences of points equal after rounding to 1e-6 degrees."""
    seen = set()
    out = []
    for p in points:
        key = (round(p.lat, DEDUP_DECIMALS), round(p.lon, DEDUP_DECIMALS))
        if key in seen:
            continue
        seen.add(key)
        out.append(p)
    return out


def snap_to_panoramas(
    points: List[GeoPoint],
    pano: PanoMetadataProvider,
    stats: Optional[SnapStats] = None,
) -> List[PanoLocation]:
    """Map each point to its nearest panorama, dropping unsnappable points
    and later points that land on an already-used panorama."""
    stats = stats if stats is not None else SnapStats()
    seen_ids = set()
    out: List[PanoLocation] = []
    for p in points:
        stats.requested += 1
        meta = pano.nearest_pano(p)
        if meta is None:
            stats.no_pano += 1
            continue
        if meta.pano_id in seen_ids:
            stats.duplicates += 1
            continue
        seen_ids.add(meta.pano_id)
        out.append(PanoLocation(meta=meta, source_point=p))
    return out
