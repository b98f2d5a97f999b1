"""Provider-facing types shared by the live and simulated clients."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Protocol, Tuple

from ..errors import NotEnoughSites, QuotaExhausted, TooManyWaypoints
from ..geo import CameraPose, GeoPoint, Region

# The directions service accepts the origin, the destination, and up to 23
# intermediate waypoints per request.
MAX_WAYPOINTS = 23
# Snap radius for panorama lookup: 50 m expressed in degrees via the
# 1e-4 deg ~ 11 m equivalence used throughout.
PANO_SNAP_RADIUS_DEG = 4.5e-4

DEFAULT_IMAGE_WIDTH = 640
DEFAULT_IMAGE_HEIGHT = 520
DEFAULT_FOV_DEG = 90.0
DEFAULT_PITCH_DEG = 0.0


@dataclass(frozen=True)
class PanoMeta:
    """Metadata for one panorama returned by the metadata service."""

    pano_id: str
    location: GeoPoint
    capture_date: Optional[str] = None  # "YYYY-MM"
    copyright: Optional[str] = None

    def __post_init__(self):
        if not self.pano_id:
            raise ValueError("empty pano_id")


@dataclass(frozen=True)
class ImageRequest:
    """Parameters of one street-level image render."""

    pose: CameraPose
    width: int = DEFAULT_IMAGE_WIDTH
    height: int = DEFAULT_IMAGE_HEIGHT
    fov: float = DEFAULT_FOV_DEG
    pitch: float = DEFAULT_PITCH_DEG

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")


class SiteProvider(Protocol):
    def query_sites(self, region: Region) -> List[GeoPoint]: ...


class DirectionsProvider(Protocol):
    def route(
        self, origin: GeoPoint, waypoints: List[GeoPoint], destination: GeoPoint
    ) -> str: ...


class PanoMetadataProvider(Protocol):
    def nearest_pano(self, loc: GeoPoint) -> Optional[PanoMeta]: ...


class ImageProvider(Protocol):
    def fetch_image(self, req: ImageRequest) -> bytes: ...


class QuotaLedger:
    """Per-service request counters with optional daily caps."""

    def __init__(self, daily_caps: Optional[Dict[str, int]] = None):
        self._lock = threading.Lock()
        self._counts: Dict[str, int] = {}
        self._caps = dict(daily_caps or {})

    def record(self, service: str) -> None:
        with self._lock:
            count = self._counts.get(service, 0) + 1
            cap = self._caps.get(service)
            if cap is not None and count > cap:
                raise QuotaExhausted(f"daily cap of {cap} exceeded for {service}")
            self._counts[service] = count

    def counts(self) -> Dict[str, int]:
        with self._lock:
            return dict(self._counts)


class RateLimiter:
    """Token-per-interval limiter shared by all callers of one service.

    ``clock``/``sleep`` are injectable so tests can verify pacing without
    wall-clock waits.
    """

    def __init__(self, requests_per_second: float, clock=time.monotonic, sleep=time.sleep):
        if requests_per_second <= 0:
            raise ValueError("rate must be positive")
        self._interval = 1.0 / requests_per_second
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_free = 0.0

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            wait = self._next_free - now
            start = max(now, self._next_free)
            self._next_free = start + self._interval
        if wait > 0:
            self._sleep(wait)


def batch_waypoint_requests(
    sites: List[GeoPoint],
) -> List[Tuple[GeoPoint, List[GeoPoint], GeoPoint]]:
    """Chunk an ordered site list into routing requests.

    Greedy groups of at most 25 consecutive sites (origin + 23 waypoints +
    destination); consecutive groups share their boundary site so the
    concatenated path is continuous.
    """
    if len(sites) < 2:
        raise NotEnoughSites(f"need at least 2 sites, got {len(sites)}")
    groups = []
    start = 0
    step = MAX_WAYPOINTS + 1
    while start < len(sites) - 1:
        end = min(start + step, len(sites) - 1)
        chunk = sites[start : end + 1]
        groups.append((chunk[0], chunk[1:-1], chunk[-1]))
        start = end
    return groups


def check_waypoint_count(waypoints: List[GeoPoint]) -> None:
    if len(waypoints) > MAX_WAYPOINTS:
        raise TooManyWaypoints(
            f"{len(waypoints)} waypoints exceed the limit of {MAX_WAYPOINTS}"
        )
