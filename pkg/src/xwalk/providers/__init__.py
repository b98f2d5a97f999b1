from .base import (
    MAX_WAYPOINTS,
    PANO_SNAP_RADIUS_DEG,
    ImageRequest,
    PanoMeta,
    QuotaLedger,
    RateLimiter,
    batch_waypoint_requests,
)
from .sim import CountingProviders, SimWorld, SimWorldSpec

__all__ = [
    "MAX_WAYPOINTS",
    "PANO_SNAP_RADIUS_DEG",
    "ImageRequest",
    "PanoMeta",
    "QuotaLedger",
    "RateLimiter",
    "batch_waypoint_requests",
    "CountingProviders",
    "SimWorld",
    "SimWorldSpec",
]
