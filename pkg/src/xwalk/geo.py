"""Geometric primitives in raw degree space.

All distances and thresholds in this package are expressed directly in
degrees (Euclidean on the lat/lon plane), not meters.  City-scale regions
make the latitude distortion negligible for the thresholds involved; the
caveat is that an east-west degree shrinks with cos(latitude), so the
annotation band is slightly anisotropic away from the equator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateBearing, InvalidRegion

# Annotation sector geometry: half-angle of the sector and the radial
# distance band (both in degrees) a site must fall in to label an image
# positive.
SECTOR_HALF_ANGLE_DEG = 35.0
SECTOR_MIN_DIST_DEG = 5e-5
SECTOR_MAX_DIST_DEG = 2.5e-4


@dataclass(frozen=True)
class GeoPoint:
    """A world coordinate: latitude and longitude in degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon}")


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle given by its bottom-left and top-right corners."""

    bottom_left: GeoPoint
    top_right: GeoPoint

    def __post_init__(self):
        if (
            self.bottom_left.lat >= self.top_right.lat
            or self.bottom_left.lon >= self.top_right.lon
        ):
            raise InvalidRegion(
                f"degenerate region: {self.bottom_left} .. {self.top_right}"
            )

    @property
    def width(self) -> float:
        return self.top_right.lon - self.bottom_left.lon

    @property
    def height(self) -> float:
        return self.top_right.lat - self.bottom_left.lat

    def contains(self, p: GeoPoint) -> bool:
        """Half-open membership: [min, max) on both axes.

        A point on a shared edge between adjacent tiles therefore belongs
        to exactly one of them (the lower-index one), preventing double
        counting.
        """
        return (
            self.bottom_left.lat <= p.lat < self.top_right.lat
            and self.bottom_left.lon <= p.lon < self.top_right.lon
        )


@dataclass(frozen=True)
class CameraPose:
    """A panorama location plus the compass heading of the rendered view."""

    position: GeoPoint
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", self.heading % 360.0)


def bearing(a: GeoPoint, b: GeoPoint) -> float:
    """Compass bearing from ``a`` to ``b``: 0 = north, 90 = east, in [0, 360)."""
    dlat = b.lat - a.lat
    dlon = b.lon - a.lon
    if dlat == 0.0 and dlon == 0.0:
        raise DegenerateBearing(f"identical points: {a}")
    return math.degrees(math.atan2(dlon, dlat)) % 360.0


def degree_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Euclidean distance between two points in degree space."""
    return math.hypot(b.lat - a.lat, b.lon - a.lon)


def angular_diff(a: float, b: float) -> float:
    """Smallest absolute circular difference between two angles, in [0, 180]."""
    d = abs(a - b) % 360.0
    return 360.0 - d if d > 180.0 else d


def in_annotation_sector(
    pose: CameraPose,
    target: GeoPoint,
    half_angle: float = SECTOR_HALF_ANGLE_DEG,
    min_dist: float = SECTOR_MIN_DIST_DEG,
    max_dist: float = SECTOR_MAX_DIST_DEG,
) -> bool:
    """True iff ``target`` lies in the positive-labeling sector of ``pose``.

    The sector spans heading +/- 35 degrees (inclusive at the boundary) and
    the open radial band (5e-5, 2.5e-4) degrees.  A target coincident with
    the camera fails the lower distance bound and is never an error.
    """
    d = degree_distance(pose.position, target)
    if not min_dist < d < max_dist:
        return False
    return angular_diff(bearing(pose.position, target), pose.heading) <= half_angle
