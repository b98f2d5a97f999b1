"""Encoded-polyline codec.

Coordinates are scaled by 1e5, rounded half-away-from-zero, delta-encoded,
left-shifted one bit (with bit inversion for negatives), and emitted as
little-endian 5-bit chunks offset by 63, with 0x20 as the continuation
flag; latitude precedes longitude.
"""

from __future__ import annotations

from typing import List

from .errors import MalformedPolyline
from .geo import GeoPoint

_PRECISION = 1e5


def _scale(coord: float) -> int:
    # Round half away from zero on the scaled value, matching the de-facto
    # reference encoder.
    scaled = coord * _PRECISION
    if scaled >= 0:
        return int(scaled + 0.5)
    return -int(-scaled + 0.5)


def _encode_value(delta: int, out: List[str]) -> None:
    value = ~(delta << 1) if delta < 0 else delta << 1
    while value >= 0x20:
        out.append(chr((0x20 | (value & 0x1F)) + 63))
        value >>= 5
    out.append(chr(value + 63))


def encode(points: List[GeoPoint]) -> str:
    """Encode a point list, snapping coordinates to the 1e-5 grid."""
    chunks: List[str] = []
    prev_lat = prev_lon = 0
    for p in points:
        lat = _scale(p.lat)
        lon = _scale(p.lon)
        _encode_value(lat - prev_lat, chunks)
        _encode_value(lon - prev_lon, chunks)
        prev_lat, prev_lon = lat, lon
    return "".join(chunks)


def decode(text: str) -> List[GeoPoint]:
    """Decode polyline text into points (exact multiples of 1e-5 degrees)."""
    points: List[GeoPoint] = []
    index = 0
    length = len(text)
    lat = lon = 0

    def next_value() -> int:
        nonlocal index
        result = 0
        shift = 0
        while True:
            if index >= length:
                raise MalformedPolyline("truncated chunk sequence")
            b = ord(text[index]) - 63
            if b < 0 or b > 63:
                raise MalformedPolyline(f"character out of range at {index}")
            index += 1
            result |= (b & 0x1F) << shift
            shift += 5
            if b < 0x20:
                break
        return ~(result >> 1) if result & 1 else result >> 1

    while index < length:
        lat += next_value()
        if index >= length:
            raise MalformedPolyline("dangling latitude without longitude")
        lon += next_value()
        if not -90 * _PRECISION <= lat <= 90 * _PRECISION:
            raise MalformedPolyline(f"latitude out of range: {lat / _PRECISION}")
        if not -180 * _PRECISION <= lon <= 180 * _PRECISION:
            raise MalformedPolyline(f"longitude out of range: {lon / _PRECISION}")
        points.append(GeoPoint(lat / _PRECISION, lon / _PRECISION))
    return points
