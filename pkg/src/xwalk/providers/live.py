"""Live HTTP clients for the four external services.

Every client shares the same plumbing: a disk cache keyed by a canonical
request hash (so interrupted harvests resume without re-spending quota), a
per-service rate limiter, quota accounting, and a retrying transport with
exponential backoff.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Dict, List, Optional
from urllib.parse import urlencode

import requests

from ..errors import ProviderError, RegionTooLarge
from ..geo import GeoPoint, Region
from ..planner import MAX_DIMENSION_DEG
from .base import ImageRequest, PanoMeta, QuotaLedger, RateLimiter, check_waypoint_count

DEFAULT_OVERPASS_URL = "https://overpass-api.de/api/interpreter"
DEFAULT_DIRECTIONS_URL = "https://maps.googleapis.com/maps/api/directions/json"
DEFAULT_METADATA_URL = "https://maps.googleapis.com/maps/api/streetview/metadata"
DEFAULT_IMAGE_URL = "https://maps.googleapis.com/maps/api/streetview"

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class DiskCache:
    """``<root>/<service>/<request-hash>`` raw bytes plus a ``.meta.json`` sidecar."""

    def __init__(self, root):
        self.root = Path(root)

    def path(self, service: str, key: str) -> Path:
        return self.root / service / key

    def get(self, service: str, key: str) -> Optional[bytes]:
        p = self.path(service, key)
        if p.is_file():
            return p.read_bytes()
        return None

    def put(self, service: str, key: str, data: bytes, meta: Dict) -> None:
        p = self.path(service, key)
        p.parent.mkdir(parents=True, exist_ok=True)
        tmp = p.with_suffix(".tmp")
        tmp.write_bytes(data)
        tmp.replace(p)
        sidecar = p.with_name(p.name + ".meta.json")
        sidecar.write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")


def request_key(method: str, url: str, params: Optional[Dict], body: Optional[str]) -> str:
    canonical = "\n".join(
        [method.upper(), url, urlencode(sorted((params or {}).items())), body or ""]
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class HttpClient:
    """Shared fetch path: cache -> rate limit -> quota -> retrying request."""

    def __init__(
        self,
        service: str,
        cache: Optional[DiskCache] = None,
        limiter: Optional[RateLimiter] = None,
        ledger: Optional[QuotaLedger] = None,
        session=None,
        max_attempts: int = 3,
        backoff: float = 0.5,
        sleep=time.sleep,
        timeout: float = 30.0,
    ):
        self.service = service
        self.cache = cache
        self.limiter = limiter
        self.ledger = ledger or QuotaLedger()
        self.session = session or requests.Session()
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.sleep = sleep
        self.timeout = timeout

    def fetch(
        self,
        method: str,
        url: str,
        params: Optional[Dict] = None,
        body: Optional[str] = None,
    ) -> bytes:
        key = request_key(method, url, params, body)
        if self.cache is not None:
            cached = self.cache.get(self.service, key)
            if cached is not None:
                return cached
        last_error = None
        for attempt in range(self.max_attempts):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            if self.limiter is not None:
                self.limiter.acquire()
            self.ledger.record(self.service)
            try:
                resp = self.session.request(
                    method, url, params=params, data=body, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = f"transport failure: {exc}"
                continue
            if resp.status_code in RETRYABLE_STATUS:
                last_error = f"HTTP {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise ProviderError(
                    f"{self.service}: HTTP {resp.status_code}", retryable=False
                )
            data = resp.content
            if self.cache is not None:
                self.cache.put(
                    self.service,
                    key,
                    data,
                    {"url": url, "params": params or {}, "status": resp.status_code},
                )
            return data
        raise ProviderError(
            f"{self.service}: giving up after {self.max_attempts} attempts ({last_error})",
            retryable=True,
        )


def _api_key(env_var: str) -> str:
    key = os.environ.get(env_var, "")
    if not key:
        raise ProviderError(f"API key environment variable {env_var} is not set")
    return key


class OverpassSiteClient:
    """Bounding-box node query for highway=crossing."""

    def __init__(self, http: HttpClient, endpoint: str = DEFAULT_OVERPASS_URL):
        self.http = http
        self.endpoint = endpoint

    def query_sites(self, region: Region) -> List[GeoPoint]:
        if region.width > MAX_DIMENSION_DEG or region.height > MAX_DIMENSION_DEG:
            raise RegionTooLarge(
                f"region {region.width}x{region.height} exceeds {MAX_DIMENSION_DEG} deg"
            )
        bbox = (
            f"{region.bottom_left.lat},{region.bottom_left.lon},"
            f"{region.top_right.lat},{region.top_right.lon}"
        )
        query = f'[out:json];node["highway"="crossing"]({bbox});out;'
        raw = self.http.fetch("POST", self.endpoint, body=query)
        return _parse_sites(raw)


def _parse_sites(raw: bytes) -> List[GeoPoint]:
    text = raw.decode("utf-8", errors="replace").lstrip()
    try:
        if text.startswith("<"):
            root = ET.fromstring(text)
            return [
                GeoPoint(float(node.attrib["lat"]), float(node.attrib["lon"]))
                for node in root.iter("node")
            ]
        payload = json.loads(text)
        return [
            GeoPoint(float(el["lat"]), float(el["lon"]))
            for el in payload.get("elements", [])
            if el.get("type") == "node"
        ]
    except (ET.ParseError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ProviderError(f"unparseable site response: {exc}") from exc


class DirectionsClient:
    def __init__(
        self,
        http: HttpClient,
        endpoint: str = DEFAULT_DIRECTIONS_URL,
        api_key_env: str = "XWALK_API_KEY",
    ):
        self.http = http
        self.endpoint = endpoint
        self.api_key_env = api_key_env

    def route(
        self, origin: GeoPoint, waypoints: List[GeoPoint], destination: GeoPoint
    ) -> str:
        check_waypoint_count(waypoints)
        params = {
            "origin": f"{origin.lat},{origin.lon}",
            "destination": f"{destination.lat},{destination.lon}",
            "mode": "driving",
            "key": _api_key(self.api_key_env),
        }
        if waypoints:
            params["waypoints"] = "|".join(f"{p.lat},{p.lon}" for p in waypoints)
        raw = self.http.fetch("GET", self.endpoint, params=params)
        try:
            payload = json.loads(raw)
            if payload.get("status") != "OK" or not payload.get("routes"):
                raise ProviderError(f"no route: status={payload.get('status')}")
            return payload["routes"][0]["overview_polyline"]["points"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"unparseable directions response: {exc}") from exc


class PanoMetadataClient:
    def __init__(
        self,
        http: HttpClient,
        endpoint: str = DEFAULT_METADATA_URL,
        api_key_env: str = "XWALK_API_KEY",
    ):
        self.http = http
        self.endpoint = endpoint
        self.api_key_env = api_key_env

    def nearest_pano(self, loc: GeoPoint) -> Optional[PanoMeta]:
        params = {
            "location": f"{loc.lat},{loc.lon}",
            "key": _api_key(self.api_key_env),
        }
        raw = self.http.fetch("GET", self.endpoint, params=params)
        try:
            payload = json.loads(raw)
            status = payload.get("status")
            if status == "ZERO_RESULTS":
                return None
            if status != "OK":
                raise ProviderError(f"metadata status {status}")
            location = payload["location"]
            return PanoMeta(
                pano_id=payload["pano_id"],
                location=GeoPoint(float(location["lat"]), float(location["lng"])),
                capture_date=payload.get("date"),
                copyright=payload.get("copyright"),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"unparseable metadata response: {exc}") from exc


class StaticImageClient:
    def __init__(
        self,
        http: HttpClient,
        endpoint: str = DEFAULT_IMAGE_URL,
        api_key_env: str = "XWALK_API_KEY",
    ):
        self.http = http
        self.endpoint = endpoint
        self.api_key_env = api_key_env

    def fetch_image(self, req: ImageRequest) -> bytes:
        params = {
            "location": f"{req.pose.position.lat},{req.pose.position.lon}",
            "size": f"{req.width}x{req.height}",
            "fov": f"{req.fov:g}",
            "pitch": f"{req.pitch:g}",
            "heading": f"{req.pose.heading:g}",
            "key": _api_key(self.api_key_env),
        }
        return self.http.fetch("GET", self.endpoint, params=params)
