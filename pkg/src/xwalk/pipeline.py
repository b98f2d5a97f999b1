"""End-to-end orchestration: plan, harvest, annotate, split, train, predict,
evaluate, compare.

Every stage is checkpointed through files (manifest, cache, model,
prediction files), so a failed stage leaves earlier artifacts intact and
the run can resume.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import random
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import baseline
from .annotate import OverrideSet, Sample, apply_overrides, assign_headings, auto_label, make_sample_id
from .config import HarvestConfig, NamedRegion
from .errors import NoHeadingsDerivable, NotEnoughSites, XwalkError
from .geo import GeoPoint, Region
from .metrics import (
    EvalReport,
    evaluate,
    instance_accuracy,
    paired_t_test,
    read_predictions,
    read_spans,
    write_predictions,
)
from .planner import SubRegion, density_partition, split_region
from .polyline import decode
from .providers.base import ImageRequest, QuotaLedger, RateLimiter, batch_waypoint_requests
from .providers.live import (
    DEFAULT_DIRECTIONS_URL,
    DEFAULT_IMAGE_URL,
    DEFAULT_METADATA_URL,
    DEFAULT_OVERPASS_URL,
    DirectionsClient,
    DiskCache,
    HttpClient,
    OverpassSiteClient,
    PanoMetadataClient,
    StaticImageClient,
)
from .providers.sim import CountingProviders, SimWorld, SimWorldSpec
from .sampler import SnapStats, augment_path, dedup_points, snap_to_panoramas
from .seeding import derive_seed
from .store import (
    DatasetManifest,
    SplitSpec,
    read_manifest,
    sample_negatives,
    split_by_region,
    write_manifest,
)

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
REPORT_NAME = "run_report.json"


def config_echo(config: HarvestConfig) -> Dict:
    echo = {
        "provider": config.provider,
        "seed": config.seed,
        "shuffle_sites": config.shuffle_sites,
        "parallelism": config.parallelism,
        "thresholds": dataclasses.asdict(config.thresholds),
        "sim": dataclasses.asdict(config.sim),
        "split": dataclasses.asdict(config.split),
        "regions": [
            {
                "name": r.name,
                "bottom_left": [r.region.bottom_left.lat, r.region.bottom_left.lon],
                "top_right": [r.region.top_right.lat, r.region.top_right.lon],
            }
            for r in config.regions
        ],
    }
    return echo


def _world_bounds(regions: List[NamedRegion]) -> Region:
    lats = [r.region.bottom_left.lat for r in regions] + [r.region.top_right.lat for r in regions]
    lons = [r.region.bottom_left.lon for r in regions] + [r.region.top_right.lon for r in regions]
    return Region(GeoPoint(min(lats), min(lons)), GeoPoint(max(lats), max(lons)))


def build_providers(config: HarvestConfig, ledger: Optional[QuotaLedger] = None):
    """Instantiate the four provider roles behind one facade object."""
    ledger = ledger or QuotaLedger(config.daily_caps)
    if config.provider == "sim":
        spec = SimWorldSpec(
            bounds=_world_bounds(config.regions),
            block_size=config.sim.block_size,
            n_sites=config.sim.n_sites,
            pano_spacing=config.sim.pano_spacing,
            pano_jitter=config.sim.pano_jitter,
        )
        return CountingProviders(SimWorld(config.seed, spec), ledger)
    cache = DiskCache(config.cache_dir)

    def http(service: str) -> HttpClient:
        rate = config.rate_limits.get(service)
        limiter = RateLimiter(rate) if rate else None
        return HttpClient(service, cache=cache, limiter=limiter, ledger=ledger)

    class LiveProviders:
        def __init__(self):
            self.ledger = ledger
            self._sites = OverpassSiteClient(
                http("sites"), config.endpoints.get("sites", DEFAULT_OVERPASS_URL)
            )
            self._directions = DirectionsClient(
                http("directions"),
                config.endpoints.get("directions", DEFAULT_DIRECTIONS_URL),
                config.api_key_env,
            )
            self._metadata = PanoMetadataClient(
                http("metadata"),
                config.endpoints.get("metadata", DEFAULT_METADATA_URL),
                config.api_key_env,
            )
            self._imagery = StaticImageClient(
                http("imagery"),
                config.endpoints.get("imagery", DEFAULT_IMAGE_URL),
                config.api_key_env,
            )

        def query_sites(self, region):
            return self._sites.query_sites(region)

        def route(self, origin, waypoints, destination):
            return self._directions.route(origin, waypoints, destination)

        def nearest_pano(self, loc):
            return self._metadata.nearest_pano(loc)

        def fetch_image(self, req):
            return self._imagery.fetch_image(req)

    return LiveProviders()


def plan(config: HarvestConfig, providers=None) -> List[SubRegion]:
    """Tile each configured region and keep only density-compliant tiles."""
    providers = providers or build_providers(config)
    t = config.thresholds
    kept: List[SubRegion] = []
    for named in config.regions:
        for sub in split_region(named.region, named.name, t.max_dimension_deg):
            kept.extend(
                density_partition(
                    sub,
                    lambda region: len(providers.query_sites(region)),
                    min_sites=t.min_sites,
                    max_sites=t.max_sites,
                )
            )
    return kept


def _safe_name(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", text)


def _ordered_sites(config: HarvestConfig, sub: SubRegion, sites: List[GeoPoint]):
    ordered = sorted(sites, key=lambda p: (p.lat, p.lon))
    if config.shuffle_sites:
        rng = random.Random(derive_seed(config.seed, "site-order", sub.parent_id))
        rng.shuffle(ordered)
    return ordered


def harvest(config: HarvestConfig, out_dir, dry_run: bool = False) -> Dict:
    """Run the acquisition pipeline and write manifest + run report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ledger = QuotaLedger(config.daily_caps)
    providers = build_providers(config, ledger)
    t = config.thresholds
    kept = plan(config, providers)
    report: Dict = {
        "seed": config.seed,
        "provider": config.provider,
        "dry_run": dry_run,
        "kept_sub_regions": len(kept),
        "sub_regions": [],
    }
    samples: List[Sample] = []
    seen_ids = set()
    snap_stats = SnapStats()
    duplicate_samples = 0
    planned_routes = 0

    for sub in kept:
        sites = providers.query_sites(sub.bounds)
        sub_report = {"region_id": sub.parent_id, "sites": len(sites)}
        report["sub_regions"].append(sub_report)
        if len(sites) < 2:
            sub_report["skipped"] = "fewer than 2 sites"
            continue
        ordered = _ordered_sites(config, sub, sites)
        try:
            batches = batch_waypoint_requests(ordered)
        except NotEnoughSites:
            sub_report["skipped"] = "not enough sites to route"
            continue
        planned_routes += len(batches)
        if dry_run:
            sub_report["planned_route_requests"] = len(batches)
            continue

        path: List[GeoPoint] = []
        for origin, waypoints, destination in batches:
            for p in decode(providers.route(origin, waypoints, destination)):
                if not path or (path[-1].lat, path[-1].lon) != (p.lat, p.lon):
                    path.append(p)
        if len(path) < 2:
            sub_report["skipped"] = "degenerate route"
            continue
        candidates = dedup_points(augment_path(path, t.max_gap_deg))
        snapped = snap_to_panoramas(candidates, providers, snap_stats)
        if len(snapped) < 2:
            sub_report["skipped"] = "fewer than 2 panoramas"
            continue
        try:
            poses = assign_headings(snapped)
        except NoHeadingsDerivable:
            sub_report["skipped"] = "no headings derivable"
            continue

        requests = []
        for loc, pose in zip(snapped, poses):
            sample_id = make_sample_id(loc.meta.pano_id, pose.heading)
            if sample_id in seen_ids:
                duplicate_samples += 1
                continue
            seen_ids.add(sample_id)
            requests.append((sample_id, loc, pose))

        image_dir = out / "images" / _safe_name(sub.parent_id)
        image_dir.mkdir(parents=True, exist_ok=True)

        def fetch(item):
            _, _, pose = item
            return providers.fetch_image(ImageRequest(pose=pose))

        if config.parallelism > 1:
            with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
                blobs = list(pool.map(fetch, requests))
        else:
            blobs = [fetch(item) for item in requests]

        for (sample_id, loc, pose), blob in zip(requests, blobs):
            rel = f"images/{_safe_name(sub.parent_id)}/{_safe_name(sample_id)}.png"
            (out / rel).write_bytes(blob)
            label = auto_label(
                pose,
                sites,
                half_angle=t.sector_half_angle_deg,
                min_dist=t.sector_min_dist_deg,
                max_dist=t.sector_max_dist_deg,
            )
            samples.append(
                Sample(
                    sample_id=sample_id,
                    pose=pose,
                    pano=loc.meta,
                    image_ref=rel,
                    label=label,
                    region_id=sub.parent_id,
                )
            )
        sub_report["samples"] = len(requests)

    report["planned_route_requests"] = planned_routes
    report["snap"] = dataclasses.asdict(snap_stats)
    report["duplicate_sample_ids"] = duplicate_samples
    report["samples"] = len(samples)
    report["positives"] = sum(1 for s in samples if s.label.value == "positive")
    report["negatives"] = sum(1 for s in samples if s.label.value == "negative")
    report["quota"] = ledger.counts() if hasattr(ledger, "counts") else {}

    if not dry_run:
        manifest = DatasetManifest(generation_params=config_echo(config), samples=samples)
        write_manifest(manifest, out / MANIFEST_NAME)
        report["manifest"] = MANIFEST_NAME
    (out / REPORT_NAME).write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return report


def annotate_stage(manifest_path, overrides_path) -> int:
    """Apply a manual override file to the manifest, atomically."""
    m = read_manifest(manifest_path)
    ov = OverrideSet.from_file(overrides_path)
    updated = apply_overrides(m.samples, ov)
    out = DatasetManifest(
        generation_params=m.generation_params,
        samples=updated,
        splits=dict(m.splits),
        format_version=m.format_version,
    )
    Path(manifest_path).unlink()
    write_manifest(out, manifest_path)
    return len(ov)


def split_stage(manifest_path, spec: SplitSpec) -> Dict:
    m = read_manifest(manifest_path)
    out = split_by_region(m, spec)
    Path(manifest_path).unlink()
    write_manifest(out, manifest_path)
    counts = {split: len(out.in_split(split)) for split in ("train", "val", "test")}
    counts["test_regions"] = sorted(
        {s.region_id for s in out.samples if out.split_of(s) == "test"}
    )
    return counts


def train_stage(manifest_path, images_root, model_path, spec: SplitSpec,
                config: Optional[baseline.TrainConfig] = None) -> Dict:
    """Train the reference classifier on the 2:1-sampled train split."""
    m = read_manifest(manifest_path)
    selection = sample_negatives(m, "train", spec)
    cfg = config or baseline.TrainConfig(seed=derive_seed(spec.seed, "baseline-train"))
    model, history = baseline.train_baseline(selection, images_root, cfg)
    baseline.save_model(model, model_path)
    history["selected"] = len(selection)
    return history


def predict_stage(manifest_path, images_root, model_path, split, predictions_path) -> int:
    m = read_manifest(manifest_path)
    model = baseline.load_model(model_path)
    members = m.in_split(split)
    preds: List[Tuple[str, float]] = []
    root = Path(images_root)
    for s in members:
        img = baseline.decode_image(root / s.image_ref)
        prob_pos, _ = baseline.predict(model, img)
        preds.append((s.sample_id, prob_pos))
    write_predictions(predictions_path, preds)
    return len(preds)


def eval_stage(
    manifest_path,
    predictions_path,
    split: str,
    threshold: float = 0.5,
    spans_path=None,
    sequence_preds: Optional[Dict[str, Dict[int, bool]]] = None,
) -> EvalReport:
    m = read_manifest(manifest_path)
    preds = read_predictions(predictions_path)
    truth = [(s.sample_id, s.label.value) for s in m.in_split(split)]
    inst = None
    if spans_path is not None and sequence_preds is not None:
        inst = instance_accuracy(sequence_preds, read_spans(spans_path))
    return evaluate(preds, truth, threshold, instance_acc=inst)


def compare_stage(path_a, path_b):
    a = _read_metric_file(path_a)
    b = _read_metric_file(path_b)
    return paired_t_test(a, b)


def _read_metric_file(path) -> List[float]:
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise XwalkError(f"{path}:{lineno}: bad metric value {line!r}") from exc
    return values
