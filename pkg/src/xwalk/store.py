"""Dataset manifest persistence, region-disjoint splits, and negative sampling.

The manifest is line-oriented JSON: a single header record followed by one
sample record per line.  Serialization is canonical (sorted keys, degrees
formatted with 6 fractional digits) so writing the same manifest twice is
byte-identical.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

from .annotate import Label, Sample
from .errors import CannotSplit, CorruptManifest, InsufficientNegatives, UnsupportedVersion
from .geo import CameraPose, GeoPoint
from .providers.base import PanoMeta
from .seeding import derive_seed

FORMAT_VERSION = 1
SPLITS = ("train", "val", "test", "unassigned")


@dataclass
class SplitSpec:
    test_fraction: float = 0.25
    val_fraction_of_trainval: float = 0.10
    negative_ratio: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.test_fraction < 1:
            raise ValueError(f"test_fraction out of (0,1): {self.test_fraction}")
        if not 0 < self.val_fraction_of_trainval < 1:
            raise ValueError(
                f"val_fraction_of_trainval out of (0,1): {self.val_fraction_of_trainval}"
            )
        if self.negative_ratio <= 0:
            raise ValueError(f"negative_ratio must be positive: {self.negative_ratio}")


@dataclass
class DatasetManifest:
    generation_params: Dict = field(default_factory=dict)
    samples: List[Sample] = field(default_factory=list)
    splits: Dict[str, str] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        ids = [s.sample_id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise CorruptManifest("duplicate sample ids in manifest")
        id_set = set(ids)
        for sample_id, split in self.splits.items():
            if sample_id not in id_set:
                raise CorruptManifest(f"split assignment for unknown sample {sample_id}")
            if split not in SPLITS:
                raise CorruptManifest(f"unknown split {split!r}")
        for sample_id in id_set - set(self.splits):
            self.splits[sample_id] = "unassigned"

    def split_of(self, sample: Sample) -> str:
        return self.splits[sample.sample_id]

    def in_split(self, split: str) -> List[Sample]:
        return [s for s in self.samples if self.splits[s.sample_id] == split]


def _canonical_params(params: Dict) -> str:
    return json.dumps(params, sort_keys=True, separators=(",", ":"))


def _sample_line(s: Sample, split: str) -> str:
    # Keys in sorted order; lat/lon/heading as fixed 6-decimal tokens.
    heading = f"{s.pose.heading:.6f}"
    if heading == "360.000000":  # rounding must not escape [0, 360)
        heading = "0.000000"
    fields = [
        ("capture_date", json.dumps(s.pano.capture_date)),
        ("frame_index", json.dumps(s.frame_index)),
        ("heading", heading),
        ("image_ref", json.dumps(s.image_ref)),
        ("label", json.dumps(s.label.value)),
        ("label_source", json.dumps(s.label.source)),
        ("lat", f"{s.pose.position.lat:.6f}"),
        ("lon", f"{s.pose.position.lon:.6f}"),
        ("pano_id", json.dumps(s.pano.pano_id)),
        ("region_id", json.dumps(s.region_id)),
        ("sample_id", json.dumps(s.sample_id)),
        ("split", json.dumps(split)),
    ]
    return "{" + ",".join(f'"{k}":{v}' for k, v in fields) + "}"


def write_manifest(m: DatasetManifest, path) -> None:
    """Write the manifest canonically, holding an exclusive lock file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lock = path.with_name(path.name + ".lock")
    fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    try:
        os.close(fd)
        lines = [
            json.dumps(
                {"format_version": m.format_version, "generation_params": m.generation_params},
                sort_keys=True,
                separators=(",", ":"),
            )
        ]
        for s in m.samples:
            lines.append(_sample_line(s, m.splits[s.sample_id]))
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
        tmp.replace(path)
    finally:
        os.unlink(lock)


def read_manifest(path) -> DatasetManifest:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise CorruptManifest(f"bad header: {exc}") from exc
        version = header.get("format_version")
        if version != FORMAT_VERSION:
            raise UnsupportedVersion(f"unknown manifest format_version: {version}")
        samples: List[Sample] = []
        splits: Dict[str, str] = {}
        for lineno, line in enumerate(fh, 2):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                sample = Sample(
                    sample_id=rec["sample_id"],
                    pose=CameraPose(
                        position=GeoPoint(rec["lat"], rec["lon"]), heading=rec["heading"]
                    ),
                    pano=PanoMeta(
                        pano_id=rec["pano_id"],
                        location=GeoPoint(rec["lat"], rec["lon"]),
                        capture_date=rec["capture_date"],
                    ),
                    image_ref=rec["image_ref"],
                    label=Label(value=rec["label"], source=rec["label_source"]),
                    region_id=rec["region_id"],
                    frame_index=rec["frame_index"],
                )
                split = rec["split"]
            except (KeyError, TypeError, ValueError) as exc:
                raise CorruptManifest(f"{path}:{lineno}: {exc}") from exc
            if sample.sample_id in splits:
                raise CorruptManifest(
                    f"{path}:{lineno}: duplicate sample id {sample.sample_id}"
                )
            samples.append(sample)
            splits[sample.sample_id] = split
    return DatasetManifest(
        generation_params=header.get("generation_params", {}),
        samples=samples,
        splits=splits,
        format_version=version,
    )


def split_by_region(m: DatasetManifest, spec: SplitSpec) -> DatasetManifest:
    """Assign region-disjoint test regions, then per-sample train/val.

    Regions are shuffled by seed and greedily moved to the test split
    until the test sample count first reaches test_fraction of the total.
    """
    regions = sorted({s.region_id for s in m.samples})
    if len(regions) < 2:
        raise CannotSplit(f"need at least 2 regions, got {len(regions)}")
    per_region: Dict[str, int] = {r: 0 for r in regions}
    for s in m.samples:
        per_region[s.region_id] += 1
    total = len(m.samples)
    rng = random.Random(derive_seed(spec.seed, "region-shuffle"))
    rng.shuffle(regions)
    test_regions = set()
    test_count = 0
    for region in regions:
        if test_count >= spec.test_fraction * total:
            break
        test_regions.add(region)
        test_count += per_region[region]
    splits = {}
    trainval = []
    for s in m.samples:
        if s.region_id in test_regions:
            splits[s.sample_id] = "test"
        else:
            trainval.append(s.sample_id)
    # Exact seeded quota: shuffle then take the first round(val_fraction * n)
    # as validation, so the 90/10 ratio holds to within one sample.
    trainval.sort()
    val_rng = random.Random(derive_seed(spec.seed, "val-draw"))
    val_rng.shuffle(trainval)
    n_val = int(spec.val_fraction_of_trainval * len(trainval) + 0.5)
    for i, sample_id in enumerate(trainval):
        splits[sample_id] = "val" if i < n_val else "train"
    return DatasetManifest(
        generation_params=m.generation_params,
        samples=list(m.samples),
        splits=splits,
        format_version=m.format_version,
    )


def sample_negatives(m: DatasetManifest, split: str, spec: SplitSpec) -> List[Sample]:
    """All positives of the split plus a seeded random 2:1 negative subset."""
    members = m.in_split(split)
    positives = [s for s in members if s.label.value == "positive"]
    negatives = [s for s in members if s.label.value == "negative"]
    need = int(spec.negative_ratio * len(positives) + 0.5)
    if len(negatives) < need:
        raise InsufficientNegatives(
            f"need {need} negatives in {split}, have {len(negatives)}",
            shortfall=need - len(negatives),
        )
    rng = random.Random(derive_seed(spec.seed, "negatives", split))
    chosen = rng.sample(negatives, need)
    selection = positives + chosen
    rng.shuffle(selection)
    return selection
