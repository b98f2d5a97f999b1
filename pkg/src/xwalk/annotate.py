"""Heading assignment, the automatic labeling rule, and manual overrides."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional

from .errors import NoHeadingsDerivable, UnknownSample
from .geo import CameraPose, GeoPoint, bearing, degree_distance, in_annotation_sector
from .providers.base import PanoMeta
from .sampler import PanoLocation

log = logging.getLogger(__name__)

POSITIVE = "positive"
NEGATIVE = "negative"
AUTO = "auto"
MANUAL = "manual"


@dataclass(frozen=True)
class Label:
    value: str  # positive | negative
    source: str  # auto | manual

    def __post_init__(self):
        if self.value not in (POSITIVE, NEGATIVE):
            raise ValueError(f"bad label value: {self.value}")
        if self.source not in (AUTO, MANUAL):
            raise ValueError(f"bad label source: {self.source}")


@dataclass(frozen=True)
class Sample:
    sample_id: str
    pose: CameraPose
    pano: PanoMeta
    image_ref: str
    label: Label
    region_id: str
    frame_index: Optional[int] = None


def make_sample_id(pano_id: str, heading: float) -> str:
    return f"{pano_id}@{heading:.2f}"


def assign_headings(locs: List[PanoLocation]) -> List[CameraPose]:
    """Heading of location i is the bearing to the next distinct location.

    Trailing locations with no distinct successor are dropped; coincident
    runs are skipped when searching for the successor.
    """
    positions = [loc.meta.location for loc in locs]
    poses: List[CameraPose] = []
    for i, here in enumerate(positions[:-1] if positions else []):
        succ = None
        for cand in positions[i + 1 :]:
            if degree_distance(here, cand) > 0:
                succ = cand
                break
        if succ is None:
            break
        poses.append(CameraPose(position=here, heading=bearing(here, succ)))
    if len(positions) >= 2 and not poses:
        raise NoHeadingsDerivable("all locations coincide")
    if len(positions) < 2:
        raise NoHeadingsDerivable("need at least 2 locations")
    return poses


def auto_label(pose: CameraPose, sites: List[GeoPoint], **sector_kwargs) -> Label:
    """Positive iff any site falls inside the pose's annotation sector."""
    positive = any(in_annotation_sector(pose, s, **sector_kwargs) for s in sites)
    return Label(value=POSITIVE if positive else NEGATIVE, source=AUTO)


class OverrideSet:
    """Manual relabels keyed by sample id."""

    def __init__(self, values: Optional[Dict[str, str]] = None):
        self.values: Dict[str, str] = {}
        for sample_id, value in (values or {}).items():
            if value not in (POSITIVE, NEGATIVE):
                raise ValueError(f"bad override value for {sample_id}: {value}")
            self.values[sample_id] = value

    def __len__(self):
        return len(self.values)

    @classmethod
    def from_file(cls, path) -> "OverrideSet":
        """One record per line: ``sample_id<TAB>positive|negative``.

        A duplicate sample_id within the file wins with its last value.
        """
        values: Dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected sample_id<TAB>label")
                sample_id, value = parts
                if value not in (POSITIVE, NEGATIVE):
                    raise ValueError(f"{path}:{lineno}: bad label {value!r}")
                if sample_id in values:
                    log.warning("%s:%d: duplicate override for %s; last wins",
                                path, lineno, sample_id)
                values[sample_id] = value
        return cls(values)


def apply_overrides(samples: List[Sample], ov: OverrideSet) -> List[Sample]:
    """Apply manual overrides atomically; any unknown id rejects the batch.

    A same-value override still flips the source to manual, so the count
    of reviewed images stays recoverable from provenance alone.
    """
    known = {s.sample_id for s in samples}
    unknown = sorted(set(ov.values) - known)
    if unknown:
        raise UnknownSample(f"override references unknown sample ids: {unknown[:5]}")
    out = []
    for s in samples:
        value = ov.values.get(s.sample_id)
        if value is None:
            out.append(s)
        else:
            out.append(replace(s, label=Label(value=value, source=MANUAL)))
    return out
