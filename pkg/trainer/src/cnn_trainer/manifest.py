"""Reader for the dataset manifest file format.

The format (defined by the harvesting pipeline and treated as frozen): a
line-oriented JSON file whose first line is a header with
``format_version`` and whose remaining lines each describe one sample
with at least ``sample_id``, ``image_ref``, ``label`` and ``split``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List

SUPPORTED_VERSION = 1
LABELS = ("positive", "negative")
SPLITS = ("train", "val", "test", "unassigned")


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestRecord:
    sample_id: str
    image_ref: str
    label: str
    split: str


def read_manifest(path) -> List[ManifestRecord]:
    path = Path(path)
    records: List[ManifestRecord] = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}:1: bad header: {exc}") from exc
        version = header.get("format_version")
        if version != SUPPORTED_VERSION:
            raise ManifestError(f"{path}: unsupported format_version {version}")
        for lineno, line in enumerate(fh, 2):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                record = ManifestRecord(
                    sample_id=rec["sample_id"],
                    image_ref=rec["image_ref"],
                    label=rec["label"],
                    split=rec["split"],
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from exc
            if record.label not in LABELS:
                raise ManifestError(f"{path}:{lineno}: bad label {record.label!r}")
            if record.split not in SPLITS:
                raise ManifestError(f"{path}:{lineno}: bad split {record.split!r}")
            if record.sample_id in seen:
                raise ManifestError(
                    f"{path}:{lineno}: duplicate sample id {record.sample_id}"
                )
            seen.add(record.sample_id)
            records.append(record)
    return records


def in_split(records: List[ManifestRecord], split: str) -> List[ManifestRecord]:
    return [r for r in records if r.split == split]
