"""Shared builders for manifest files in the frozen dataset format."""

import json
from pathlib import Path

HEADER = {"format_version": 1, "generation_params": {}}


def sample_record(sample_id, image_ref, label, split):
    return {
        "capture_date": "2019-05",
        "frame_index": None,
        "heading": 90.0,
        "image_ref": image_ref,
        "label": label,
        "label_source": "auto",
        "lat": 0.0,
        "lon": 0.0,
        "pano_id": f"pano-{sample_id}",
        "region_id": "r/r0c0",
        "sample_id": sample_id,
        "split": split,
    }


def write_manifest(path: Path, records):
    lines = [json.dumps(HEADER, sort_keys=True)]
    lines += [json.dumps(r, sort_keys=True) for r in records]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
