"""Emit evaluator-compatible prediction files from a trained checkpoint."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Tuple

import torch
from PIL import Image

from .data import INFER_TRANSFORM, missing_images
from .manifest import in_split, read_manifest
from .train import load_checkpoint

log = logging.getLogger(__name__)


def predict(checkpoint_path, manifest_path, images_root, split, out_path) -> Dict:
    model, _, _ = load_checkpoint(checkpoint_path)
    records = in_split(read_manifest(manifest_path), split)
    root = Path(images_root)
    skipped = set(missing_images(records, root))
    for sample_id in sorted(skipped):
        log.warning("missing image for %s; skipped", sample_id)
    preds: List[Tuple[str, float]] = []
    with torch.no_grad():
        for record in records:
            if record.sample_id in skipped:
                continue
            with Image.open(root / record.image_ref) as img:
                tensor = INFER_TRANSFORM(img.convert("RGB")).unsqueeze(0)
            probs = torch.softmax(model(tensor), dim=1)[0]
            preds.append((record.sample_id, float(probs[1])))
    write_predictions(out_path, preds)
    return {"written": len(preds), "skipped": len(skipped)}


def write_predictions(path, preds: List[Tuple[str, float]]) -> None:
    """Frozen contract: one ``sample_id<TAB>prob`` line, 6 decimal digits."""
    with open(path, "w", encoding="utf-8") as fh:
        for sample_id, prob in preds:
            fh.write(f"{sample_id}\t{prob:.6f}\n")
