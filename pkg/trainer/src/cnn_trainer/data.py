"""Dataset bridging manifest records to training tensors.

Preprocessing mirrors the published contract: bilinear resize to 256,
224 random crop with horizontal mirroring at train time, center crop at
inference.
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Optional

import torch
from PIL import Image
from torch.utils.data import Dataset
from torchvision import transforms

from .manifest import ManifestRecord

RESIZE_TO = 256
CROP_SIZE = 224

TRAIN_TRANSFORM = transforms.Compose(
    [
        transforms.Resize((RESIZE_TO, RESIZE_TO)),
        transforms.RandomCrop(CROP_SIZE),
        transforms.RandomHorizontalFlip(),
        transforms.ToTensor(),
    ]
)

INFER_TRANSFORM = transforms.Compose(
    [
        transforms.Resize((RESIZE_TO, RESIZE_TO)),
        transforms.CenterCrop(CROP_SIZE),
        transforms.ToTensor(),
    ]
)


class ManifestDataset(Dataset):
    def __init__(self, records: List[ManifestRecord], images_root, train: bool):
        self.records = records
        self.root = Path(images_root)
        self.transform = TRAIN_TRANSFORM if train else INFER_TRANSFORM

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, index: int):
        record = self.records[index]
        with Image.open(self.root / record.image_ref) as img:
            tensor = self.transform(img.convert("RGB"))
        label = 1 if record.label == "positive" else 0
        return tensor, torch.tensor(label, dtype=torch.long)


def missing_images(records: List[ManifestRecord], images_root) -> List[str]:
    root = Path(images_root)
    return [r.sample_id for r in records if not (root / r.image_ref).is_file()]
