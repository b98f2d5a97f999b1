"""Training loop: SGD over the manifest's train split with per-epoch
train/val loss logging and atomic checkpointing."""

from __future__ import annotations

import dataclasses
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import torch
from torch import nn
from torch.utils.data import DataLoader

from .data import ManifestDataset
from .manifest import ManifestRecord, in_split, read_manifest
from .model import VggClassifier
from .schedule import EPOCHS, INITIAL_LR, make_scheduler

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


@dataclass
class TrainSpec:
    epochs: int = EPOCHS
    initial_lr: float = INITIAL_LR
    batch_size: int = 32
    momentum: float = 0.9
    weight_decay: float = 0.0
    width_multiplier: float = 1.0
    seed: int = 0
    num_workers: int = 0

    def validate(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.initial_lr <= 0:
            raise ValueError("initial_lr must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.width_multiplier <= 0:
            raise ValueError("width_multiplier must be positive")


class TrainingError(RuntimeError):
    pass


def _epoch_loss(model, loader, device) -> float:
    criterion = nn.CrossEntropyLoss()
    model.eval()
    total = 0.0
    count = 0
    with torch.no_grad():
        for images, labels in loader:
            logits = model(images.to(device))
            total += criterion(logits, labels.to(device)).item() * len(labels)
            count += len(labels)
    return total / max(count, 1)


def train(manifest_path, images_root, checkpoint_path, spec: TrainSpec) -> Dict:
    spec.validate()
    records = read_manifest(manifest_path)
    train_records = in_split(records, "train")
    val_records = in_split(records, "val")
    if not train_records:
        raise TrainingError("manifest has no train split")
    train_labels = {r.label for r in train_records}
    if len(train_labels) < 2:
        raise TrainingError("train split contains a single class")

    torch.manual_seed(spec.seed)
    device = torch.device("cpu")
    model = VggClassifier(width_multiplier=spec.width_multiplier).to(device)
    optimizer = torch.optim.SGD(
        model.parameters(),
        lr=spec.initial_lr,
        momentum=spec.momentum,
        weight_decay=spec.weight_decay,
    )
    scheduler = make_scheduler(optimizer)
    criterion = nn.CrossEntropyLoss()

    train_loader = DataLoader(
        ManifestDataset(train_records, images_root, train=True),
        batch_size=spec.batch_size,
        shuffle=True,
        num_workers=spec.num_workers,
        generator=torch.Generator().manual_seed(spec.seed),
    )
    val_loader = None
    if val_records:
        val_loader = DataLoader(
            ManifestDataset(val_records, images_root, train=False),
            batch_size=spec.batch_size,
            num_workers=spec.num_workers,
        )

    history: List[Dict] = []
    for epoch in range(spec.epochs):
        model.train()
        total = 0.0
        count = 0
        for images, labels in train_loader:
            optimizer.zero_grad()
            logits = model(images.to(device))
            loss = criterion(logits, labels.to(device))
            loss.backward()
            optimizer.step()
            total += loss.item() * len(labels)
            count += len(labels)
        scheduler.step()
        entry = {
            "epoch": epoch + 1,
            "lr": optimizer.param_groups[0]["lr"],
            "train_loss": total / max(count, 1),
        }
        if val_loader is not None:
            entry["val_loss"] = _epoch_loss(model, val_loader, device)
        history.append(entry)
        log.info(
            "epoch %d: train loss %.4f%s",
            entry["epoch"],
            entry["train_loss"],
            f", val loss {entry['val_loss']:.4f}" if "val_loss" in entry else "",
        )

    save_checkpoint(checkpoint_path, model, spec, history)
    return {"history": history, "checkpoint": str(checkpoint_path)}


def save_checkpoint(path, model: VggClassifier, spec: TrainSpec, history) -> None:
    """Write-temp-then-rename so a crash never leaves a torn checkpoint."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "checkpoint_version": CHECKPOINT_VERSION,
        "spec": dataclasses.asdict(spec),
        "history": history,
        "state_dict": model.state_dict(),
    }
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    os.close(fd)
    try:
        torch.save(payload, tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def load_checkpoint(path):
    payload = torch.load(path, map_location="cpu", weights_only=False)
    version = payload.get("checkpoint_version")
    if version != CHECKPOINT_VERSION:
        raise TrainingError(f"unsupported checkpoint version {version}")
    spec = TrainSpec(**payload["spec"])
    model = VggClassifier(width_multiplier=spec.width_multiplier)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, spec, payload["history"]
