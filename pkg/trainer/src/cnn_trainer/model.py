"""VGG-16-style classifier with a 2-way output head.

The 13-conv/3-FC layout follows configuration D of the original VGG
paper; ``width_multiplier`` scales every channel count so smoke tests can
run the identical topology at a fraction of the cost.  Weights are Xavier
initialized; no pretrained weights are loaded.
"""

from __future__ import annotations

import torch
from torch import nn

# Channels per conv layer; "M" is a 2x2 max pool.
VGG16_LAYOUT = [64, 64, "M", 128, 128, "M", 256, 256, 256, "M",
                512, 512, 512, "M", 512, 512, 512, "M"]
FC_WIDTH = 4096
N_CLASSES = 2


def _scaled(width: int, multiplier: float) -> int:
    return max(1, int(round(width * multiplier)))


class VggClassifier(nn.Module):
    def __init__(self, width_multiplier: float = 1.0, dropout: float = 0.5):
        super().__init__()
        if width_multiplier <= 0:
            raise ValueError("width_multiplier must be positive")
        self.width_multiplier = width_multiplier
        layers = []
        in_channels = 3
        for item in VGG16_LAYOUT:
            if item == "M":
                layers.append(nn.MaxPool2d(kernel_size=2, stride=2))
            else:
                out_channels = _scaled(item, width_multiplier)
                layers.append(nn.Conv2d(in_channels, out_channels, 3, padding=1))
                layers.append(nn.ReLU(inplace=True))
                in_channels = out_channels
        self.features = nn.Sequential(*layers)
        fc = _scaled(FC_WIDTH, width_multiplier)
        self.classifier = nn.Sequential(
            nn.Flatten(),
            nn.Linear(in_channels * 7 * 7, fc),
            nn.ReLU(inplace=True),
            nn.Dropout(dropout),
            nn.Linear(fc, fc),
            nn.ReLU(inplace=True),
            nn.Dropout(dropout),
            nn.Linear(fc, N_CLASSES),
        )
        self.apply(_init_xavier)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.classifier(self.features(x))


def _init_xavier(module: nn.Module) -> None:
    if isinstance(module, (nn.Conv2d, nn.Linear)):
        nn.init.xavier_uniform_(module.weight)
        nn.init.zeros_(module.bias)


def conv_layer_count(model: VggClassifier) -> int:
    return sum(1 for m in model.features if isinstance(m, nn.Conv2d))
