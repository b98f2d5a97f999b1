"""Step-down learning-rate schedule.

The published recipe: initial rate 1e-2, reduced by a factor of 10 three
times over a 10-epoch run.  The paper does not place the reductions;
they are applied at uniform epoch boundaries 3, 6 and 9.
"""

from __future__ import annotations

from typing import List

from torch.optim import Optimizer
from torch.optim.lr_scheduler import MultiStepLR

INITIAL_LR = 1e-2
GAMMA = 0.1
MILESTONES = (3, 6, 9)
EPOCHS = 10


def make_scheduler(optimizer: Optimizer) -> MultiStepLR:
    return MultiStepLR(optimizer, milestones=list(MILESTONES), gamma=GAMMA)


def dry_run(initial_lr: float = INITIAL_LR, epochs: int = EPOCHS) -> List[float]:
    """Per-epoch learning rate of the schedule, without a model."""
    lrs = []
    lr = initial_lr
    for epoch in range(epochs):
        if epoch in MILESTONES:
            lr *= GAMMA
        lrs.append(lr)
    return lrs


def reduction_count(lrs: List[float]) -> int:
    return sum(1 for a, b in zip(lrs, lrs[1:]) if b < a)
