import pytest
import torch

from cnn_trainer.schedule import dry_run, make_scheduler, reduction_count


def test_dry_run_plateaus():
    lrs = dry_run()
    assert lrs == pytest.approx(
        [1e-2] * 3 + [1e-3] * 3 + [1e-4] * 3 + [1e-5]
    )
    assert reduction_count(lrs) == 3


def test_dry_run_custom_initial_lr():
    lrs = dry_run(initial_lr=1e-3, epochs=10)
    assert lrs[0] == 1e-3
    assert lrs[-1] == pytest.approx(1e-6)
    assert reduction_count(lrs) == 3


def test_scheduler_matches_dry_run():
    param = torch.nn.Parameter(torch.zeros(1))
    optimizer = torch.optim.SGD([param], lr=1e-2)
    scheduler = make_scheduler(optimizer)
    observed = []
    for _ in range(10):
        observed.append(optimizer.param_groups[0]["lr"])
        optimizer.step()
        scheduler.step()
    assert observed == pytest.approx(dry_run())
