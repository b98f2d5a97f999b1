import pytest
import torch
from torch import nn

from cnn_trainer.model import VggClassifier, conv_layer_count


def test_thirteen_conv_layers_three_fc():
    model = VggClassifier(width_multiplier=0.05)
    assert conv_layer_count(model) == 13
    linears = [m for m in model.classifier if isinstance(m, nn.Linear)]
    assert len(linears) == 3
    assert linears[-1].out_features == 2


def test_forward_shape():
    model = VggClassifier(width_multiplier=0.05)
    out = model(torch.zeros(2, 3, 224, 224))
    assert out.shape == (2, 2)


def test_width_multiplier_scales_channels():
    full = VggClassifier(width_multiplier=1.0)
    half = VggClassifier(width_multiplier=0.5)
    first_full = next(m for m in full.features if isinstance(m, nn.Conv2d))
    first_half = next(m for m in half.features if isinstance(m, nn.Conv2d))
    assert first_full.out_channels == 64
    assert first_half.out_channels == 32


def test_xavier_init_zero_bias():
    torch.manual_seed(0)
    model = VggClassifier(width_multiplier=0.1)
    for module in model.modules():
        if isinstance(module, (nn.Conv2d, nn.Linear)):
            assert torch.all(module.bias == 0)
            # Xavier-uniform bound for this layer's fan-in/fan-out.
            fan_in = module.weight[0].numel()
            fan_out = module.weight.shape[0] * (
                module.weight[0, 0].numel() if module.weight.dim() == 4 else 1
            )
            bound = (6.0 / (fan_in + fan_out)) ** 0.5
            assert module.weight.abs().max() <= bound + 1e-6
            assert module.weight.std() > 0


def test_invalid_multiplier():
    with pytest.raises(ValueError):
        VggClassifier(width_multiplier=0.0)
