"""Residual classifier with taps for feature export.

The backbone keeps its original final linear layer (1000 outputs) and a
fresh head maps those to the movement classes, so two export points
exist: ``penultimate``, the 1000-wide activation the head consumes, and
``pooled``, the backbone's global-average-pool output (2048-wide for the
50-layer network, 512 for the smaller ones).
"""

from __future__ import annotations

import torch
import torchvision
from torch import nn

from .errors import TrainingError

ARCHS = ("resnet18", "resnet34", "resnet50")
LAYERS = ("penultimate", "pooled")


class StyleNetwork(nn.Module):
    def __init__(self, backbone: nn.Module, n_classes: int):
        super().__init__()
        self.backbone = backbone
        self.head = nn.Linear(backbone.fc.out_features, n_classes)

    def _pooled(self, x: torch.Tensor) -> torch.Tensor:
        b = self.backbone
        x = b.maxpool(b.relu(b.bn1(b.conv1(x))))
        x = b.layer4(b.layer3(b.layer2(b.layer1(x))))
        return torch.flatten(b.avgpool(x), 1)

    def features(self, x: torch.Tensor, layer: str = "penultimate") -> torch.Tensor:
        if layer not in LAYERS:
            raise ValueError(f"unknown layer {layer!r} (choose from {LAYERS})")
        pooled = self._pooled(x)
        return pooled if layer == "pooled" else self.backbone.fc(pooled)

    def feature_dim(self, layer: str = "penultimate") -> int:
        if layer not in LAYERS:
            raise ValueError(f"unknown layer {layer!r} (choose from {LAYERS})")
        fc = self.backbone.fc
        return fc.in_features if layer == "pooled" else fc.out_features

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(x))


def build_network(arch: str = "resnet50", n_classes: int = 2,
                  pretrained: bool = True) -> StyleNetwork:
    if arch not in ARCHS:
        raise ValueError(f"unknown architecture {arch!r} (choose from {ARCHS})")
    if n_classes < 2:
        raise ValueError("need at least two classes")
    ctor = getattr(torchvision.models, arch)
    if not pretrained:
        return StyleNetwork(ctor(weights=None), n_classes)
    weights = torchvision.models.get_model_weights(arch).DEFAULT
    try:
        backbone = ctor(weights=weights)
    except Exception as exc:
        raise TrainingError(
            f"could not load pretrained weights for {arch} ({exc}); pass "
            "--no-pretrained to start from random initialization"
        ) from exc
    return StyleNetwork(backbone, n_classes)
