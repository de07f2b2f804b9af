"""Frozen ResNet101 feature network, truncated after layer_4.

The trunk maps a normalized 224x224 RGB batch to a (N, 2048, 7, 7)
activation volume.  Weights come from one of three sources: the
torchvision ImageNet snapshot, a local state-dict file, or a seeded
random initialization.  The random mode exists for tests and offline
smoke runs; its embeddings are structurally valid but carry no visual
meaning.
"""

import hashlib
from pathlib import Path

import torch
from torch import nn
from torchvision import models

FEATURE_CHANNELS = 2048
FEATURE_GRID = 7
FEATURE_DIM = FEATURE_CHANNELS * FEATURE_GRID * FEATURE_GRID  # 100352


def weight_digest(module: nn.Module) -> str:
    """sha256 over the state dict, stable across runs and platforms."""
    h = hashlib.sha256()
    for name, tensor in sorted(module.state_dict().items()):
        h.update(name.encode("utf-8"))
        h.update(tensor.detach().cpu().contiguous().numpy().tobytes())
    return h.hexdigest()


def build_backbone(weights: str = "pretrained", seed: int = 0):
    """Assemble the frozen trunk; returns (module, descriptor).

    ``weights`` is "pretrained" (torchvision IMAGENET1K_V1, needs the
    snapshot downloadable or cached), "random" (deterministic init from
    ``seed``; mutates torch's global RNG state), or a path to a full
    resnet101 state-dict file saved with torch.save.
    """
    if weights == "pretrained":
        snapshot = models.ResNet101_Weights.IMAGENET1K_V1
        full = models.resnet101(weights=snapshot)
        descriptor = {"mode": "pretrained", "snapshot": snapshot.name,
                      "url": snapshot.url}
    elif weights == "random":
        torch.manual_seed(seed)
        full = models.resnet101(weights=None)
        descriptor = {"mode": "random", "seed": seed}
    else:
        path = Path(weights)
        state = torch.load(path, map_location="cpu", weights_only=True)
        full = models.resnet101(weights=None)
        full.load_state_dict(state)
        descriptor = {"mode": "file", "path": str(path)}

    trunk = nn.Sequential(
        full.conv1, full.bn1, full.relu, full.maxpool,
        full.layer1, full.layer2, full.layer3, full.layer4,
    )
    trunk.eval()
    for param in trunk.parameters():
        param.requires_grad_(False)
    descriptor["model"] = "resnet101"
    descriptor["weight_sha256"] = weight_digest(trunk)
    return trunk, descriptor
