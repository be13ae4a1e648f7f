"""Built-in ImageNet workloads and loading of custom layer files.

Only conv and fc layers are listed; pooling and residual additions carry no
MACs in this model.  Batch size is 1.
"""

from __future__ import annotations

import json
from pathlib import Path

import yaml

from verdant.perf.model import LayerShape

BUILTIN_WORKLOADS = ("vgg16", "vgg19", "resnet50", "resnet152")

_VGG_STAGES = {
    # (out channels, output spatial size) per stage
    "vgg16": [(64, 224, 2), (128, 112, 2), (256, 56, 3), (512, 28, 3), (512, 14, 3)],
    "vgg19": [(64, 224, 2), (128, 112, 2), (256, 56, 4), (512, 28, 4), (512, 14, 4)],
}

_RESNET_BLOCKS = {
    "resnet50": (3, 4, 6, 3),
    "resnet152": (3, 8, 36, 3),
}


def _vgg(name: str) -> list[LayerShape]:
    layers = []
    c_in = 3
    for s, (k, hw, reps) in enumerate(_VGG_STAGES[name], 1):
        for r in range(1, reps + 1):
            layers.append(LayerShape("conv", c_in, k, hw, hw, 3, 3, 1, name=f"conv{s}_{r}"))
            c_in = k
    layers.append(LayerShape.fc(512 * 7 * 7, 4096, name="fc6"))
    layers.append(LayerShape.fc(4096, 4096, name="fc7"))
    layers.append(LayerShape.fc(4096, 1000, name="fc8"))
    return layers


def _resnet(name: str) -> list[LayerShape]:
    # bottleneck blocks, stride on the 3x3 convolution
    layers = [LayerShape("conv", 3, 64, 112, 112, 7, 7, 2, name="conv1")]
    c_in, hw = 64, 56
    for stage, blocks in enumerate(_RESNET_BLOCKS[name]):
        mid = 64 << stage
        out = mid * 4
        for b in range(blocks):
            stride = 2 if (b == 0 and stage > 0) else 1
            hw_out = hw // stride
            tag = f"conv{stage + 2}_{b + 1}"
            layers.append(LayerShape("conv", c_in, mid, hw, hw, 1, 1, 1, name=f"{tag}a"))
            layers.append(LayerShape("conv", mid, mid, hw_out, hw_out, 3, 3, stride, name=f"{tag}b"))
            layers.append(LayerShape("conv", mid, out, hw_out, hw_out, 1, 1, 1, name=f"{tag}c"))
            if b == 0:
                layers.append(LayerShape("conv", c_in, out, hw_out, hw_out, 1, 1, stride, name=f"{tag}_proj"))
            c_in, hw = out, hw_out
    layers.append(LayerShape.fc(2048, 1000, name="fc"))
    return layers


def builtin_workload(name: str) -> list[LayerShape]:
    key = name.lower()
    if key in _VGG_STAGES:
        return _vgg(key)
    if key in _RESNET_BLOCKS:
        return _resnet(key)
    raise KeyError(f"unknown workload {name!r}; built-ins are {', '.join(BUILTIN_WORKLOADS)}")


def load_workload(path) -> tuple[str, list[LayerShape]]:
    """Read a YAML/JSON layer file.

    The file is either a list of layer records or a mapping with ``name`` and
    ``layers``.  Each record carries the LayerShape fields (``kind``, ``C``,
    ``K``, ``H``, ``W``, ``R``, ``S``, ``stride``, ``bytes_per_element``,
    optional ``name``).
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    data = json.loads(text) if path.suffix.lower() == ".json" else yaml.safe_load(text)
    name = path.stem
    if isinstance(data, dict):
        name = data.get("name", name)
        data = data.get("layers")
    if not isinstance(data, list) or not data:
        raise ValueError(f"{path}: expected a non-empty list of layer records")
    layers = []
    for i, rec in enumerate(data):
        try:
            layers.append(LayerShape(**rec))
        except TypeError as exc:
            raise ValueError(f"{path}: layer {i}: {exc}") from None
    return name, layers


def resolve_workload(spec: str) -> tuple[str, list[LayerShape]]:
    """A built-in name or a path to a layer file."""
    if spec.lower() in BUILTIN_WORKLOADS:
        return spec.lower(), builtin_workload(spec)
    if Path(spec).exists():
        return load_workload(spec)
    raise KeyError(f"workload {spec!r} is neither a built-in nor an existing file")
