"""JSON persistence for trained models.

Weights are flattened in row-major order. Floats are written with 17
significant digits so a save/load round trip is value-exact.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..envgen import Normalization
from .network import NetworkParams, NetworkSpec
from .training import Model

FORMAT = "harshnet-cnn/1"


def _num(x: float) -> float:
    # round-trip through %.17g keeps the value bit-exact
    return float(f"{x:.17g}")


def to_document(model: Model) -> dict:
    spec = model.params.spec
    layers = [{"name": name, "shape": list(arr.shape), "values": [_num(v) for v in arr.ravel(order="C")]}
              for name, arr in model.params.arrays.items()]
    return {"format": FORMAT, "spec": asdict(spec), "layers": layers,
            "normalization": model.stats.to_dict(), "manifest": model.manifest}


def from_document(doc: dict) -> Model:
    if doc.get("format") != FORMAT:
        raise ValueError(f"unsupported model format {doc.get('format')!r}")
    s = doc["spec"]
    spec = NetworkSpec(s["input_length"], tuple(s["branch_kernels"]), tuple(s["channels"]),
                       s["pool"], s["fused_channels"])
    arrays = {layer["name"]: np.array(layer["values"], dtype=float).reshape(layer["shape"])
              for layer in doc["layers"]}
    return Model(NetworkParams(spec, arrays), Normalization.from_dict(doc["normalization"]),
                 doc.get("manifest", {}))


def save_model(model: Model, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_document(model), sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_model(path: str | Path) -> Model:
    return from_document(json.loads(Path(path).read_text(encoding="utf-8")))
