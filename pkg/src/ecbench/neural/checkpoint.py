"""Plain-text parameter checkpoints.

Layout::

    # ecbench-checkpoint v1
    # meta {"family": "lstm", ...}
    name,shape,values
    head.weight,20x1,0.1 -0.3 ...
"""

from __future__ import annotations

import json

import numpy as np

MAGIC = "# ecbench-checkpoint v1"


class CheckpointError(ValueError):
    pass


def save_params(path, named_params, meta: dict | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(MAGIC + "\n")
        fh.write("# meta " + json.dumps(meta or {}, sort_keys=True) + "\n")
        fh.write("name,shape,values\n")
        for name, p in named_params:
            arr = np.asarray(getattr(p, "data", p), dtype=float)
            shape = "x".join(str(s) for s in arr.shape) or "scalar"
            fh.write(f"{name},{shape}," + " ".join(repr(float(v)) for v in arr.ravel()) + "\n")


def load_params(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Return ``(meta, {name: array})``."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise CheckpointError(f"{path}: not an ecbench checkpoint (bad header)")
    meta = {}
    params = {}
    for line in lines[1:]:
        if line.startswith("# meta "):
            meta = json.loads(line[len("# meta "):])
            continue
        if not line or line.startswith("#") or line == "name,shape,values":
            continue
        name, shape, values = line.split(",", 2)
        dims = () if shape == "scalar" else tuple(int(s) for s in shape.split("x"))
        arr = np.array([float(v) for v in values.split()], dtype=float)
        if arr.size != int(np.prod(dims)):
            raise CheckpointError(f"{path}: {name} has {arr.size} values for shape {dims}")
        params[name] = arr.reshape(dims)
    return meta, params


def assign_params(module, params: dict[str, np.ndarray]) -> None:
    own = dict(module.named_parameters())
    if set(own) != set(params):
        missing = sorted(set(own) - set(params))
        extra = sorted(set(params) - set(own))
        raise CheckpointError(f"parameter mismatch: missing {missing}, unexpected {extra}")
    for name, p in own.items():
        if p.shape != params[name].shape:
            raise CheckpointError(f"{name}: shape {params[name].shape} != expected {p.shape}")
        p.data[...] = params[name]
