"""
Versioned JSON checkpoints for the fusion policy.

Arrays are stored row-major with their shapes; Python's float repr round-trips
exactly, so save → load is bit-exact.
"""
import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from config import PpoConfig
from errors import FormatMismatch, IoFailure
from fusion.policy import PARAM_NAMES, PolicyParams
from fusion.ppo import AdamOptimizer

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


@dataclass
class Checkpoint:
    params: PolicyParams
    optimizer: AdamOptimizer
    config: PpoConfig
    seed: int
    batch_counter: int
    path: Path | None = None


def _encode(arr: np.ndarray) -> dict:
    arr = np.asarray(arr, dtype=float)
    return {"shape": list(arr.shape), "data": [float(v) for v in arr.ravel(order="C")]}


def _decode(blob: dict) -> np.ndarray:
    return np.asarray(blob["data"], dtype=float).reshape(blob["shape"], order="C")


def checkpoint_document(params: PolicyParams, optimizer: AdamOptimizer, cfg: PpoConfig,
                        batch_counter: int) -> dict:
    state = optimizer.state()
    return {
        "version": CHECKPOINT_VERSION,
        "config": cfg.model_dump(mode="json"),
        "seed": cfg.seed,
        "batch_counter": batch_counter,
        "layers": {name: _encode(arr) for name, arr in params.arrays().items()},
        "optimizer": {
            "t": state["t"],
            "m": {k: _encode(v) for k, v in sorted(state["m"].items())},
            "v": {k: _encode(v) for k, v in sorted(state["v"].items())},
        },
    }


def save_checkpoint(path, params: PolicyParams, optimizer: AdamOptimizer, cfg: PpoConfig,
                    batch_counter: int) -> Path:
    path = Path(path)
    document = checkpoint_document(params, optimizer, cfg, batch_counter)
    text = json.dumps(document, sort_keys=True, separators=(",", ":"))
    tmp = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as e:
        raise IoFailure(f"cannot write checkpoint {path}: {e}", path=str(path))
    logger.info("Checkpoint written: %s (batch %d)", path, batch_counter)
    return path


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise IoFailure(f"cannot read checkpoint {path}: {e}", path=str(path))
    except ValueError as e:
        raise FormatMismatch(f"checkpoint {path} is not JSON: {e}", path=str(path))

    if document.get("version") != CHECKPOINT_VERSION:
        raise FormatMismatch(f"checkpoint {path} has version {document.get('version')}, "
                             f"expected {CHECKPOINT_VERSION}", path=str(path))
    try:
        layers = document["layers"]
        params = PolicyParams(**{name: _decode(layers[name]) for name in PARAM_NAMES})
        cfg = PpoConfig.model_validate(document["config"])
        optimizer = AdamOptimizer(cfg.learning_rate)
        opt = document.get("optimizer", {})
        optimizer.load_state({
            "t": opt.get("t", 0),
            "m": {k: _decode(v) for k, v in opt.get("m", {}).items()},
            "v": {k: _decode(v) for k, v in opt.get("v", {}).items()},
        })
    except (KeyError, TypeError, ValueError) as e:
        raise FormatMismatch(f"checkpoint {path} is malformed: {e}", path=str(path))

    return Checkpoint(params=params, optimizer=optimizer, config=cfg, seed=int(document.get("seed", 0)),
                      batch_counter=int(document.get("batch_counter", 0)), path=path)


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
