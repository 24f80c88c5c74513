#!/usr/bin/env python

"""checkpoint.py  :  Save, load and check model checkpoints (manifest.json + params.bin) """

__version__ = "0.1"
__status__ = "development"


# Import Packages
import json
import math
import os
from dataclasses import dataclass, field
import numpy as np
from . import log_functions
from .encoder import EncoderParams, TokenizerConfig
from .errors import CheckpointMismatch

SCHEMA_VERSION = 1
BIENCODER = "biencoder"
CROSSENCODER = "crossenc"
MANIFEST_FILE = "manifest.json"
PARAMS_FILE = "params.bin"
BLOB_DTYPE = np.dtype("<f4")


@dataclass
class Checkpoint:
    params: EncoderParams
    manifest: dict = field(default_factory=dict)

    @classmethod
    def snapshot(cls, params, model_kind, tokenizer, pooling, epoch, config=None, train_loss=None):
        """
        Copy the parameters through float32 so that the in-memory checkpoint holds exactly
        what params.bin will hold.
        """
        rounded = type(params)(**{name: array.astype(BLOB_DTYPE).astype(np.float64)
                                  for name, array in params.groups().items()})
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "model_kind": model_kind,
            "d": int(params.dim),
            "V": int(params.vocab_size),
            "hash_seed": int(tokenizer.hash_seed),
            "lowercase": bool(tokenizer.lowercase),
            "pooling": pooling,
            "epoch": int(epoch),
            "dev_spearman": None,
            "train_loss": None if train_loss is None else float(train_loss),
            "param_order": [[name, list(array.shape)] for name, array in params.groups().items()],
            "config": config or {},
        }
        return cls(params=rounded, manifest=manifest)

    @property
    def epoch(self):
        return self.manifest["epoch"]

    @property
    def model_kind(self):
        return self.manifest["model_kind"]

    @property
    def pooling(self):
        return self.manifest["pooling"]

    def tokenizer(self):
        return TokenizerConfig(vocab_size=self.manifest["V"], hash_seed=self.manifest["hash_seed"],
                               lowercase=self.manifest["lowercase"])

    def with_dev_spearman(self, score):
        manifest = dict(self.manifest)
        manifest["dev_spearman"] = score if score is not None and math.isfinite(score) else None
        return Checkpoint(params=self.params, manifest=manifest)

    def save(self, directory):
        """
        Write manifest.json and params.bin (parameters in declared order, row-major, float32 little-endian).
        """
        os.makedirs(directory, exist_ok=True)
        blob = b"".join(np.ascontiguousarray(array, dtype=BLOB_DTYPE).tobytes()
                        for array in self.params.groups().values())
        with open(os.path.join(directory, PARAMS_FILE), "wb") as f:
            f.write(blob)
        with open(os.path.join(directory, MANIFEST_FILE), "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.manifest, f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, directory):
        manifest_path = os.path.join(directory, MANIFEST_FILE)
        params_path = os.path.join(directory, PARAMS_FILE)
        if not (os.path.isfile(manifest_path) and os.path.isfile(params_path)):
            raise CheckpointMismatch(f"{directory} is not a checkpoint directory.")

        with open(manifest_path, encoding="utf-8") as f:
            manifest = json.load(f)
        with open(params_path, "rb") as f:
            blob = np.frombuffer(f.read(), dtype=BLOB_DTYPE)

        if manifest.get("schema_version") != SCHEMA_VERSION:
            raise CheckpointMismatch(f"Unsupported checkpoint schema: {manifest.get('schema_version')}")

        shapes = [(name, tuple(shape)) for name, shape in manifest["param_order"]]
        expected = sum(int(np.prod(shape)) for _, shape in shapes)
        if expected != blob.size:
            raise CheckpointMismatch(f"{params_path} holds {blob.size} values, the manifest declares {expected}.")
        if dict(shapes).get("E") != (manifest["V"], manifest["d"]):
            raise CheckpointMismatch(f"Embedding table shape does not match V={manifest['V']}, d={manifest['d']}.")

        arrays = {}
        offset = 0
        for name, shape in shapes:
            size = int(np.prod(shape))
            arrays[name] = blob[offset:offset + size].astype(np.float64).reshape(shape)
            offset += size

        return cls(params=params_class(manifest["model_kind"])(**arrays), manifest=manifest)


def params_class(model_kind):
    if model_kind == BIENCODER:
        return EncoderParams
    if model_kind == CROSSENCODER:
        from .finesem import CrossParams
        return CrossParams
    raise CheckpointMismatch(f"Unknown model kind: {model_kind!r}")

def check_compatible(checkpoint, tokenizer_config, model_kind=None):
    """
    Refuse to evaluate a checkpoint with a tokenizer it was not trained with.
    tokenizer_config is the tokenizer section of the run config.
    """
    expected = {
        "vocab_size": tokenizer_config["vocab_size"],
        "hash_seed": tokenizer_config["hash_seed"],
        "lowercase": tokenizer_config["lowercase"],
    }
    found = {
        "vocab_size": checkpoint.manifest["V"],
        "hash_seed": checkpoint.manifest["hash_seed"],
        "lowercase": checkpoint.manifest["lowercase"],
    }
    if model_kind is not None:
        expected["model_kind"] = model_kind
        found["model_kind"] = checkpoint.model_kind

    differences = log_functions.diff_entry(expected, found)
    if differences:
        details = "; ".join(f"{entry['field']}: config {entry['expected']}, checkpoint {entry['found']}" for entry in differences)
        raise CheckpointMismatch(f"Checkpoint does not match the run configuration ({details}).")
