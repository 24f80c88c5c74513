#!/usr/bin/env python

"""config.py  :  Build the run configuration from conf.py, a JSON file and command-line overrides """

__version__ = "0.1"
__status__ = "development"


# Import Packages
import copy
import json
import os
import conf
from .corpus import FORMATS, SPLITS, check_lang
from .errors import ConfigError

MODEL_KINDS = ("transem", "finesem")
REGIMES = ("individual", "unified", "translated")
POOLINGS = ("CLS", "Mean", "Max")


def default_config():
    """
    Nested view of the defaults declared in conf.py.
    """
    return copy.deepcopy({
        "name": conf.name,
        "method": conf.method,
        "seed": conf.seed,
        "out": conf.out,
        "model": conf.model,
        "regime": conf.regime,
        "data": {
            "format": conf.data_format,
            "paths": conf.data_paths,
            "translate": conf.translate_data,
        },
        "backends": conf.backends,
        "translation": {
            "parallelism": conf.translation_parallelism,
            "batch_size": conf.translation_batch_size,
            "retries": conf.translation_retries,
            "backoff": conf.translation_backoff,
            "timeout": conf.translation_timeout,
        },
        "tokenizer": {
            "vocab_size": conf.vocab_size,
            "hash_seed": conf.hash_seed,
            "lowercase": conf.lowercase,
        },
        "encoder": {
            "dim": conf.embedding_dim,
        },
        "train": {
            "learning_rate": conf.learning_rate,
            "weight_decay": conf.weight_decay,
            "batch_size": conf.batch_size,
            "grad_accum_steps": conf.grad_accum_steps,
            "patience": conf.patience,
            "max_epochs": conf.max_epochs,
            "pooling": conf.pooling,
        },
        "finesem": {
            "epochs": conf.finesem_epochs,
            "batch_size": conf.finesem_batch_size,
            "learning_rate": conf.finesem_learning_rate,
            "weight_decay": conf.finesem_weight_decay,
            "pooling": conf.finesem_pooling,
            "fixed_epoch": conf.fixed_epoch,
        },
        "eval": {
            "split": conf.eval_split,
            "baseline_track": conf.baseline_track,
        },
        "sweep": {
            "batch_sizes": conf.sweep_batch_sizes,
            "poolings": conf.sweep_poolings,
        },
    })

def load_config(path=None, overrides=None):
    """
    Merge the JSON document at path over the defaults, then apply dotted overrides
    ({"train.batch_size": "8", ...}). Unknown keys are rejected.
    """
    config = default_config()

    if path:
        if not os.path.isfile(path):
            raise ConfigError(f"{path} file does not exist.")
        with open(path, encoding="utf-8") as f:
            try:
                document = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path} is not valid JSON: {e}") from e
        if not isinstance(document, dict):
            raise ConfigError(f"{path} must contain a JSON object.")
        _merge(config, document, "")

    for key, raw_value in (overrides or {}).items():
        set_dotted(config, key, coerce_value(raw_value))

    return config

def _merge(base, update, prefix):
    for key, value in update.items():
        dotted = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"Unknown configuration key: {dotted}")
        # Free-form maps (data.paths) and lists are replaced, sections are merged
        if isinstance(base[key], dict) and isinstance(value, dict) and base[key] and key != "paths":
            _merge(base[key], value, dotted + ".")
        else:
            base[key] = value

def set_dotted(config, dotted_key, value):
    """
    Set a nested field using dot notation (e.g. train.batch_size).
    Keys under data.paths may be created, every other key must already exist.
    """
    keys = dotted_key.split(".")
    nested = config
    for i, key in enumerate(keys[:-1]):
        if key not in nested:
            if keys[:2] == ["data", "paths"] and i >= 2:
                nested[key] = {}
            else:
                raise ConfigError(f"Unknown configuration key: {dotted_key}")
        if not isinstance(nested[key], dict):
            raise ConfigError(f"{'.'.join(keys[:i + 1])} is not a section.")
        nested = nested[key]

    if keys[-1] not in nested and keys[:2] != ["data", "paths"]:
        raise ConfigError(f"Unknown configuration key: {dotted_key}")
    nested[keys[-1]] = value

def coerce_value(new_value):
    """
    Interpret a command-line value: booleans, None, ';'-separated lists and numbers.
    """
    if not isinstance(new_value, str):
        return new_value

    lowered_value = new_value.lower().strip()  # Normalize case and remove spaces

    if lowered_value in ["true", "false"]:  # Convert boolean-like strings
        return lowered_value == "true"
    if lowered_value in ["none", "null"]:  # Convert "None" string to Python None
        return None
    if ";" in new_value:  # Convert semicolon-separated strings into lists
        return [coerce_value(item) for item in new_value.split(";") if item != ""]
    for cast in (int, float):
        try:
            return cast(new_value)
        except ValueError:
            continue
    return new_value  # Keep as-is for other strings

def validate_config(config, require_data=True):
    """
    Check the values a run depends on before any work starts.
    """
    if config["model"] not in MODEL_KINDS:
        raise ConfigError(f"model must be one of {', '.join(MODEL_KINDS)}, got {config['model']!r}.")
    if config["regime"] not in REGIMES:
        raise ConfigError(f"regime must be one of {', '.join(REGIMES)}, got {config['regime']!r}.")
    for section in ("train", "finesem"):
        if config[section]["pooling"] not in POOLINGS:
            raise ConfigError(f"{section}.pooling must be one of {', '.join(POOLINGS)}.")
        if config[section]["learning_rate"] <= 0:
            raise ConfigError(f"{section}.learning_rate must be positive.")
        if config[section]["batch_size"] < 1:
            raise ConfigError(f"{section}.batch_size must be positive.")
    if config["train"]["grad_accum_steps"] < 1 or config["train"]["patience"] < 1:
        raise ConfigError("train.grad_accum_steps and train.patience must be positive.")
    if config["tokenizer"]["vocab_size"] < 4:
        raise ConfigError("tokenizer.vocab_size must be at least 4.")
    if config["encoder"]["dim"] < 1:
        raise ConfigError("encoder.dim must be positive.")
    for key in ("train.max_epochs", "finesem.epochs", "finesem.fixed_epoch"):
        section, field = key.split(".")
        if config[section][field] is not None and config[section][field] < 1:
            raise ConfigError(f"{key} must be at least 1 when set.")
    if config["data"]["format"] not in FORMATS:
        raise ConfigError(f"data.format must be one of {', '.join(FORMATS)}.")
    if config["eval"]["split"] not in SPLITS:
        raise ConfigError(f"eval.split must be one of {', '.join(SPLITS)}.")
    if any(pooling not in POOLINGS for pooling in config["sweep"]["poolings"]):
        raise ConfigError(f"sweep.poolings may only hold {', '.join(POOLINGS)}.")
    if any(size < 1 for size in config["sweep"]["batch_sizes"]):
        raise ConfigError("sweep.batch_sizes must be positive.")

    for lang, splits in config["data"]["paths"].items():
        try:
            check_lang(lang)
        except ValueError as e:
            raise ConfigError(f"data.paths: {e}") from e
        unknown = sorted(set(splits) - set(SPLITS))
        if unknown:
            raise ConfigError(f"data.paths.{lang}: unknown split {unknown[0]!r}.")

    if config["backends"]:
        primaries = [backend.get("name") for backend in config["backends"] if backend.get("primary")]
        if len(primaries) != 1:
            raise ConfigError(f"Exactly one backend must be primary, found {len(primaries)}.")

    if require_data:
        if not config["data"]["paths"]:
            raise ConfigError("data.paths is empty.")
        for lang, splits in config["data"]["paths"].items():
            for split, path in splits.items():
                if not os.path.isfile(path):
                    raise ConfigError(f"{path} ({lang} {split}) file does not exist.")

    return config

def overrides_from_args(extra_args):
    """
    Turn leftover command-line arguments (--train.batch_size 8 ...) into a dict.
    """
    overrides = {}
    i = 0
    while i < len(extra_args):
        flag = extra_args[i]
        if not flag.startswith("--") or "." not in flag:
            raise ConfigError(f"Unrecognised argument: {flag}")
        key = flag[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        elif i + 1 < len(extra_args):
            value = extra_args[i + 1]
            i += 2
        else:
            raise ConfigError(f"Missing value for {flag}")
        overrides[key] = value
    return overrides