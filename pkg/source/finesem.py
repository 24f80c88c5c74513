#!/usr/bin/env python

"""finesem.py  :  Cross-encoder regressor over the joint sentence pair (FineSem) """

__version__ = "0.1"
__status__ = "development"


# Import Packages
import json
import os
from dataclasses import dataclass
from enum import Enum
import numpy as np
from . import log_functions
from .checkpoint import CROSSENCODER, Checkpoint
from .corpus import merge_datasets
from .encoder import CLS_ID, POOLING_MODES, SEP_ID, EncoderParams, backward_ids, encode_ids, init_params, scatter_rows, tokenize
from .errors import EmptyInput, InvalidBackend, MalformedRow, MissingModel
from .metrics import spearman_or_worst
from .transem import AdamWState, adamw_step

ENGLISH_MODEL = "eng"
SPANISH_MODEL = "esp"
INDEX_FILE = "index.json"


class Regime(str, Enum):
    INDIVIDUAL = "individual"
    UNIFIED = "unified"
    TRANSLATED = "translated"


@dataclass
class CrossParams(EncoderParams):
    """
    Encoder parameters plus the regression head: y = w . s + c.
    """
    w: np.ndarray = None
    c: np.ndarray = None

    def groups(self):
        return {"E": self.E, "W": self.W, "b": self.b, "w": self.w, "c": self.c}


@dataclass(frozen=True)
class CrossConfig:
    epochs: int | None = None
    batch_size: int = 16
    learning_rate: float = 1e-5
    weight_decay: float = 0.01
    seed: int = 13
    pooling: str = "Mean"
    dim: int = 64

    def __post_init__(self):
        if self.epochs is not None and self.epochs < 1:
            raise ValueError("epochs must be at least 1.")
        if self.batch_size < 1 or self.learning_rate <= 0:
            raise ValueError("batch_size and learning_rate must be positive.")
        if self.pooling not in POOLING_MODES:
            raise ValueError(f"Unknown pooling mode: {self.pooling!r}")

    def epochs_for(self, regime):
        if self.epochs is not None:
            return self.epochs
        return 2 if Regime(regime) is Regime.TRANSLATED else 10

    @classmethod
    def from_config(cls, config):
        section = config["finesem"]
        return cls(epochs=section["epochs"], batch_size=section["batch_size"], learning_rate=section["learning_rate"],
                   weight_decay=section["weight_decay"], seed=config["seed"], pooling=section["pooling"],
                   dim=config["encoder"]["dim"])


def init_cross_params(rng, vocab_size, dim, scale=0.1):
    """
    Encoder initialization plus head w uniform in [-scale, scale] and c = 0.5 (label midpoint).
    """
    encoder = init_params(rng, vocab_size, dim, scale)
    w = rng.uniform(-scale, scale, size=dim)
    return CrossParams(E=encoder.E, W=encoder.W, b=encoder.b, w=w, c=np.array([0.5]))

def joint_ids(cfg, sentence1, sentence2):
    """
    [CLS] sentence1 [SEP] sentence2
    """
    return [CLS_ID] + tokenize(cfg, sentence1)[1:] + [SEP_ID] + tokenize(cfg, sentence2)[1:]

def _head(params, ids, pooling):
    s, _ = encode_ids(params, ids, pooling)
    return float(params.w @ s + params.c[0]), s

def cross_forward(params, cfg, pair, pooling):
    """
    Unclamped relatedness estimate for a pair.
    """
    return _head(params, joint_ids(cfg, pair.sentence1, pair.sentence2), pooling)[0]

def _item_gradients(params, item, pooling, grads):
    ids, y = item
    prediction, s = _head(params, ids, pooling)
    grad_prediction = 2.0 * (prediction - y)

    grads["w"] += grad_prediction * s
    grads["c"] += grad_prediction
    encoder = backward_ids(params, ids, pooling, grad_prediction * params.w)
    scatter_rows(grads["E"], encoder["E"])
    grads["W"] += encoder["W"]
    grads["b"] += encoder["b"]

    return (prediction - y) ** 2

def _tokenized(cfg, pairs):
    items = []
    for pair in pairs:
        if pair.score is None:
            raise MalformedRow(f"Pair {pair.id} has no gold score.")
        items.append((joint_ids(cfg, pair.sentence1, pair.sentence2), pair.score))
    return items

def batch_gradients(params, cfg, pairs, pooling):
    """
    Mean of (y_hat - y)^2 over the batch and its exact gradients.
    """
    items = _tokenized(cfg, pairs)
    if not items:
        raise EmptyInput("Empty batch.")
    grads = {name: np.zeros_like(array) for name, array in params.groups().items()}
    loss = sum(_item_gradients(params, item, pooling, grads) for item in items)
    for name in grads:
        grads[name] /= len(items)
    return loss / len(items), grads

def train_model(train_ds, ccfg, tokenizer, epochs, name, config_echo=None):
    """
    Fixed number of epochs, one checkpoint at the end of every epoch.
    """
    if len(train_ds.pairs) == 0:
        raise EmptyInput(f"No training data for model {name}.")

    rng = np.random.default_rng(ccfg.seed)
    params = init_cross_params(rng, tokenizer.vocab_size, ccfg.dim)
    state = AdamWState.new(params)
    items = _tokenized(tokenizer, train_ds.pairs)
    checkpoints = []

    log_functions.print_log(f"Training FineSem model {name} on {len(items)} pairs for {epochs} epoch(s).")

    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(items))
        epoch_loss = 0.0
        for start in range(0, len(order), ccfg.batch_size):
            batch = [items[i] for i in order[start:start + ccfg.batch_size]]
            grads = {key: np.zeros_like(array) for key, array in params.groups().items()}
            for item in batch:
                epoch_loss += _item_gradients(params, item, ccfg.pooling, grads)
            for key in grads:
                grads[key] /= len(batch)
            adamw_step(params, grads, state, ccfg)

        train_loss = epoch_loss / len(items)
        checkpoints.append(Checkpoint.snapshot(params, CROSSENCODER, tokenizer, ccfg.pooling, epoch,
                                               config=config_echo, train_loss=train_loss))
        log_functions.print_log(f"Model {name}, epoch {epoch}: train loss {train_loss:.6f}")

    return checkpoints

def train_regime(datasets, regime, translator, ccfg, tokenizer, config_echo=None):
    """
    datasets maps language -> {"train": Dataset, "dev": Dataset}.
    Individual trains one model per language, Unified one model on the merged data,
    Translated one model on the translated and augmented data.
    Returns model name -> per-epoch checkpoints.
    """
    regime = Regime(regime)
    if not datasets:
        raise EmptyInput("No training data configured.")
    epochs = ccfg.epochs_for(regime)

    if regime is Regime.INDIVIDUAL:
        return {lang: train_model(splits["train"], ccfg, tokenizer, epochs, lang, config_echo)
                for lang, splits in datasets.items()}

    if regime is Regime.UNIFIED:
        merged = merge_datasets(splits["train"] for splits in datasets.values())
        return {regime.value: train_model(merged, ccfg, tokenizer, epochs, regime.value, config_echo)}

    if translator is None or not translator.backends:
        raise InvalidBackend("The translated regime needs at least one translation backend.")
    translated = translator.training_set(splits["train"] for splits in datasets.values())
    return {regime.value: train_model(translated, ccfg, tokenizer, epochs, regime.value, config_echo)}

def predict(checkpoint, dataset):
    tokenizer = checkpoint.tokenizer()
    return np.array([_head(checkpoint.params, joint_ids(tokenizer, pair.sentence1, pair.sentence2), checkpoint.pooling)[0]
                     for pair in dataset.pairs])

def select_checkpoint(checkpoints, dev_ds, dev_scorer=None, fixed_epoch=None):
    """
    Return the checkpoint with the best dev Spearman (earliest epoch on ties) and its score.
    fixed_epoch picks that epoch instead, still reporting its dev score.
    """
    checkpoints = list(checkpoints)
    if not checkpoints:
        raise EmptyInput("No checkpoints to select from.")

    def score(checkpoint):
        if dev_scorer is not None:
            return dev_scorer(checkpoint.epoch, checkpoint)
        return spearman_or_worst(predict(checkpoint, dev_ds), dev_ds.gold())

    if fixed_epoch is not None:
        chosen = [checkpoint for checkpoint in checkpoints if checkpoint.epoch == fixed_epoch]
        if not chosen:
            raise EmptyInput(f"No checkpoint for epoch {fixed_epoch}.")
        dev_score = score(chosen[0])
        return chosen[0].with_dev_spearman(dev_score), dev_score

    best, best_score = None, None
    for checkpoint in checkpoints:
        dev_score = score(checkpoint)
        if best is None or dev_score > best_score:
            best, best_score = checkpoint, dev_score

    return best.with_dev_spearman(best_score), best_score

def crosslingual_route(lang, registry):
    """
    English is scored by the Spanish model, every other language by the English model.
    """
    name = SPANISH_MODEL if lang == "eng" else ENGLISH_MODEL
    if name not in registry:
        raise MissingModel(f"Cross-lingual evaluation of {lang} needs the {name!r} model, which is not in the registry.")
    return name


class ModelRegistry:
    """
    Named best checkpoints, stored as one checkpoint directory per name plus index.json.
    """

    def __init__(self, models=None):
        self.models = dict(models or {})

    def __contains__(self, name):
        return name in self.models

    def __getitem__(self, name):
        if name not in self.models:
            raise MissingModel(f"Model {name!r} is not in the registry.")
        return self.models[name]

    def register(self, name, checkpoint):
        self.models[name] = checkpoint

    def names(self):
        return sorted(self.models)

    def save(self, directory):
        os.makedirs(directory, exist_ok=True)
        for name in self.names():
            self.models[name].save(os.path.join(directory, name))
        with open(os.path.join(directory, INDEX_FILE), "w", encoding="utf-8", newline="\n") as f:
            json.dump({"models": self.names()}, f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, directory):
        index_path = os.path.join(directory, INDEX_FILE)
        if not os.path.isfile(index_path):
            raise MissingModel(f"{directory} has no {INDEX_FILE}.")
        with open(index_path, encoding="utf-8") as f:
            names = json.load(f)["models"]
        return cls({name: Checkpoint.load(os.path.join(directory, name)) for name in names})
