#!/usr/bin/env python

"""transem.py  :  Siamese bi-encoder trained on cosine similarity with MSE loss (TranSem) """

__version__ = "0.1"
__status__ = "development"


# Import Packages
import math
from dataclasses import dataclass
import numpy as np
from . import log_functions
from .checkpoint import BIENCODER, Checkpoint
from .encoder import POOLING_MODES, backward_ids, encode_ids, init_params, scatter_rows, tokenize
from .errors import EmptyInput, MalformedRow, NonFiniteGradient, ZeroNorm
from .metrics import spearman_or_worst

# Parameter groups that receive decoupled weight decay (biases do not)
DECAYED_GROUPS = ("E", "W", "w")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-5
    weight_decay: float = 0.01
    batch_size: int = 16
    grad_accum_steps: int = 2
    patience: int = 10
    max_epochs: int | None = None
    seed: int = 13
    pooling: str = "Mean"
    dim: int = 64

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive.")
        if self.batch_size < 1 or self.grad_accum_steps < 1 or self.patience < 1:
            raise ValueError("batch_size, grad_accum_steps and patience must be positive.")
        if self.pooling not in POOLING_MODES:
            raise ValueError(f"Unknown pooling mode: {self.pooling!r}")

    @property
    def effective_batch(self):
        return self.batch_size * self.grad_accum_steps

    @classmethod
    def from_config(cls, config):
        train = config["train"]
        return cls(learning_rate=train["learning_rate"], weight_decay=train["weight_decay"],
                   batch_size=train["batch_size"], grad_accum_steps=train["grad_accum_steps"],
                   patience=train["patience"], max_epochs=train["max_epochs"], seed=config["seed"],
                   pooling=train["pooling"], dim=config["encoder"]["dim"])


@dataclass
class AdamWState:
    m: dict
    v: dict
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def new(cls, params):
        return cls(m={name: np.zeros_like(array) for name, array in params.groups().items()},
                   v={name: np.zeros_like(array) for name, array in params.groups().items()})


class EarlyStopping:
    """
    Track the best dev Spearman and stop after `patience` epochs without a strict improvement.
    """

    def __init__(self, patience):
        self.patience = patience
        self.counter = 0
        self.best_score = None
        self.best_checkpoint = None

    def check(self, score, checkpoint):
        """
        Return True to stop, False to keep going.
        """
        # The first epoch is always the best so far, even with an undefined score
        if self.best_checkpoint is None or score > self.best_score:
            self.best_score = score
            self.best_checkpoint = checkpoint
            self.counter = 0
            return False

        self.counter += 1
        return self.counter >= self.patience


def cosine(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"Vectors of different dimension: {u.shape} and {v.shape}.")
    norm_u = np.linalg.norm(u)
    norm_v = np.linalg.norm(v)
    if norm_u == 0 or norm_v == 0:
        raise ZeroNorm("Cosine similarity of a zero vector.")
    return float(min(1.0, max(-1.0, np.dot(u, v) / (norm_u * norm_v))))

def _cosine_with_grads(u, v):
    norm_u = np.linalg.norm(u)
    norm_v = np.linalg.norm(v)
    if norm_u == 0 or norm_v == 0:
        raise ZeroNorm("Zero sentence embedding during training, the parameters are degenerate.")
    if np.array_equal(u, v):
        # cos is at its maximum, both gradients vanish
        return 1.0, np.zeros_like(u), np.zeros_like(v)
    c = np.dot(u, v) / (norm_u * norm_v)
    grad_u = v / (norm_u * norm_v) - c * u / norm_u ** 2
    grad_v = u / (norm_u * norm_v) - c * v / norm_v ** 2
    return c, grad_u, grad_v

def zero_gradients(params):
    return {name: np.zeros_like(array) for name, array in params.groups().items()}

def _tokenized(cfg, pairs):
    items = []
    for pair in pairs:
        if pair.score is None:
            raise MalformedRow(f"Pair {pair.id} has no gold score.")
        items.append((tokenize(cfg, pair.sentence1), tokenize(cfg, pair.sentence2), pair.score))
    return items

def _item_gradients(params, item, pooling, grads):
    """
    Add the gradient of (cos(s1, s2) - y)^2 for one pair into grads and return the loss.
    Both towers share the parameters, so both contributions accumulate.
    """
    ids1, ids2, y = item
    s1, _ = encode_ids(params, ids1, pooling)
    s2, _ = encode_ids(params, ids2, pooling)
    c, grad_s1, grad_s2 = _cosine_with_grads(s1, s2)
    residual = c - y

    for ids, grad_s in ((ids1, grad_s1), (ids2, grad_s2)):
        tower = backward_ids(params, ids, pooling, 2.0 * residual * grad_s)
        scatter_rows(grads["E"], tower["E"])
        grads["W"] += tower["W"]
        grads["b"] += tower["b"]

    return residual ** 2

def _accumulate_items(params, micro_batches, pooling):
    grads = zero_gradients(params)
    loss_sum = 0.0
    count = 0
    for micro_batch in micro_batches:
        for item in micro_batch:
            loss_sum += _item_gradients(params, item, pooling, grads)
            count += 1
    if count == 0:
        raise EmptyInput("Empty batch.")
    for name in grads:
        grads[name] /= count
    return loss_sum / count, grads, loss_sum

def pair_loss(params, cfg, pair, pooling):
    if pair.score is None:
        raise MalformedRow(f"Pair {pair.id} has no gold score.")
    s1 = encode_ids(params, tokenize(cfg, pair.sentence1), pooling)[0]
    s2 = encode_ids(params, tokenize(cfg, pair.sentence2), pooling)[0]
    return (cosine(s1, s2) - pair.score) ** 2

def batch_gradients(params, cfg, pairs, pooling):
    """
    Mean squared error over the batch and its exact gradients.
    """
    loss, grads, _ = _accumulate_items(params, [_tokenized(cfg, pairs)], pooling)
    return loss, grads

def accumulate_gradients(params, cfg, micro_batches, pooling):
    """
    Gradients summed over several micro-batches and normalized by the effective batch.
    """
    loss, grads, _ = _accumulate_items(params, [_tokenized(cfg, batch) for batch in micro_batches], pooling)
    return loss, grads

def adamw_step(params, grads, state, cfg):
    """
    One AdamW update with bias-corrected moments and decoupled weight decay.
    Parameters and moments are updated in place and returned.
    """
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradient(f"Non-finite gradient in parameter group {name}.")

    state.t += 1
    bias_correction1 = 1 - state.beta1 ** state.t
    bias_correction2 = 1 - state.beta2 ** state.t

    for name, param in params.groups().items():
        grad = grads[name]
        m = state.m[name]
        v = state.v[name]

        # Decay the first and second moment running averages
        m *= state.beta1
        m += (1 - state.beta1) * grad
        v *= state.beta2
        v += (1 - state.beta2) * grad * grad

        update = (m / bias_correction1) / (np.sqrt(v / bias_correction2) + state.eps)

        # Weight decay uses the parameters before this step
        if name in DECAYED_GROUPS and cfg.weight_decay != 0:
            param -= cfg.learning_rate * cfg.weight_decay * param
        param -= cfg.learning_rate * update

    return params, state

def _micro_batches(items, order, batch_size):
    return [[items[i] for i in order[start:start + batch_size]] for start in range(0, len(order), batch_size)]

def train(train_ds, dev_ds, cfg, tokenizer, dev_scorer=None, config_echo=None):
    """
    Train the bi-encoder until dev Spearman stops improving for cfg.patience epochs (or max_epochs).
    dev_scorer(epoch, checkpoint) replaces the dev evaluation when given.
    Returns the best checkpoint and the per-epoch history.
    """
    if len(train_ds.pairs) == 0:
        raise EmptyInput("The training set is empty.")
    if dev_scorer is None and not dev_ds.scored:
        raise MalformedRow("The dev set must be scored.")

    rng = np.random.default_rng(cfg.seed)
    params = init_params(rng, tokenizer.vocab_size, cfg.dim)
    state = AdamWState.new(params)
    items = _tokenized(tokenizer, train_ds.pairs)
    stopper = EarlyStopping(cfg.patience)
    history = []

    log_functions.print_log(f"Training TranSem on {len(items)} pairs ({train_ds.lang}), effective batch {cfg.effective_batch}, pooling {cfg.pooling}.")

    epoch = 0
    while cfg.max_epochs is None or epoch < cfg.max_epochs:
        epoch += 1
        order = rng.permutation(len(items))
        micro_batches = _micro_batches(items, order, cfg.batch_size)

        epoch_loss = 0.0
        for start in range(0, len(micro_batches), cfg.grad_accum_steps):
            _, grads, loss_sum = _accumulate_items(params, micro_batches[start:start + cfg.grad_accum_steps], cfg.pooling)
            adamw_step(params, grads, state, cfg)
            epoch_loss += loss_sum
        train_loss = epoch_loss / len(items)

        checkpoint = Checkpoint.snapshot(params, BIENCODER, tokenizer, cfg.pooling, epoch, config=config_echo, train_loss=train_loss)
        if dev_scorer is not None:
            dev_score = dev_scorer(epoch, checkpoint)
        else:
            dev_score = spearman_or_worst(predict(checkpoint, dev_ds), dev_ds.gold())
        checkpoint = checkpoint.with_dev_spearman(dev_score)

        history.append({"epoch": epoch, "train_loss": train_loss,
                        "dev_spearman": dev_score if math.isfinite(dev_score) else None})
        log_functions.print_log(f"Epoch {epoch}: train loss {train_loss:.6f}, dev Spearman {dev_score:.4f}")

        if stopper.check(dev_score, checkpoint):
            log_functions.print_log(f"Early stopped after epoch {epoch}, best epoch {stopper.best_checkpoint.epoch}.")
            break

    return stopper.best_checkpoint, history

def predict_with_warnings(checkpoint, dataset):
    """
    Cosine relatedness per pair and the number of pairs with a zero embedding (scored 0).
    """
    tokenizer = checkpoint.tokenizer()
    scores = np.empty(len(dataset.pairs))
    zero_norm = 0
    for i, pair in enumerate(dataset.pairs):
        s1 = encode_ids(checkpoint.params, tokenize(tokenizer, pair.sentence1), checkpoint.pooling)[0]
        s2 = encode_ids(checkpoint.params, tokenize(tokenizer, pair.sentence2), checkpoint.pooling)[0]
        try:
            scores[i] = cosine(s1, s2)
        except ZeroNorm:
            scores[i] = 0.0
            zero_norm += 1
    return scores, zero_norm

def predict(checkpoint, dataset):
    scores, zero_norm = predict_with_warnings(checkpoint, dataset)
    if zero_norm:
        log_functions.print_log(f"Warning: {zero_norm} pair(s) with a zero embedding were scored 0.")
    return scores
