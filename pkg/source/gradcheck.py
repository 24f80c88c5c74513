#!/usr/bin/env python

"""gradcheck.py  :  Compare analytic gradients with central finite differences on tiny instances """

__version__ = "0.1"
__status__ = "development"


# Import Packages
import numpy as np
from .corpus import LabeledPair
from .encoder import POOLING_MODES, TokenizerConfig, encode_backward, encode_sentence, init_params, scatter_rows
from . import finesem, transem

STEP = 1e-5
TOLERANCE = 1e-6
# Central differences of a loss that does not move at all still return rounding noise of this size
NOISE_FLOOR = 1e-10
GROUPS = ("E", "W", "b", "head")
WORDS = ["river", "bank", "money", "water", "stone", "bird", "song", "tree", "light", "road"]


def tiny_instance(seed, vocab_size=16, dim=4, n_pairs=3):
    """
    A seeded tokenizer, a few scored pairs and parameters for both model kinds.
    Initialization is wider than for training and b is random so every group has a visible gradient.
    """
    rng = np.random.default_rng(seed)
    tokenizer = TokenizerConfig(vocab_size=vocab_size, hash_seed=seed)

    def sentence():
        return " ".join(rng.choice(WORDS, size=int(rng.integers(1, 5))))

    pairs = [LabeledPair(id=f"g{i}", lang="eng", sentence1=sentence(), sentence2=sentence(), score=float(rng.uniform(0, 1)))
             for i in range(n_pairs)]

    encoder = init_params(rng, vocab_size, dim, scale=0.5)
    encoder.b = rng.uniform(-0.5, 0.5, size=dim)
    cross = finesem.init_cross_params(rng, vocab_size, dim, scale=0.5)
    cross.b = rng.uniform(-0.5, 0.5, size=dim)

    return tokenizer, pairs, encoder, cross

def numerical_gradients(loss_fn, params, step=STEP):
    """
    Central differences (f(p + h) - f(p - h)) / 2h for every entry of every parameter group.
    """
    numeric = {}
    for name, array in params.groups().items():
        grad = np.zeros_like(array)
        for index in np.ndindex(array.shape):
            original = array[index]
            array[index] = original + step
            loss_plus = loss_fn(params)
            array[index] = original - step
            loss_minus = loss_fn(params)
            array[index] = original
            grad[index] = (loss_plus - loss_minus) / (2 * step)
        numeric[name] = grad
    return numeric

def relative_errors(analytic, numeric):
    """
    Max |analytic - numeric| / (|analytic| + 1e-8) per group; w and c are reported together as head.
    An exactly zero analytic entry matches a numeric one below NOISE_FLOOR. Bi-encoder CLS pooling
    hits this for every entry: both towers pool row 0, the cosine is 1 and the gradient vanishes.
    """
    errors = {}
    for name in analytic:
        group = "head" if name in ("w", "c") else name
        a, n = np.asarray(analytic[name], dtype=float), np.asarray(numeric[name], dtype=float)
        entry_errors = np.where((a == 0.0) & (np.abs(n) < NOISE_FLOOR), 0.0, np.abs(a - n) / (np.abs(a) + 1e-8))
        error = np.max(entry_errors)
        errors[group] = max(errors.get(group, 0.0), float(error))
    return errors

def check_encoder(seed, pooling, gradient_hook=None):
    """
    Loss = u . encode_sentence(text), so the analytic gradient is encode_backward with upstream u.
    """
    tokenizer, pairs, params, _ = tiny_instance(seed)
    upstream = np.random.default_rng(seed + 1).uniform(-1, 1, size=params.dim)
    text = pairs[0].sentence1

    backward = encode_backward(params, tokenizer, text, pooling, upstream)
    analytic = {"E": scatter_rows(np.zeros_like(params.E), backward["E"]), "W": backward["W"], "b": backward["b"]}
    if gradient_hook is not None:
        analytic = gradient_hook(analytic)

    numeric = numerical_gradients(lambda p: float(upstream @ encode_sentence(p, tokenizer, text, pooling)), params)
    return relative_errors(analytic, numeric)

def check_biencoder(seed, pooling, gradient_hook=None):
    tokenizer, pairs, params, _ = tiny_instance(seed)
    _, analytic = transem.batch_gradients(params, tokenizer, pairs, pooling)
    if gradient_hook is not None:
        analytic = gradient_hook(analytic)

    def loss(p):
        return float(np.mean([transem.pair_loss(p, tokenizer, pair, pooling) for pair in pairs]))

    return relative_errors(analytic, numerical_gradients(loss, params))

def check_crossencoder(seed, pooling, gradient_hook=None):
    tokenizer, pairs, _, params = tiny_instance(seed)
    _, analytic = finesem.batch_gradients(params, tokenizer, pairs, pooling)
    if gradient_hook is not None:
        analytic = gradient_hook(analytic)

    def loss(p):
        return float(np.mean([(finesem.cross_forward(p, tokenizer, pair, pooling) - pair.score) ** 2 for pair in pairs]))

    return relative_errors(analytic, numerical_gradients(loss, params))

def run_gradcheck(seed, poolings=POOLING_MODES, gradient_hook=None):
    """
    Run every suite for every pooling mode. Returns one row per (suite, pooling, group)
    and the overall verdict.
    """
    suites = (("encoder", check_encoder), ("biencoder", check_biencoder), ("crossenc", check_crossencoder))
    rows = []
    for suite, check in suites:
        for pooling in poolings:
            for group, error in check(seed, pooling, gradient_hook).items():
                rows.append({"suite": suite, "pooling": pooling, "group": group,
                             "max_rel_error": error, "passed": error < TOLERANCE})
    return rows, all(row["passed"] for row in rows)

def group_summary(rows):
    """
    Worst relative error per parameter group over all suites.
    """
    return {group: max(row["max_rel_error"] for row in rows if row["group"] == group)
            for group in GROUPS if any(row["group"] == group for row in rows)}
