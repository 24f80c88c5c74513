#!/usr/bin/env python

"""encoder.py  :  Hashing tokenizer and the shared sentence encoder (embedding, pooling, affine map) """

__version__ = "0.1"
__status__ = "development"


# Import Packages
import unicodedata
from dataclasses import dataclass
import numpy as np
from .errors import EmptyPooling

# Reserved token ids
CLS_ID = 0
SEP_ID = 1
UNK_ID = 2
RESERVED_IDS = 3

POOLING_MODES = ("CLS", "Mean", "Max")

# 64-bit FNV-1a
FNV_OFFSET = 0xcbf29ce484222325
FNV_PRIME = 0x100000001b3
MASK64 = 0xffffffffffffffff


@dataclass(frozen=True)
class TokenizerConfig:
    vocab_size: int = 32768
    hash_seed: int = 0
    lowercase: bool = True

    def __post_init__(self):
        if self.vocab_size < RESERVED_IDS + 1:
            raise ValueError(f"vocab_size must be at least {RESERVED_IDS + 1}, got {self.vocab_size}.")


@dataclass
class EncoderParams:
    """
    Shared encoder parameters: token embeddings E (V x d), projection W (d x d) and bias b (d).
    Rows 0, 1 and 2 of E are the CLS, SEP and UNK embeddings.
    """
    E: np.ndarray
    W: np.ndarray
    b: np.ndarray

    @property
    def dim(self):
        return self.W.shape[0]

    @property
    def vocab_size(self):
        return self.E.shape[0]

    def groups(self):
        # Declared order, also the order of the checkpoint blob
        return {"E": self.E, "W": self.W, "b": self.b}

    def copy(self):
        return type(self)(**{name: array.copy() for name, array in self.groups().items()})


def token_hash(token, hash_seed):
    """
    FNV-1a (64 bit) over the UTF-8 bytes of the token, starting from the offset basis XOR hash_seed.
    """
    h = (FNV_OFFSET ^ (hash_seed & MASK64)) & MASK64
    for byte in token.encode("utf-8"):
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h

def _strip_punctuation(token):
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end]

def tokenize(cfg, text):
    """
    Split on whitespace, strip punctuation around each token and hash it into [3, V).
    The sequence always starts with CLS, a text without tokens gives [CLS, UNK].
    """
    if cfg.lowercase:
        text = text.lower()

    ids = [CLS_ID]
    for surface in text.split():
        token = _strip_punctuation(surface)
        if token:
            ids.append(RESERVED_IDS + token_hash(token, cfg.hash_seed) % (cfg.vocab_size - RESERVED_IDS))

    if len(ids) == 1:
        ids.append(UNK_ID)
    return ids

def init_params(rng, vocab_size, dim, scale=0.1):
    """
    E and W uniform in [-scale, scale], b = 0.
    """
    E = rng.uniform(-scale, scale, size=(vocab_size, dim))
    W = rng.uniform(-scale, scale, size=(dim, dim))
    b = np.zeros(dim)
    return EncoderParams(E=E, W=W, b=b)

def pool(token_vectors, mode):
    """
    Reduce a T x d matrix of token vectors to one d vector.
    """
    token_vectors = np.asarray(token_vectors, dtype=np.float64)
    if token_vectors.ndim != 2 or token_vectors.shape[0] == 0:
        raise EmptyPooling("Pooling needs at least one token vector.")

    if mode == "CLS":
        return token_vectors[0].copy()
    if mode == "Mean":
        return token_vectors.mean(axis=0)
    if mode == "Max":
        return token_vectors.max(axis=0)
    raise ValueError(f"Unknown pooling mode: {mode!r}")

def encode_ids(params, ids, mode):
    """
    s = W . pool(E[ids]) + b. Returns the embedding and the pooled vector.
    """
    pooled = pool(params.E[np.asarray(ids)], mode)
    return params.W @ pooled + params.b, pooled

def encode_sentence(params, cfg, text, mode):
    return encode_ids(params, tokenize(cfg, text), mode)[0]

def backward_ids(params, ids, mode, upstream):
    """
    Exact gradients of encode_ids for an upstream gradient on s.
    The E gradient is sparse: (rows, values) to be scatter-added, rows may repeat.
    """
    ids = np.asarray(ids)
    upstream = np.asarray(upstream, dtype=np.float64)
    token_vectors = params.E[ids]
    pooled = pool(token_vectors, mode)

    grad_pooled = params.W.T @ upstream

    if mode == "CLS":
        rows = ids[:1]
        values = grad_pooled[None, :]
    elif mode == "Mean":
        rows = ids
        values = np.tile(grad_pooled / len(ids), (len(ids), 1))
    elif mode == "Max":
        # argmax keeps the first (lowest row) maximum on ties
        winners = token_vectors.argmax(axis=0)
        rows = ids[winners]
        values = np.diag(grad_pooled)
    else:
        raise ValueError(f"Unknown pooling mode: {mode!r}")

    return {"E": (rows, values), "W": np.outer(upstream, pooled), "b": upstream.copy()}

def encode_backward(params, cfg, text, mode, upstream):
    return backward_ids(params, tokenize(cfg, text), mode, upstream)

def scatter_rows(dense, sparse, scale=1.0):
    """
    Add a sparse (rows, values) embedding gradient into a dense V x d array.
    """
    rows, values = sparse
    np.add.at(dense, rows, scale * values)
    return dense
