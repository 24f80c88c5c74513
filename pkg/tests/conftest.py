import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
import numpy as np
import pytest
from source.corpus import Dataset, LabeledPair
from source.encoder import TokenizerConfig, encode_sentence, init_params
from source.transem import cosine

WORDS = ["river", "bank", "money", "water", "stone", "bird", "song", "tree", "light", "road", "house", "rain"]


def make_dataset(lang, split, rows):
    """
    rows: (id, sentence1, sentence2, score) tuples.
    """
    return Dataset(lang=lang, split=split, pairs=tuple(
        LabeledPair(id=pair_id, lang=lang, sentence1=s1, sentence2=s2, score=score) for pair_id, s1, s2, score in rows))


def realizable_pairs(seed, n_pairs, tokenizer, dim=4, pooling="Mean", prefix="p"):
    """
    Pairs scored by a frozen random encoder of the same architecture.
    Only pairs whose cosine lies in [0, 1] are kept, so every label is a valid score.
    """
    rng = np.random.default_rng(seed)
    frozen_rng = np.random.default_rng(1000)
    frozen = init_params(frozen_rng, tokenizer.vocab_size, dim, scale=1.0)
    frozen.b = frozen_rng.uniform(-0.5, 0.5, size=dim)

    rows = []
    while len(rows) < n_pairs:
        s1 = " ".join(rng.choice(WORDS, size=int(rng.integers(1, 4))))
        s2 = " ".join(rng.choice(WORDS, size=int(rng.integers(1, 4))))
        try:
            score = cosine(encode_sentence(frozen, tokenizer, s1, pooling), encode_sentence(frozen, tokenizer, s2, pooling))
        except ValueError:
            continue
        if 0.0 <= score <= 1.0:
            rows.append((f"{prefix}{len(rows)}", s1, s2, score))
    return rows


@pytest.fixture
def tiny_tokenizer():
    return TokenizerConfig(vocab_size=16, hash_seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def tiny_params(rng):
    return init_params(rng, 16, 4, scale=0.5)


class _UppercaseHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length).decode("utf-8"))
        with self.server.lock:
            self.server.requests.append(body)
            failures = self.server.failures_left
            if failures:
                self.server.failures_left -= 1

        if failures and self.server.drop_connection:
            # Close without a status line
            self.close_connection = True
            return
        if failures:
            self.send_response(503)
            self.end_headers()
            return

        payload = json.dumps({"translations": [text.upper() for text in body["texts"]]}).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, format, *args):
        pass


@pytest.fixture
def translation_server():
    """
    Threaded HTTP translator that uppercases every text and records the requests it got.
    Set server.failures_left to answer the next requests with HTTP 503, or to close the
    connection without an answer when server.drop_connection is set.
    """
    server = ThreadingHTTPServer(("127.0.0.1", 0), _UppercaseHandler)
    server.lock = threading.Lock()
    server.requests = []
    server.failures_left = 0
    server.drop_connection = False
    server.endpoint = f"http://127.0.0.1:{server.server_address[1]}/translate"

    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    server.server_close()
