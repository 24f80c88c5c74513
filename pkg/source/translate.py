#!/usr/bin/env python

"""translate.py  :  Translate sentence pairs into English and build the augmented training data """

__version__ = "0.1"
__status__ = "development"


# Import Packages
import hashlib
import http.client
import json
import os
import threading
import time
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from . import log_functions
from .corpus import Dataset, merge_datasets
from .errors import (BackendFailure, EmptyInput, InvalidBackend, MixedSplits, NoPrimaryBackend,
                     UnsupportedLanguage)

TARGET_LANG = "eng"
KINDS = ("identity", "lexicon", "remote")
CACHE_FILE = "translation_cache.json"


@dataclass(frozen=True)
class TranslationBackend:
    """
    One configured translator. languages lists the source languages it can translate (None: all).
    """
    name: str
    kind: str
    lexicon: dict | None = None
    endpoint: str | None = None
    is_primary: bool = False
    languages: tuple | None = None

    def __post_init__(self):
        if not self.name:
            raise InvalidBackend("A backend needs a name.")
        if self.kind not in KINDS:
            raise InvalidBackend(f"Backend {self.name}: kind must be one of {', '.join(KINDS)}.")
        if self.kind == "lexicon":
            if not self.lexicon:
                raise InvalidBackend(f"Backend {self.name}: a lexicon backend needs a lexicon.")
            if len(set(self.lexicon.values())) != len(self.lexicon):
                raise InvalidBackend(f"Backend {self.name}: the lexicon must be one-to-one.")
        if self.kind == "remote" and not self.endpoint:
            raise InvalidBackend(f"Backend {self.name}: a remote backend needs an endpoint.")

    def supports(self, lang):
        return self.languages is None or lang in self.languages

    @classmethod
    def from_config(cls, entry):
        lexicon = entry.get("lexicon")
        if lexicon is None and entry.get("lexicon_path"):
            with open(entry["lexicon_path"], encoding="utf-8") as f:
                lexicon = json.load(f)
        languages = entry.get("languages")
        return cls(name=entry.get("name", ""), kind=entry.get("kind", ""), lexicon=lexicon,
                   endpoint=entry.get("endpoint"), is_primary=bool(entry.get("primary", False)),
                   languages=None if languages is None else tuple(languages))


@dataclass(frozen=True)
class RemoteOptions:
    retries: int = 3
    backoff: float = 0.25
    timeout: float = 30.0
    parallelism: int = 4
    batch_size: int = 32

    @classmethod
    def from_config(cls, config):
        section = config["translation"]
        return cls(retries=section["retries"], backoff=section["backoff"], timeout=section["timeout"],
                   parallelism=section["parallelism"], batch_size=section["batch_size"])


class TranslationCache:
    """
    Translations keyed by (backend name, source language, SHA-256 of the UTF-8 source text).
    Safe for concurrent readers and writers.
    """

    def __init__(self, entries=None):
        self._entries = dict(entries or {})
        self._lock = threading.Lock()

    @staticmethod
    def key(backend_name, lang, text):
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return f"{backend_name}\t{lang}\t{digest}"

    def get(self, backend_name, lang, text):
        with self._lock:
            return self._entries.get(self.key(backend_name, lang, text))

    def put(self, backend_name, lang, text, translation):
        with self._lock:
            self._entries[self.key(backend_name, lang, text)] = translation

    def __len__(self):
        with self._lock:
            return len(self._entries)

    @classmethod
    def load(cls, path):
        if not os.path.isfile(path):
            return cls()
        with open(path, encoding="utf-8") as f:
            return cls(json.load(f))

    def save(self, path):
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with self._lock:
            entries = dict(self._entries)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(entries, f, indent=1, sort_keys=True, ensure_ascii=False)
            f.write("\n")


def _lexicon_translate(lexicon, text):
    # Token-by-token mapping, unknown tokens are kept
    return " ".join(lexicon.get(token, lexicon.get(token.lower(), token)) for token in text.split())

def _post_batch(backend, lang, texts, options):
    """
    POST {"src_lang", "tgt_lang", "texts"} and expect {"translations"} of the same length.
    Retries with exponential backoff, then gives up with BackendFailure.
    """
    payload = json.dumps({"src_lang": lang, "tgt_lang": TARGET_LANG, "texts": texts}).encode("utf-8")
    last_error = None

    for attempt in range(options.retries):
        if attempt:
            time.sleep(options.backoff * 2 ** (attempt - 1))
        request = urllib.request.Request(backend.endpoint, data=payload, method="POST",
                                         headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(request, timeout=options.timeout) as response:
                if response.status != 200:
                    raise BackendFailure(f"HTTP {response.status}")
                body = json.loads(response.read().decode("utf-8"))
            translations = body.get("translations") if isinstance(body, dict) else None
            if not isinstance(translations, list) or len(translations) != len(texts):
                raise BackendFailure("response length does not match the request")
            return [str(translation) for translation in translations]
        except (OSError, http.client.HTTPException, ValueError, BackendFailure) as e:
            last_error = e
            log_functions.print_log(f"Backend {backend.name}: attempt {attempt + 1}/{options.retries} failed ({e}).")

    raise BackendFailure(f"Backend {backend.name} failed after {options.retries} attempts: {last_error}")

def translate_texts(backend, lang, texts, cache, options=None):
    """
    Translate texts from lang into English, in input order. Cached texts are not sent again.
    Remote batches run with bounded parallelism.
    """
    options = options or RemoteOptions()
    if not backend.supports(lang):
        raise UnsupportedLanguage(f"Backend {backend.name} cannot translate {lang}.")

    results = [cache.get(backend.name, lang, text) for text in texts]
    missing = list(dict.fromkeys(text for text, result in zip(texts, results) if result is None))

    if missing:
        if backend.kind == "identity":
            translated = missing
        elif backend.kind == "lexicon":
            translated = [_lexicon_translate(backend.lexicon, text) for text in missing]
        else:
            chunks = [missing[i:i + options.batch_size] for i in range(0, len(missing), options.batch_size)]
            with ThreadPoolExecutor(max_workers=max(1, options.parallelism)) as executor:
                # map keeps the chunk order whatever the completion order
                translated = [text for chunk in executor.map(lambda chunk: _post_batch(backend, lang, chunk, options), chunks)
                              for text in chunk]

        for text, translation in zip(missing, translated):
            cache.put(backend.name, lang, text, translation)

        results = [cache.get(backend.name, lang, text) for text in texts]

    return results

def translate_pair(backend, pair, cache, options=None):
    """
    Translate both sentences of a pair. The gold score is kept and the id gets the backend suffix.
    """
    sentence1, sentence2 = translate_texts(backend, pair.lang, [pair.sentence1, pair.sentence2], cache, options)
    return replace(pair, id=f"{pair.id}.{backend.name}", lang=TARGET_LANG, sentence1=sentence1, sentence2=sentence2)

def _translate_pairs(backend, dataset, cache, options):
    # One call for the whole dataset so remote requests are batched
    texts = [text for pair in dataset.pairs for text in (pair.sentence1, pair.sentence2)]
    translated = translate_texts(backend, dataset.lang, texts, cache, options)
    return [replace(pair, id=f"{pair.id}.{backend.name}", lang=TARGET_LANG,
                    sentence1=translated[2 * i], sentence2=translated[2 * i + 1])
            for i, pair in enumerate(dataset.pairs)]

def augment_training(dataset, backends, cache, options=None):
    """
    Translate the training set with every backend that supports its language, backend by backend.
    A language no backend supports is returned unchanged, flagged as passthrough.
    """
    if dataset.split != "train":
        raise MixedSplits(f"Augmentation expects a train split, got {dataset.split}.")
    backends = list(backends)
    if not backends:
        raise EmptyInput("No translation backends configured.")

    supporting = [backend for backend in backends if backend.supports(dataset.lang)]
    if not supporting:
        log_functions.print_log(f"No backend supports {dataset.lang}, its training data is passed through untranslated.")
        return replace(dataset, passthrough=True)

    pairs = []
    for backend in supporting:
        pairs.extend(_translate_pairs(backend, dataset, cache, options))
    log_functions.print_log(f"Augmented {dataset.lang}: {len(dataset.pairs)} -> {len(pairs)} pairs ({', '.join(b.name for b in supporting)}).")

    return Dataset(lang=TARGET_LANG, split=dataset.split, pairs=tuple(pairs))

def primary_backend(backends):
    primaries = [backend for backend in backends if backend.is_primary]
    if not primaries:
        raise NoPrimaryBackend("No primary backend configured for dev/test translation.")
    if len(primaries) > 1:
        raise InvalidBackend(f"More than one primary backend: {', '.join(b.name for b in primaries)}.")
    return primaries[0]

def translate_eval(dataset, backends, cache, options=None):
    """
    Translate a dev or test set with the primary backend only. Size and order are unchanged.
    """
    if dataset.split not in ("dev", "test"):
        raise MixedSplits(f"Evaluation translation expects dev or test data, got {dataset.split}.")
    backend = primary_backend(backends)

    if not backend.supports(dataset.lang):
        log_functions.print_log(f"Primary backend {backend.name} does not support {dataset.lang}, evaluating it untranslated.")
        return replace(dataset, passthrough=True)

    return Dataset(lang=TARGET_LANG, split=dataset.split, pairs=tuple(_translate_pairs(backend, dataset, cache, options)))


class Translator:
    """
    Configured backends, the shared cache and the remote options, as one handle.
    """

    def __init__(self, backends, cache=None, options=None, cache_path=None):
        self.backends = list(backends)
        self.cache = cache if cache is not None else TranslationCache()
        self.options = options or RemoteOptions()
        self.cache_path = cache_path

    @classmethod
    def from_config(cls, config):
        cache_dir = os.environ.get("SEMREL_CACHE_DIR") or os.path.join(config["out"], "cache")
        cache_path = os.path.join(cache_dir, CACHE_FILE)
        backends = [TranslationBackend.from_config(entry) for entry in config["backends"]]
        return cls(backends, TranslationCache.load(cache_path), RemoteOptions.from_config(config), cache_path)

    def augment(self, dataset):
        return augment_training(dataset, self.backends, self.cache, self.options)

    def translate_eval(self, dataset):
        return translate_eval(dataset, self.backends, self.cache, self.options)

    def training_set(self, datasets):
        """
        Translated and augmented training data of several languages as one English dataset.
        English data is kept as is, languages no backend supports are left out.
        """
        translated = []
        for dataset in datasets:
            dataset = _with_source_prefix(dataset)
            if dataset.lang == TARGET_LANG:
                translated.append(dataset)
                continue
            augmented = self.augment(dataset)
            if augmented.passthrough:
                continue
            translated.append(augmented)
        if not translated:
            raise EmptyInput("No training data is left after translation.")
        return merge_datasets(translated)

    def eval_set(self, datasets):
        """
        Dev data of several languages translated with the primary backend, as one dataset.
        """
        translated = []
        for dataset in datasets:
            dataset = _with_source_prefix(dataset)
            translated.append(dataset if dataset.lang == TARGET_LANG else self.translate_eval(dataset))
        return merge_datasets(translated)

    def save_cache(self):
        if self.cache_path:
            self.cache.save(self.cache_path)


def _with_source_prefix(dataset):
    # Ids from different languages stay unique once every pair is English
    return replace(dataset, pairs=tuple(replace(pair, id=f"{dataset.lang}:{pair.id}") for pair in dataset.pairs))
