#!/usr/bin/env python

"""corpus.py  :  Sentence-pair datasets: ingestion, merging and prediction output """

__version__ = "0.1"
__status__ = "development"


# Import Packages
import csv
import io
import math
import re
from dataclasses import dataclass, replace
import pandas as pd
from .errors import (DuplicateId, EmptyInput, EncodingError, LengthMismatch, MalformedRow,
                     MixedSplits, NonFiniteScore, ScoreOutOfRange)

SPLITS = ("train", "dev", "test")
FORMATS = ("columnar", "semrel-compat")
MULTILINGUAL = "mul"
COLUMNAR_HEADER = ["id", "sentence1", "sentence2", "score"]
SEMREL_HEADER = ["PairID", "Text", "Score"]
PREDICTION_HEADER = ["PairID", "Pred_Score"]

_LANG_PATTERN = re.compile(r"[a-z]{3}")


def check_lang(lang):
    """
    Language codes are lowercase three-letter tags (eng, esp, amh, ...).
    """
    if not isinstance(lang, str) or not _LANG_PATTERN.fullmatch(lang):
        raise ValueError(f"Invalid language code: {lang!r}")
    return lang


@dataclass(frozen=True)
class LabeledPair:
    id: str
    lang: str
    sentence1: str
    sentence2: str
    score: float | None = None


@dataclass(frozen=True)
class Dataset:
    lang: str
    split: str
    pairs: tuple = ()
    # Set when translation could not be applied and the pairs were passed through
    passthrough: bool = False

    def __len__(self):
        return len(self.pairs)

    @property
    def scored(self):
        return all(pair.score is not None for pair in self.pairs)

    def gold(self):
        return [pair.score for pair in self.pairs]


def parse_dataset(data, format, lang, split):
    """
    Parse a dataset file (bytes) in one of the supported formats.
    The header row is consumed and the row order is preserved.
    Train and dev files must carry a score on every row, test files may omit the score column.
    """
    check_lang(lang)
    if split not in SPLITS:
        raise ValueError(f"Unknown split: {split!r}")
    if format not in FORMATS:
        raise ValueError(f"Unknown format: {format!r}")

    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise EncodingError(f"Input is not valid UTF-8 ({lang} {split}): {e}") from e

    # Tolerate a byte order mark and CRLF files
    text = text.lstrip("\ufeff")

    if format == "columnar":
        rows = _columnar_rows(text)
    else:
        rows = _semrel_rows(text)

    pairs = []
    seen_ids = set()
    for line_number, pair_id, sentence1, sentence2, raw_score in rows:
        if pair_id in seen_ids:
            raise DuplicateId(f"Duplicate id {pair_id!r} on line {line_number}.")
        seen_ids.add(pair_id)

        if not sentence1.strip() or not sentence2.strip():
            raise MalformedRow(f"Empty sentence on line {line_number} (id {pair_id}).")

        score = _parse_score(raw_score, line_number)
        if score is None and split != "test":
            raise MalformedRow(f"Missing score on line {line_number} (id {pair_id}), {split} data must be scored.")

        pairs.append(LabeledPair(id=pair_id, lang=lang, sentence1=sentence1, sentence2=sentence2, score=score))

    return Dataset(lang=lang, split=split, pairs=tuple(pairs))

def _columnar_rows(text):
    lines = text.replace("\r\n", "\n").split("\n")
    # Drop the trailing empty line(s) left by the final newline
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MalformedRow("Missing header row.")

    header = lines[0].split("\t")
    if header not in (COLUMNAR_HEADER, COLUMNAR_HEADER[:3]):
        raise MalformedRow(f"Unexpected header: {lines[0]!r}")

    for line_number, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != len(header):
            raise MalformedRow(f"Line {line_number} has {len(parts)} columns, expected {len(header)}.")
        score = parts[3] if len(header) == 4 else None
        yield line_number, parts[0], parts[1], parts[2], score

def _semrel_rows(text):
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader, None)
    if header not in (SEMREL_HEADER, SEMREL_HEADER[:2]):
        raise MalformedRow(f"Unexpected header: {header!r}")

    for row_number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise MalformedRow(f"Row {row_number} has {len(row)} columns, expected {len(header)}.")
        # Both sentences live in one field, separated by a newline
        sentences = row[1].split("\n")
        if len(sentences) != 2:
            raise MalformedRow(f"Row {row_number} (id {row[0]}) does not hold exactly two sentences.")
        score = row[2] if len(header) == 3 else None
        yield row_number, row[0], sentences[0], sentences[1], score

def _parse_score(raw_score, line_number):
    if raw_score is None or raw_score.strip() == "":
        return None
    try:
        score = float(raw_score)
    except ValueError as e:
        raise MalformedRow(f"Score {raw_score!r} on line {line_number} is not a number.") from e
    if not 0.0 <= score <= 1.0:
        raise ScoreOutOfRange(f"Score {raw_score} on line {line_number} is outside [0, 1].")
    return score

def read_dataset(path, format, lang, split):
    with open(path, "rb") as f:
        return parse_dataset(f.read(), format, lang, split)

def merge_datasets(datasets):
    """
    Concatenate datasets of the same split. Mixed languages give a multilingual ("mul")
    dataset whose ids are prefixed with the source language.
    """
    datasets = list(datasets)
    if not datasets:
        raise EmptyInput("No datasets to merge.")

    splits = {dataset.split for dataset in datasets}
    if len(splits) > 1:
        raise MixedSplits(f"Cannot merge different splits: {', '.join(sorted(splits))}.")

    langs = {dataset.lang for dataset in datasets}
    if len(langs) == 1:
        lang = datasets[0].lang
        pairs = tuple(pair for dataset in datasets for pair in dataset.pairs)
    else:
        lang = MULTILINGUAL
        pairs = tuple(replace(pair, id=f"{pair.lang}:{pair.id}") for dataset in datasets for pair in dataset.pairs)

    ids = [pair.id for pair in pairs]
    if len(set(ids)) != len(ids):
        raise DuplicateId(f"Merged {', '.join(sorted(langs))} datasets share ids.")
    return Dataset(lang=lang, split=datasets[0].split, pairs=pairs)

def write_predictions(dataset, scores):
    """
    Prediction file: PairID,Pred_Score with one row per pair in dataset order.
    """
    scores = [float(score) for score in scores]
    if len(scores) != len(dataset.pairs):
        raise LengthMismatch(f"{len(scores)} scores for {len(dataset.pairs)} pairs.")
    for pair, score in zip(dataset.pairs, scores):
        if not math.isfinite(score):
            raise NonFiniteScore(f"Score for {pair.id} is not finite: {score}")

    predictions = pd.DataFrame({"PairID": [pair.id for pair in dataset.pairs], "Pred_Score": scores},
                               columns=PREDICTION_HEADER)
    return predictions.to_csv(index=False, float_format="%.6f", lineterminator="\n").encode("utf-8")

def write_columnar(dataset):
    """
    Native TSV serialization (the score column is left out when no pair is scored).
    """
    with_score = any(pair.score is not None for pair in dataset.pairs) or dataset.split != "test"
    header = COLUMNAR_HEADER if with_score else COLUMNAR_HEADER[:3]
    lines = ["\t".join(header)]
    for pair in dataset.pairs:
        row = [pair.id, pair.sentence1, pair.sentence2]
        if with_score:
            row.append("" if pair.score is None else f"{pair.score:.6f}")
        lines.append("\t".join(row))
    return ("\n".join(lines) + "\n").encode("utf-8")
