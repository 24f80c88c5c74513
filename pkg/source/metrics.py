#!/usr/bin/env python

"""metrics.py  :  Tie-aware Spearman correlation and result tables against the baseline """

__version__ = "0.1"
__status__ = "development"


# Import Packages
import math
import os
from dataclasses import asdict, dataclass
import numpy as np
import pandas as pd
from .errors import LengthMismatch, NonFiniteScore, UndefinedSpearman

BASELINES_FILE = os.path.join(os.path.dirname(__file__), "data", "baselines.csv")


@dataclass(frozen=True)
class EvalResult:
    model: str
    lang: str
    split: str
    spearman: float
    n: int

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, record):
        return cls(model=record["model"], lang=record["lang"], split=record["split"],
                   spearman=float(record["spearman"]), n=int(record["n"]))


def average_ranks(values):
    """
    Fractional ranks (1..n): tied values share the mean of the ranks they span.
    """
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise NonFiniteScore("Cannot rank non-finite values.")

    n = len(values)
    order = np.argsort(values, kind="mergesort")
    sorted_values = values[order]
    ranks = np.empty(n)

    i = 0
    while i < n:
        j = i + 1
        while j < n and sorted_values[j] == sorted_values[i]:
            j += 1
        # positions i..j-1 hold ranks i+1..j
        ranks[order[i:j]] = 0.5 * (i + 1 + j)
        i = j

    return ranks

def spearman(pred, gold):
    """
    Pearson correlation of the fractional ranks of pred and gold.
    """
    if len(pred) != len(gold):
        raise LengthMismatch(f"{len(pred)} predictions for {len(gold)} gold scores.")
    if len(pred) < 2:
        raise UndefinedSpearman("Spearman needs at least two items.")

    pred_ranks = average_ranks(pred)
    gold_ranks = average_ranks(gold)
    pred_centered = pred_ranks - pred_ranks.mean()
    gold_centered = gold_ranks - gold_ranks.mean()

    pred_var = np.dot(pred_centered, pred_centered)
    gold_var = np.dot(gold_centered, gold_centered)
    if pred_var == 0 or gold_var == 0:
        raise UndefinedSpearman("Spearman is undefined for a constant input.")

    rho = np.dot(pred_centered, gold_centered) / math.sqrt(pred_var * gold_var)
    return float(min(1.0, max(-1.0, rho)))

def spearman_or_worst(pred, gold):
    """
    Training loops compare dev scores; an undefined correlation ranks below everything.
    """
    try:
        return spearman(pred, gold)
    except UndefinedSpearman:
        return -math.inf

def load_baselines(track, path=BASELINES_FILE):
    """
    Official baseline per language for a track ("A" supervised, "C" cross-lingual).
    """
    baselines = pd.read_csv(path, dtype={"track": str, "lang": str, "score": float})
    selected = baselines[baselines["track"] == track]
    return {row.lang: float(row.score) for row in selected.itertuples(index=False)}

def format_score(value):
    """
    Table style: four decimals without the leading zero (.8125, -.0500). Undefined scores print as '-'.
    """
    if not math.isfinite(value):
        return "-"
    text = f"{value:.4f}"
    if text.startswith("0."):
        return text[1:]
    if text.startswith("-0."):
        return "-" + text[2:]
    return text

def _average(values):
    finite = [value for value in values if math.isfinite(value)]
    return float(np.mean(finite)) if finite else math.nan

def _table_frame(results, baseline, include_baseline=True):
    langs = sorted({result.lang for result in results})
    columns = ["model"] + langs + ["avg"]
    rows = []

    present_baseline = [lang for lang in langs if lang in baseline]
    if include_baseline and present_baseline:
        row = {"model": "baseline"}
        for lang in langs:
            row[lang] = format_score(baseline[lang]) if lang in baseline else "-"
        row["avg"] = format_score(float(np.mean([baseline[lang] for lang in present_baseline])))
        rows.append(row)

    # One row per model, in order of first appearance
    models = list(dict.fromkeys(result.model for result in results))
    for model in models:
        scores = {result.lang: result.spearman for result in results if result.model == model}
        row = {"model": model}
        for lang in langs:
            if lang not in scores:
                row[lang] = "-"
                continue
            marker = "*" if lang in baseline and scores[lang] > baseline[lang] else ""
            row[lang] = format_score(scores[lang]) + marker
        row["avg"] = format_score(_average(scores.values()))
        rows.append(row)

    return pd.DataFrame(rows, columns=columns)

def report_table(results, baseline, include_baseline=True):
    """
    Tab-separated table: one column per language (sorted) plus the average.
    Cells above the baseline carry a '*'.
    """
    frame = _table_frame(list(results), baseline, include_baseline)
    return frame.to_csv(sep="\t", index=False, lineterminator="\n")

def report_csv(results, baseline):
    """
    Long form: lang,model,score,baseline,beats_baseline.
    """
    rows = []
    for result in sorted(results, key=lambda r: (r.lang, r.model)):
        reference = baseline.get(result.lang)
        rows.append({
            "lang": result.lang,
            "model": result.model,
            "score": f"{result.spearman:.4f}",
            "baseline": "" if reference is None else f"{reference:.4f}",
            "beats_baseline": "" if reference is None else str(result.spearman > reference).lower(),
        })
    frame = pd.DataFrame(rows, columns=["lang", "model", "score", "baseline", "beats_baseline"])
    return frame.to_csv(index=False, lineterminator="\n")
