#!/usr/bin/env python

"""commands.py  :  Operations run from tools.py (augment, train, eval, sweep, crosslingual, gradcheck, report) """

__version__ = "0.1"
__status__ = "development"


# Import Packages
import json
import math
import os
import sys
from dataclasses import replace
from . import finesem, log_functions, metrics, transem
from .checkpoint import BIENCODER, Checkpoint, check_compatible
from .corpus import merge_datasets, read_dataset, write_columnar, write_predictions
from .encoder import TokenizerConfig
from .errors import ConfigError, UndefinedSpearman
from .gradcheck import group_summary, run_gradcheck
from .translate import Translator

SWEEP_AXES = ("batch_size", "pooling")


# ----------
# Shared helpers
# ----------
def _tokenizer(config):
    section = config["tokenizer"]
    return TokenizerConfig(vocab_size=section["vocab_size"], hash_seed=section["hash_seed"], lowercase=section["lowercase"])

def _load_datasets(config, langs=None):
    """
    Read every configured file: language -> split -> Dataset.
    """
    datasets = {}
    for lang, splits in config["data"]["paths"].items():
        if langs is not None and lang not in langs:
            continue
        datasets[lang] = {split: read_dataset(path, config["data"]["format"], lang, split) for split, path in splits.items()}
        log_functions.print_log(f"Loaded {lang}: " + ", ".join(f"{split} {len(ds)}" for split, ds in datasets[lang].items()))
    return datasets

def _require_splits(datasets, *splits):
    for lang, available in datasets.items():
        for split in splits:
            if split not in available:
                raise ConfigError(f"data.paths.{lang}.{split} is missing.")

def _write_text(path, text):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)

def _write_json(path, document):
    _write_text(path, json.dumps(document, indent=2, sort_keys=True) + "\n")

def _translator(config):
    return Translator.from_config(config) if config["backends"] else None

def _training_data(config, datasets, translator):
    """
    Training and dev data for the bi-encoder: every configured language, translated when asked.
    """
    trains = [splits["train"] for splits in datasets.values()]
    devs = [splits["dev"] for splits in datasets.values()]
    if config["data"]["translate"]:
        if translator is None:
            raise ConfigError("data.translate is set but no backends are configured.")
        return translator.training_set(trains), translator.eval_set(devs)
    return merge_datasets(trains), merge_datasets(devs)

def _model_view(config, dataset, translator):
    # Translated models see the primary backend's English version of the data
    if config["data"]["translate"] and translator is not None and dataset.lang != "eng":
        return translator.translate_eval(dataset)
    return dataset

def _eval_dataset(config, datasets, lang):
    """
    The dataset scored for a language: the configured eval split, or dev when that split has no gold scores.
    """
    available = datasets[lang]
    split = config["eval"]["split"]
    if split not in available or (not available[split].scored and "dev" in available):
        split = "dev"
    if split not in available:
        raise ConfigError(f"No {split} data configured for {lang}.")
    return available[split]

def _predict(checkpoint, dataset):
    if checkpoint.model_kind == BIENCODER:
        return transem.predict(checkpoint, dataset)
    return finesem.predict(checkpoint, dataset)

def _score(model, dataset, predictions):
    """
    EvalResult for scored data, None otherwise. An undefined correlation is reported as NaN.
    """
    if not dataset.scored or len(dataset) < 2:
        return None
    try:
        value = metrics.spearman(predictions, dataset.gold())
    except UndefinedSpearman as e:
        log_functions.print_log(f"Warning: {model} on {dataset.lang} {dataset.split}: {e}")
        value = math.nan
    return metrics.EvalResult(model=model, lang=dataset.lang, split=dataset.split, spearman=value, n=len(dataset))

def _save_result(config, original, model, predictions, result):
    stem = f"{model}-{original.lang}-{original.split}"
    _write_text(os.path.join(config["out"], "predictions", f"{stem}.csv"),
                write_predictions(original, predictions).decode("utf-8"))
    if result is not None:
        _write_json(os.path.join(config["out"], "results", f"{stem}.json"), result.to_dict())

def _print_data(text):
    # Data goes to stdout, everything else to stderr
    sys.stdout.write(text)
    sys.stdout.flush()


# ----------
# Commands
# ----------
def cmd_augment(config):
    """
    Write the augmented training set of every language and a summary of the counts.
    """
    if not config["backends"]:
        raise ConfigError("augment needs at least one backend.")
    log_functions.insert_log(config["out"], config["name"], config["method"], "augment", config)

    datasets = _load_datasets(config)
    _require_splits(datasets, "train")
    translator = Translator.from_config(config)

    summary = []
    for lang, splits in datasets.items():
        augmented = translator.augment(splits["train"])
        used = [] if augmented.passthrough else [backend.name for backend in translator.backends if backend.supports(lang)]
        _write_text(os.path.join(config["out"], "augmented", f"{lang}.train.tsv"), write_columnar(augmented).decode("utf-8"))
        summary.append({"lang": lang, "in_count": len(splits["train"]), "out_count": len(augmented),
                        "backends": used, "passthrough": augmented.passthrough})

    translator.save_cache()
    _write_json(os.path.join(config["out"], "augment_summary.json"), summary)
    return summary

def cmd_train(config):
    """
    TranSem: best checkpoint and the per-epoch history.
    FineSem: per-epoch checkpoints, the selection record and the registry of selected models.
    """
    log_functions.insert_log(config["out"], config["name"], config["method"], "train", config)
    datasets = _load_datasets(config)
    _require_splits(datasets, "train", "dev")
    tokenizer = _tokenizer(config)
    translator = _translator(config)

    if config["model"] == "transem":
        train_ds, dev_ds = _training_data(config, datasets, translator)
        best, history = transem.train(train_ds, dev_ds, transem.TrainConfig.from_config(config), tokenizer, config_echo=config)
        best.save(os.path.join(config["out"], "model"))
        _write_text(os.path.join(config["out"], "history.jsonl"),
                    "".join(json.dumps(record, sort_keys=True) + "\n" for record in history))
        if translator is not None:
            translator.save_cache()
        log_functions.print_log(f"Best epoch {best.epoch}, dev Spearman {best.manifest['dev_spearman']}")
        return {"best_epoch": best.epoch, "dev_spearman": best.manifest["dev_spearman"], "epochs": len(history)}

    regime = finesem.Regime(config["regime"])
    ccfg = finesem.CrossConfig.from_config(config)
    fixed_epoch = config["finesem"]["fixed_epoch"]
    runs = finesem.train_regime(datasets, regime, translator, ccfg, tokenizer, config_echo=config)

    registry = finesem.ModelRegistry()
    selection = []
    for name, checkpoints in runs.items():
        for checkpoint in checkpoints:
            checkpoint.save(os.path.join(config["out"], "checkpoints", name, f"epoch-{checkpoint.epoch:02d}"))

        # Individual models are selected on their own language, shared models on every language
        langs = [name] if regime is finesem.Regime.INDIVIDUAL else list(datasets)
        for lang in langs:
            dev = datasets[lang]["dev"]
            if regime is finesem.Regime.TRANSLATED and lang != "eng":
                dev = translator.translate_eval(dev)
            best, dev_score = finesem.select_checkpoint(checkpoints, dev, fixed_epoch=fixed_epoch)
            selection.append({"model": name, "lang": lang, "chosen_epoch": best.epoch,
                              "dev_spearman": dev_score if math.isfinite(dev_score) else None})
            log_functions.print_log(f"Model {name}, {lang} dev: epoch {best.epoch} selected (Spearman {dev_score:.4f})")

        if regime is finesem.Regime.INDIVIDUAL:
            model_dev = datasets[name]["dev"]
        elif regime is finesem.Regime.UNIFIED:
            model_dev = merge_datasets(splits["dev"] for splits in datasets.values())
        else:
            model_dev = translator.eval_set(splits["dev"] for splits in datasets.values())
        best, _ = finesem.select_checkpoint(checkpoints, model_dev, fixed_epoch=fixed_epoch)
        registry.register(name, best)

    registry.save(os.path.join(config["out"], "registry"))
    _write_json(os.path.join(config["out"], "selection.json"), selection)
    if translator is not None:
        translator.save_cache()
    return {"models": registry.names(), "selection": selection}

def cmd_eval(config, checkpoint_dir, lang, split, model_name=None):
    """
    Predictions for one configured dataset, plus its Spearman row when the data is scored.
    """
    log_functions.insert_log(config["out"], config["name"], config["method"], "eval", config)
    checkpoint = Checkpoint.load(checkpoint_dir)
    check_compatible(checkpoint, config["tokenizer"])
    model = model_name or os.path.basename(os.path.normpath(checkpoint_dir))

    datasets = _load_datasets(config, langs=[lang])
    if lang not in datasets or split not in datasets[lang]:
        raise ConfigError(f"data.paths.{lang}.{split} is not configured.")
    translator = _translator(config)
    original = datasets[lang][split]

    predictions = _predict(checkpoint, _model_view(config, original, translator))
    result = _score(model, original, predictions)
    _save_result(config, original, model, predictions, result)
    if translator is not None:
        translator.save_cache()

    if result is None:
        log_functions.print_log(f"{lang} {split} has no gold scores, predictions written only.")
        return None
    baseline = metrics.load_baselines(config["eval"]["baseline_track"])
    _print_data(metrics.report_table([result], baseline))
    return result

def cmd_sweep(config, axis):
    """
    One TranSem training per axis value (same seed), scored per language.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"Sweep axis must be one of {', '.join(SWEEP_AXES)}, got {axis!r}.")
    log_functions.insert_log(config["out"], config["name"], config["method"], f"sweep-{axis}", config)

    datasets = _load_datasets(config)
    _require_splits(datasets, "train", "dev")
    tokenizer = _tokenizer(config)
    translator = _translator(config)
    train_ds, dev_ds = _training_data(config, datasets, translator)
    base = transem.TrainConfig.from_config(config)

    if axis == "batch_size":
        variants = [(str(value), replace(base, batch_size=int(value), grad_accum_steps=1)) for value in config["sweep"]["batch_sizes"]]
    else:
        variants = [(str(value), replace(base, pooling=value)) for value in config["sweep"]["poolings"]]

    results = []
    for label, cfg in variants:
        log_functions.print_log(f"Sweep {axis} = {label}")
        best, _ = transem.train(train_ds, dev_ds, cfg, tokenizer, config_echo=config)
        for lang in datasets:
            original = _eval_dataset(config, datasets, lang)
            result = _score(label, original, transem.predict(best, _model_view(config, original, translator)))
            if result is not None:
                results.append(result)

    if translator is not None:
        translator.save_cache()
    baseline = metrics.load_baselines(config["eval"]["baseline_track"])
    table = metrics.report_table(results, baseline, include_baseline=False)
    _write_text(os.path.join(config["out"], f"sweep-{axis}.tsv"), table)
    _print_data(table)
    return table

def cmd_crosslingual(config, registry_dir, langs):
    """
    Score each language with the model the cross-lingual routing picks for it.
    """
    log_functions.insert_log(config["out"], config["name"], config["method"], "crosslingual", config)
    registry = finesem.ModelRegistry.load(registry_dir)

    routes = {lang: finesem.crosslingual_route(lang, registry) for lang in langs}
    datasets = _load_datasets(config, langs=langs)

    results = []
    for lang in langs:
        if lang not in datasets:
            raise ConfigError(f"No data configured for {lang}.")
        checkpoint = registry[routes[lang]]
        check_compatible(checkpoint, config["tokenizer"])
        original = _eval_dataset(config, datasets, lang)
        predictions = _predict(checkpoint, original)
        result = _score(routes[lang], original, predictions)
        _save_result(config, original, routes[lang], predictions, result)
        if result is not None:
            results.append(result)
        log_functions.print_log(f"{lang} scored with the {routes[lang]} model.")

    table = metrics.report_table(results, metrics.load_baselines("C"))
    _write_text(os.path.join(config["out"], "crosslingual.tsv"), table)
    _print_data(table)
    return table

def cmd_gradcheck(config, gradient_hook=None):
    """
    Finite-difference check of every gradient. Returns True when every group passes.
    """
    log_functions.insert_log(config["out"], config["name"], config["method"], "gradcheck", config)
    rows, passed = run_gradcheck(config["seed"], gradient_hook=gradient_hook)

    for row in rows:
        log_functions.print_log(f"{row['suite']:<10} {row['pooling']:<5} {row['group']:<5} {row['max_rel_error']:.3e} {'ok' if row['passed'] else 'FAIL'}")

    lines = ["group\tmax_rel_error\tstatus"]
    for group, error in group_summary(rows).items():
        status = "pass" if all(row["passed"] for row in rows if row["group"] == group) else "fail"
        lines.append(f"{group}\t{error:.3e}\t{status}")
    _print_data("\n".join(lines) + "\n")
    return passed

def cmd_report(config, as_csv=False):
    """
    Collect the stored evaluation results and print them as a table (or CSV).
    """
    results_dir = os.path.join(config["out"], "results")
    if not os.path.isdir(results_dir):
        raise ConfigError(f"{results_dir} directory does not exist.")

    files = sorted((f for f in os.listdir(results_dir) if f.endswith(".json")), key=log_functions.natural_sort_key)
    results = []
    for name in files:
        with open(os.path.join(results_dir, name), encoding="utf-8") as f:
            results.append(metrics.EvalResult.from_dict(json.load(f)))
    log_functions.print_log(f"There is/are {len(results)} result(s) to report.")

    baseline = metrics.load_baselines(config["eval"]["baseline_track"])
    if as_csv:
        text = metrics.report_csv(results, baseline)
        _write_text(os.path.join(config["out"], "report.csv"), text)
    else:
        text = metrics.report_table(results, baseline)
        _write_text(os.path.join(config["out"], "report.tsv"), text)
    _print_data(text)
    return text
