import numpy as np
import pytest
from source.checkpoint import CROSSENCODER, Checkpoint
from source.encoder import CLS_ID, SEP_ID, TokenizerConfig, tokenize
from source.errors import InvalidBackend, MissingModel
from source.finesem import (CrossConfig, ModelRegistry, Regime, crosslingual_route, cross_forward, init_cross_params,
                            joint_ids, predict, select_checkpoint, train_model, train_regime)
from source.translate import TranslationBackend, Translator
from conftest import make_dataset, realizable_pairs

TRACK_C = ["afr", "arq", "amh", "eng", "hau", "hin", "ind", "kin", "arb", "ary", "pan", "esp"]


def tiny_config(**kwargs):
    return CrossConfig(**{"dim": 4, "batch_size": 4, "learning_rate": 1e-2, **kwargs})


def per_language(tokenizer, langs=("eng", "esp"), n_train=8, n_dev=4):
    datasets = {}
    for seed, lang in enumerate(langs):
        train_rows = realizable_pairs(10 + seed, n_train, tokenizer)
        dev_rows = realizable_pairs(20 + seed, n_dev, tokenizer, prefix="d")
        datasets[lang] = {"train": make_dataset(lang, "train", train_rows), "dev": make_dataset(lang, "dev", dev_rows)}
    return datasets


def fake_checkpoints(n):
    params = init_cross_params(np.random.default_rng(0), 16, 4)
    return [Checkpoint.snapshot(params, CROSSENCODER, TokenizerConfig(vocab_size=16), "Mean", epoch) for epoch in range(1, n + 1)]


def test_joint_ids(tiny_tokenizer):
    ids = joint_ids(tiny_tokenizer, "river bank", "stone")
    assert ids == [CLS_ID] + tokenize(tiny_tokenizer, "river bank")[1:] + [SEP_ID] + tokenize(tiny_tokenizer, "stone")[1:]


def test_constant_head(tiny_tokenizer, rng):
    params = init_cross_params(rng, 16, 4)
    params.w = np.zeros(4)
    params.c = np.array([0.5])
    pairs = make_dataset("eng", "dev", [("a", "river", "bank", 0.1), ("b", "tree song", "bird", 0.9)]).pairs
    assert [cross_forward(params, tiny_tokenizer, pair, "Mean") for pair in pairs] == [0.5, 0.5]


def test_swapped_pair_has_different_ids_but_same_pooled_score(tiny_tokenizer, rng):
    # Pooling ignores token positions, so the joint sequence order does not reach the head
    params = init_cross_params(rng, 16, 4, scale=0.5)
    pair, = make_dataset("eng", "dev", [("a", "river bank", "stone", 0.5)]).pairs
    swapped, = make_dataset("eng", "dev", [("a", "stone", "river bank", 0.5)]).pairs
    assert joint_ids(tiny_tokenizer, pair.sentence1, pair.sentence2) != joint_ids(tiny_tokenizer, swapped.sentence1, swapped.sentence2)
    for pooling in ("CLS", "Mean", "Max"):
        assert cross_forward(params, tiny_tokenizer, pair, pooling) == pytest.approx(cross_forward(params, tiny_tokenizer, swapped, pooling))


def test_epoch_defaults():
    assert CrossConfig().epochs_for(Regime.INDIVIDUAL) == 10
    assert CrossConfig().epochs_for("unified") == 10
    assert CrossConfig().epochs_for(Regime.TRANSLATED) == 2
    assert CrossConfig(epochs=3).epochs_for(Regime.TRANSLATED) == 3


def test_individual_regime_checkpoint_counts(tiny_tokenizer):
    runs = train_regime(per_language(tiny_tokenizer), Regime.INDIVIDUAL, None, tiny_config(epochs=10), tiny_tokenizer)
    assert sorted(runs) == ["eng", "esp"]
    for checkpoints in runs.values():
        assert [checkpoint.epoch for checkpoint in checkpoints] == list(range(1, 11))
        assert all(checkpoint.model_kind == CROSSENCODER for checkpoint in checkpoints)


def test_unified_regime(tiny_tokenizer):
    runs = train_regime(per_language(tiny_tokenizer), "unified", None, tiny_config(epochs=2), tiny_tokenizer)
    assert list(runs) == ["unified"]
    assert len(runs["unified"]) == 2


def test_translated_regime_default_epochs(tiny_tokenizer):
    translator = Translator([TranslationBackend(name="ident", kind="identity", is_primary=True),
                             TranslationBackend(name="copy", kind="identity")])
    runs = train_regime(per_language(tiny_tokenizer), Regime.TRANSLATED, translator, tiny_config(), tiny_tokenizer)
    assert list(runs) == ["translated"]
    assert len(runs["translated"]) == 2


def test_translated_regime_needs_backends(tiny_tokenizer):
    with pytest.raises(InvalidBackend):
        train_regime(per_language(tiny_tokenizer), Regime.TRANSLATED, None, tiny_config(), tiny_tokenizer)


def test_loss_decreases(tiny_tokenizer):
    train_ds = make_dataset("eng", "train", realizable_pairs(5, 32, tiny_tokenizer))
    checkpoints = train_model(train_ds, tiny_config(), tiny_tokenizer, 10, "eng")
    losses = [checkpoint.manifest["train_loss"] for checkpoint in checkpoints]
    assert losses[-1] < losses[0]


def test_select_checkpoint_argmax():
    scores = {1: 0.1, 2: 0.3, 3: 0.2}
    best, score = select_checkpoint(fake_checkpoints(3), None, dev_scorer=lambda epoch, checkpoint: scores[epoch])
    assert best.epoch == 2
    assert score == 0.3
    assert best.manifest["dev_spearman"] == 0.3


def test_select_checkpoint_tie_keeps_earliest():
    best, _ = select_checkpoint(fake_checkpoints(2), None, dev_scorer=lambda epoch, checkpoint: 0.3)
    assert best.epoch == 1


def test_select_single_checkpoint():
    best, _ = select_checkpoint(fake_checkpoints(1), None, dev_scorer=lambda epoch, checkpoint: -0.2)
    assert best.epoch == 1


def test_select_fixed_epoch():
    scores = {1: 0.9, 2: 0.1, 3: 0.5}
    best, score = select_checkpoint(fake_checkpoints(3), None, dev_scorer=lambda epoch, checkpoint: scores[epoch],
                                    fixed_epoch=3)
    assert (best.epoch, score) == (3, 0.5)


def test_select_on_real_dev(tiny_tokenizer):
    train_ds = make_dataset("eng", "train", realizable_pairs(5, 16, tiny_tokenizer))
    dev_ds = make_dataset("eng", "dev", realizable_pairs(6, 8, tiny_tokenizer, prefix="d"))
    checkpoints = train_model(train_ds, tiny_config(), tiny_tokenizer, 3, "eng")
    best, score = select_checkpoint(checkpoints, dev_ds)
    assert best.manifest["dev_spearman"] == score
    assert predict(best, dev_ds).shape == (8,)


def test_crosslingual_routing():
    registry = ModelRegistry({"eng": "english model", "esp": "spanish model"})
    for lang in TRACK_C:
        assert crosslingual_route(lang, registry) == ("esp" if lang == "eng" else "eng")


def test_crosslingual_routing_missing_model():
    registry = ModelRegistry({"eng": "english model"})
    assert crosslingual_route("afr", registry) == "eng"
    with pytest.raises(MissingModel):
        crosslingual_route("eng", registry)


def test_registry_round_trip(tmp_path):
    checkpoint = fake_checkpoints(1)[0]
    registry = ModelRegistry()
    registry.register("eng", checkpoint)
    registry.save(str(tmp_path / "registry"))

    loaded = ModelRegistry.load(str(tmp_path / "registry"))
    assert loaded.names() == ["eng"]
    np.testing.assert_array_equal(loaded["eng"].params.w, checkpoint.params.w)
    np.testing.assert_array_equal(loaded["eng"].params.c, checkpoint.params.c)
    with pytest.raises(MissingModel):
        loaded["esp"]
