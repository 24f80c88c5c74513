import numpy as np
import pytest
from source.encoder import (CLS_ID, UNK_ID, EncoderParams, TokenizerConfig, backward_ids, encode_backward, encode_ids,
                            encode_sentence, init_params, pool, scatter_rows, token_hash, tokenize)
from source.errors import EmptyPooling


def test_tokenize_hashes_into_range():
    cfg = TokenizerConfig(vocab_size=16)
    ids = tokenize(cfg, "The cat")
    assert ids[0] == CLS_ID
    assert len(ids) == 3
    assert all(3 <= token < 16 for token in ids[1:])
    assert ids[1] == 3 + token_hash("the", 0) % 13


def test_tokenize_empty_text():
    cfg = TokenizerConfig(vocab_size=16)
    assert tokenize(cfg, "") == [CLS_ID, UNK_ID]
    assert tokenize(cfg, " ... !! ") == [CLS_ID, UNK_ID]


def test_tokenize_is_deterministic_and_normalizes():
    cfg = TokenizerConfig(vocab_size=32768, hash_seed=5)
    assert tokenize(cfg, "Hello, world!") == tokenize(cfg, "hello world")
    assert tokenize(cfg, "Hello, world!") == tokenize(cfg, "Hello, world!")
    cased = TokenizerConfig(vocab_size=32768, hash_seed=5, lowercase=False)
    assert tokenize(cased, "Hello") != tokenize(cased, "hello")


def test_hash_seed_changes_ids():
    assert token_hash("river", 0) != token_hash("river", 1)


def test_pool_modes():
    rows = np.array([[1.0, 0.0], [0.0, 2.0]])
    np.testing.assert_array_equal(pool(rows, "Max"), [1.0, 2.0])
    np.testing.assert_array_equal(pool(rows, "Mean"), [0.5, 1.0])
    np.testing.assert_array_equal(pool(rows, "CLS"), [1.0, 0.0])
    same = np.tile([0.3, -0.2], (4, 1))
    np.testing.assert_allclose(pool(same, "Mean"), [0.3, -0.2])


def test_pool_empty():
    with pytest.raises(EmptyPooling):
        pool(np.zeros((0, 3)), "Mean")


def test_pooling_permutation_invariance(rng):
    rows = rng.normal(size=(5, 3))
    permuted = np.vstack([rows[:1], rows[1:][::-1]])
    for mode in ("Mean", "Max"):
        np.testing.assert_allclose(pool(rows, mode), pool(permuted, mode))
    changed = rows.copy()
    changed[1:] += 10
    np.testing.assert_array_equal(pool(changed, "CLS"), rows[0])


def test_encode_identity_projection(rng):
    cfg = TokenizerConfig(vocab_size=16)
    params = init_params(rng, 16, 4)
    params.W = np.eye(4)
    token = tokenize(cfg, "river")[1]
    np.testing.assert_allclose(encode_sentence(params, cfg, "river", "Mean"), (params.E[0] + params.E[token]) / 2)


def test_encode_bias_only(rng):
    cfg = TokenizerConfig(vocab_size=16)
    params = init_params(rng, 16, 4)
    params.W = np.zeros((4, 4))
    params.b = np.array([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_array_equal(encode_sentence(params, cfg, "any text at all", "Max"), params.b)


def test_encode_matches_formula(rng):
    params = init_params(rng, 8, 3, scale=1.0)
    params.b = rng.normal(size=3)
    ids = [0, 5]
    expected = params.W @ ((params.E[0] + params.E[5]) / 2) + params.b
    s, pooled = encode_ids(params, ids, "Mean")
    np.testing.assert_allclose(s, expected)
    np.testing.assert_allclose(pooled, (params.E[0] + params.E[5]) / 2)


def test_backward_zero_upstream(tiny_params, tiny_tokenizer):
    grads = encode_backward(tiny_params, tiny_tokenizer, "river bank", "Max", np.zeros(4))
    assert not np.any(grads["E"][1])
    assert not np.any(grads["W"])
    assert not np.any(grads["b"])


def test_backward_mean_by_hand(tiny_params, tiny_tokenizer):
    tiny_params.W = np.eye(4)
    upstream = np.array([1.0, -2.0, 0.5, 4.0])
    token = tokenize(tiny_tokenizer, "river")[1]
    dense = scatter_rows(np.zeros_like(tiny_params.E), encode_backward(tiny_params, tiny_tokenizer, "river", "Mean", upstream)["E"])
    np.testing.assert_allclose(dense[token], upstream / 2)
    np.testing.assert_allclose(dense[CLS_ID], upstream / 2)


def test_backward_cls_touches_only_row_zero(tiny_params, tiny_tokenizer):
    rows, _ = encode_backward(tiny_params, tiny_tokenizer, "river bank stone", "CLS", np.ones(4))["E"]
    assert list(rows) == [CLS_ID]


@pytest.mark.parametrize("mode", ["CLS", "Mean", "Max"])
def test_backward_matches_finite_differences(mode, tiny_params, tiny_tokenizer):
    upstream = np.array([0.3, -0.7, 1.1, 0.2])
    text = "river bank stone"
    grads = encode_backward(tiny_params, tiny_tokenizer, text, mode, upstream)
    dense = {"E": scatter_rows(np.zeros_like(tiny_params.E), grads["E"]), "W": grads["W"], "b": grads["b"]}

    h = 1e-5
    for name, array in tiny_params.groups().items():
        for index in np.ndindex(array.shape):
            original = array[index]
            array[index] = original + h
            plus = upstream @ encode_sentence(tiny_params, tiny_tokenizer, text, mode)
            array[index] = original - h
            minus = upstream @ encode_sentence(tiny_params, tiny_tokenizer, text, mode)
            array[index] = original
            assert (plus - minus) / (2 * h) == pytest.approx(dense[name][index], abs=1e-8)


def test_params_copy_is_independent(tiny_params):
    copied = tiny_params.copy()
    copied.E[0, 0] += 1
    assert copied.E[0, 0] != tiny_params.E[0, 0]
    assert isinstance(copied, EncoderParams)
    assert list(copied.groups()) == ["E", "W", "b"]


def test_max_pool_tie_goes_to_lowest_row():
    E = np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.9, 0.1], [0.2, 0.9], [0.9, 0.3]])
    params = EncoderParams(E=E, W=np.eye(2), b=np.zeros(2))
    # Rows 3 and 5 tie on dimension 0
    rows, values = backward_ids(params, [0, 3, 4, 5], "Max", np.array([1.0, 2.0]))["E"]
    assert list(rows) == [3, 4]
    np.testing.assert_array_equal(values, [[1.0, 0.0], [0.0, 2.0]])

    dense = scatter_rows(np.zeros_like(E), (rows, values))
    assert not dense[5].any()


@pytest.mark.parametrize("pooling", ["Mean", "Max"])
@pytest.mark.parametrize("c", [0.5, 3.0])
def test_encoding_is_positively_homogeneous_in_E(rng, pooling, c):
    cfg = TokenizerConfig(vocab_size=16)
    params = init_params(rng, 16, 4, scale=0.5)
    scaled = EncoderParams(E=c * params.E, W=params.W, b=params.b)
    text = "river bank money"
    np.testing.assert_allclose(encode_sentence(scaled, cfg, text, pooling),
                               c * encode_sentence(params, cfg, text, pooling), rtol=1e-12, atol=1e-15)
