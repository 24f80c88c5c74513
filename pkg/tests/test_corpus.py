import pytest
from source.corpus import merge_datasets, parse_dataset, read_dataset, write_columnar, write_predictions
from source.errors import (DuplicateId, EmptyInput, EncodingError, LengthMismatch, MalformedRow, MixedSplits,
                           NonFiniteScore, ScoreOutOfRange)
from conftest import make_dataset


def columnar(*rows, header="id\tsentence1\tsentence2\tscore"):
    return ("\n".join([header, *rows]) + "\n").encode("utf-8")


def test_parse_columnar_row():
    dataset = parse_dataset(columnar("p1\ta cat sat\ta feline sat\t0.9"), "columnar", "eng", "train")
    assert dataset.lang == "eng" and dataset.split == "train"
    pair = dataset.pairs[0]
    assert (pair.id, pair.sentence1, pair.sentence2, pair.score) == ("p1", "a cat sat", "a feline sat", 0.9)


def test_parse_keeps_row_order_and_crlf():
    data = b"id\tsentence1\tsentence2\tscore\r\nb\tx\ty\t0.1\r\na\tx\tz\t1\r\n"
    dataset = parse_dataset(data, "columnar", "eng", "dev")
    assert [pair.id for pair in dataset.pairs] == ["b", "a"]
    assert dataset.gold() == [0.1, 1.0]


def test_score_out_of_range():
    with pytest.raises(ScoreOutOfRange):
        parse_dataset(columnar("p1\ta\tb\t1.5"), "columnar", "eng", "train")


def test_test_split_without_score_column():
    data = columnar("p1\ta\tb", "p2\tc\td", header="id\tsentence1\tsentence2")
    dataset = parse_dataset(data, "columnar", "eng", "test")
    assert [pair.score for pair in dataset.pairs] == [None, None]
    assert not dataset.scored


def test_train_split_needs_scores():
    with pytest.raises(MalformedRow):
        parse_dataset(columnar("p1\ta\tb\t"), "columnar", "eng", "train")


def test_malformed_rows():
    with pytest.raises(MalformedRow):
        parse_dataset(columnar("p1\ta\tb"), "columnar", "eng", "train")
    with pytest.raises(MalformedRow):
        parse_dataset(columnar("p1\t \tb\t0.5"), "columnar", "eng", "train")
    with pytest.raises(MalformedRow):
        parse_dataset(columnar("p1\ta\tb\thigh"), "columnar", "eng", "train")


def test_duplicate_id():
    with pytest.raises(DuplicateId):
        parse_dataset(columnar("p1\ta\tb\t0.5", "p1\tc\td\t0.5"), "columnar", "eng", "train")


def test_invalid_utf8():
    with pytest.raises(EncodingError):
        parse_dataset(b"id\tsentence1\tsentence2\tscore\np1\t\xff\tb\t0.5\n", "columnar", "eng", "train")


def test_byte_order_mark_is_ignored():
    dataset = parse_dataset("\ufeff".encode("utf-8") + columnar("p1\ta\tb\t0.5"), "columnar", "eng", "train")
    assert dataset.pairs[0].id == "p1"


def test_semrel_compat_format():
    data = 'PairID,Text,Score\neng_1,"It rains.\nWater falls.",0.75\n'.encode("utf-8")
    dataset = parse_dataset(data, "semrel-compat", "eng", "dev")
    pair = dataset.pairs[0]
    assert (pair.id, pair.sentence1, pair.sentence2, pair.score) == ("eng_1", "It rains.", "Water falls.", 0.75)


def test_invalid_language_code():
    with pytest.raises(ValueError):
        parse_dataset(columnar("p1\ta\tb\t0.5"), "columnar", "English", "train")


def test_merge_languages():
    eng = make_dataset("eng", "train", [("1", "a", "b", 0.1), ("2", "a", "b", 0.2), ("3", "a", "b", 0.3)])
    esp = make_dataset("esp", "train", [("1", "c", "d", 0.4), ("2", "c", "d", 0.5)])
    merged = merge_datasets([eng, esp])
    assert merged.lang == "mul"
    assert len(merged) == 5
    assert [pair.id for pair in merged.pairs] == ["eng:1", "eng:2", "eng:3", "esp:1", "esp:2"]
    assert [pair.lang for pair in merged.pairs] == ["eng"] * 3 + ["esp"] * 2


def test_merge_single_language_is_unchanged():
    eng = make_dataset("eng", "train", [("1", "a", "b", 0.1)])
    assert merge_datasets([eng]) == eng


def test_merge_errors():
    eng_train = make_dataset("eng", "train", [("1", "a", "b", 0.1)])
    eng_dev = make_dataset("eng", "dev", [("1", "a", "b", 0.1)])
    with pytest.raises(MixedSplits):
        merge_datasets([eng_train, eng_dev])
    with pytest.raises(EmptyInput):
        merge_datasets([])
    with pytest.raises(DuplicateId):
        merge_datasets([eng_train, eng_train])


def test_merge_languages_rejects_shared_ids():
    eng = make_dataset("eng", "train", [("p1", "a", "b", 0.1)])
    esp = make_dataset("esp", "train", [("q1", "c", "d", 0.4)])
    with pytest.raises(DuplicateId):
        merge_datasets([eng, eng, esp])


def test_write_predictions():
    dataset = make_dataset("eng", "test", [("p1", "a", "b", None)])
    assert write_predictions(dataset, [0.5]) == b"PairID,Pred_Score\np1,0.500000\n"


def test_write_predictions_empty():
    assert write_predictions(make_dataset("eng", "test", []), []) == b"PairID,Pred_Score\n"


def test_write_predictions_errors():
    dataset = make_dataset("eng", "test", [("p1", "a", "b", None)])
    with pytest.raises(NonFiniteScore):
        write_predictions(dataset, [float("nan")])
    with pytest.raises(LengthMismatch):
        write_predictions(dataset, [0.1, 0.2])


def test_columnar_round_trip():
    dataset = make_dataset("eng", "train", [("p1", "a cat", "a dog", 0.123456789), ("p2", "x", "y", 1.0)])
    parsed = parse_dataset(write_columnar(dataset), "columnar", "eng", "train")
    assert [pair.id for pair in parsed.pairs] == ["p1", "p2"]
    assert parsed.gold() == [pytest.approx(0.123457, abs=1e-9), 1.0]


def test_read_dataset(tmp_path):
    path = tmp_path / "eng_dev.tsv"
    path.write_bytes(columnar("p1\ta\tb\t0.5"))
    assert len(read_dataset(str(path), "columnar", "eng", "dev")) == 1
