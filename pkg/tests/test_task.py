import numpy as np
import pytest

from oracles import brute_record
from trapdoor_bbs.bbs import TrapdoorKey, sample_record
from trapdoor_bbs.bits import BitString
from trapdoor_bbs.errors import FormatError, ParameterError, VersionError
from trapdoor_bbs.numtheory import miller_rabin
from trapdoor_bbs.task import (Dataset, TaskParams, augment_dummy, format_dataset, keygen,
                               make_dataset, parse_dataset, read_dataset, read_key,
                               read_public, sample_d0, sample_d1, write_dataset, write_key,
                               write_public)


def toy(record_len=7, seed_len=4, **kw):
    return TaskParams(6, seed_len, record_len, **kw)


def test_params_validation():
    with pytest.raises(ParameterError):
        TaskParams(5, 4, 7)
    with pytest.raises(ParameterError):
        TaskParams(6, 4, 4)
    TaskParams(6, 4, 4, include_seed_prefix=False)
    d = TaskParams.default(128)
    assert (d.seed_len, d.record_len) == (192, 768)


def test_keygen_toy_modulus():
    for s in range(10):
        key, N = keygen(toy(), np.random.default_rng(s))
        assert {key.p, key.q} == {7, 11} and N == 77


def test_keygen_128_bits():
    rng = np.random.default_rng(4)
    key, N = keygen(TaskParams.default(128), rng)
    assert key.p != key.q
    assert key.p.bit_length() == key.q.bit_length() == 64
    assert N.bit_length() in (127, 128)
    assert key.p % 4 == key.q % 4 == 3
    assert miller_rabin(key.p, 40, rng) and miller_rabin(key.q, 40, rng)


def test_keygen_is_deterministic():
    a = keygen(TaskParams.default(64), np.random.default_rng(9))
    b = keygen(TaskParams.default(64), np.random.default_rng(9))
    assert a == b


def test_sample_d0_basics():
    assert len(sample_d0(toy(record_len=8, seed_len=0, include_seed_prefix=False),
                         np.random.default_rng(0))) == 8
    p = TaskParams(6, 2, 4)
    assert sample_d0(p, np.random.default_rng(42)) == sample_d0(p, np.random.default_rng(42))


def test_sample_d0_marginals():
    p = TaskParams(6, 2, 8)
    rng = np.random.default_rng(123)
    X = np.array([sample_d0(p, rng).to_array() for _ in range(100_000)])
    sigma = 0.5 / np.sqrt(len(X))
    assert np.all(np.abs(X.mean(axis=0) - 0.5) <= 5 * sigma)


def test_sample_d1_forced_zero_seed(key77, zero_rng):
    assert str(sample_d1(key77, toy(), zero_rng)) == "0000110"
    assert str(sample_d1(key77, toy(record_len=3, include_seed_prefix=False), zero_rng)) == "110"


def test_sample_d1_is_deterministic(key128, params128):
    a = sample_d1(key128, params128, np.random.default_rng(5))
    b = sample_d1(key128, params128, np.random.default_rng(5))
    assert a == b and len(a) == 768


def test_augment_dummy():
    assert str(augment_dummy(BitString.from_str("0000110"), 1)) == "00001101"
    assert str(augment_dummy(BitString.from_str(""), 0)) == "0"


def test_make_dataset_counts_and_balance(key77):
    ds = make_dataset(key77, toy(), 10, rng_seed=3)
    assert len(ds) == 20
    assert sorted(ds.labels().tolist()) == [0] * 10 + [1] * 10
    with pytest.raises(ParameterError):
        make_dataset(key77, toy(), 0, rng_seed=3)


def test_make_dataset_dummy_reveals_label(key77):
    ds = make_dataset(key77, toy(dummy_coordinate=True), 25, rng_seed=1)
    assert all(len(s.record) == 8 and s.record[-1] == s.label for s in ds.samples)


def test_make_dataset_is_deterministic(key64):
    p = TaskParams.default(64, record_len=300)
    assert format_dataset(make_dataset(key64, p, 20, 7)) == format_dataset(make_dataset(key64, p, 20, 7))
    assert format_dataset(make_dataset(key64, p, 20, 7)) != format_dataset(make_dataset(key64, p, 20, 8))


def test_labels_are_interleaved(key64):
    ds = make_dataset(key64, TaskParams.default(64, record_len=200), 50, 2)
    labels = ds.labels().tolist()
    assert labels != sorted(labels)


def test_label_one_records_are_support_points(key77):
    p = TaskParams(6, 5, 20)
    ds = make_dataset(key77, p, 30, 11)
    for s in ds.samples:
        if s.label == 1:
            seed = s.record.head(5)
            assert s.record == sample_record(seed, key77, 20, True)
            assert list(s.record) == brute_record(seed.value, 5, 77, 20)


def test_key_round_trip(tmp_path, key77):
    path = tmp_path / "key.v1"
    write_key(path, key77, toy())
    assert read_key(path) == (key77, toy())
    text = path.read_text()
    assert text.startswith("version=1\np=7\nq=b\nN=4d\n")


def test_public_round_trip(tmp_path, key128, params128):
    path = tmp_path / "key.pub"
    write_public(path, key128.N, params128)
    assert read_public(path) == (key128.N, params128)
    assert "p=" not in path.read_text()


def test_dataset_round_trip(tmp_path, key77):
    ds = make_dataset(key77, toy(dummy_coordinate=True), 10, 5)
    path = tmp_path / "d.v1"
    write_dataset(path, ds)
    assert read_dataset(path) == ds
    lines = path.read_text().split("\n")
    assert lines[0] == "v1 N=4d n=4 len=7 prefix=1 dummy=1 seed=5"
    assert len(lines) == 22 and lines[-1] == ""


def test_truncated_dataset_reports_line(tmp_path, key77):
    text = format_dataset(make_dataset(key77, toy(), 10, 5))
    with pytest.raises(FormatError, match="line 21"):
        parse_dataset(text[:-4])
    with pytest.raises(FormatError, match="line 21"):
        parse_dataset(text[:-1])


def test_dataset_parse_errors():
    good = "v1 N=4d n=4 len=7 prefix=1 dummy=0 seed=5\n1 0000110\n"
    assert len(parse_dataset(good)) == 1
    with pytest.raises(VersionError):
        parse_dataset(good.replace("v1", "v2", 1))
    with pytest.raises(FormatError, match="line 1"):
        parse_dataset(good.replace("len=7", "len=x"))
    with pytest.raises(FormatError, match="line 2"):
        parse_dataset(good.replace("1 0000110", "2 0000110"))
    with pytest.raises(FormatError, match="line 2"):
        parse_dataset(good.replace("0000110", "000011"))


def test_key_parse_errors(tmp_path, key77):
    path = tmp_path / "k"
    write_key(path, key77, toy())
    text = path.read_text()
    for bad, exc, match in [
        (text.replace("version=1", "version=2"), VersionError, "line 1"),
        (text.replace("p=7", "p=zz"), FormatError, "line 2"),
        (text.replace("N=4d", "N=4e"), FormatError, "invalid key"),
        (text.replace("seed_len=4\n", ""), FormatError, "seed_len"),
        (text.replace("dummy_coordinate=0", "dummy_coordinate=2"), FormatError, "line 9"),
    ]:
        path.write_text(bad)
        with pytest.raises(exc, match=match):
            read_key(path)


def test_dataset_matrix_matches_records(key77):
    ds = make_dataset(key77, toy(dummy_coordinate=True), 5, 0)
    X = ds.matrix()
    assert X.shape == (10, 8)
    for row, s in zip(X, ds.samples):
        assert "".join(map(str, row)) == str(s.record)


def test_dataset_params_from_header(key77):
    ds = make_dataset(key77, toy(), 2, 0)
    assert isinstance(ds, Dataset)
    p = ds.params()
    assert (p.seed_len, p.record_len, p.include_seed_prefix) == (4, 7, True)
